"""Closed forms for n = 2 and n = 3 in terms of power or elementary invariants.

These are independent of the general routes and serve as fixed checks in
the tests and the self-test.
"""

from typing import Sequence

import torch

from .errors import ValidationError
from .states import StateMatrix, TangentMatrix


def _take(values: Sequence[float], count: int, what: str):
    values = [float(v) for v in values]
    if len(values) < count:
        raise ValidationError(f"need {count} {what}, got {len(values)}")
    return values[:count]


def _matrix(rows, scale: float) -> torch.Tensor:
    return scale * torch.tensor(rows, dtype=torch.float64)


def coeffs_n2(e) -> torch.Tensor:
    e1, e2 = _take(e, 2, "elementary invariants")
    return _matrix([[e1 * e1 + e2, -e1], [-e1, 1.0]], 1.0 / (2 * e1 * e2))


def split_n2_e(e) -> torch.Tensor:
    """2A − P⁻¹ from e_1, e_2."""
    e1, e2 = _take(e, 2, "elementary invariants")
    return _matrix([[-2 * e2, e1], [e1, -2.0]], 2.0 / (e1 * (e1 * e1 - 4 * e2)))


def split_n2_p(p) -> torch.Tensor:
    """2A − P⁻¹ from p_1, p_2."""
    p1, p2 = _take(p, 2, "power traces")
    return _matrix([[p2 - p1 * p1, p1], [p1, -2.0]], 2.0 / (p1 * (2 * p2 - p1 * p1)))


def parallel_n2_p(p, dp_prime, dp) -> float:
    """g restricted to the commuting part, from p_1..p_3 and the differentials dP_1, dP_2."""
    p1, p2, p3 = _take(p, 3, "power traces")
    a1, a2 = _take(dp_prime, 2, "differentials")
    b1, b2 = _take(dp, 2, "differentials")
    left = torch.tensor([a1, a2 / 2], dtype=torch.float64)
    right = torch.tensor([b1, b2 / 2], dtype=torch.float64)
    middle = torch.tensor([[p3, -p2], [-p2, p1]], dtype=torch.float64)
    return float(left @ middle @ right) / (4 * (p1 * p3 - p2 * p2))


def parallel_n2_e(e, de_prime, de) -> float:
    """Same quantity from e_1, e_2 and their differentials."""
    e1, e2 = _take(e, 2, "elementary invariants")
    left = torch.tensor(_take(de_prime, 2, "differentials"), dtype=torch.float64)
    right = torch.tensor(_take(de, 2, "differentials"), dtype=torch.float64)
    middle = torch.tensor([[e1 * e2, -2 * e2], [-2 * e2, e1]], dtype=torch.float64)
    return float(left @ middle @ right) / (4 * e2 * (e1 * e1 - 4 * e2))


def de_from_dp(p, dp):
    """(de_1, de_2) = (dp_1, p_1·dp_1 − dp_2/2)."""
    p1 = _take(p, 1, "power traces")[0]
    d1, d2 = _take(dp, 2, "differentials")
    return [d1, p1 * d1 - d2 / 2]


def det_gram_n3(p) -> float:
    p1, p2, p3, p4, p5 = _take(p, 5, "power traces")
    return -(p3**3) + 2 * p2 * p3 * p4 - p1 * p4 * p4 - p2 * p2 * p5 + p1 * p3 * p5


def gram_inverse_n3(p) -> torch.Tensor:
    p1, p2, p3, p4, p5 = _take(p, 5, "power traces")
    a12 = p3 * p4 - p2 * p5
    a13 = p2 * p4 - p3 * p3
    a23 = p2 * p3 - p1 * p4
    rows = [
        [p3 * p5 - p4 * p4, a12, a13],
        [a12, p1 * p5 - p3 * p3, a23],
        [a13, a23, p1 * p3 - p2 * p2],
    ]
    return _matrix(rows, 1.0 / det_gram_n3(p))


def coeffs_n3(e) -> torch.Tensor:
    e1, e2, e3 = _take(e, 3, "elementary invariants")
    a12 = -e1 * e1 * e2
    a13 = e1 * e2 - e3
    a23 = -e1 * e1
    rows = [
        [e1 * e2 * e2 + e1 * e1 * e3 - e2 * e3, a12, a13],
        [a12, e1**3 + e3, a23],
        [a13, a23, e1],
    ]
    return _matrix(rows, 1.0 / (2 * e3 * (e1 * e2 - e3)))


def _explicit(rho, yprime, y, polynomial, operand) -> float:
    x = torch.linalg.solve(polynomial, operand)
    return float((yprime * x.T).sum().real) / 2


def prop1_n2(rho, yprime, y, e) -> float:
    """½ Tr Y′(ϱ² + e_1ϱ + e_2)⁻¹(ϱY − Yϱ + e_1Y)."""
    rho = StateMatrix.validate(rho).entries
    yprime = TangentMatrix.validate(yprime, 2).entries
    y = TangentMatrix.validate(y, 2).entries
    if rho.shape[0] != 2:
        raise ValidationError(f"expected a 2x2 state, got {rho.shape[0]}x{rho.shape[0]}")
    e1, e2 = _take(e, 2, "elementary invariants")
    one = torch.eye(2, dtype=rho.dtype)
    polynomial = rho @ rho + e1 * rho + e2 * one
    operand = rho @ y - y @ rho + e1 * y
    return _explicit(rho, yprime, y, polynomial, operand)


def prop1_n3(rho, yprime, y, e) -> float:
    """½ Tr Y′(ϱ³ + e_1ϱ² + e_2ϱ + e_3)⁻¹(ϱ²Y − ϱYϱ + Yϱ² + e_1(ϱY − Yϱ) + e_2Y)."""
    rho = StateMatrix.validate(rho).entries
    yprime = TangentMatrix.validate(yprime, 3).entries
    y = TangentMatrix.validate(y, 3).entries
    if rho.shape[0] != 3:
        raise ValidationError(f"expected a 3x3 state, got {rho.shape[0]}x{rho.shape[0]}")
    e1, e2, e3 = _take(e, 3, "elementary invariants")
    one = torch.eye(3, dtype=rho.dtype)
    square = rho @ rho
    polynomial = square @ rho + e1 * square + e2 * rho + e3 * one
    operand = square @ y - rho @ y @ rho + y @ square + e1 * (rho @ y - y @ rho) + e2 * y
    return _explicit(rho, yprime, y, polynomial, operand)
