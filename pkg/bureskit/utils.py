import logging
import math
import os
from dataclasses import dataclass, fields, replace
from typing import List, NamedTuple

import torch

from .errors import ConditioningError, ValidationError

EPS = torch.finfo(torch.float64).eps

# Reciprocal condition estimates below WARN_FACTOR * EPS are reported.
WARN_FACTOR = 1e3

TOLERANCE_SCALE_ENV = "BURESKIT_TOLERANCE_SCALE"

_reported = set()


class colors:
    BLUE = "\033[94m"
    GREEN = "\033[92m"
    RED = "\033[91m"
    WHITE = "\033[0m"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every route.

    All fields are relative unless stated otherwise in the operation that
    consumes them. `from_env()` applies the multiplier found in
    BURESKIT_TOLERANCE_SCALE to every field.
    """

    herm: float = 1e-10
    newton: float = 1e-9
    generic: float = 1e-10
    coeff: float = 1e-9
    xroute: float = 1e-8
    solve: float = 1e-9
    proj: float = 1e-10
    metric: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        return replace(
            self, **{f.name: getattr(self, f.name) * factor for f in fields(self)}
        )

    @classmethod
    def from_env(cls) -> "Tolerances":
        raw = os.environ.get(TOLERANCE_SCALE_ENV, "1")
        try:
            factor = float(raw)
        except ValueError:
            raise ValidationError(
                f"{TOLERANCE_SCALE_ENV} must be a real number, got {raw!r}"
            )
        if not math.isfinite(factor) or factor <= 0:
            raise ValidationError(f"{TOLERANCE_SCALE_ENV} must be positive, got {raw}")
        return cls().scaled(factor)


def resolve(tol: Tolerances = None) -> Tolerances:
    return tol if tol is not None else Tolerances.from_env()


def inf_norm(matrix: torch.Tensor) -> float:
    """Induced infinity norm (largest absolute row sum)."""
    if matrix.numel() == 0:
        return 0.0
    return float(torch.linalg.matrix_norm(matrix, ord=float("inf")))


def max_abs(tensor: torch.Tensor) -> float:
    if tensor.numel() == 0:
        return 0.0
    return float(tensor.abs().max())


def dagger(matrix: torch.Tensor) -> torch.Tensor:
    return matrix.transpose(-2, -1).conj()


def hermitian_part(matrix: torch.Tensor) -> torch.Tensor:
    return (matrix + dagger(matrix)) / 2


def fmt(value: float) -> str:
    """17 significant digits, enough for an exact float64 round trip."""
    return format(float(value), ".17g")


class Solved(NamedTuple):
    solution: torch.Tensor
    condition: float
    warnings: List[str]


def factor_solve(matrix: torch.Tensor, rhs: torch.Tensor, what: str) -> Solved:
    """LU factorize `matrix`, estimate its 1-norm condition and solve for `rhs`.

    Raises ConditioningError when the factorization breaks down or the
    reciprocal condition estimate is at machine precision.
    """
    lu, pivots, info = torch.linalg.lu_factor_ex(matrix)
    if int(info) != 0:
        raise ConditioningError(f"{what} is singular", condition=float("inf"))

    identity = torch.eye(matrix.shape[-1], dtype=matrix.dtype)
    inverse = torch.linalg.lu_solve(lu, pivots, identity)
    condition = float(
        torch.linalg.matrix_norm(matrix, ord=1)
        * torch.linalg.matrix_norm(inverse, ord=1)
    )
    if not math.isfinite(condition) or 1.0 / condition <= EPS:
        raise ConditioningError(f"{what} is numerically singular", condition=condition)

    warnings = []
    if 1.0 / condition < WARN_FACTOR * EPS:
        warnings.append(f"{what} is ill-conditioned (condition {condition:.3e})")

    return Solved(torch.linalg.lu_solve(lu, pivots, rhs), condition, warnings)


def warn_once(log: logging.Logger, kind: str, message: str) -> None:
    """Log `message` at WARNING the first time `kind` comes up, at DEBUG after that.

    Callers still append every message to the `warnings` list they return.
    """
    if kind in _reported:
        log.debug(message)
        return
    _reported.add(kind)
    log.warning(message)
