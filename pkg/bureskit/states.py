import logging
import math
from dataclasses import dataclass
from typing import Optional

import torch

from .errors import ValidationError
from .utils import Tolerances, dagger, hermitian_part, max_abs, resolve

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def _as_square(matrix, what: str) -> torch.Tensor:
    if isinstance(matrix, (StateMatrix, TangentMatrix)):
        return matrix.entries
    try:
        tensor = torch.as_tensor(matrix, dtype=torch.complex128)
    except (TypeError, ValueError, RuntimeError) as e:
        raise ValidationError(f"{what} is not a numeric matrix: {e}")
    if tensor.dim() == 0:
        tensor = tensor.reshape(1, 1)
    if tensor.dim() != 2 or tensor.shape[0] != tensor.shape[1] or tensor.shape[0] < 1:
        raise ValidationError(f"{what} must be a non-empty square matrix, got shape {tuple(tensor.shape)}")
    if not bool(torch.isfinite(tensor).all()):
        raise ValidationError(f"{what} has non-finite entries")
    return tensor


def _check_hermitian(tensor: torch.Tensor, tol: Tolerances, what: str) -> None:
    asymmetry = max_abs(tensor - dagger(tensor))
    bound = tol.herm * max(max_abs(tensor), 1e-300)
    if asymmetry > bound:
        raise ValidationError(
            f"{what} is not Hermitian (asymmetry {asymmetry:.3e} > {bound:.3e})"
        )


@dataclass(frozen=True)
class StateMatrix:
    """A positive definite Hermitian n×n matrix ϱ."""

    entries: torch.Tensor

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def validate(cls, matrix, tol: Tolerances = None) -> "StateMatrix":
        if isinstance(matrix, StateMatrix):
            return matrix
        tol = resolve(tol)
        tensor = _as_square(matrix, "state")
        _check_hermitian(tensor, tol, "state")
        tensor = hermitian_part(tensor)

        # positive pivots of a Cholesky factorization, never eigenvalues
        factor, info = torch.linalg.cholesky_ex(tensor)
        if int(info) != 0 or not bool((factor.diagonal().real > 0).all()):
            raise ValidationError("state is not positive definite")
        return cls(tensor)


@dataclass(frozen=True)
class TangentMatrix:
    """A Hermitian n×n matrix Y, a tangent vector at some state."""

    entries: torch.Tensor

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def validate(
        cls, matrix, n: Optional[int] = None, tol: Tolerances = None
    ) -> "TangentMatrix":
        if isinstance(matrix, TangentMatrix):
            tangent = matrix
        else:
            tol = resolve(tol)
            tensor = _as_square(matrix, "tangent")
            _check_hermitian(tensor, tol, "tangent")
            tangent = cls(hermitian_part(tensor))
        if n is not None and tangent.n != n:
            raise ValidationError(
                f"tangent has dimension {tangent.n}, state has dimension {n}"
            )
        return tangent


def is_trace_one(state, tol: Tolerances = None) -> bool:
    tol = resolve(tol)
    state = StateMatrix.validate(state, tol)
    trace = float(state.entries.diagonal().real.sum())
    return abs(trace - 1.0) <= tol.herm * state.n


class Xorshift64Star:
    """xorshift64* generator, seeded through one splitmix64 step.

    The sequence depends only on the seed and the documented constants, so
    the same states can be reproduced outside Python.
    """

    def __init__(self, seed: int = 0):
        z = (int(seed) + 0x9E3779B97F4A7C15) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        z ^= z >> 31
        self.state = z or 0x9E3779B97F4A7C15
        self._spare = None

    def next64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next64() >> 11) * 2.0**-53

    def normal(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return value
        radius = math.sqrt(-2.0 * math.log(1.0 - self.uniform()))
        angle = 2.0 * math.pi * self.uniform()
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal()) / math.sqrt(2.0)


def ginibre(n: int, rng: Xorshift64Star) -> torch.Tensor:
    values = [rng.complex_normal() for _ in range(n * n)]
    return torch.tensor(values, dtype=torch.complex128).reshape(n, n)


def _eigenvalue_floor(matrix: torch.Tensor, upper: float, steps: int = 60) -> float:
    """Largest μ found by bisection on [0, upper] with cholesky(matrix − μ·1) succeeding."""
    identity = torch.eye(matrix.shape[0], dtype=matrix.dtype)
    lower = 0.0
    for _ in range(steps):
        middle = (lower + upper) / 2
        _, info = torch.linalg.cholesky_ex(matrix - middle * identity)
        if int(info) == 0:
            lower = middle
        else:
            upper = middle
    return lower


def random_state(
    n: int,
    floor: float = 0.0,
    trace_one: bool = False,
    rng: Xorshift64Star = None,
    tol: Tolerances = None,
) -> StateMatrix:
    """Ginibre state ϱ = (GG* + s·1)/normalizer with λ_min ≥ floor·Tr ϱ/n."""
    if int(n) != n or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n}")
    n = int(n)
    if not 0.0 <= floor < 1.0:
        raise ValidationError(f"spectrum floor must lie in [0, 1), got {floor}")
    if trace_one and floor >= 1.0 / n:
        raise ValidationError(
            f"spectrum floor must be below 1/n = {1.0 / n:.6g} for a trace-one state"
        )
    rng = rng if rng is not None else Xorshift64Star()

    g = ginibre(n, rng)
    w = hermitian_part(g @ dagger(g))
    trace = float(w.diagonal().real.sum())

    shift = 0.0
    if floor > 0.0:
        mu = _eigenvalue_floor(w, trace / n)
        shift = max(0.0, (floor * trace / n - mu) / (1.0 - floor))
    w = w + shift * torch.eye(n, dtype=w.dtype)

    normalizer = float(w.diagonal().real.sum()) if trace_one else float(n)
    return StateMatrix.validate(w / normalizer, tol)


def random_tangent(n: int, rng: Xorshift64Star = None) -> TangentMatrix:
    """Random Hermitian matrix with unit max-abs entry."""
    rng = rng if rng is not None else Xorshift64Star()
    y = hermitian_part(ginibre(n, rng))
    return TangentMatrix(y / max_abs(y))
