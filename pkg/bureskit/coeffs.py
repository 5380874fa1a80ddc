"""Coefficient matrix A of (L + R)⁻¹ = Σ a_ij L^{i−1} R^{j−1}.

Two independent routes:

- companion: K reduces powers of ϱ modulo χ(ϱ) = 0, so A solves the small
  Sylvester equation KᵀA + AK = C, whose solution is A = −χ(−Kᵀ)⁻¹N.
- smith: the closed double sum over k_r k_s and the first-row cofactors
  of the Hurwitz-type matrix H = [k_{2j−i}].
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List

import torch

from .errors import ConditioningError, SingularStateError, ValidationError
from .invariants import CharInvariants, chi_at
from .sylvester import chi_upper_block
from .utils import (
    EPS,
    WARN_FACTOR,
    Tolerances,
    factor_solve,
    hermitian_part,
    inf_norm,
    resolve,
    warn_once,
)

logger = logging.getLogger(__name__)

ROUTES = ("companion", "smith")

MAX_REFINEMENTS = 8


@dataclass(frozen=True)
class CompanionMatrix:
    n: int
    entries: torch.Tensor
    trace_residual: float = 0.0


@dataclass(frozen=True)
class CoeffMatrix:
    """A with its Sylvester residual, condition estimate and `accuracy`, an
    a-priori bound on ‖δA‖∞/‖A‖∞ from rounding."""

    n: int
    entries: torch.Tensor
    route: str
    residual: float = 0.0
    asymmetry: float = 0.0
    condition: float = 1.0
    accuracy: float = 0.0
    warnings: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class SmithTableau:
    n: int
    h: torch.Tensor
    det_h: float
    cofactors: torch.Tensor
    condition: float = 1.0
    warnings: List[str] = field(default_factory=list)

    def phi(self, m: float) -> float:
        """Φ(m): first-row cofactor for integer m in 1..n, zero otherwise."""
        if m != int(m) or not 1 <= m <= self.n:
            return 0.0
        return float(self.cofactors[int(m) - 1])


def identity_block(n: int) -> torch.Tensor:
    """C, the coefficient matrix of the identity operator L⁰R⁰."""
    c = torch.zeros(n, n, dtype=torch.float64)
    c[0, 0] = 1.0
    return c


def companion(inv: CharInvariants, tol: Tolerances = None) -> CompanionMatrix:
    tol = resolve(tol)
    n = inv.n
    if float(inv.k[0]) != 1.0:
        raise ValidationError(f"k_0 must be 1, got {float(inv.k[0])}")
    if inv.coeff(n) == 0.0 or not math.isfinite(inv.coeff(n)):
        raise SingularStateError("k_n = 0: the state is singular")

    k = torch.zeros(n, n, dtype=torch.float64)
    for i in range(n - 1):
        k[i, i + 1] = 1.0
    for j in range(n):
        k[n - 1, j] = -inv.coeff(n - j)

    # K has the characteristic polynomial of ϱ, so its power traces match
    residual = 0.0
    power = k
    for i in range(n):
        trace = float(power.diagonal().sum())
        expected = float(inv.p[i])
        residual = max(residual, abs(trace - expected) / max(1.0, abs(expected)))
        power = power @ k
    if residual > tol.newton:
        warn_once(logger, "companion traces", f"companion power traces deviate by {residual:.3e}")

    return CompanionMatrix(n=n, entries=k, trace_residual=residual)


def matrix_N(inv: CharInvariants) -> torch.Tensor:
    """N_ij = (−1)^{i+1} k_{n+1−i−j}, 1-based."""
    n = inv.n
    N = torch.zeros(n, n, dtype=torch.float64)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            N[i - 1, j - 1] = (-1) ** (i + 1) * inv.coeff(n + 1 - i - j)
    return N


def matrix_N_sum(inv: CharInvariants, k: CompanionMatrix = None) -> torch.Tensor:
    """N as the upper right block of χ([[−Kᵀ, C], [0, K]])."""
    k = k if k is not None else companion(inv)
    K = k.entries
    return chi_upper_block(-K.T, K, identity_block(inv.n), inv)


def sylvester_residual(a: torch.Tensor, k: CompanionMatrix) -> float:
    """‖KᵀA + AK − C‖∞ / (‖A‖∞‖K‖∞)."""
    K = k.entries
    residual = inf_norm(K.T @ a + a @ K - identity_block(k.n))
    scale = inf_norm(a) * inf_norm(K)
    return residual / scale if scale > 0 else residual


def _finish(a, route, k, condition, accuracy, warnings, tol) -> CoeffMatrix:
    residual = sylvester_residual(a, k)
    if residual > tol.coeff:
        warnings.append(f"{route}: KᵀA + AK − C residual {residual:.3e} exceeds {tol.coeff:.1e}")
        warn_once(logger, f"{route} residual", warnings[-1])
    if accuracy > tol.xroute:
        warnings.append(f"{route}: coefficient matrix accurate to about {accuracy:.1e} only")
        warn_once(logger, f"{route} accuracy", warnings[-1])
    scale = inf_norm(a)
    asymmetry = inf_norm(a - a.T) / scale if scale > 0 else 0.0
    return CoeffMatrix(
        n=k.n,
        entries=a,
        route=route,
        residual=residual,
        asymmetry=asymmetry,
        condition=condition,
        accuracy=accuracy,
        warnings=warnings,
    )


def coeff_companion(inv: CharInvariants, tol: Tolerances = None) -> CoeffMatrix:
    """A = −χ(−Kᵀ)⁻¹N."""
    tol = resolve(tol)
    k = companion(inv, tol)
    chi = chi_at(inv, -k.entries.T)
    solved = factor_solve(chi, -matrix_N(inv), "χ(−Kᵀ)")
    for warning in solved.warnings:
        warn_once(logger, "χ(−Kᵀ) condition", warning)

    # Horner growth: how much larger the summed terms are than χ(−Kᵀ) itself
    norm_k = float(torch.linalg.matrix_norm(k.entries, ord=1))
    terms = sum(abs(inv.coeff(j)) * norm_k ** (inv.n - j) for j in range(inv.n + 1))
    growth = terms / float(torch.linalg.matrix_norm(chi, ord=1))
    accuracy = inv.n * EPS * solved.condition * growth
    return _finish(
        solved.solution, "companion", k, solved.condition, accuracy, list(solved.warnings), tol
    )


def smith_tableau(inv: CharInvariants) -> SmithTableau:
    n = inv.n
    h = torch.zeros(n, n, dtype=torch.float64)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            h[i - 1, j - 1] = inv.coeff(2 * j - i)
    det_h = float(torch.linalg.det(h))
    if det_h == 0.0 or not math.isfinite(det_h):
        raise ConditioningError("det H is numerically zero", condition=float("inf"))

    cofactors = torch.ones(n, dtype=torch.float64)
    if n > 1:
        for m in range(n):
            minor = torch.cat([h[1:, :m], h[1:, m + 1 :]], dim=1)
            cofactors[m] = (-1) ** m * float(torch.linalg.det(minor))

    condition = float(torch.linalg.cond(h, p=1))
    if not math.isfinite(condition) or 1.0 / condition <= EPS:
        raise ConditioningError("H is numerically singular", condition=condition)
    warnings = []
    if 1.0 / condition < WARN_FACTOR * EPS:
        warnings.append(f"H is ill-conditioned (condition {condition:.3e})")
        warn_once(logger, "H condition", warnings[-1])

    return SmithTableau(
        n=n, h=h, det_h=det_h, cofactors=cofactors, condition=condition, warnings=warnings
    )


def coeff_smith(inv: CharInvariants, tol: Tolerances = None) -> CoeffMatrix:
    """a_ij = (−1)^i/(2 det H) Σ_{r≤n−i} Σ_{s≤n−j} (−1)^r k_r k_s Φ((i+j+r+s)/2)."""
    tol = resolve(tol)
    n = inv.n
    tableau = smith_tableau(inv)
    k = [inv.coeff(j) for j in range(n + 1)]
    phi = [tableau.phi(m / 2) for m in range(2 * n + 1)]
    a = torch.zeros(n, n, dtype=torch.float64)
    magnitude = 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            terms = [
                (-1) ** r * k[r] * k[s] * phi[i + j + r + s]
                for r in range(n - i + 1)
                for s in range(n - j + 1)
            ]
            a[i - 1, j - 1] = (-1) ** i * math.fsum(terms) / (2 * tableau.det_h)
            magnitude = max(magnitude, math.fsum(abs(t) for t in terms) / abs(2 * tableau.det_h))

    # cofactors and det H carry the condition of H; the sums add their cancellation
    largest = float(a.abs().max())
    cancellation = magnitude / largest if largest > 0 else 1.0
    accuracy = n * EPS * tableau.condition * max(1.0, cancellation)
    return _finish(
        a, "smith", companion(inv, tol), tableau.condition, accuracy, list(tableau.warnings), tol
    )


def route_deviation(a: CoeffMatrix, b: CoeffMatrix) -> float:
    """‖A_a − A_b‖∞ / ‖A_a‖∞."""
    scale = inf_norm(a.entries)
    difference = inf_norm(a.entries - b.entries)
    return difference / scale if scale > 0 else difference


def det_H_identity_check(inv: CharInvariants, eigenvalues) -> float:
    """Relative gap between det H and (−1)^{n(n+1)/2} ∏λ_i ∏_{i<j}(λ_i + λ_j)."""
    lam = [float(v) for v in eigenvalues]
    n = len(lam)
    product = math.prod(lam) * math.prod(
        lam[i] + lam[j] for i in range(n) for j in range(i + 1, n)
    )
    expected = (-1) ** (n * (n + 1) // 2) * product
    det_h = float(torch.linalg.det(smith_tableau(inv).h))
    return abs(det_h - expected) / abs(det_h)


def apply_coeffs(a: torch.Tensor, powers: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Σ a_ij ϱ^{i−1} Y ϱ^{j−1}, with `powers` stacking ϱ^0..ϱ^{n−1}."""
    right = y @ powers
    inner = torch.einsum("ij,jab->iab", a.to(powers.dtype), right)
    return torch.einsum("iab,ibc->ac", powers, inner)


@dataclass(frozen=True)
class Refined:
    x: torch.Tensor
    residual: float
    contraction: float
    steps: int


def refine_inverse(
    a: torch.Tensor, powers: torch.Tensor, y: torch.Tensor, tol: Tolerances = None
) -> Refined:
    """(L + R)⁻¹Y as the expansion Σ a_ij ϱ^{i−1}Yϱ^{j−1}, corrected on its residual.

    The expansion is applied again to Y − (ϱX + Xϱ) while that keeps
    halving the relative residual. `contraction` is the residual of the
    plain expansion; the corrections converge only while it is below one.
    Raises ConditioningError when the residual stays above tol.solve.
    """
    tol = resolve(tol)
    scale = inf_norm(y)
    x = hermitian_part(apply_coeffs(a, powers, y))
    if scale == 0 or powers.shape[0] == 1:
        # n = 1: a_11 = 1/(2ϱ) up to one rounding
        return Refined(x, 0.0, 0.0, 0)

    rho = powers[1]
    r = y - (rho @ x + x @ rho)
    residual = contraction = inf_norm(r) / scale

    steps = 0
    while steps < MAX_REFINEMENTS and residual > EPS:
        candidate = hermitian_part(x + apply_coeffs(a, powers, r))
        r_candidate = y - (rho @ candidate + candidate @ rho)
        residual_candidate = inf_norm(r_candidate) / scale
        if residual_candidate >= residual:
            break
        halved = residual_candidate < residual / 2
        x, r, residual, steps = candidate, r_candidate, residual_candidate, steps + 1
        if not halved:
            break

    if residual > tol.solve:
        raise ConditioningError(
            f"coefficient expansion does not converge (residual {residual:.3e}, "
            f"contraction {contraction:.3e})",
            condition=contraction / EPS,
        )
    return Refined(x, residual, contraction, steps)
