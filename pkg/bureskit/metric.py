"""Bures metric g_ϱ(Y′, Y) = ½ Tr Y′X with ϱX + Xϱ = Y.

Routes:

- prop1: X from the block polynomial solver.
- prop2: ½ Σ a_ij Tr(Y′ϱ^{i−1}Yϱ^{j−1}) with the coefficient matrix A,
  refined on the residual of ϱX + Xϱ = Y.
- prop4: the same quantity split into the part commuting with ϱ and its
  Bures-orthogonal complement, over an orthonormal basis of polynomials in
  ϱ; needs a generic state.
- oracle: the eigenbasis sum, for diagnostics and tests only.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import torch

from .bureskit import bureskit
from .errors import ConditioningError
from .invariants import chi_at
from .states import TangentMatrix
from .sylvester import chi_block_horner, solve_block_poly, solve_block_poly_many, solve_dense
from .utils import Tolerances, dagger, factor_solve, hermitian_part, inf_norm, warn_once

logger = logging.getLogger(__name__)

ROUTES = ("prop1", "prop2", "prop4", "oracle")


@dataclass(frozen=True)
class MetricReport:
    value: float
    route: str
    generic: bool
    parallel_part: Optional[float] = None
    orthogonal_part: Optional[float] = None
    residual: Optional[float] = None
    coeff_route: Optional[str] = None
    refinements: Optional[int] = None
    warnings: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class TangentSplit:
    parallel: TangentMatrix
    orthogonal: TangentMatrix
    form_residual: float = 0.0
    commutator: float = 0.0
    warnings: List[str] = field(default_factory=list)


def _cache(rho, tol: Tolerances = None, strict: bool = False) -> bureskit:
    if isinstance(rho, bureskit):
        return rho
    return bureskit(rho, tol=tol, strict=strict)


def _real(value: complex, what: str, cache: bureskit, warnings: List[str]) -> float:
    """Real part of a trace that is real in exact arithmetic, after checking the residue."""
    value = complex(value)
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > cache.tol.metric * scale:
        raise ConditioningError(
            f"{what} has imaginary part {value.imag:.3e} against {value.real:.6g}"
        )
    if abs(value.imag) > cache.tol.herm * scale:
        warnings.append(f"{what} has imaginary part {value.imag:.3e}")
        warn_once(logger, f"{what} imaginary", warnings[-1])
    return value.real


def trace_product(a: torch.Tensor, b: torch.Tensor) -> complex:
    """Tr(AB) without forming AB."""
    return complex((a * b.transpose(-2, -1)).sum())


def power_differentials(rho, y, tol: Tolerances = None) -> torch.Tensor:
    """dP_i(Y) = i·Tr(Yϱ^{i−1}) for i = 1..n."""
    cache = _cache(rho, tol)
    y = cache.tangent(y).entries
    traces = torch.einsum("ab,iba->i", y, cache.powers).real
    return traces * torch.arange(1, cache.n + 1, dtype=torch.float64)


def bures_prop1(rho, yprime, y, tol: Tolerances = None) -> MetricReport:
    cache = _cache(rho, tol)
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    solution = solve_block_poly(cache.state, y, cache.invariants, cache.tol)
    warnings = list(solution.warnings)
    value = _real(trace_product(yprime.entries, solution.x.entries) / 2, "prop1", cache, warnings)
    return MetricReport(
        value=value,
        route="prop1",
        generic=cache.generic,
        residual=solution.residual,
        warnings=warnings,
    )


def bures_prop1_block(rho, yprime, y, tol: Tolerances = None) -> MetricReport:
    """−½ Tr([[0,0],[Y′,0]] · diag(χ(−ϱ)⁻¹, 0) · χ([[−ϱ,Y],[0,ϱ]])) on 2n×2n blocks."""
    cache = _cache(rho, tol)
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    n = cache.n
    rho_m = cache.state.entries
    identity = torch.eye(n, dtype=rho_m.dtype)
    inverse = factor_solve(chi_at(cache.invariants, -rho_m), identity, "χ(−ϱ)")

    zero = torch.zeros_like(rho_m)
    lower = torch.cat([torch.cat([zero, zero], dim=1), torch.cat([yprime.entries, zero], dim=1)])
    corner = torch.cat(
        [torch.cat([inverse.solution, zero], dim=1), torch.cat([zero, zero], dim=1)]
    )
    chi_block = chi_block_horner(cache.state, y, cache.invariants, cache.tol)
    warnings = list(inverse.warnings)
    value = _real(-trace_product(lower @ corner, chi_block) / 2, "prop1 block", cache, warnings)
    return MetricReport(value=value, route="prop1_block", generic=cache.generic, warnings=warnings)


def bures_prop2(rho, yprime, y, tol: Tolerances = None, coeff_route: str = "companion") -> MetricReport:
    """½ Σ a_ij Tr(Y′ϱ^{i−1}Yϱ^{j−1}), with the expansion refined on the residual of ϱX + Xϱ = Y."""
    cache = _cache(rho, tol)
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    coeffs = cache.coefficient_matrix(coeff_route)
    refined = cache.refined_inverse(y, coeff_route)
    warnings = list(coeffs.warnings)
    value = _real(trace_product(yprime.entries, refined.x) / 2, "prop2", cache, warnings)
    return MetricReport(
        value=value,
        route="prop2",
        generic=cache.generic,
        residual=refined.residual,
        coeff_route=coeffs.route,
        refinements=refined.steps,
        warnings=warnings,
    )


def bures_eigen_oracle(rho, yprime, y, tol: Tolerances = None) -> MetricReport:
    """½ Σ_{αβ} ⟨α|Y′|β⟩⟨β|Y|α⟩ / (λ_α + λ_β) in an eigenbasis of ϱ."""
    cache = _cache(rho, tol)
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    lam, u = torch.linalg.eigh(cache.state.entries)
    a = dagger(u) @ yprime.entries @ u
    b = dagger(u) @ y.entries @ u
    denominator = (lam[:, None] + lam[None, :]).to(a.dtype)
    warnings = []
    value = _real((a * b.T / denominator).sum() / 2, "oracle", cache, warnings)
    return MetricReport(value=value, route="eigen_oracle", generic=cache.generic, warnings=warnings)


def bures_dense(rho, yprime, y, tol: Tolerances = None) -> MetricReport:
    """½ Tr Y′X with X from the n²×n² reference solver."""
    cache = _cache(rho, tol)
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    solution = solve_dense(cache.state, y, cache.tol)
    warnings = list(solution.warnings)
    value = _real(trace_product(yprime.entries, solution.x.entries) / 2, "dense", cache, warnings)
    return MetricReport(
        value=value, route="dense", generic=cache.generic, residual=solution.residual, warnings=warnings
    )


def project_parallel(rho, y, tol: Tolerances = None) -> TangentSplit:
    """Split Y into the part commuting with ϱ and its Bures-orthogonal complement.

    With φ_a the orthonormal polynomials in ϱ, the parallel part is
    Σ_a ϱφ_a Tr(Yφ_a); the equivalent form Σ_a ϱφ_a Y φ_a is evaluated as a
    cross-check.
    """
    cache = _cache(rho, tol)
    basis = cache.require_generic()
    y = cache.tangent(y).entries
    rho_m = cache.state.entries
    left = rho_m @ basis

    traces = torch.einsum("ab,kba->k", y, basis)
    from_traces = torch.einsum("k,kab->ab", traces, left)
    from_products = torch.einsum("kab,bc,kcd->ad", left, y, basis)

    scale = inf_norm(y)
    warnings = []
    form_residual = inf_norm(from_traces - from_products) / scale if scale > 0 else 0.0
    if form_residual > cache.tol.proj:
        warnings.append(f"projector forms differ by {form_residual:.3e}")
        warn_once(logger, "projector forms", warnings[-1])

    parallel = hermitian_part(from_traces)
    commutator = inf_norm(parallel @ rho_m - rho_m @ parallel)
    if scale > 0:
        commutator /= scale * inf_norm(rho_m)

    return TangentSplit(
        parallel=TangentMatrix(parallel),
        orthogonal=TangentMatrix(y - parallel),
        form_residual=form_residual,
        commutator=commutator,
        warnings=warnings,
    )


def bures_prop4(rho, yprime, y, tol: Tolerances = None) -> MetricReport:
    """g = ¼ Σ (dP_i/i)(Y′) (P⁻¹)_ij (dP_j/j)(Y) + ¼ Σ (2a_ij − (P⁻¹)_ij) Tr(Y′ϱ^{i−1}Yϱ^{j−1}).

    P⁻¹ = Σ_a c_a c_aᵀ with c_a the monomial coefficients of φ_a, so both
    sums are taken over the orthonormal basis instead of through P⁻¹.
    """
    cache = _cache(rho, tol)
    basis = cache.require_generic()
    yprime, y = cache.tangent(yprime), cache.tangent(y)
    warnings = list(cache.coefficients.warnings)

    tp = torch.einsum("ab,kba->k", yprime.entries, basis)
    t = torch.einsum("ab,kba->k", y.entries, basis)
    parallel = _real((tp * t).sum() / 4, "prop4 parallel part", cache, warnings)

    refined = cache.refined_inverse(y)
    full = trace_product(yprime.entries, refined.x) / 2
    restricted = torch.einsum("ab,kbc,cd,kda->", yprime.entries, basis, y.entries, basis) / 4
    orthogonal = _real(full - complex(restricted), "prop4", cache, warnings)

    return MetricReport(
        value=parallel + orthogonal,
        route="prop4",
        generic=True,
        parallel_part=parallel,
        orthogonal_part=orthogonal,
        residual=refined.residual,
        coeff_route=cache.coefficients.route,
        refinements=refined.steps,
        warnings=warnings,
    )


def bures(rho, yprime, y, route: str = "prop2", tol: Tolerances = None, **kwargs) -> MetricReport:
    if route == "prop1":
        return bures_prop1(rho, yprime, y, tol)
    if route == "prop2":
        return bures_prop2(rho, yprime, y, tol, **kwargs)
    if route == "prop4":
        return bures_prop4(rho, yprime, y, tol)
    if route == "oracle":
        return bures_eigen_oracle(rho, yprime, y, tol)
    if route == "dense":
        return bures_dense(rho, yprime, y, tol)
    raise ValueError(f"Unsupported route: {route}")


def gram_metric_residual(rho, y, tol: Tolerances = None) -> float:
    """Largest relative gap in P_ij = 4·g(ϱ^i, ϱ^j) and Tr(Yϱ^{j−1}) = 4·g(Y, ϱ^j)."""
    cache = _cache(rho, tol)
    y = cache.tangent(y).entries
    upper = hermitian_part(cache.state.entries @ cache.powers)  # ϱ^1..ϱ^n
    # 4·½Tr(AX) with X = (L + R)⁻¹ϱ^j, all n solutions from one factorization
    solutions = solve_block_poly_many(cache.state, upper, cache.invariants)
    values = 2 * torch.einsum("iab,jba->ij", upper, solutions).real
    expected = cache.gram.entries
    gap = float(((values - expected).abs() / expected.abs()).max())

    traces = 2 * torch.einsum("ab,jba->j", y, solutions).real
    expected = torch.einsum("ab,jba->j", y, cache.powers).real
    scale = expected.abs().clamp(min=1.0)
    return max(gap, float(((traces - expected).abs() / scale).max()))


def parallel_slice_residual(rho, y, tol: Tolerances = None) -> float:
    """‖2ϱX − Y∥‖ / ‖Y∥‖ with X = (L + R)⁻¹Y∥ from the dense solver."""
    cache = _cache(rho, tol)
    parallel = project_parallel(cache, y).parallel.entries
    scale = inf_norm(parallel)
    if scale == 0:
        return 0.0
    x = solve_dense(cache.state, TangentMatrix(parallel), cache.tol).x.entries
    return inf_norm(2 * cache.state.entries @ x - parallel) / scale
