"""Solvers for ϱX + Xϱ = Y.

`solve_block_poly` is the production path: conjugating the block matrix
[[−ϱ, Y], [0, ϱ]] to diag(−ϱ, ϱ) and applying χ gives χ(−ϱ)X + M = 0,
where M is the upper right block of χ([[−ϱ, Y], [0, ϱ]]). Positivity of ϱ
keeps χ(−ϱ) invertible. `solve_dense` builds L + R on vectorized matrices
and serves as the reference.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import torch

from .errors import ValidationError
from .invariants import CharInvariants, char_poly, chi_at
from .states import StateMatrix, TangentMatrix
from .utils import (
    Tolerances,
    dagger,
    factor_solve,
    hermitian_part,
    inf_norm,
    resolve,
    warn_once,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SylvesterSolution:
    x: TangentMatrix
    residual: float
    method: str
    asymmetry: float = 0.0
    condition: float = 1.0
    warnings: List[str] = field(default_factory=list)


def chi_upper_block(
    left: torch.Tensor, right: torch.Tensor, y: torch.Tensor, inv: CharInvariants
) -> torch.Tensor:
    """Σ_{i=1..n} k_{n−i} Σ_{j=0..i−1} left^j · y · right^{i−j−1}.

    `y` may carry leading batch dimensions.

    Uses S_1 = y, S_{i+1} = left·S_i + y·right^i, so only n products of
    each kind are formed.
    """
    if left.shape != y.shape[-2:] or right.shape != y.shape[-2:]:
        raise ValidationError(
            f"dimension mismatch: {tuple(left.shape)}, {tuple(y.shape)}, {tuple(right.shape)}"
        )
    n = inv.n
    s = y
    block = inv.coeff(n - 1) * s
    power = right
    for i in range(2, n + 1):
        s = left @ s + y @ power
        block = block + inv.coeff(n - i) * s
        power = power @ right
    return block


def chi_block_upper(rho, y, inv: CharInvariants = None, tol: Tolerances = None) -> torch.Tensor:
    """M, the upper right block of χ([[−ϱ, Y], [0, ϱ]])."""
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol)
    y = TangentMatrix.validate(y, rho.n, tol)
    inv = inv if inv is not None else char_poly(rho, tol)
    return chi_upper_block(-rho.entries, rho.entries, y.entries, inv)


def chi_block_horner(rho, y, inv: CharInvariants = None, tol: Tolerances = None) -> torch.Tensor:
    """χ([[−ϱ, Y], [0, ϱ]]) evaluated on the full 2n×2n block matrix."""
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol)
    y = TangentMatrix.validate(y, rho.n, tol)
    inv = inv if inv is not None else char_poly(rho, tol)
    zero = torch.zeros_like(rho.entries)
    block = torch.cat(
        [
            torch.cat([-rho.entries, y.entries], dim=1),
            torch.cat([zero, rho.entries], dim=1),
        ]
    )
    return chi_at(inv, block)


def _finish(rho, y, x, method, condition, warnings, tol) -> SylvesterSolution:
    scale = inf_norm(x)
    asymmetry = inf_norm(x - dagger(x)) / scale if scale > 0 else 0.0
    if asymmetry > tol.solve:
        warnings.append(f"{method} solution asymmetry {asymmetry:.3e} exceeds {tol.solve:.1e}")
        warn_once(logger, f"{method} asymmetry", warnings[-1])
    x = hermitian_part(x)

    residual = inf_norm(rho @ x + x @ rho - y)
    if residual > tol.solve * inf_norm(y):
        warnings.append(f"{method} residual {residual:.3e} exceeds {tol.solve:.1e}·‖Y‖")
        warn_once(logger, f"{method} residual", warnings[-1])

    return SylvesterSolution(
        x=TangentMatrix(x),
        residual=residual,
        method=method,
        asymmetry=asymmetry,
        condition=condition,
        warnings=warnings,
    )


def solve_block_poly(rho, y, inv: CharInvariants = None, tol: Tolerances = None) -> SylvesterSolution:
    """X = −χ(−ϱ)⁻¹ M."""
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol)
    y = TangentMatrix.validate(y, rho.n, tol)
    inv = inv if inv is not None else char_poly(rho, tol)

    m = chi_upper_block(-rho.entries, rho.entries, y.entries, inv)
    chi = chi_at(inv, -rho.entries)
    solved = factor_solve(chi, -m, "χ(−ϱ)")
    for warning in solved.warnings:
        warn_once(logger, "χ(−ϱ) condition", warning)

    return _finish(
        rho.entries, y.entries, solved.solution, "block_poly", solved.condition,
        list(inv.warnings) + solved.warnings, tol,
    )


def solve_dense(rho, y, tol: Tolerances = None) -> SylvesterSolution:
    """Solve (L + R) vec X = vec Y with the n²×n² Kronecker matrix."""
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol)
    y = TangentMatrix.validate(y, rho.n, tol)
    n = rho.n

    # row-major vec(AXB) = (A ⊗ Bᵀ) vec X
    identity = torch.eye(n, dtype=rho.entries.dtype)
    operator = torch.kron(rho.entries, identity) + torch.kron(identity, rho.entries.T.contiguous())
    solved = factor_solve(operator, y.entries.reshape(n * n, 1), "L + R")
    for warning in solved.warnings:
        warn_once(logger, "L + R condition", warning)

    return _finish(
        rho.entries, y.entries, solved.solution.reshape(n, n), "dense",
        solved.condition, list(solved.warnings), tol,
    )


def solve_block_poly_many(rho: StateMatrix, ys: torch.Tensor, inv: CharInvariants) -> torch.Tensor:
    """X_b = −χ(−ϱ)⁻¹ M_b for a stack of right-hand sides, with one factorization.

    `ys` is b×n×n and is taken as already validated; returns the hermitian
    parts of the solutions, b×n×n.
    """
    b, n = ys.shape[0], rho.n
    dtype = torch.promote_types(ys.dtype, rho.entries.dtype)
    entries = rho.entries.to(dtype)
    m = chi_upper_block(-entries, entries, ys.to(dtype), inv)
    chi = chi_at(inv, -entries)
    # right-hand sides side by side: n × (b·n)
    columns = (-m).permute(1, 0, 2).reshape(n, b * n)
    solved = factor_solve(chi, columns, "χ(−ϱ)")
    for warning in solved.warnings:
        warn_once(logger, "χ(−ϱ) condition", warning)
    return hermitian_part(solved.solution.reshape(n, b, n).permute(1, 0, 2))
