"""Scalar invariants of a state: power traces, characteristic coefficients,
elementary invariants, the Hankel matrix P of power traces, an orthonormal
basis of the polynomials in ϱ and the genericity test built on it.

Nothing here diagonalizes ϱ. The characteristic coefficients come from
the power traces through Newton's identity

    m·k_m + Σ_{r=1..m} p_r·k_{m−r} = 0,

which only ever divides by the integers m.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import torch

from .errors import ValidationError
from .states import StateMatrix
from .utils import Tolerances, hermitian_part, inf_norm, resolve, warn_once

logger = logging.getLogger(__name__)


def _floats(values) -> List[float]:
    if isinstance(values, torch.Tensor):
        return [float(v) for v in values.reshape(-1)]
    return [float(v) for v in values]


@dataclass(frozen=True)
class CharInvariants:
    """k_0..k_n of χ(t) = det(t·1 − ϱ), with e_i = (−1)^i k_i and p_1..p_{2n−1}."""

    n: int
    k: torch.Tensor
    e: torch.Tensor
    p: torch.Tensor
    newton_residual: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def coeff(self, m: int) -> float:
        """k_m, zero outside 0..n."""
        if 0 <= m <= self.n:
            return float(self.k[m])
        return 0.0


@dataclass(frozen=True)
class GramMatrix:
    """P with P_ij = p_{i+j−1}."""

    n: int
    entries: torch.Tensor
    row_residual: float = 0.0


@dataclass(frozen=True)
class GenericityReport:
    generic: bool
    det_p: float
    normalized: float
    threshold: float

    def __bool__(self):
        return self.generic


def power_traces(rho, m_max: int, tol: Tolerances = None) -> torch.Tensor:
    """p_i = Tr ϱ^i for i = 1..m_max, by repeated multiplication."""
    tol = resolve(tol)
    if m_max < 1:
        raise ValidationError(f"m_max must be at least 1, got {m_max}")
    rho = StateMatrix.validate(rho, tol).entries

    traces = []
    power = rho
    for i in range(1, m_max + 1):
        trace = complex(power.diagonal().sum())
        if abs(trace.imag) > tol.herm * max(1.0, abs(trace.real)):
            raise ValidationError(
                f"Tr ϱ^{i} has imaginary part {trace.imag:.3e}; state is not Hermitian"
            )
        traces.append(trace.real)
        if i < m_max:
            power = power @ rho
    return torch.tensor(traces, dtype=torch.float64)


def newton_coefficients(p: Sequence[float], n: int) -> List[float]:
    """k_0..k_n from p_1..p_n by k_m = −(1/m) Σ_{r=1..m} p_r k_{m−r}."""
    p = _floats(p)
    k = [1.0]
    for m in range(1, n + 1):
        k.append(-math.fsum(p[r - 1] * k[m - r] for r in range(1, m + 1)) / m)
    return k


def newton_residuals(p: Sequence[float], k: Sequence[float]) -> List[float]:
    """Relative residual of m·k_m + Σ p_r k_{m−r} for m = 1..len(p).

    Each residual is divided by the sum of the absolute values of its terms,
    with k_m = 0 for m > n.
    """
    p, k = _floats(p), _floats(k)
    n = len(k) - 1

    def k_at(m):
        return k[m] if 0 <= m <= n else 0.0

    residuals = []
    for m in range(1, len(p) + 1):
        terms = [m * k_at(m)] + [p[r - 1] * k_at(m - r) for r in range(1, m + 1)]
        magnitude = math.fsum(abs(t) for t in terms)
        residual = abs(math.fsum(terms))
        residuals.append(residual / magnitude if magnitude > 0 else residual)
    return residuals


def e_from_p(p, n: int = None) -> torch.Tensor:
    """Elementary invariants e_1..e_n from power traces p_1..p_n."""
    p = _floats(p)
    n = len(p) if n is None else n
    if n < 1 or len(p) < n:
        raise ValidationError(f"need p_1..p_{n}, got {len(p)} power traces")
    k = newton_coefficients(p, n)
    return torch.tensor([(-1) ** i * k[i] for i in range(1, n + 1)], dtype=torch.float64)


def p_from_e(e, m_max: int) -> torch.Tensor:
    """Power traces p_1..p_{m_max} from e_1..e_n.

    For m > n the identity reduces to p_m = Σ_{r=1..n} (−1)^{r+1} e_r p_{m−r}.
    """
    e = _floats(e)
    n = len(e)
    if n < 1:
        raise ValidationError("need at least one elementary invariant")
    if m_max < 1:
        raise ValidationError(f"m_max must be at least 1, got {m_max}")
    k = [1.0] + [(-1) ** i * e[i - 1] for i in range(1, n + 1)]

    p = []
    for m in range(1, m_max + 1):
        own = -m * k[m] if m <= n else 0.0
        terms = [own] + [-k[j] * p[m - j - 1] for j in range(1, min(m - 1, n) + 1)]
        p.append(math.fsum(terms))
    return torch.tensor(p, dtype=torch.float64)


def e_from_p_det(p, n: int = None) -> torch.Tensor:
    """e_i = det(M_i)/i!, M_i lower Hessenberg in the p's with 1..i−1 above the diagonal."""
    p = _floats(p)
    n = len(p) if n is None else n
    if n < 1 or len(p) < n:
        raise ValidationError(f"need p_1..p_{n}, got {len(p)} power traces")
    values = []
    for i in range(1, n + 1):
        m = torch.zeros(i, i, dtype=torch.float64)
        for row in range(i):
            for col in range(row + 1):
                m[row, col] = p[row - col]
            if row + 1 < i:
                m[row, row + 1] = row + 1
        values.append(float(torch.linalg.det(m)) / math.factorial(i))
    return torch.tensor(values, dtype=torch.float64)


def p_from_e_det(e, m_max: int) -> torch.Tensor:
    """p_i as the determinant with first column (e_1, 2e_2, .., i·e_i)."""
    e = _floats(e)
    if m_max < 1:
        raise ValidationError(f"m_max must be at least 1, got {m_max}")

    def e_at(j):
        return e[j - 1] if 1 <= j <= len(e) else 0.0

    values = []
    for i in range(1, m_max + 1):
        m = torch.zeros(i, i, dtype=torch.float64)
        for row in range(i):
            m[row, 0] = (row + 1) * e_at(row + 1)
            for col in range(1, row + 1):
                m[row, col] = e_at(row - col + 1)
            if row + 1 < i:
                m[row, row + 1] = 1.0
        values.append(float(torch.linalg.det(m)))
    return torch.tensor(values, dtype=torch.float64)


def char_poly(rho, tol: Tolerances = None) -> CharInvariants:
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol)
    n = rho.n

    direct = power_traces(rho, 2 * n - 1, tol)
    k = newton_coefficients(direct[:n], n)
    e = torch.tensor([(-1) ** i * k[i] for i in range(1, n + 1)], dtype=torch.float64)
    p = p_from_e(e, 2 * n - 1)

    residual = max(newton_residuals(direct, k))
    warnings = []
    if residual > tol.newton:
        warnings.append(
            f"Newton identity residual {residual:.3e} exceeds {tol.newton:.1e}"
        )
        warn_once(logger, "newton", warnings[-1])

    return CharInvariants(
        n=n,
        k=torch.tensor(k, dtype=torch.float64),
        e=e,
        p=p,
        newton_residual=residual,
        warnings=warnings,
    )


def chi_at(inv: CharInvariants, matrix: torch.Tensor) -> torch.Tensor:
    """χ(T) = T^n + k_1 T^{n−1} + .. + k_n by Horner's scheme."""
    identity = torch.eye(matrix.shape[0], dtype=matrix.dtype)
    result = identity.clone()
    for j in range(1, inv.n + 1):
        result = result @ matrix + inv.coeff(j) * identity
    return result


def cayley_hamilton_residual(rho, inv: CharInvariants = None, tol: Tolerances = None) -> float:
    """‖χ(ϱ)‖∞ / ‖ϱ‖∞^n."""
    rho = StateMatrix.validate(rho, tol)
    inv = inv if inv is not None else char_poly(rho, tol)
    return inf_norm(chi_at(inv, rho.entries)) / inf_norm(rho.entries) ** inv.n


def gram_matrix(rho, inv: CharInvariants = None, tol: Tolerances = None) -> GramMatrix:
    from .coeffs import companion

    tol = resolve(tol)
    inv = inv if inv is not None else char_poly(rho, tol)
    n = inv.n
    p = inv.p
    entries = torch.stack([p[i : i + n] for i in range(n)])

    # K acts on columns, (ϱ..ϱⁿ)ᵀ = K(1..ϱⁿ⁻¹)ᵀ, so row i+1 of P is (p_1..p_n)(Kᵀ)^i
    k_transposed = companion(inv, tol).entries.T
    row = entries[0]
    residual = 0.0
    for i in range(1, n):
        row = row @ k_transposed
        residual = max(residual, float((row - entries[i]).abs().max()))
    scale = float(entries.abs().max())
    residual = residual / scale if scale > 0 else residual
    if residual > tol.newton:
        warn_once(
            logger, "hankel rows", f"Hankel row relation residual {residual:.3e} exceeds {tol.newton:.1e}"
        )

    return GramMatrix(n=n, entries=entries, row_residual=residual)


@dataclass(frozen=True)
class CommutantBasis:
    """φ_0..φ_{m−1}, polynomials in ϱ with Re Tr(φ_a ϱ φ_b) = δ_ab.

    For A, B commuting with ϱ, Tr(AϱB) = 4·g(ϱA, ϱB), so ϱφ_a is an
    orthogonal basis of the tangents commuting with ϱ and the Gram matrix of
    the φ_a is the identity where P is ill-conditioned. `betas` are the
    recurrence norms, `ratios` each β_k over ‖ϱφ_{k−1}‖.
    """

    n: int
    vectors: torch.Tensor
    betas: List[float]
    ratios: List[float]

    @property
    def complete(self) -> bool:
        return self.vectors.shape[0] == self.n

    def det_gram(self, p_1: float) -> float:
        """det P = p_1ⁿ ∏_k β_k^{2(n−k)}, the product of the monic norms."""
        if not self.complete:
            return 0.0
        det = p_1**self.n
        for k, beta in enumerate(self.betas, start=1):
            det *= beta ** (2 * (self.n - k))
        return det


def _weighted_norm(v: torch.Tensor, rho: torch.Tensor) -> float:
    return math.sqrt(max(float(torch.einsum("ab,bc,ca->", v, rho, v).real), 0.0))


def commutant_basis(rho, tol: Tolerances = None) -> CommutantBasis:
    """Lanczos recurrence on left multiplication by ϱ, started from 1.

    Each new vector is orthogonalized twice against every earlier one. The
    recurrence stops when a ratio falls to tol.generic: the powers of ϱ no
    longer span n directions.
    """
    tol = resolve(tol)
    rho = StateMatrix.validate(rho, tol).entries
    n = rho.shape[0]
    identity = torch.eye(n, dtype=rho.dtype)

    vectors = [identity / math.sqrt(float(rho.diagonal().real.sum()))]
    betas, ratios = [], []
    for _ in range(1, n):
        previous = vectors[-1]
        product = rho @ previous
        alpha = float(torch.einsum("ab,bc,ca->", previous, rho, product).real)
        v = hermitian_part(product - alpha * previous)
        shifted = _weighted_norm(v, rho)

        stack = torch.stack(vectors)
        weighted = stack @ rho
        for _ in range(2):
            overlaps = torch.einsum("kab,ba->k", weighted, v).real
            v = v - torch.einsum("k,kab->ab", overlaps.to(v.dtype), stack)
        v = hermitian_part(v)

        beta = _weighted_norm(v, rho)
        ratio = beta / math.sqrt(alpha**2 + shifted**2)
        betas.append(beta)
        ratios.append(ratio)
        if ratio <= tol.generic:
            break
        vectors.append(v / beta)

    return CommutantBasis(n=n, vectors=torch.stack(vectors), betas=betas, ratios=ratios)


def is_generic(
    rho, tol: Tolerances = None, gram: GramMatrix = None, basis: CommutantBasis = None
) -> GenericityReport:
    """Genericity test det P ≠ 0, made numeric.

    P is positive definite exactly when the recurrence of `commutant_basis`
    runs n − 1 steps without breaking down, and det P is the product of its
    monic norms. The decision compares the smallest ratio β_k / ‖ϱφ_{k−1}‖,
    which lies in [0, 1] and does not change under ϱ → cϱ, with tol.generic.
    """
    tol = resolve(tol)
    basis = basis if basis is not None else commutant_basis(rho, tol)
    normalized = min(basis.ratios, default=1.0)
    generic = basis.complete and normalized > tol.generic

    p_1 = float(StateMatrix.validate(rho, tol).entries.diagonal().real.sum())
    if generic:
        det_p = basis.det_gram(p_1)
    else:
        gram = gram if gram is not None else gram_matrix(rho, tol=tol)
        det_p = float(torch.linalg.det(gram.entries))
    return GenericityReport(generic=generic, det_p=det_p, normalized=normalized, threshold=tol.generic)
