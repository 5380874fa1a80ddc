import logging
from typing import Optional

import torch

from .coeffs import (
    CoeffMatrix,
    Refined,
    coeff_companion,
    coeff_smith,
    companion,
    refine_inverse,
    route_deviation,
)
from .errors import ConditioningError, GenericityError
from .invariants import char_poly, commutant_basis, gram_matrix, is_generic
from .states import StateMatrix, TangentMatrix
from .sylvester import SylvesterSolution, solve_block_poly, solve_dense
from .utils import Tolerances, factor_solve, resolve, warn_once

logger = logging.getLogger("bureskit")
logger.setLevel(logging.INFO)


class bureskit:
    """Per-state cache for Bures metric evaluations.

    Everything that depends on ϱ alone (its powers ϱ^0..ϱ^{n−1}, the
    characteristic invariants, the companion matrix, the coefficient matrix
    A, the Hankel matrix P and the orthonormal basis of polynomials in ϱ) is
    computed once on construction, so one instance can serve any number of
    metric evaluations, from any number of threads.

    With `strict=True` the Smith route for A is computed as well and, at
    generic points where both routes are accurate enough, checked entrywise
    against the companion route. Otherwise it is computed on first use.
    """

    def __init__(self, state, tol: Tolerances = None, strict: bool = False) -> None:
        self.tol = resolve(tol)
        self.strict = strict
        self.state = StateMatrix.validate(state, self.tol)
        self.n = self.state.n

        rho = self.state.entries
        powers = [torch.eye(self.n, dtype=rho.dtype)]
        for _ in range(1, self.n):
            powers.append(powers[-1] @ rho)
        self.powers = torch.stack(powers)

        self.invariants = char_poly(self.state, self.tol)
        self.companion = companion(self.invariants, self.tol)
        self.coefficients = coeff_companion(self.invariants, self.tol)
        self.gram = gram_matrix(self.state, self.invariants, self.tol)
        self.basis = commutant_basis(self.state, self.tol)
        self.genericity = is_generic(self.state, self.tol, gram=self.gram, basis=self.basis)
        self.warnings = list(self.invariants.warnings) + list(self.coefficients.warnings)

        # P⁻¹ is reported for inspection only; the metric uses the orthonormal basis
        self.gram_inverse: Optional[torch.Tensor] = None
        if self.genericity.generic:
            try:
                solved = factor_solve(
                    self.gram.entries, torch.eye(self.n, dtype=torch.float64), "P"
                )
                self.gram_inverse = solved.solution
            except ConditioningError as e:
                logger.debug(f"Hankel matrix P not inverted: {e}")

        self._smith: Optional[CoeffMatrix] = None
        self.route_deviation: Optional[float] = None
        if strict:
            self.warnings.extend(self.smith.warnings)
            accuracy = max(self.coefficients.accuracy, self.smith.accuracy)
            if not self.generic:
                logger.info("state is not generic; skipping the entrywise route check")
            elif accuracy > self.tol.xroute:
                message = (
                    f"coefficient matrices accurate to about {accuracy:.1e} only; "
                    "skipping the entrywise route check"
                )
                self.warnings.append(message)
                warn_once(logger, "route check skipped", message)
            else:
                self.route_deviation = route_deviation(self.coefficients, self.smith)
                if self.route_deviation > self.tol.xroute:
                    raise ConditioningError(
                        f"companion and Smith coefficients disagree by {self.route_deviation:.3e}"
                    )

    @property
    def generic(self) -> bool:
        return self.genericity.generic

    @property
    def smith(self) -> CoeffMatrix:
        if self._smith is None:
            self._smith = coeff_smith(self.invariants, self.tol)
        return self._smith

    def require_generic(self) -> torch.Tensor:
        """The orthonormal basis φ_0..φ_{n−1} of polynomials in ϱ; raises off generic points."""
        if not self.generic:
            raise GenericityError(
                f"state is not generic (smallest recurrence ratio {self.genericity.normalized:.3e})"
            )
        return self.basis.vectors

    def coefficient_matrix(self, route: str = "companion") -> CoeffMatrix:
        if route == "companion":
            return self.coefficients
        if route == "smith":
            return self.smith
        raise ValueError(f"Unsupported coefficient route: {route}")

    def tangent(self, y) -> TangentMatrix:
        return TangentMatrix.validate(y, self.n, self.tol)

    def solve(self, y, method: str = "block_poly") -> SylvesterSolution:
        if method == "block_poly":
            return solve_block_poly(self.state, y, self.invariants, self.tol)
        if method == "dense":
            return solve_dense(self.state, y, self.tol)
        raise ValueError(f"Unsupported solver: {method}")

    def refined_inverse(self, y, route: str = "companion") -> Refined:
        a = self.coefficient_matrix(route).entries
        y = self.tangent(y).entries
        return refine_inverse(a, self.powers.to(y.dtype), y, self.tol)

    def apply_inverse(self, y, route: str = "companion") -> torch.Tensor:
        """(L + R)⁻¹Y through the coefficient matrix A, refined on its residual."""
        return self.refined_inverse(y, route).x

    def metric(self, y, yprime=None, route: str = "prop2", **kwargs):
        from .metric import bures

        return bures(self, yprime if yprime is not None else y, y, route=route, **kwargs)

    def split(self, y):
        from .metric import project_parallel

        return project_parallel(self, y)

    # This controls the output of the bureskit object, when printed to console.
    def __repr__(self) -> str:
        kind = "generic" if self.generic else "non-generic"
        trace = float(self.state.entries.diagonal().real.sum())
        return f"{kind} {self.n}x{self.n} state with trace {trace:.6g}."
