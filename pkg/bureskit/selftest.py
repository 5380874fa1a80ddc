"""Property suites behind `bureskit selftest`.

Every property reports the worst residual seen against its tolerance. With
samples=0 only the fixed cases run.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict

import torch
from tqdm.auto import tqdm

from . import golden
from .bureskit import bureskit
from .coeffs import det_H_identity_check, smith_tableau
from .errors import BuresError, ConditioningError, GenericityError
from .invariants import cayley_hamilton_residual, e_from_p, p_from_e
from .metric import (
    bures,
    bures_prop1,
    bures_prop1_block,
    bures_prop2,
    bures_prop4,
    gram_metric_residual,
    parallel_slice_residual,
    power_differentials,
    project_parallel,
)
from .states import TangentMatrix, Xorshift64Star, random_state, random_tangent
from .sylvester import chi_block_upper
from .utils import Tolerances, colors, inf_norm, resolve

logger = logging.getLogger(__name__)

SPECTRUM_FLOOR = 0.05
POSITIVITY_FLOOR = 1e-12
MAX_CONTRACTION = 0.5
# linearity, the Gram-metric identities, the block-trace route and the
# parallel slice run on every EXTENDED_EVERY-th sample
EXTENDED_EVERY = 4


@dataclass
class PropertyCheck:
    name: str
    tolerance: float
    worst: float = 0.0
    count: int = 0
    failures: int = 0

    def record(self, residual: float) -> None:
        self.count += 1
        if math.isnan(residual) or residual > self.tolerance:
            self.failures += 1
        if math.isnan(residual) or residual > self.worst:
            self.worst = residual

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _relative(value: float, expected: float) -> float:
    return abs(value - expected) / max(1.0, abs(expected))


def _matrix_gap(a: torch.Tensor, b: torch.Tensor) -> float:
    scale = inf_norm(b)
    gap = inf_norm(a - b)
    return gap / scale if scale > 0 else gap


class SelfTest:
    def __init__(
        self,
        n_max: int = 8,
        samples: int = 1000,
        seed: int = 0,
        tol: Tolerances = None,
        progress: bool = True,
        color: bool = False,
    ) -> None:
        self.n_max = n_max
        self.samples = samples
        self.seed = seed
        self.tol = resolve(tol)
        self.progress = progress
        self.checks: Dict[str, PropertyCheck] = {}
        self.refused = 0
        self.accepted = 0
        self.skipped: Dict[str, int] = {}

        self.blue = colors.BLUE if color else ""
        self.green = colors.GREEN if color else ""
        self.red = colors.RED if color else ""
        self.white = colors.WHITE if color else ""

    def check(self, name: str, residual: float, tolerance: float) -> None:
        if name not in self.checks:
            self.checks[name] = PropertyCheck(name, tolerance)
        self.checks[name].record(float(residual))

    def skip(self, name: str) -> None:
        self.skipped[name] = self.skipped.get(name, 0) + 1

    def gated(self, name: str, residual: float, tolerance: float, accuracy: float) -> None:
        """Check `residual` only when the inputs are accurate to `tolerance`, else count a skip."""
        if accuracy > tolerance:
            self.skip(name)
        else:
            self.check(name, residual, tolerance)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def run(self) -> bool:
        self.fixed_cases()
        for n in range(1, self.n_max + 1):
            rng = Xorshift64Star(self.seed ^ (n << 32))
            for i in tqdm(
                range(self.samples),
                desc=f"n={n}",
                disable=not self.progress or self.samples == 0,
                leave=False,
            ):
                try:
                    self.sample(n, rng, extended=i % EXTENDED_EVERY == 0)
                except BuresError as e:
                    logger.warning(f"n={n}: {e}")
                    self.check("no unexpected errors", 1.0, 0.0)
        return self.passed

    def fixed_cases(self) -> None:
        tol = self.tol
        offdiag = [[0.0, 1.0], [1.0, 0.0]]
        cache = bureskit(torch.diag(torch.tensor([1.0, 2.0])), tol, strict=True)
        for route in ("prop1", "prop2", "prop4", "oracle"):
            self.check("fixed: diag(1,2) metric", _relative(cache.metric(offdiag, route=route).value, 1 / 3), tol.metric)
        self.check("fixed: diag(1,2) metric", _relative(bures_prop1_block(cache, offdiag, offdiag).value, 1 / 3), tol.metric)
        expected_a = torch.tensor([[11.0, -3.0], [-3.0, 1.0]], dtype=torch.float64) / 12
        self.check("fixed: diag(1,2) coefficients", _matrix_gap(cache.coefficients.entries, expected_a), tol.coeff)
        self.check("fixed: diag(1,2) coefficients", _matrix_gap(cache.smith.entries, expected_a), tol.coeff)
        expected_m = torch.tensor([[0.0, -2.0], [-4.0, 0.0]], dtype=torch.complex128)
        self.check("fixed: block polynomial", _matrix_gap(chi_block_upper(cache.state, offdiag, tol=tol), expected_m), tol.solve)

        half = bureskit(torch.eye(2) / 2, tol)
        y = [[1.0, 0.0], [0.0, -1.0]]
        for route in ("prop1", "prop2", "oracle"):
            self.check("fixed: scalar state metric", _relative(half.metric(y, route=route).value, 1.0), tol.metric)
        self.check("fixed: scalar state solution", _matrix_gap(half.solve(y).x.entries, torch.tensor(y, dtype=torch.complex128)), tol.solve)
        try:
            half.metric(y, route="prop4")
            self.check("fixed: scalar state refused", 1.0, 0.0)
        except GenericityError:
            self.check("fixed: scalar state refused", 0.0, 0.0)

        single = bureskit([[2.0]], tol)
        self.check("fixed: n=1 metric", _relative(bures_prop1(single, [[1.0]], [[3.0]]).value, 3 / 8), tol.metric)

        triple = bureskit(torch.diag(torch.tensor([1.0, 2.0, 3.0])), tol)
        det_h = smith_tableau(triple.invariants).det_h
        self.check("fixed: det H", _relative(det_h, 360.0), tol.coeff)

    def sample(self, n: int, rng: Xorshift64Star, extended: bool = True) -> None:
        tol = self.tol
        state = random_state(n, floor=SPECTRUM_FLOOR, rng=rng, tol=tol)
        yprime = random_tangent(n, rng)
        y = random_tangent(n, rng)
        cache = bureskit(state, tol)
        inv = cache.invariants
        rho = cache.state.entries

        # invariants
        self.check("newton identities", inv.newton_residual, tol.newton)
        self.check("cayley-hamilton", cayley_hamilton_residual(cache.state, inv, tol), tol.newton)
        p = inv.p[:n]
        round_trip = p_from_e(e_from_p(p, n), n)
        self.check("e-p round trip", _matrix_gap(round_trip[None, :], p[None, :]), tol.herm)

        # coefficient routes
        try:
            smith = cache.smith
        except ConditioningError:
            smith = None
            self.skip("smith coefficients")
        for coeffs in filter(None, (cache.coefficients, smith)):
            self.check("coefficient residual", coeffs.residual, tol.coeff)
        refined = cache.refined_inverse(y)
        self.check("coefficient expansion contraction", refined.contraction, MAX_CONTRACTION)
        reconstructed = rho @ refined.x + refined.x @ rho
        self.check("operator reconstruction", _matrix_gap(reconstructed, y.entries), tol.xroute)

        # Sylvester solvers
        block = cache.solve(y)
        dense = cache.solve(y, "dense")
        scale = inf_norm(y.entries)
        for solution in (block, dense):
            self.check("sylvester residual", solution.residual / scale, tol.solve)
            self.check("sylvester asymmetry", solution.asymmetry, tol.solve)
        self.check("solver agreement", _matrix_gap(block.x.entries, dense.x.entries), tol.xroute)

        # metric routes
        oracle = bures(cache, yprime, y, "oracle").value
        values = [bures_prop1(cache, yprime, y).value, bures_prop2(cache, yprime, y).value]
        if smith is not None:
            try:
                values.append(bures_prop2(cache, yprime, y, coeff_route="smith").value)
            except ConditioningError:
                self.skip("smith route metric")
        swapped = bures_prop2(cache, y, yprime).value
        self.check("metric symmetry", _relative(swapped, values[1]), tol.herm)
        positive = bures_prop1(cache, y, y).value
        self.check("metric positivity", 0.0 if positive / scale**2 >= POSITIVITY_FLOOR else 1.0, 0.0)

        if extended:
            values.append(bures_prop1_block(cache, yprime, y).value)
            combined = TangentMatrix(2 * y.entries - 3 * yprime.entries)
            linear = 2 * block.x.entries - 3 * cache.solve(yprime).x.entries
            self.check("sylvester linearity", _matrix_gap(cache.solve(combined).x.entries, linear), tol.solve)
            self.check("gram-metric identities", gram_metric_residual(cache, y), tol.xroute)

        if n in (2, 3):
            self.golden(cache, yprime, y)

        if not cache.generic:
            self.refused += 1
            try:
                bures_prop4(cache, yprime, y)
                self.check("genericity refusal", 1.0, 0.0)
            except GenericityError:
                self.check("genericity refusal", 0.0, 0.0)
            for value in values:
                self.check("route agreement", _relative(value, oracle), tol.metric)
            return

        self.accepted += 1
        prop4 = bures_prop4(cache, yprime, y)
        values.append(prop4.value)
        for value in values:
            self.check("route agreement", _relative(value, oracle), tol.metric)

        # checks that need eigenvalues, or the generic point
        lam = torch.linalg.eigvalsh(rho)
        gaps = [float(lam[i] - lam[j]) ** 2 for i in range(n) for j in range(i + 1, n)]
        expected_det = float(torch.prod(lam)) * math.prod(gaps)
        det_p = cache.genericity.det_p
        self.check("det P identity", abs(det_p - expected_det) / abs(det_p), tol.xroute)
        if smith is not None:
            self.gated("det H identity", det_H_identity_check(inv, lam), tol.xroute, smith.accuracy)
            self.gated(
                "coefficient route agreement",
                _matrix_gap(smith.entries, cache.coefficients.entries),
                tol.xroute,
                max(smith.accuracy, cache.coefficients.accuracy),
            )
        coeffs = cache.coefficients
        self.gated("coefficient symmetry", coeffs.asymmetry, tol.coeff, coeffs.accuracy)

        split = project_parallel(cache, y)
        self.check("projector forms", split.form_residual, tol.proj)
        self.check("projector commutes", split.commutator, tol.proj)
        again = project_parallel(cache, split.parallel).parallel.entries
        self.check("projector idempotence", _matrix_gap(again, split.parallel.entries), tol.proj)
        cross = bures_prop1(cache, split.parallel, split.orthogonal).value
        self.check("projector orthogonality", abs(cross) / positive, tol.proj)
        parallel_prime = project_parallel(cache, yprime).parallel
        restricted = bures_prop1(cache, parallel_prime, split.parallel).value
        self.check("prop4 parallel part", _relative(prop4.parallel_part, restricted), tol.newton)
        if extended:
            self.check("parallel slice", parallel_slice_residual(cache, y), tol.solve)

    def golden(self, cache: bureskit, yprime, y) -> None:
        tol = self.tol
        inv = cache.invariants
        if cache.n == 2:
            self.check("golden: A", _matrix_gap(golden.coeffs_n2(inv.e), cache.coefficients.entries), tol.coeff)
            self.check("golden: prop1", _relative(golden.prop1_n2(cache.state, yprime, y, inv.e), bures_prop1(cache, yprime, y).value), tol.metric)
        else:
            self.check("golden: A", _matrix_gap(golden.coeffs_n3(inv.e), cache.coefficients.entries), tol.coeff)
            self.check("golden: prop1", _relative(golden.prop1_n3(cache.state, yprime, y, inv.e), bures_prop1(cache, yprime, y).value), tol.metric)
        if not cache.generic:
            return
        if cache.n == 2:
            split = 2 * cache.coefficients.entries - cache.gram_inverse
            self.check("golden: 2A - P^-1", _matrix_gap(golden.split_n2_e(inv.e), split), tol.coeff)
            self.check("golden: 2A - P^-1", _matrix_gap(golden.split_n2_p(inv.p), split), tol.coeff)
            dp_prime = power_differentials(cache, yprime)
            dp = power_differentials(cache, y)
            parallel = bures_prop4(cache, yprime, y).parallel_part
            from_p = golden.parallel_n2_p(inv.p, dp_prime, dp)
            from_e = golden.parallel_n2_e(inv.e, golden.de_from_dp(inv.p, dp_prime), golden.de_from_dp(inv.p, dp))
            self.check("golden: parallel metric", _relative(from_p, parallel), tol.coeff)
            self.check("golden: parallel metric", _relative(from_e, parallel), tol.coeff)
        else:
            self.check("golden: det P", _relative(golden.det_gram_n3(inv.p), cache.genericity.det_p), tol.coeff)
            self.check("golden: P^-1", _matrix_gap(golden.gram_inverse_n3(inv.p), cache.gram_inverse), tol.coeff)

    def report(self) -> str:
        width = max([len(name) for name in self.checks] + [8])
        lines = [f"{'property'.ljust(width)}  {'checks':>7}  {'worst':>10}  {'tolerance':>10}  result"]
        for c in self.checks.values():
            result = f"{self.green}pass{self.white}" if c.passed else f"{self.red}FAIL{self.white}"
            lines.append(f"{c.name.ljust(width)}  {c.count:>7}  {c.worst:>10.3e}  {c.tolerance:>10.1e}  {result}")
        lines.append(
            f"{self.blue}{self.accepted} generic samples, {self.refused} refused as non-generic{self.white}"
        )
        for name, count in self.skipped.items():
            lines.append(f"{self.blue}{name}: {count} skipped, inputs too ill-conditioned{self.white}")
        verdict = f"{self.green}all properties pass" if self.passed else f"{self.red}some properties fail"
        lines.append(f"{verdict}{self.white}")
        return "\n".join(lines)
