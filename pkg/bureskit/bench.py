import logging
import os
import platform
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np
import psutil

from .bureskit import bureskit
from .errors import ConditioningError
from .metric import bures
from .states import Xorshift64Star, random_state, random_tangent
from .utils import Tolerances, colors, resolve

logger = logging.getLogger(__name__)

BENCH_ROUTES = ("prop1", "prop2", "prop4", "oracle", "dense")
MIN_REPS = 5


@dataclass(frozen=True)
class BenchRecord:
    """Median timings for one (n, route) pair.

    cold_ns includes building the per-state cache; warm_ns reuses it.
    """

    n: int
    route: str
    cold_ns: Optional[int]
    warm_ns: Optional[int]
    value: Optional[float]
    residual: Optional[float]
    generic: bool
    consistent: bool


def _median_ns(samples: List[int]) -> int:
    return int(np.median(np.asarray(samples, dtype=np.int64)))


def host_info() -> dict:
    memory = psutil.virtual_memory()
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_count": psutil.cpu_count(logical=True),
        "memory_gib": round(memory.total / 1024.0**3, 2),
        "memory_percent": memory.percent,
        "threads": os.environ.get("OMP_NUM_THREADS"),
    }


def bench(
    n_list: Sequence[int] = (2, 3, 4, 6, 8),
    routes: Sequence[str] = BENCH_ROUTES,
    reps: int = 20,
    seed: int = 0,
    tol: Tolerances = None,
) -> List[BenchRecord]:
    tol = resolve(tol)
    for route in routes:
        if route not in BENCH_ROUTES:
            raise ValueError(f"Unsupported route: {route}")
    if reps < MIN_REPS:
        logger.warning(f"reps={reps} is below {MIN_REPS}; medians are degenerate")
    reps = max(1, int(reps))

    records = []
    for n in n_list:
        rng = Xorshift64Star(seed ^ (int(n) << 32))
        state = random_state(int(n), floor=0.05, rng=rng, tol=tol)
        y = random_tangent(int(n), rng)
        cache = bureskit(state, tol)
        oracle = bures(cache, y, y, "oracle").value

        for route in routes:
            try:
                report = bures(cache, y, y, route)
            except ConditioningError as e:
                logger.warning(f"n={n}: {route} skipped: {e}")
                records.append(BenchRecord(int(n), route, None, None, None, None, False, False))
                continue
            consistent = abs(report.value - oracle) <= tol.metric * max(1.0, abs(oracle))
            if not consistent:
                logger.warning(f"n={n}: {route} deviates from the eigenbasis value")

            cold, warm = [], []
            for _ in range(reps):
                start = time.perf_counter_ns()
                bures(bureskit(state, tol), y, y, route)
                cold.append(time.perf_counter_ns() - start)

                start = time.perf_counter_ns()
                bures(cache, y, y, route)
                warm.append(time.perf_counter_ns() - start)

            records.append(
                BenchRecord(
                    n=int(n),
                    route=route,
                    cold_ns=_median_ns(cold),
                    warm_ns=_median_ns(warm),
                    value=report.value,
                    residual=report.residual,
                    generic=cache.generic,
                    consistent=consistent,
                )
            )
    return records


def format_table(records: Sequence[BenchRecord], color: bool = False) -> str:
    red = colors.RED if color else ""
    white = colors.WHITE if color else ""
    lines = [f"{'n':>3}  {'route':<7}  {'cold (us)':>11}  {'warm (us)':>11}  {'value':>24}  check"]
    for r in records:
        if r.value is None:
            lines.append(f"{r.n:>3}  {r.route:<7}  {'-':>11}  {'-':>11}  {'not generic':>24}  -")
            continue
        check = "ok" if r.consistent else f"{red}MISMATCH{white}"
        lines.append(
            f"{r.n:>3}  {r.route:<7}  {r.cold_ns / 1e3:>11.1f}  {r.warm_ns / 1e3:>11.1f}  {r.value:>24.17g}  {check}"
        )
    return "\n".join(lines)


def to_document(records: Sequence[BenchRecord], reps: int) -> dict:
    return {
        "kind": "bench",
        "reps": reps,
        "host": host_info(),
        "records": [asdict(r) for r in records],
    }
