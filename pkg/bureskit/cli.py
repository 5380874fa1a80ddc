import logging
import sys

import fire

from .bench import BENCH_ROUTES, bench, format_table, to_document
from .bureskit import bureskit
from .errors import ConditioningError, GenericityError, ValidationError
from .matrixfile import MatrixFile, dumps
from .metric import ROUTES, bures
from .selftest import SelfTest
from .states import Xorshift64Star, random_state
from .utils import Tolerances

EXIT_FAILED = 1
EXIT_VALIDATION = 2
EXIT_CONDITIONING = 3


def bureskit_cli(**kwargs):
    """Entrypoint for the CLI"""
    fire.Fire(
        {
            "compute": compute_cli,
            "selftest": selftest_cli,
            "random-state": random_state_cli,
            "bench": bench_cli,
        }
    )


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _guarded(command):
    """Run `command`, mapping library errors to exit codes."""
    try:
        return command()
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    except ConditioningError as e:
        print(f"error: {e}", file=sys.stderr)
        raise SystemExit(EXIT_CONDITIONING)


def _as_list(value, cast):
    if isinstance(value, str):
        return [cast(v.strip()) for v in value.split(",") if v.strip()]
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(value)]


def _compute(state, y, yprime, route, strict):
    tol = Tolerances.from_env()
    if route != "all" and route not in ROUTES:
        raise ValidationError(f"route must be one of {ROUTES + ('all',)}, got {route!r}")

    cache = bureskit(MatrixFile.load(state).state(tol), tol, strict=strict)
    y = MatrixFile.load(y).tangent(cache.n, tol)
    yprime = MatrixFile.load(yprime).tangent(cache.n, tol) if yprime is not None else y

    values, residuals, parts = {}, {}, {}
    warnings = list(cache.warnings)
    for name in ROUTES if route == "all" else (route,):
        try:
            report = bures(cache, yprime, y, name)
        except GenericityError as e:
            if route != "all":
                raise
            values[name] = None
            warnings.append(f"{name}: {e}")
            continue
        values[name] = report.value
        warnings.extend(w for w in report.warnings if w not in warnings)
        if report.residual is not None:
            residuals[name] = report.residual
        if name == "prop4":
            parts = {"parallel": report.parallel_part, "orthogonal": report.orthogonal_part}
        if name == "prop2" and strict:
            smith = bures(cache, yprime, y, "prop2", coeff_route="smith")
            values["prop2_companion"] = values.pop("prop2")
            values["prop2_smith"] = smith.value
            residuals["prop2_smith"] = smith.residual

    document = {
        "kind": "report",
        "n": cache.n,
        "route": route,
        "generic": cache.generic,
        "values": values,
        "residuals": residuals,
    }
    if parts:
        document["prop4_parts"] = parts
    if cache.route_deviation is not None:
        residuals["coeff_route_deviation"] = cache.route_deviation
    if route == "all":
        present = [v for v in values.values() if v is not None]
        document["max_deviation"] = max(present) - min(present)
    document["warnings"] = warnings
    return dumps(document)


def compute_cli(state: str, y: str, yprime: str = None, route: str = "prop2", strict: bool = False, verbose: bool = False):
    """Evaluate the Bures metric g(Y', Y) at a state read from matrix files."""
    _setup_logging(verbose)
    print(_guarded(lambda: _compute(state, y, yprime, route, strict)), end="")


def selftest_cli(n_max: int = 8, samples: int = 1000, seed: int = 0, verbose: bool = False):
    """Run the cross-validation property suites."""
    _setup_logging(verbose)

    def run():
        if int(n_max) < 1 or int(samples) < 0:
            raise ValidationError(f"need n_max >= 1 and samples >= 0, got {n_max} and {samples}")
        suite = SelfTest(
            int(n_max), int(samples), int(seed), Tolerances.from_env(), color=sys.stdout.isatty()
        )
        suite.run()
        return suite

    suite = _guarded(run)
    print(suite.report())
    if not suite.passed:
        raise SystemExit(EXIT_FAILED)


def random_state_cli(n: int, spectrum_floor: float = 0.0, trace_one: bool = False, seed: int = 0, verbose: bool = False):
    """Print a reproducible random state as a matrix file."""
    _setup_logging(verbose)

    def run():
        state = random_state(n, float(spectrum_floor), bool(trace_one), Xorshift64Star(int(seed)))
        return MatrixFile.from_matrix(state).dumps()

    print(_guarded(run), end="")


def bench_cli(
    n_list="2,3,4,6,8",
    routes=",".join(BENCH_ROUTES),
    reps: int = 20,
    seed: int = 0,
    output: str = None,
    verbose: bool = False,
):
    """Time the metric routes; `--output` also writes the records as JSON."""
    _setup_logging(verbose)

    def run():
        sizes = _as_list(n_list, int)
        if not sizes or min(sizes) < 1:
            raise ValidationError(f"n_list must hold positive sizes, got {n_list!r}")
        names = _as_list(routes, str)
        for name in names:
            if name not in BENCH_ROUTES:
                raise ValidationError(f"route must be one of {BENCH_ROUTES}, got {name!r}")
        return bench(sizes, names, int(reps), int(seed), Tolerances.from_env())

    records = _guarded(run)
    if output is not None:
        with open(output, "w", encoding="utf-8") as f:
            f.write(dumps(to_document(records, int(reps))))
    print(format_table(records, color=sys.stdout.isatty()))
