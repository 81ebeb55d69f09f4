import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .backends import get_backend
from .core import ConfigError, NumericalError
from .figures import write_figures
from .output import write_series_csv
from .schema import (
    Boundary,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    ModelKind,
    Provenance,
    RunConfig,
    ScheduleKind,
    Subcommand,
    TimeGrid,
)
from .settings import Settings
from .validation import all_passed, compare_series, format_report

logger = logging.getLogger("spinbath")

EXIT_OK = 0
EXIT_VALIDATION_FAIL = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_BACKENDS = {
    Subcommand.STATIC: [Provenance.CLOSED_FORM],
    Subcommand.TIMEDEP: [Provenance.TIME_DEPENDENT],
    Subcommand.VALIDATE: [],
    Subcommand.FIGURES: [],
}

REPORT_NAME = "validate-report.txt"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=[m.value for m in ModelKind], default=ModelKind.ISING.value,
                        help="Bath model: ising (model 1) or xx (model 2)")
    common.add_argument("--boundary", choices=[b.value for b in Boundary], default=Boundary.OPEN.value,
                        help="Open chain or periodic ring")
    common.add_argument("--n", type=int, default=8, help="Number of bath spins N")
    common.add_argument("--j", type=float, default=0.5, help="Qubit-bath coupling J")
    common.add_argument("--v", type=float, default=1.0, help="Bath coupling V")
    common.add_argument("--schedule", choices=[s.value for s in ScheduleKind], default=None,
                        help="Coupling profile J(t)")
    common.add_argument("--j0", type=float, default=None, help="Full coupling of the schedule (default: --j)")
    common.add_argument("--rate", type=float, default=1.0, help="Switching rate k")
    common.add_argument("--t-off", type=float, default=0.0, help="Centre of the switch-off ramp")
    common.add_argument("--t-on", type=float, default=None, help="Centre of the switch-on ramp")
    common.add_argument("--t-start", type=float, default=0.0, help="First sample time")
    common.add_argument("--t-end", type=float, default=10.0, help="Last sample time")
    common.add_argument("--samples", type=int, default=201, help="Number of sample times")
    common.add_argument("--backend", action="append", choices=[p.value for p in Provenance], default=None,
                        help="Backend to run; repeatable")
    common.add_argument("--out", type=Path, default=Path("out"), help="Output directory")
    common.add_argument("--tolerance", type=float, default=None,
                        help="Replace every validation tolerance with this value")
    common.add_argument("--seed", type=int, default=0, help="Reserved; every computation is deterministic")

    parser = argparse.ArgumentParser(prog="spinbath",
                                     description="Decoherence of a qubit coupled to a spin-chain bath.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    subparsers.add_parser("static", parents=[common], help="kappa(t) at constant coupling")
    subparsers.add_parser("timedep", parents=[common], help="kappa(t) under a coupling schedule")
    subparsers.add_parser("validate", parents=[common], help="Compare backends against each other")
    subparsers.add_parser("figures", parents=[common], help="Write fig2.csv, fig3.csv and fig4.csv")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed flags; invalid combinations raise pydantic.ValidationError."""
    subcommand = Subcommand(args.subcommand)
    spec = ChainSpec(model=args.model, n_bath=args.n, j_coupling=args.j, v_coupling=args.v,
                     boundary=args.boundary)
    schedule = None
    if args.schedule is not None:
        schedule = CouplingSchedule(kind=args.schedule, j0=args.j if args.j0 is None else args.j0,
                                    rate=args.rate, t_off=args.t_off, t_on=args.t_on)
    backends = args.backend if args.backend is not None else DEFAULT_BACKENDS[subcommand]
    return RunConfig(
        subcommand=subcommand,
        spec=spec,
        schedule=schedule,
        grid=TimeGrid(t_start=args.t_start, t_end=args.t_end, n_samples=args.samples),
        backends=frozenset(Provenance(b) for b in backends),
        output_path=args.out,
        seed=args.seed,
        tolerance=args.tolerance,
    )


def run_backends(config: RunConfig, settings: Settings) -> Dict[Provenance, DecoherenceSeries]:
    """
    Evaluate every requested backend on the worker pool.
    Results come back in provenance order; a numerical failure names the backend and the run.
    """
    backends = {p: get_backend(p, **settings.backend_kwargs(p)) for p in config.ordered_backends()}
    results: Dict[Provenance, DecoherenceSeries] = {}
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        futures = {p: pool.submit(backend.series, config.spec, config.grid, config.schedule)
                   for p, backend in backends.items()}
        for provenance, future in futures.items():
            try:
                results[provenance] = future.result()
            except NumericalError as exc:
                schedule = config.schedule.describe() if config.schedule else "constant"
                raise NumericalError(f"backend {provenance.value} failed for {config.spec.describe()} "
                                     f"schedule={schedule}: {exc}") from exc
    return results


def _write_all(config: RunConfig, results: Dict[Provenance, DecoherenceSeries]) -> List[Path]:
    return [write_series_csv(config.output_path / f"{p.value}.csv", series) for p, series in results.items()]


def run_static(config: RunConfig, settings: Settings) -> int:
    if config.schedule is not None and config.schedule.kind is not ScheduleKind.CONSTANT:
        raise ConfigError("static runs take no schedule or a constant one; use timedep for switching")
    _write_all(config, run_backends(config, settings))
    return EXIT_OK


def run_timedep(config: RunConfig, settings: Settings) -> int:
    _write_all(config, run_backends(config, settings))
    return EXIT_OK


def run_validate(config: RunConfig, settings: Settings) -> int:
    results = run_backends(config, settings)
    checks = compare_series(results, tolerance=config.tolerance, fallback=settings.validate_tolerance)
    report = config.output_path / REPORT_NAME
    report.parent.mkdir(parents=True, exist_ok=True)
    report.write_text(format_report(checks), encoding="utf-8")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.error(f"Validation failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(checks)} invariants passed; report at {report}")
    return EXIT_OK if all_passed(checks) else EXIT_VALIDATION_FAIL


def run_figures(config: RunConfig, settings: Settings) -> int:
    write_figures(config.spec, config.output_path)
    return EXIT_OK


RUNNERS = {
    Subcommand.STATIC: run_static,
    Subcommand.TIMEDEP: run_timedep,
    Subcommand.VALIDATE: run_validate,
    Subcommand.FIGURES: run_figures,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings.from_env()
    except ConfigError as exc:
        print(f"spinbath: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    logging.basicConfig(level=settings.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = build_config(args)
        logger.info(f"spinbath {__version__} {config.subcommand.value}: {config.spec.describe()} "
                    f"backends={[p.value for p in config.ordered_backends()]} seed={config.seed}")
        return RUNNERS[config.subcommand](config, settings)
    except (ValidationError, ConfigError) as exc:
        logger.error(f"Invalid configuration: {exc}")
        print(f"spinbath: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except NumericalError as exc:
        logger.error(f"Numerical failure: {exc}")
        print(f"spinbath: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
