"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 consistency failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .errors import ConsistencyError, NumericalError, PlasmonEntangleError, ValidationError
from .experiments import run_scenario
from .fileio import load_scenario, write_results

log = logging.getLogger("plasmon_entangle")

EXIT_OK, EXIT_VALIDATION, EXIT_CONSISTENCY, EXIT_NUMERICAL = 0, 2, 3, 4


def preset_dir() -> Path:
    return Path(str(resources.files("plasmon_entangle") / "presets"))


def preset_names() -> list[str]:
    return sorted(p.stem for p in preset_dir().glob("*.yaml"))


def resolve_scenario_path(scenario: str | None, preset: str | None) -> Path:
    if (scenario is None) == (preset is None):
        raise ValidationError("give exactly one of --scenario or --preset")
    if preset is not None:
        path = preset_dir() / f"{preset}.yaml"
        if not path.is_file():
            raise ValidationError(f"unknown preset {preset!r}; available: {', '.join(preset_names())}")
        return path
    path = Path(scenario)
    if not path.is_file():
        raise ValidationError(f"scenario file {path} does not exist")
    return path


def run_file(path: Path, out: Path, overrides=(), parallel: int = 1, plot: bool = False,
             subcommand: str | None = None) -> list[Path]:
    scenario = load_scenario(path, overrides)
    result = run_scenario(scenario, path.parent, parallel, subcommand)
    return write_results(result, out, plot)


def reproduce(out: Path, parallel: int = 1, plot: bool = False, names=None) -> list[Path]:
    """Run every bundled preset into ``out/<preset>/``."""
    written = []
    for name in names or preset_names():
        log.info("preset %s", name)
        written += run_file(preset_dir() / f"{name}.yaml", out / name, (), parallel, plot)
    return written


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plasmon-entangle",
                                     description="Plasmon-mediated qubit entanglement calculations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "rates": "normalized Gamma_ab and g_ab versus qubit separation",
        "transient": "unpumped transient concurrence (closed form and integrated)",
        "steady": "pumped evolution and stationary state",
        "sweep": "stationary concurrence versus separation or pump strength",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", help="scenario YAML file")
        src.add_argument("--preset", help="bundled scenario name")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scenario key, e.g. pump.rabi='0.5 gamma_aa' (repeatable)")
        p.add_argument("--parallel", type=int, default=1, metavar="N", help="worker threads for sweeps")
        p.add_argument("--plot-script", action="store_true", help="also write a matplotlib script")
    p = sub.add_parser("reproduce", help="run every bundled preset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--parallel", type=int, default=1, metavar="N")
    p.add_argument("--plot-script", action="store_true")
    p.add_argument("--only", nargs="*", metavar="PRESET", help="restrict to these presets")
    sub.add_parser("presets", help="list bundled presets")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            print("\n".join(preset_names()))
            return EXIT_OK
        if getattr(args, "parallel", 1) < 1:
            raise ValidationError("--parallel must be at least 1")
        if args.command == "reproduce":
            files = reproduce(args.out, args.parallel, args.plot_script, args.only)
        else:
            path = resolve_scenario_path(args.scenario, args.preset)
            files = run_file(path, args.out, args.overrides, args.parallel, args.plot_script, args.command)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PlasmonEntangleError as exc:  # pragma: no cover - every family is handled above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
