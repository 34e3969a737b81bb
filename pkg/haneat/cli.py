"""Command line front end: ``python -m haneat <command> [flags]``."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import EvolutionConfig, coerce_field, load_config_file, settings
from .data import FIXTURES
from .errors import ConfigError, HaneatError
from .experiment import (
    ABLATION_POPULATION,
    ExperimentResult,
    ExperimentSpec,
    ablate_mutation,
    compare,
    run_experiment,
    run_fixtures,
)

logger = logging.getLogger("haneat")

# CLI flag -> (target, field name)
_FLAG_FIELDS = {
    "dataset": ("spec", "dataset"),
    "mode": ("spec", "mode"),
    "activation": ("spec", "activation"),
    "seed": ("spec", "seed"),
    "replicates": ("spec", "replicates"),
    "folds": ("spec", "folds"),
    "out": ("spec", "out_dir"),
    "parallel": ("spec", "parallel"),
    "log_every": ("spec", "log_every"),
    "task": ("spec", "task"),
    "rates": ("spec", "rates"),
    "generations": ("evolution", "max_generations"),
    "population": ("evolution", "population_size"),
    "catalog": ("evolution", "catalog"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON file of EvolutionConfig/ExperimentSpec fields")
    common.add_argument("--dataset", help="CSV path, fixture name or benchmark name (cholesterol, engine, cancer)")
    common.add_argument("--mode", help="heterogeneous | homogeneous | sweep")
    common.add_argument("--activation", help="hidden activation for homogeneous mode")
    common.add_argument("--catalog", help="comma-separated hidden activations available to new nodes")
    common.add_argument("--seed", type=int)
    common.add_argument("--generations", type=int)
    common.add_argument("--population", type=int)
    common.add_argument("--replicates", type=int)
    common.add_argument("--folds", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--parallel", type=int, metavar="N")
    common.add_argument("--log-every", type=int, metavar="N")
    common.add_argument("--task", choices=("regression", "classification"))
    common.add_argument("--rates", help="comma-separated mutate-activation rates for the sweep")
    common.add_argument("--log-level", default="INFO")

    parser = _Parser(prog="haneat", description="Neuroevolution with evolvable per-node activation functions.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    commands.add_parser("run", parents=[common], help="run one experiment spec over CV splits")
    commands.add_parser("compare", parents=[common], help="HA-NEAT against every homogeneous arm")
    commands.add_parser("ablate-mutation", parents=[common], help="mutate-activation rate sweep")
    fixtures = commands.add_parser("fixtures", parents=[common], help="evolve on the 1-D fixture targets")
    fixtures.add_argument("--fixture", action="append", choices=FIXTURES, help="repeatable; default all")
    serve = commands.add_parser("serve", parents=[common], help="start the experiment tool server")
    serve.add_argument("--host", default=settings.host)
    serve.add_argument("--port", type=int, default=settings.port)
    return parser


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Defaults, then the config file, then explicit flags."""
    evolution_overrides, spec_overrides = load_config_file(args.config) if args.config else ({}, {})
    for flag, (target, name) in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if target == "spec":
            spec_overrides[name] = coerce_field(ExperimentSpec, name, value)
        else:
            evolution_overrides[name] = value
    evolution = EvolutionConfig().with_overrides(**evolution_overrides)
    return replace(ExperimentSpec(), evolution=evolution, **spec_overrides).validate()


def _population_is_set(args: argparse.Namespace) -> bool:
    """True when --population or the config file chose a population size."""
    if args.population is not None:
        return True
    return bool(args.config) and "population_size" in load_config_file(args.config)[0]


def _print_result(result: ExperimentResult) -> None:
    for arm in result.arms:
        print(json.dumps(arm.to_dict()))
    print(f"artifacts: {result.out_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=args.log_level.upper(),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        if args.command == "serve":
            import uvicorn

            from .server import build_app

            uvicorn.run(build_app(settings), host=args.host, port=args.port, reload=False)
            return 0

        spec = build_spec(args)
        if args.command == "run":
            _print_result(run_experiment(spec))
        elif args.command == "compare":
            _print_result(compare(spec))
        elif args.command == "ablate-mutation":
            _print_result(ablate_mutation(spec, None if _population_is_set(args) else ABLATION_POPULATION))
        elif args.command == "fixtures":
            names = args.fixture or list(FIXTURES)
            out_dir = Path(spec.out_dir) / "fixtures"
            for summary in run_fixtures(spec.evolution, names, spec.replicates, out_dir, spec.log_every):
                print(json.dumps(summary.to_dict()))
            print(f"artifacts: {out_dir}")
        return 0
    except HaneatError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except Exception:
        logger.exception("Internal error")
        return 3


if __name__ == "__main__":
    sys.exit(main())
