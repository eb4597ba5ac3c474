"""Command-line entry point.

Run with:
    python -m catgate state coherent --alpha 0.92
    python -m catgate figures fig4 --output-dir ./output
"""

import argparse
import json
import logging
import sys
from typing import Optional

from catgate.cli import commands
from catgate.cli.middleware import run_command
from catgate.cli.models import load_run_config
from catgate.config import settings

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run configuration")
    group.add_argument("--config", dest="config_file", help="flat KEY=value config file")
    group.add_argument("--preset", dest="preset", help="shipped preset name (e.g. fig3a)")
    group.add_argument("--output-dir", dest="OUTPUT_DIR")
    group.add_argument("--log-level", dest="log_level", default=None)
    group.add_argument("--cutoff", dest="CUTOFF", type=int)
    group.add_argument("--entangled-cutoff", dest="ENTANGLED_CUTOFF", type=int)
    group.add_argument("--seed", dest="SEED", type=int)
    group.add_argument("--T", dest="T", type=float, help="beamsplitter transmissivity")
    group.add_argument("--xi", dest="XI", type=float, help="modal purity")
    group.add_argument("--kappa", dest="KAPPA", type=float, help="APD efficiency")
    group.add_argument("--eta", dest="ETA", type=float, help="homodyne efficiency")
    group.add_argument("--s", dest="S", type=float, help="squeezing factor")
    group.add_argument("--h", dest="H", type=float, help="parasite gain")
    group.add_argument("--alpha", dest="ALPHA", type=float)
    group.add_argument("--theta", dest="THETA", type=float)
    group.add_argument("--phi", dest="PHI", type=float)
    group.add_argument("--n", dest="N", type=int, help="photon number for the fock state")
    group.add_argument("--phases", dest="PHASES", help="comma-separated LO phases")
    group.add_argument("--phase-count", dest="PHASE_COUNT", type=int)
    group.add_argument("--samples", dest="SAMPLES_PER_PHASE", type=int)
    group.add_argument("--bins", dest="BINS", type=int)
    group.add_argument("--mle-iterations", dest="MLE_ITERATIONS", type=int)
    group.add_argument("--theta-points", dest="THETA_POINTS", type=int)
    group.add_argument("--phi-points", dest="PHI_POINTS", type=int)
    group.add_argument("--xi-values", dest="XI_VALUES")
    group.add_argument("--alpha-values", dest="ALPHA_VALUES")
    group.add_argument("--t-values", dest="T_VALUES")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="catgate",
        description="Simulation and characterization of photon-subtraction phase gates on cat-state qubits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    state = sub.add_parser("state", parents=[common], help="write a state as JSON")
    state.add_argument("name", choices=commands.STATE_NAMES)
    state.add_argument("--wigner", action="store_true", help="also write the Wigner grid CSV")

    homodyne = sub.add_parser("simulate-homodyne", parents=[common], help="synthetic quadrature data")
    homodyne.add_argument("--state-file", help="density/ket JSON; defaults to the (s, h) source model")

    tomo = sub.add_parser("tomo", parents=[common], help="maximum-likelihood reconstruction")
    tomo.add_argument("input", help="quadrature CSV")

    fit = sub.add_parser("fit", parents=[common], help="fit (s, h) and optionally xi")
    fit.add_argument("source", help="quadrature CSV of the source state")
    fit.add_argument("--gated", help="quadrature CSV taken after the gate")

    sub.add_parser("pipeline", parents=[common], help="fit-then-predict pipeline on synthetic data")
    sub.add_parser("sweep-bloch", parents=[common], help="Bloch-sphere fidelity map")
    sub.add_parser("entangled-fidelity", parents=[common], help="entangled-input gate fidelity")
    sub.add_parser("cat-adequacy", parents=[common], help="adequacy of the cat qubit vs alpha")

    figures = sub.add_parser("figures", parents=[common], help="CSV data for the figures")
    figures.add_argument("figure", choices=commands.FIGURE_PRESETS)
    return parser


def _dispatch(args: argparse.Namespace) -> dict:
    overrides = {k: v for k, v in vars(args).items() if k.isupper()}
    preset = args.preset
    if args.command == "figures" and preset is None:
        preset = args.figure
    config = load_run_config(args.config_file, preset=preset, overrides=overrides)

    if args.command == "state":
        return commands.cmd_state(config, args.name, with_wigner=args.wigner)
    if args.command == "simulate-homodyne":
        return commands.cmd_simulate_homodyne(config, args.state_file)
    if args.command == "tomo":
        return commands.cmd_tomo(config, args.input)
    if args.command == "fit":
        return commands.cmd_fit(config, args.source, args.gated)
    if args.command == "pipeline":
        return commands.cmd_pipeline(config)
    if args.command == "sweep-bloch":
        return commands.cmd_sweep_bloch(config)
    if args.command == "entangled-fidelity":
        return commands.cmd_entangled_fidelity(config)
    if args.command == "cat-adequacy":
        return commands.cmd_cat_adequacy(config)
    return commands.cmd_figures(config, args.figure)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    code, result = run_command(args.command, _dispatch, args)
    if result is not None:
        print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
