# src/realizability/strainreal/cli/argument_parser.py
import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

from ..configs.settings import out_dir
from ..errors import UsageError

# command -> (defaults, required parameters); parser defaults stay None so that
# explicit flags can be told apart from --config / --preset values
COMMANDS = {
    "fields": ({"average": None, "grid": "-1,-1,1,1", "n": 65}, ("stream",)),
    "realize local": ({"center": "0,0", "radius": 1.0, "tau_max": None, "nx": 65}, ("stream",)),
    "realize global": (
        {"stream": "0", "radius": 1.0, "epsilon_scale": 1.0, "resolution": 0.05, "spacing": 0.05, "level": None},
        ("average",),
    ),
    "wave sweep": ({"horizon": 3.5, "resolution": 0.05}, ("amplitudes",)),
    "laminate check": ({}, ("E1", "E2", "xi")),
    "casebook counterexample": ({"r": 0.25, "mu": "1", "grid": "-0.5,-0.5,0.5,0.5", "n": 33}, ("epsilon",)),
    "casebook vanishing": ({"n": 41}, ("f", "g")),
    "verify": ({"average": None, "grid": "-1,-1,1,1", "n": 65}, ("stream", "mu")),
}


class StrainRealArgumentParser(argparse.ArgumentParser):
    """Usage problems raise UsageError (exit 64) instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage().rstrip()}")


@dataclass
class RunConfig:
    command: str
    params: dict
    output_dir: str
    storage: Optional[str] = None
    plot: bool = False
    timing: bool = False
    seed: int = 0
    config_path: Optional[str] = None
    preset: Optional[str] = None
    explicit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": dict(sorted(self.params.items())),
            "seed": self.seed,
            "plot": self.plot,
            "config_path": self.config_path,
            "preset": self.preset,
        }


def _leaf(subparsers, name: str, command: str, help_text: str):
    leaf = subparsers.add_parser(name, help=help_text)
    leaf.set_defaults(command=command)
    return leaf


def build_parser(default_out: str = None) -> StrainRealArgumentParser:
    """CLI arguments for the isotropic realizability toolkit"""
    default_out = default_out or out_dir()
    parser = StrainRealArgumentParser(
        prog="python -m src.main",
        description="strainreal - isotropic realizability of 2D strain fields for Stokes flow",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Usage examples:

  --LOCAL AND GLOBAL REALIZATION:

  # Viscosity near a point where the strain does not vanish
  python -m src.main realize local --stream "(x^2-y^2)/2" --center 0,0

  # Viscosity on a disk for a periodic perturbation of U = M X
  python -m src.main realize global --stream "sin(2*pi*y)/(2*pi^2)" --average 1,0,0,-1 --radius 1 --epsilon-scale 0.01

  --LAMINATES AND SINGULAR CASES:

  python -m src.main laminate check --E1 0,1,1,0 --E2 0,2,2,0 --xi 1,0
  python -m src.main casebook counterexample --epsilon 0.1 --r 0.25 --mu "2+cos(2*pi*x)"
  python -m src.main casebook vanishing --f "x^2" --g "x^2"

  --EXPERIMENTS AND CHECKS:

  python -m src.main wave sweep --amplitudes 0.5:20:8
  python -m src.main verify --stream "x*y" --mu "1"
  python -m src.main fields --stream "x^2*y" --grid -1,-1,1,1 --n 33 --plot

  --CONFIGURATION:

  # Named worked example, or flags from a JSON file (explicit flags win)
  python -m src.main --preset local-worked
  python -m src.main --config run.json realize local --nx 129

Exit codes: 0 success, 2 hypothesis violated, 1 numerical failure, 64 usage error.
        """,
    )
    parser.add_argument("--out", dest="out_base", default=default_out,
                        help=f"Base output directory (default: {default_out})")
    parser.add_argument("--storage", choices=["local", "s3"], default=None,
                        help="Storage backend; auto-detects 's3' when AWS_S3_BUCKET_NAME is set")
    parser.add_argument("--config", dest="config_path", default=None,
                        help="JSON file of flag values (keys are flag names with underscores)")
    parser.add_argument("--preset", default=None, help="Named worked example from configs/presets.json")
    parser.add_argument("--plot", action="store_true", help="Also write gnuplot-ready .dat matrices")
    parser.add_argument("--timing", action="store_true", help="Record wall-clock timing in report.json")
    parser.add_argument("--seed", type=int, default=0, help="Seed for randomized checks (default: 0)")

    commands = parser.add_subparsers(dest="group", metavar="command")

    fields = _leaf(commands, "fields", "fields", "Sample u, U, e(U) and curl U on a grid")
    fields.add_argument("--stream", help="Stream function u, U = R_perp grad u")
    fields.add_argument("--average", help="Average matrix m11,m12,m21,m22 (optional)")
    fields.add_argument("--grid", help="Bounds x0,y0,x1,y1 (default: -1,-1,1,1)")
    fields.add_argument("--n", type=int, help="Samples per axis (default: 65)")

    realize = commands.add_parser("realize", help="Construct a viscosity")
    realize_kinds = realize.add_subparsers(dest="kind", metavar="kind")
    local = _leaf(realize_kinds, "local", "realize local", "Characteristics near a point")
    local.add_argument("--stream", help="Stream function u")
    local.add_argument("--center", help="Point X* as x,y (default: 0,0)")
    local.add_argument("--radius", type=float, help="Working radius (default: 1)")
    local.add_argument("--tau-max", dest="tau_max", type=float, help="Upper bound on the half-width tau")
    local.add_argument("--nx", type=int, help="Odd number of samples per axis (default: 65)")
    glob = _leaf(realize_kinds, "global", "realize global", "Canonical wave equation on a disk")
    glob.add_argument("--stream", help="Stream of the periodic part, scaled by --epsilon-scale (default: 0)")
    glob.add_argument("--average", help="Average matrix m11,m12,m21,m22")
    glob.add_argument("--radius", type=float, help="Disk radius R (default: 1)")
    glob.add_argument("--epsilon-scale", dest="epsilon_scale", type=float, help="Scale of the periodic part (default: 1)")
    glob.add_argument("--resolution", type=float, help="Canonical lattice spacing (default: 0.05)")
    glob.add_argument("--spacing", type=float, help="Output grid spacing (default: 0.05)")
    glob.add_argument("--level", type=int, help="Override the truncation level n_R")

    wave = commands.add_parser("wave", help="Semilinear wave experiments")
    wave_kinds = wave.add_subparsers(dest="kind", metavar="kind")
    sweep = _leaf(wave_kinds, "sweep", "wave sweep", "Blow-up lifespan against forcing amplitude")
    sweep.add_argument("--amplitudes", help="start:stop:steps")
    sweep.add_argument("--horizon", type=float, help="Time horizon (default: 3.5)")
    sweep.add_argument("--resolution", type=float, help="Space step (default: 0.05)")

    laminate = commands.add_parser("laminate", help="Rank-one laminates")
    laminate_kinds = laminate.add_subparsers(dest="kind", metavar="kind")
    check = _leaf(laminate_kinds, "check", "laminate check", "Compatibility and realizability of two phases")
    check.add_argument("--E1", dest="E1", help="Phase strain a,b,c,d")
    check.add_argument("--E2", dest="E2", help="Phase strain a,b,c,d")
    check.add_argument("--xi", help="Lamination direction x,y")

    casebook = commands.add_parser("casebook", help="Singular worked examples")
    cases = casebook.add_subparsers(dest="kind", metavar="kind")
    counter = _leaf(cases, "counterexample", "casebook counterexample", "Torus obstruction and sign audit")
    counter.add_argument("--epsilon", type=float, help="Perturbation size eps > 0")
    counter.add_argument("--r", type=float, help="Strip half-width, 0 < r < 1/2 (default: 0.25)")
    counter.add_argument("--mu", help="Positive viscosity, 1-periodic in x (default: 1)")
    counter.add_argument("--grid", help="Audit grid bounds (default: -0.5,-0.5,0.5,0.5)")
    counter.add_argument("--n", type=int, help="Audit samples per axis (default: 33)")
    vanishing = _leaf(cases, "vanishing", "casebook vanishing", "Strain vanishing at the origin")
    vanishing.add_argument("--f", help="f(x) with f(0) = 0")
    vanishing.add_argument("--g", help="g(y) with g(0) = 0")
    vanishing.add_argument("--n", type=int, help="Check grid samples per axis on [-1, 1]^2 (default: 41)")

    verify = _leaf(commands, "verify", "verify", "Residual of a given viscosity")
    verify.add_argument("--stream", help="Stream function u")
    verify.add_argument("--mu", help="Viscosity expression")
    verify.add_argument("--average", help="Average matrix (optional)")
    verify.add_argument("--grid", help="Bounds x0,y0,x1,y1 (default: -1,-1,1,1)")
    verify.add_argument("--n", type=int, help="Samples per axis (default: 65)")
    return parser


def explicit_parameters(args: argparse.Namespace) -> dict:
    defaults, required = COMMANDS[args.command]
    names = set(defaults) | set(required)
    return {name: getattr(args, name) for name in sorted(names) if getattr(args, name, None) is not None}


def resolve_parameters(command: str, explicit: dict, config: dict = None, preset: dict = None) -> dict:
    """explicit flags > --config values > --preset values > defaults"""
    if command not in COMMANDS:
        raise UsageError(f"unknown command '{command}'")
    defaults, required = COMMANDS[command]
    known = set(defaults) | set(required)
    params = dict(defaults)
    for source, label in ((preset or {}, "preset"), (config or {}, "config")):
        unknown = sorted(set(source) - known)
        if unknown:
            raise UsageError(f"{label} keys not accepted by '{command}': {', '.join(unknown)}")
        params.update({k: v for k, v in source.items() if v is not None})
    params.update(explicit)
    missing = [name for name in required if params.get(name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise UsageError(f"'{command}' needs {flags} (as a flag, in --config or through --preset)")
    return params


def parse_arguments(argv=None, presets_lookup=None) -> tuple:
    """
    Parse argv into (namespace, preset); without a command the preset's command is used
    """
    parser = build_parser()
    argv = list(argv) if argv is not None else sys.argv[1:]
    args = parser.parse_args(argv)
    preset = None
    if args.preset is not None:
        if presets_lookup is None:
            raise UsageError("--preset given but no preset table is available")
        preset = presets_lookup(args.preset)
    if getattr(args, "command", None) is None:
        if preset is None:
            raise UsageError(f"a command is required\n{parser.format_usage().rstrip()}")
        args = parser.parse_args((argv or []) + preset["command"].split())
    if preset is not None and preset["command"] != args.command:
        raise UsageError(f"preset '{args.preset}' is for '{preset['command']}', not '{args.command}'")
    return args, preset
