# src/realizability/strainreal/pipeline/orchestrator.py
import sys
import time
import traceback
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from ..casebook.counterexample import counterexample, printed_wave_residual, sign_convention_audit, torus_obstruction
from ..casebook.vanishing import vanishing_viscosity
from ..cli.argument_parser import RunConfig, explicit_parameters, parse_arguments, resolve_parameters
from ..cli.output_formatter import (
    print_artifacts,
    print_command_summary,
    print_header,
    print_rejection,
    print_run_info,
)
from ..configs.settings import log_level, s3_bucket, s3_prefix, storage_mode, threads
from ..errors import (
    ExpressionSyntaxError,
    HypothesisViolation,
    InvalidInputError,
    LaminateIncompatibleError,
    LaminateNotRealizableError,
    StrainRealError,
    UsageError,
)
from ..fields.expressions import ScalarFieldExpr, parse_expression
from ..fields.grid import Grid2D, matrix_grid_to_csv, sample
from ..fields.operators import curl
from ..fields.residuals import realization_residual
from ..fields.velocity import (
    affine_stream,
    as_matrix,
    check_periodic_part,
    divergence_defect,
    stream_to_velocity,
    strain_of,
)
from ..laminate.laminate import (
    criterion_terms,
    laminate_field,
    laminate_profile,
    realize_laminate,
    strain_compatibility,
)
from ..local.characteristics import trace_characteristic
from ..local.realizer import assemble_local_realization, verify_local
from ..storage.local_filesystem import LocalStorage
from ..storage.s3_storage import S3Storage
from ..utils.config_loader import get_preset, load_run_config
from ..utils.helpers import parse_floats, parse_range, slugify
from ..wave.reconstruct import realize_global
from ..wave.solver import amplitude_sweep
from .artifacts import ArtifactWriter, build_report, emit_plotdata, points_to_csv

CHARACTERISTIC_ANCHORS = 100
PERIODICITY_GRID = Grid2D.square((0.0, 0.0), 1.0, 9)


@dataclass
class CommandResult:
    """What a runner hands back to the orchestrator"""

    summary: dict
    max_residual: Optional[float]
    verdicts: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)


def _expression(params: dict, name: str, periodic: bool = False) -> ScalarFieldExpr:
    try:
        return parse_expression(str(params[name]), periodic=periodic)
    except ExpressionSyntaxError as e:
        raise InvalidInputError(f"--{name.replace('_', '-')} is not a valid field expression: {e}")


def _floats(params: dict, name: str, count: int) -> tuple:
    try:
        return parse_floats(params[name], count, f"--{name.replace('_', '-')}")
    except ValueError as e:
        raise UsageError(str(e))


def _number(params: dict, name: str, kind=float):
    value = params[name]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{name.replace('_', '-')} must be a number, got '{value}'")


def _grid(params: dict) -> Grid2D:
    x0, y0, x1, y1 = _floats(params, "grid", 4)
    n = _number(params, "n", int)
    return Grid2D(x0, y0, x1, y1, n, n)


def _velocity(params: dict):
    """U = R_perp grad u, with the optional average M attached and checked"""
    U = stream_to_velocity(_expression(params, "stream"))
    if params.get("average") is None:
        return U, None
    U = U.with_average(_floats(params, "average", 4))
    return U, check_periodic_part(U, PERIODICITY_GRID)


class RealizationOrchestrator:
    """Runs one command: storage, config echo, computation, report and artifacts"""

    def __init__(self, config: RunConfig, max_workers: int = None):
        self.config = config
        self.max_workers = max_workers or threads()
        self.storage = self._initialize_storage()
        self.command_slug = slugify(config.command)
        self.writer = ArtifactWriter(self.storage, self.command_slug)

    def _initialize_storage(self):
        """Initialize storage backend based on configuration"""
        mode = self.config.storage or storage_mode()

        if mode == "s3":
            bucket = s3_bucket()
            if not bucket:
                raise UsageError(
                    "S3 storage selected but AWS_S3_BUCKET_NAME not configured in .env\n"
                    "Add: AWS_S3_BUCKET_NAME=your-bucket-name"
                )
            prefix = s3_prefix()
            self.storage_label = f"S3 (bucket: {bucket}, prefix: {prefix})"
            return S3Storage(bucket_name=bucket, prefix=prefix)
        self.storage_label = f"Local (directory: {self.config.output_dir})"
        return LocalStorage(base=self.config.output_dir)

    def execute(self) -> dict:
        """Run the configured command and write its artifacts; returns the report"""
        print_header(self.config.command)
        print_run_info(self.storage_label, self.max_workers, self.config.seed)
        self.writer.json("config.echo.json", self.config.to_dict())

        runner = self._runners()[self.config.command]
        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            result = runner(self.config.params, executor)
        elapsed = time.perf_counter() - started

        report = build_report(
            self.config.command,
            result.max_residual,
            verdicts=result.verdicts,
            residuals=result.residuals,
            extra=result.extra,
            timing=elapsed if self.config.timing else None,
        )
        self.writer.json("report.json", report)
        if self.config.plot:
            if result.grids:
                emit_plotdata(self.writer, result.grids)
            else:
                logger.warning(f"'{self.config.command}' produced no grids to plot")

        print_command_summary(self.config.command, result.summary)
        print_artifacts(self.config.output_dir, self.command_slug, self.writer.locations)
        return report

    def _runners(self) -> dict:
        return {
            "fields": self._run_fields,
            "realize local": self._run_realize_local,
            "realize global": self._run_realize_global,
            "wave sweep": self._run_wave_sweep,
            "laminate check": self._run_laminate_check,
            "casebook counterexample": self._run_casebook_counterexample,
            "casebook vanishing": self._run_casebook_vanishing,
            "verify": self._run_verify,
        }

    def _run_fields(self, params: dict, executor: Executor) -> CommandResult:
        U, periodic_mismatch = _velocity(params)
        grid = _grid(params)
        strain = strain_of(U)
        values = {
            "u": sample(U.stream, grid),
            "ux": sample(U.ux, grid),
            "uy": sample(U.uy, grid),
            "curl": sample(curl(U), grid),
        }
        for name, array in values.items():
            self.writer.grid_csv(f"{name}.csv", grid, array)
        e11, e12, e21, e22 = strain.sample(grid)
        self.writer.text("strain.csv", matrix_grid_to_csv(grid, e11, e12, e21, e22))

        defect = divergence_defect(U, grid)
        strain_norm = np.sqrt(2.0 * e11**2 + 2.0 * e12**2)
        values["strain_norm"] = strain_norm
        return CommandResult(
            summary={"Divergence defect": defect, "Min |e(U)|": float(np.min(strain_norm))},
            max_residual=None,
            residuals={"divergence_defect": defect, "periodic_mismatch": periodic_mismatch},
            extra={"grid": grid.describe(), "stream": U.stream.text},
            grids={name: (grid, array) for name, array in values.items()},
        )

    def _run_realize_local(self, params: dict, executor: Executor) -> CommandResult:
        u = _expression(params, "stream")
        center = _floats(params, "center", 2)
        tau_max = None if params.get("tau_max") is None else _number(params, "tau_max")
        real = assemble_local_realization(
            u, center, radius=_number(params, "radius"), tau_max=tau_max,
            nx=_number(params, "nx", int), executor=executor,
        )
        verification = verify_local(real)
        characteristics = self._characteristic_check(real)

        xx, yy = real.original_points()
        p = real.pressure_original()
        self.writer.text("mu.csv", points_to_csv(xx, yy, real.mu))
        self.writer.text("p.csv", points_to_csv(xx, yy, p))
        return CommandResult(
            summary={
                "tau": real.tau,
                "Max residual": verification.max_residual,
                "Orthogonality": verification.orthogonality_residual,
                "Interface jump": real.interface_jump,
                "Picard iterations": real.picard_iterations,
            },
            max_residual=verification.max_residual,
            verdicts={"realized": True},
            residuals=verification.to_dict(),
            extra={
                "tau": real.tau,
                "orthogonality_residual": verification.orthogonality_residual,
                "wave_residual": verification.wave_residual,
                "interface_jump": real.interface_jump,
                "picard_iters": real.picard_iterations,
                "orientation": real.record.to_dict(),
                "c": real.coefficients.c,
                "mu_range": [float(np.min(real.mu)), float(np.max(real.mu))],
                "characteristics": characteristics,
            },
            grids={"mu": (real.grid, real.mu), "p": (real.grid, p)},
        )

    def _characteristic_check(self, real) -> dict:
        """Sensitivity identities of the '+' family at seeded random anchors of the square"""
        rng = np.random.default_rng(self.config.seed)
        tau = real.tau
        anchors = rng.uniform(-tau, tau, size=(CHARACTERISTIC_ANCHORS, 2))
        step = tau / 64.0
        identity, mismatch = 0.0, 0.0
        for x, y in anchors:
            path = trace_characteristic(real.coefficients.extended, (x, y), -tau if x > 0 else tau, step)
            identity = max(identity, abs(float(path.dy_formula[0]) - 1.0))
            mismatch = max(mismatch, path.sensitivity_mismatch())
        return {"anchors": CHARACTERISTIC_ANCHORS, "anchor_identity": identity, "sensitivity_mismatch": mismatch}

    def _run_realize_global(self, params: dict, executor: Executor) -> CommandResult:
        matrix = as_matrix(_floats(params, "average", 4))
        periodic = _expression(params, "stream", periodic=True)
        stream = affine_stream(matrix) + periodic * _number(params, "epsilon_scale")
        U = stream_to_velocity(stream).with_average(matrix)
        check_periodic_part(U, PERIODICITY_GRID)

        level = None if params.get("level") is None else _number(params, "level", int)
        realization = realize_global(
            U, _number(params, "radius"), resolution=_number(params, "resolution"),
            spacing=_number(params, "spacing"), level=level, executor=executor,
        )
        grid = realization.grid
        mu = np.where(realization.mask, realization.mu, np.nan)
        u = np.where(realization.mask, realization.u, np.nan)
        self.writer.grid_csv("mu.csv", grid, mu)
        self.writer.grid_csv("u.csv", grid, u)
        diagnostics = realization.diagnostics
        return CommandResult(
            summary={
                "n_R": diagnostics["n_R"],
                "Lifespan": diagnostics["lifespan"],
                "Jacobian min": diagnostics["jacobian_min"],
                "Max residual": realization.report.max_abs,
            },
            max_residual=realization.report.max_abs,
            verdicts={"realized": True, "blowup": diagnostics["blowup"]},
            residuals={"curl_div": realization.report.to_dict()},
            extra=dict(diagnostics, radius=realization.radius, stream=stream.text),
            grids={"mu": (grid, mu), "u": (grid, u)},
        )

    def _run_wave_sweep(self, params: dict, executor: Executor) -> CommandResult:
        amplitudes = params["amplitudes"]
        try:
            amplitudes = parse_range(amplitudes, "--amplitudes") if isinstance(amplitudes, str) \
                else np.asarray(amplitudes, dtype=float)
        except ValueError as e:
            raise UsageError(str(e))
        sweep = amplitude_sweep(amplitudes, _number(params, "horizon"), _number(params, "resolution"),
                                executor=executor)
        lines = ["amplitude,blowup,lifespan"]
        lines += [f"{r['amplitude']:.17g},{str(r['blowup']).lower()},{r['lifespan']:.17g}" for r in sweep.rows()]
        self.writer.text("lifespan.csv", "\n".join(lines) + "\n")
        return CommandResult(
            summary={"Amplitudes": len(sweep.amplitudes), "Blow-up threshold": sweep.threshold},
            max_residual=None,
            verdicts={"finite_threshold": sweep.threshold is not None},
            extra={"threshold": sweep.threshold, "sweep": sweep.rows()},
        )

    def _run_laminate_check(self, params: dict, executor: Executor) -> CommandResult:
        E1 = _floats(params, "E1", 4)
        E2 = _floats(params, "E2", 4)
        xi = _floats(params, "xi", 2)
        verdict = {"compatible": False, "lambda": None, "realizable": False, "mu_ratio": None,
                   "pressure_jump": None, "reason": None}
        grids = {}
        try:
            verdict["lambda"] = strain_compatibility(E1, E2, xi)
            verdict["compatible"] = True
            inner, bound = criterion_terms(as_matrix(E1), as_matrix(E2))
            verdict["criterion"] = {"inner": inner, "bound": bound}
            realization = realize_laminate(E1, E2, xi)
        except (LaminateIncompatibleError, LaminateNotRealizableError) as e:
            verdict["reason"] = str(e)
        else:
            verdict.update(realizable=True, mu_ratio=realization.mu_ratio,
                           pressure_jump=realization.pressure_jump, phases=realization.to_dict())
            profile_grid = Grid2D.square((0.0, 0.0), 1.0, 65)
            profile = laminate_profile(laminate_field(E1, E2, xi), realization, profile_grid)
            for name in ("mu", "p"):
                self.writer.grid_csv(f"{name}.csv", profile_grid, profile[name])
            grids = {name: (profile_grid, values) for name, values in profile.items()}
        return CommandResult(
            summary={"Compatible": verdict["compatible"], "Realizable": verdict["realizable"],
                     "mu1/mu2": verdict["mu_ratio"]},
            max_residual=None,
            verdicts={"compatible": verdict["compatible"], "realizable": verdict["realizable"]},
            extra=verdict,
            grids=grids,
        )

    def _run_casebook_counterexample(self, params: dict, executor: Executor) -> CommandResult:
        epsilon = _number(params, "epsilon")
        instance = counterexample(epsilon)
        mu = _expression(params, "mu")
        obstruction = torus_obstruction(mu, epsilon, _number(params, "r"))
        grid = _grid(params)
        linear = parse_expression("2*pi*x")
        printed, general = printed_wave_residual(linear, epsilon, grid)
        audit = sign_convention_audit(epsilon, grid)
        self.writer.json("sign_audit.json", audit)
        return CommandResult(
            summary={"Obstruction": obstruction, "Printed residual": printed.max_abs,
                     "General residual": general.max_abs},
            max_residual=general.max_abs,
            verdicts={"torus_realizable": not obstruction > 0.0, **audit["verdict"]},
            residuals={"printed": printed.to_dict(), "general": general.to_dict()},
            extra={"obstruction": obstruction, "r": _number(params, "r"), "mu": mu.text,
                   "instance": instance.to_dict()},
        )

    def _run_casebook_vanishing(self, params: dict, executor: Executor) -> CommandResult:
        f = _expression(params, "f")
        g = _expression(params, "g")
        grid = Grid2D.square((0.0, 0.0), 1.0, _number(params, "n", int))
        verdict = vanishing_viscosity(f, g, grid)
        grids = {}
        if verdict.mu is not None:
            xx, yy = grid.mesh()
            mu = verdict.viscosity(xx, yy)
            self.writer.grid_csv("mu.csv", grid, mu)
            grids = {"mu": (grid, mu)}
        return CommandResult(
            summary={"Verdict": verdict.verdict, "Residual": verdict.residual},
            max_residual=verdict.residual,
            verdicts={"realizable": verdict.realizable},
            extra=verdict.to_dict(),
            grids=grids,
        )

    def _run_verify(self, params: dict, executor: Executor) -> CommandResult:
        U, periodic_mismatch = _velocity(params)
        mu = _expression(params, "mu")
        grid = _grid(params)
        report = realization_residual(mu, U, grid, margin=2)
        mu_values = sample(mu, grid)
        self.writer.grid_csv("mu.csv", grid, mu_values)
        return CommandResult(
            summary={"Max residual": report.max_abs, "L2 residual": report.l2},
            max_residual=report.max_abs,
            residuals={"curl_div": report.to_dict(), "periodic_mismatch": periodic_mismatch},
            extra={"stream": U.stream.text, "mu": mu.text},
            grids={"mu": (grid, mu_values)},
        )


def configure_logging():
    logger.remove()
    logger.add(sys.stderr, level=log_level())


def build_run_config(args, preset: dict = None) -> RunConfig:
    """Merge flags, --config file and preset into one RunConfig"""
    explicit = explicit_parameters(args)
    from_file = load_run_config(args.config_path) if args.config_path else None
    params = resolve_parameters(args.command, explicit, from_file, (preset or {}).get("params"))
    return RunConfig(
        command=args.command,
        params=params,
        output_dir=args.out_base,
        storage=args.storage,
        plot=args.plot,
        timing=args.timing,
        seed=args.seed,
        config_path=args.config_path,
        preset=args.preset,
        explicit=explicit,
    )


def run(argv=None) -> int:
    """Run one command line and return its exit code (0, 1, 2 or 64)"""
    try:
        configure_logging()
        args, preset = parse_arguments(argv, presets_lookup=get_preset)
        config = build_run_config(args, preset)
        RealizationOrchestrator(config).execute()
        return 0
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return UsageError.exit_code
    except StrainRealError as e:
        kind = "hypothesis violated" if isinstance(e, HypothesisViolation) else "numerical failure"
        print_rejection(kind, str(e), e.exit_code)
        return e.exit_code
    except Exception as e:
        print(f"\nFatal error: {e}")
        traceback.print_exc()
        return 1
