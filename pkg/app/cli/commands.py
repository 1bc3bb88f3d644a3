"""Command implementations of the jacobigreen command line."""

import argparse
import logging
import re
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import mpmath
import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from app.cli.output import encode, write
from app.cli.parser import build_parser, flags_from_namespace
from app.config import Settings, get_settings
from app.constants import (
    DEFAULT_VARIANTS,
    CliTail,
    ExitCode,
    Method,
    OutputFormat,
    TableVariant,
)
from app.core.exceptions import (
    ConfigurationError,
    ContourInvalidError,
    JacobiGreenError,
)
from app.core.operator import JacobiOperator
from app.models.physics import CoulombModel, EnergyPoint
from app.models.results import (
    CheckResult,
    ContourSpec,
    ConvergenceRow,
    ConvergenceTable,
    ResidueReport,
)
from app.models.run import RunConfig
from app.operators import build_operator
from app.services.continued_fraction import approximant, bauer_muir_iterated, evaluate
from app.services.greens import GreensService
from app.services.validation import ValidationService

logger = logging.getLogger(__name__)

Payload = dict[str, Any]

_VARIANT = re.compile(r"^bm(\d+)([+-]?)$")
_FOOTER_DPS = 30

# residue tolerances of the validate command
POLE_FREE_TOL = 1e-12
SINGLE_POLE_TOL = 1e-10
MULTI_POLE_TOL = 1e-9


def parse_variant(label: str) -> TableVariant:
    """
    Column label to variant: w=0, w+, w-, bmK (w+ tails) or bmK- (w- tails).

    Raises:
        ConfigurationError: On an unknown label.
    """
    for preset in DEFAULT_VARIANTS:
        if preset.label == label:
            return preset
    match = _VARIANT.match(label)
    if match is None:
        raise ConfigurationError(f"Unknown convergence-table variant '{label}'", "variants")
    tail = CliTail.MINUS if match.group(2) == "-" else CliTail.PLUS
    return TableVariant(label, tail, int(match.group(1)))


def load_config(namespace: argparse.Namespace, settings: Settings) -> RunConfig:
    """
    RunConfig from parsed arguments, an optional config file and the settings.

    Raises:
        ConfigurationError: If the file is missing or a value is invalid.
    """
    file_values: dict[str, Any] = {}
    if namespace.config:
        path = Path(namespace.config)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}", "config")
        fields = {name.lower(): name for name in RunConfig.model_fields}
        for key, value in dotenv_values(path).items():
            name = fields.get(key.strip().lower())
            if name is None:
                raise ConfigurationError(f"Unknown config key '{key}'", key)
            file_values[name] = value
    flags = flags_from_namespace(namespace)
    flags["command"] = namespace.command
    return RunConfig.build(flags, file_values, settings)


def _run_settings(cfg: RunConfig, settings: Settings) -> Settings:
    return settings.model_copy(
        update={
            "tol": cfg.tol,
            "nmax": cfg.nmax,
            "bm_depth": cfg.bm_depth,
            "tail": cfg.tail.value,
            "truncation": cfg.N,
            "table_tol": cfg.table_tol,
        }
    )


def _operator(cfg: RunConfig) -> JacobiOperator:
    return build_operator(cfg.physical_model(), printed_sign=cfg.printed_sign)


def _payload(cfg: RunConfig, result: dict[str, Any], diagnostics: dict[str, Any]) -> Payload:
    return {"config": cfg.public_view(), "result": result, "diagnostics": diagnostics}


def cmd_green(cfg: RunConfig, settings: Settings | None = None) -> tuple[ExitCode, Payload]:
    """
    Green's matrix of the configured model at the configured energy.

    Method "both" also reports the largest element-relative deviation
    between the two constructions.
    """
    greens = GreensService(_run_settings(cfg, settings or get_settings()))
    op = _operator(cfg)
    energy = cfg.energy
    logger.info(f"[CLI] green: {op.name} at eps={energy.eps}, N={cfg.N}, {cfg.method.value}")

    matrices = {}
    if cfg.method in (Method.B, Method.BOTH):
        matrices[Method.B] = greens.greens_matrix_B(op, energy, cfg.N)
    if cfg.method in (Method.A, Method.BOTH):
        matrices[Method.A] = greens.greens_matrix_A(op, energy, cfg.N)

    primary = matrices[Method.B] if Method.B in matrices else matrices[Method.A]
    result: dict[str, Any] = {
        "method": cfg.method.value,
        "N": primary.N,
        "ratio": primary.ratio,
        "matrix": primary.values,
    }
    if len(matrices) == 2:
        result["deviation"] = greens.max_deviation(
            matrices[Method.A].values, matrices[Method.B].values
        )
    diagnostics = {
        "n_used": primary.diagnostics.get("n_used"),
        "converged": primary.diagnostics.get("converged", True),
        "tolerance": primary.diagnostics.get("tolerance"),
        "bm_depth": primary.diagnostics.get("bm_depth", 0),
        "residuals": {
            "symmetry": primary.symmetry_error(),
            "recurrence": greens.recurrence_residual(op, primary),
        },
    }
    if Method.A in matrices:
        diagnostics["method_a"] = matrices[Method.A].diagnostics
    return ExitCode.OK, _payload(cfg, result, diagnostics)


def _footer(op: JacobiOperator, eps: complex) -> complex | None:
    if not op.has_exact_g00:
        return None
    try:
        with mpmath.workdps(_FOOTER_DPS):
            return complex(op.exact_g00_mp(mpmath.mpc(eps)))
    except (JacobiGreenError, ValueError, ZeroDivisionError):
        return None


def build_convergence_table(
    greens: GreensService,
    op: JacobiOperator,
    eps: EnergyPoint,
    variants: Sequence[TableVariant],
    depth: int,
    table_tol: float,
    nmax: int,
) -> ConvergenceTable:
    """
    Approximants of G00 = 1/(J00 + J01 r0) at depths 1..depth for each variant.

    A variant whose tail cannot be resolved, or whose approximant breaks down
    at some depth, gets None entries and a reason instead of failing the table.
    """
    e = eps.eps
    j00, j01 = complex(op.diag(0, e)), complex(op.offdiag(0, e))
    table = ConvergenceTable(variants=[v.label for v in variants], exact=_footer(op, e))
    columns: list[list[complex | None]] = []
    for variant in variants:
        column: list[complex | None] = [None] * depth
        try:
            tail = greens.resolve_tail(op, e, variant.tail)
            cf = bauer_muir_iterated(greens.continued_fraction(op, e), tail, variant.bm_depth)
            w = cf.tail_value(tail)
            for n in range(1, depth + 1):
                try:
                    value = 1 / (j00 - j01 * approximant(cf, n, w))
                except (JacobiGreenError, ZeroDivisionError):
                    continue
                column[n - 1] = value if np.isfinite(value) else None
            report = evaluate(cf, tail, tol=table_tol, nmax=nmax, accelerate=False)
            table.converged[variant.label] = report.converged
            if not report.converged:
                table.reasons[variant.label] = f"not converged to {table_tol:g} within depth {nmax}"
        except JacobiGreenError as exc:
            table.converged[variant.label] = False
            table.reasons[variant.label] = exc.message
        columns.append(column)

    table.rows = [
        ConvergenceRow(n=n, values=[column[n - 1] for column in columns])
        for n in range(1, depth + 1)
    ]
    return table


def cmd_converge(cfg: RunConfig, settings: Settings | None = None) -> tuple[ExitCode, Payload]:
    """Convergence table of G00 for the configured variants."""
    greens = GreensService(_run_settings(cfg, settings or get_settings()))
    op = _operator(cfg)
    op.check_energy(cfg.energy.eps)
    variants = [parse_variant(label) for label in cfg.variants]
    logger.info(f"[CLI] converge: {op.name} at eps={cfg.energy.eps}, {len(variants)} variants")
    table = build_convergence_table(
        greens, op, cfg.energy, variants, cfg.depth, cfg.table_tol, cfg.nmax
    )
    diagnostics = {"converged": table.converged, "reasons": table.reasons}
    return ExitCode.OK, _payload(cfg, {"table": table.model_dump()}, diagnostics)


def _residue_check(report: ResidueReport, threshold: float) -> CheckResult:
    detail = f"integral {report.integral!r}, expected {report.expected!r}"
    return CheckResult.at_most(f"contour {report.label}", report.abs_error, threshold, detail)


def cmd_validate(cfg: RunConfig, settings: Settings | None = None) -> tuple[ExitCode, Payload]:
    """
    Contour, pole-matching and structural checks.

    Coulomb runs add the pole-free, single-pole and two-pole contours and the
    pole-matching check to the structural invariants.
    """
    run_settings = _run_settings(cfg, settings or get_settings())
    greens = GreensService(run_settings)
    validation = ValidationService(run_settings, greens)
    op = _operator(cfg)
    checks: list[CheckResult] = []

    model = cfg.physical_model()
    if isinstance(model, CoulombModel):
        if cfg.contour is not None:
            re_c, im_c, rx, ry = cfg.contour
            try:
                custom = ContourSpec(
                    center=complex(re_c, im_c),
                    radius_x=rx,
                    radius_y=ry,
                    points_per_quadrant=run_settings.contour_points,
                )
            except ValidationError as exc:
                message = exc.errors()[0]["msg"]
                raise ConfigurationError(f"Invalid contour: {message}", "contour") from exc
            report = validation.residue_report(op, model, custom, "custom")
            checks.append(_residue_check(report, SINGLE_POLE_TOL))
        if model.Zp > 0:
            for report in validation.residue_suite(model, cfg.n_poles, op):
                threshold = POLE_FREE_TOL if not report.poles_enclosed else SINGLE_POLE_TOL
                checks.append(_residue_check(report, threshold))
            two_pole = validation.multi_pole_contour(model, 2)
            report = validation.residue_report(op, model, two_pole, "two-pole")
            checks.append(_residue_check(report, MULTI_POLE_TOL))
            checks.extend(validation.pole_matching(op, model))

    checks.extend(validation.invariant_suite(op, cfg.energy, cfg.N))
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning(f"[CLI] validate: {len(failed)} checks failed: {', '.join(failed)}")
    code = ExitCode.CHECK_FAILED if failed else ExitCode.OK
    result = {"checks": [check.model_dump() for check in checks], "passed": not failed}
    return code, _payload(cfg, result, {"failed": failed})


def cmd_scan(cfg: RunConfig, settings: Settings | None = None) -> tuple[ExitCode, Payload]:
    """G00 and the density of states -Im G00 / pi along a straight line of energies."""
    greens = GreensService(_run_settings(cfg, settings or get_settings()))
    op = _operator(cfg)
    start = complex(cfg.eps_re, cfg.eps_im)
    end = complex(cfg.eps_end_re, cfg.eps_end_im)
    points: list[dict[str, Any]] = []
    for eps in np.linspace(start, end, cfg.points):
        point: dict[str, Any] = {"eps": complex(eps), "g00": None, "dos": None}
        try:
            g00 = greens.g00(op, complex(eps))
            point.update(g00=g00, dos=-g00.imag / np.pi)
        except JacobiGreenError as exc:
            point["error"] = exc.to_record()
            logger.warning(f"[CLI] scan: eps={complex(eps)} failed with {exc.code}")
        points.append(point)
    failures = sum(1 for p in points if p["g00"] is None)
    return ExitCode.OK, _payload(cfg, {"scan": points}, {"failures": failures})


COMMANDS = {
    "green": cmd_green,
    "converge": cmd_converge,
    "validate": cmd_validate,
    "scan": cmd_scan,
}


def exit_code_for(error: JacobiGreenError) -> ExitCode:
    """Configuration and contour errors exit with 2, other numerical failures with 3."""
    if isinstance(error, ConfigurationError | ContourInvalidError):
        return ExitCode.CONFIG_ERROR
    return ExitCode.NUMERICAL_ERROR


def run(argv: Sequence[str] | None = None, settings: Settings | None = None) -> int:
    """
    Parse arguments, run one command and write its payload.

    Returns:
        Process exit code.
    """
    namespace = build_parser().parse_args(argv)
    settings = settings or get_settings()
    fmt = OutputFormat(namespace.output or settings.output)
    path = namespace.output_path
    try:
        cfg = load_config(namespace, settings)
        fmt, path = cfg.output, cfg.output_path
        code, payload = COMMANDS[cfg.command](cfg, settings)
    except JacobiGreenError as exc:
        code = exit_code_for(exc)
        logger.error(f"[CLI] {exc.code}: {exc.message}")
        payload = {"error": exc.to_record()}
    write(encode(payload, fmt), path)
    return int(code)
