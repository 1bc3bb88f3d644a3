"""Argument parser of the jacobigreen command line."""

import argparse
from typing import Any

from app.constants import CliTail, Method, ModelKind, OutputFormat


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat key=value file with run options")
    common.add_argument("--log-level", dest="log_level", help="Logging level (default: INFO)")

    model = common.add_argument_group("model")
    model.add_argument("--model", choices=[m.value for m in ModelKind])
    model.add_argument("--D", type=int, help="Spatial dimension")
    model.add_argument("--l", type=int, help="Partial wave")
    model.add_argument("--Zp", type=float, help="Scaled charge Z' = 2mZ/hbar^2")
    model.add_argument("--bS", type=float, help="Coulomb-Sturmian scale parameter")
    model.add_argument("--omega", type=float, help="Oscillator frequency")
    model.add_argument("--omegaP", type=float, help="Basis frequency")
    model.add_argument(
        "--printed-sign",
        dest="printed_sign",
        action="store_true",
        default=None,
        help="Flip the sign of the Coulomb charge term (negative control)",
    )

    energy = common.add_argument_group("energy")
    energy.add_argument(
        "--eps", nargs=2, type=float, metavar=("RE", "IM"), help="Scaled Coulomb energy"
    )
    energy.add_argument(
        "--E", nargs="+", type=float, metavar="VALUE", help="Oscillator energy: RE [IM]"
    )

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--N", type=int, help="Truncation size")
    numerics.add_argument("--method", choices=[m.value for m in Method])
    numerics.add_argument("--tail", choices=[t.value for t in CliTail])
    numerics.add_argument("--bm-depth", dest="bm_depth", type=int, help="Bauer-Muir levels")
    numerics.add_argument("--tol", type=float, help="Relative tolerance")
    numerics.add_argument("--nmax", type=int, help="Maximum continued-fraction depth")

    output = common.add_argument_group("output")
    output.add_argument("--output", choices=[f.value for f in OutputFormat])
    output.add_argument("--out", dest="output_path", help="Write the payload to this file")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with the green, converge, validate and scan subcommands."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="jacobigreen",
        description="Green's matrices of Jacobi-matrix Hamiltonians by continued fractions.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("green", parents=[common], help="Truncated Green's matrix")

    converge = commands.add_parser(
        "converge", parents=[common], help="Approximants of G00 against depth"
    )
    converge.add_argument("--depth", type=int, help="Number of table rows")
    converge.add_argument(
        "--variants", help="Comma-separated columns, e.g. w=0,w+,w-,bm1,bm8 or bm3- for w- tails"
    )
    converge.add_argument("--table-tol", dest="table_tol", type=float)

    validate = commands.add_parser(
        "validate", parents=[common], help="Contour, pole and structural checks"
    )
    validate.add_argument("--n-poles", dest="n_poles", type=int, help="Single-pole contours (0-3)")
    validate.add_argument(
        "--contour",
        nargs=4,
        type=float,
        metavar=("RE", "IM", "RX", "RY"),
        help="Extra ellipse checked against the enclosed residues",
    )

    scan = commands.add_parser("scan", parents=[common], help="G00 along a line of energies")
    scan.add_argument(
        "--eps-end", dest="eps_end", nargs=2, type=float, metavar=("RE", "IM"), required=True
    )
    scan.add_argument("--points", type=int, help="Number of energies (default: 11)")
    return parser


def flags_from_namespace(namespace: argparse.Namespace) -> dict[str, Any]:
    """RunConfig fields given on the command line; absent options map to None."""
    values = dict(vars(namespace))
    values.pop("config", None)
    values.pop("log_level", None)

    eps = values.pop("eps", None)
    E = values.pop("E", None)
    if eps is None and E is not None:
        eps = [E[0], E[1] if len(E) > 1 else 0.0]
    if eps is not None:
        values["eps_re"], values["eps_im"] = eps
    eps_end = values.pop("eps_end", None)
    if eps_end is not None:
        values["eps_end_re"], values["eps_end_im"] = eps_end
    return {k: v for k, v in values.items() if v is not None}
