"""Payload encoders for the command line: json, csv and text."""

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from app.constants import FLOAT_DIGITS, OutputFormat


def fmt_float(value: float) -> str:
    """Float with 17 significant digits, enough to reproduce it exactly."""
    return format(float(value), f".{FLOAT_DIGITS}g")


def complex_record(value: complex | None) -> dict[str, float] | None:
    """Complex number as {"re", "im"}."""
    if value is None:
        return None
    z = complex(value)
    return {"re": z.real, "im": z.imag}


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, complex | np.complexfloating):
        return complex_record(complex(value))
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer | np.bool_):
        return value.item()
    return value


def encode_json(payload: dict[str, Any]) -> str:
    """JSON with complex numbers as {"re", "im"}; float repr round-trips exactly."""
    return json.dumps(_jsonable(payload), indent=2, allow_nan=True) + "\n"


def _csv_rows(payload: dict[str, Any]) -> list[list[str]]:
    if "error" in payload:
        return [["key", "value"]] + [[k, str(v)] for k, v in payload["error"].items()]

    result = payload["result"]
    if "matrix" in result:
        matrix = np.asarray(result["matrix"])
        rows = [["i", "j", "re", "im"]]
        for (i, j), z in np.ndenumerate(matrix):
            rows.append([str(i), str(j), fmt_float(z.real), fmt_float(z.imag)])
        return rows
    if "table" in result:
        table = result["table"]
        header = ["n"]
        for label in table["variants"]:
            header += [f"{label}_re", f"{label}_im"]
        rows = [header]
        for row in table["rows"]:
            line = [str(row["n"])]
            for z in row["values"]:
                line += ["", ""] if z is None else [fmt_float(z.real), fmt_float(z.imag)]
            rows.append(line)
        if table.get("exact") is not None:
            exact = complex(table["exact"])
            rows.append(["exact", fmt_float(exact.real), fmt_float(exact.imag)])
        return rows
    if "checks" in result:
        rows = [["name", "passed", "value", "threshold", "detail"]]
        for check in result["checks"]:
            rows.append(
                [
                    check["name"],
                    str(check["passed"]).lower(),
                    "" if check["value"] is None else fmt_float(check["value"]),
                    "" if check["threshold"] is None else fmt_float(check["threshold"]),
                    check["detail"],
                ]
            )
        return rows
    rows = [["eps_re", "eps_im", "g00_re", "g00_im", "dos"]]
    for point in result["scan"]:
        eps, g00 = complex(point["eps"]), point["g00"]
        if g00 is None:
            rows.append([fmt_float(eps.real), fmt_float(eps.imag), "", "", ""])
            continue
        g = complex(g00)
        rows.append(
            [fmt_float(eps.real), fmt_float(eps.imag), fmt_float(g.real), fmt_float(g.imag)]
            + [fmt_float(point["dos"])]
        )
    return rows


def encode_csv(payload: dict[str, Any]) -> str:
    """Flat table of the result; complex values take two columns."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(_csv_rows(payload))
    return buffer.getvalue()


def _paren(z: complex | None) -> str:
    if z is None:
        return "diverged"
    return f"({fmt_float(z.real)}, {fmt_float(z.imag)})"


def encode_text(payload: dict[str, Any]) -> str:
    """Human-readable rendering with complex numbers as (re, im)."""
    if "error" in payload:
        error = payload["error"]
        return f"error {error['code']}: {error['message']}\n"

    lines = []
    result = payload["result"]
    if "matrix" in result:
        for row in np.asarray(result["matrix"]):
            lines.append("  ".join(_paren(complex(z)) for z in row))
        if "deviation" in result:
            lines.append(f"max cross-method deviation: {fmt_float(result['deviation'])}")
    elif "table" in result:
        table = result["table"]
        lines.append("n  " + "  ".join(table["variants"]))
        for row in table["rows"]:
            lines.append(f"{row['n']}  " + "  ".join(_paren(z) for z in row["values"]))
        if table.get("exact") is not None:
            lines.append(f"exact  {_paren(complex(table['exact']))}")
        for label, reason in table.get("reasons", {}).items():
            lines.append(f"{label}: {reason}")
    elif "checks" in result:
        for check in result["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            value = "" if check["value"] is None else f" {fmt_float(check['value'])}"
            lines.append(f"{status}  {check['name']}{value}  {check['detail']}".rstrip())
    else:
        for point in result["scan"]:
            g00 = point["g00"]
            tail = "failed" if g00 is None else f"{_paren(complex(g00))}  dos {point['dos']:.6g}"
            lines.append(f"{_paren(complex(point['eps']))}  {tail}")
    return "\n".join(lines) + "\n"


def encode(payload: dict[str, Any], fmt: OutputFormat) -> str:
    """Encode a payload in the requested format."""
    if fmt == OutputFormat.CSV:
        return encode_csv(payload)
    if fmt == OutputFormat.TEXT:
        return encode_text(payload)
    return encode_json(payload)


def write(text: str, path: str | None) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
