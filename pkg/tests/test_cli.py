"""Tests for the command-line front end."""

import csv
import io
import json
import subprocess
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from app.cli.commands import cmd_validate, parse_variant, run
from app.config import Settings
from app.constants import CliTail
from app.core.exceptions import ConfigurationError
from app.main import main
from app.models.run import RunConfig

Invoke = Callable[..., tuple[int, Any]]


@pytest.fixture
def invoke(settings: Settings, capsys: pytest.CaptureFixture[str]) -> Invoke:
    """Run the command line and return its exit code and parsed JSON payload."""

    def _invoke(*argv: str) -> tuple[int, Any]:
        code = run(list(argv), settings)
        out = capsys.readouterr().out
        return code, json.loads(out) if out.lstrip().startswith("{") else out

    return _invoke


def _matrix(payload: dict[str, Any]) -> np.ndarray:
    rows = payload["result"]["matrix"]
    return np.array([[complex(z["re"], z["im"]) for z in row] for row in rows])


class TestGreenCommand:
    """Tests for the green command."""

    def test_both_methods_agree(self, invoke: Invoke) -> None:
        """Test method both on the default Coulomb model."""
        code, payload = invoke("green", "--method", "both", "--eps", "-4", "0.5", "--N", "10")
        assert code == 0
        assert payload["result"]["N"] == 10
        assert payload["result"]["deviation"] <= 1e-10
        assert payload["diagnostics"]["residuals"]["symmetry"] <= 1e-12
        assert payload["diagnostics"]["method_a"]["dps"] >= 30
        assert _matrix(payload).shape == (10, 10)

    def test_real_scattering_energy(self, invoke: Invoke) -> None:
        """Test Method B on the positive real axis with the physical tail."""
        code, payload = invoke("green", "--eps", "4", "0", "--N", "5")
        assert code == 0
        assert payload["diagnostics"]["converged"]
        assert payload["diagnostics"]["tolerance"] <= 1e-8
        assert _matrix(payload)[0, 0].imag < 0

    def test_pole_is_numerical_error(self, invoke: Invoke) -> None:
        """Test exit code 3 at a bound-state energy."""
        code, payload = invoke("green", "--bS", "0.5", "--eps", "-1", "0")
        assert code == 3
        assert payload["error"]["code"] == "SINGULAR_MATRIX"

    def test_matched_oscillator(self, invoke: Invoke) -> None:
        """Test the diagonal Green's matrix of a matched basis."""
        code, payload = invoke(
            "green", "--model", "oscillator", "--omega", "1", "--omegaP", "1", "--E", "0.3",
            "--N", "5",
        )
        assert code == 0
        G = _matrix(payload)
        levels = 2 * np.arange(5) + 1.5
        np.testing.assert_allclose(G, np.diag(1 / (0.3 - levels)), rtol=1e-14, atol=1e-16)

    def test_invalid_option_value(self, invoke: Invoke) -> None:
        """Test exit code 2 for an invalid model."""
        code, payload = invoke("green", "--bS", "-1")
        assert code == 2
        assert payload["error"]["code"] == "CONFIG"

    def test_deterministic(self, invoke: Invoke) -> None:
        """Test that identical runs produce identical output."""
        argv = ("green", "--eps", "-2.5", "0.7", "--N", "6")
        assert invoke(*argv) == invoke(*argv)

    def test_csv_round_trip(self, invoke: Invoke, tmp_path: Path) -> None:
        """Test that csv values reproduce the JSON floats exactly."""
        _, payload = invoke("green", "--eps", "-2.5", "0.7", "--N", "4")
        out = tmp_path / "g.csv"
        code, _ = invoke(
            "green", "--eps", "-2.5", "0.7", "--N", "4", "--output", "csv", "--out", str(out)
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(out.read_text(encoding="utf-8"))))
        assert rows[0] == ["i", "j", "re", "im"]
        G = _matrix(payload)
        for i, j, re_part, im_part in rows[1:]:
            assert complex(float(re_part), float(im_part)) == G[int(i), int(j)]

    def test_text_output(self, invoke: Invoke) -> None:
        """Test the human-readable rendering."""
        code, text = invoke("green", "--N", "2", "--output", "text")
        assert code == 0
        assert len(text.strip().splitlines()) == 2
        assert text.startswith("(")


class TestConvergeCommand:
    """Tests for the converge command."""

    def test_bound_region_table(self, invoke: Invoke) -> None:
        """Test every default variant at bS = 5, eps = -100."""
        code, payload = invoke("converge", "--bS", "5", "--eps", "-100", "0", "--depth", "20")
        assert code == 0
        table = payload["result"]["table"]
        assert table["variants"] == ["w=0", "w+", "w-", "bm1", "bm5", "bm8"]
        assert len(table["rows"]) == 20
        exact = complex(table["exact"]["re"], table["exact"]["im"])
        last = table["rows"][-1]["values"][1]
        assert abs(complex(last["re"], last["im"]) - exact) <= 1e-12 * abs(exact)
        assert table["converged"]["w+"]

    def test_unconverged_variant_reported(self, invoke: Invoke) -> None:
        """Test that a stalled variant carries a reason while others converge."""
        code, payload = invoke(
            "converge", "--eps", "1000", "1", "--depth", "5", "--nmax", "2000",
            "--variants", "w=0,bm8", "--table-tol", "1e-6",
        )
        assert code == 0
        table = payload["result"]["table"]
        assert not table["converged"]["w=0"]
        assert "not converged" in table["reasons"]["w=0"]
        assert table["converged"]["bm8"]
        assert "bm8" not in table["reasons"]

    def test_unknown_variant(self, invoke: Invoke) -> None:
        """Test exit code 2 for an unknown column label."""
        code, payload = invoke("converge", "--variants", "w=0,sideways")
        assert code == 2
        assert payload["error"]["field"] == "variants"

    def test_parse_variant(self) -> None:
        """Test preset and Bauer-Muir column labels."""
        assert parse_variant("w-").tail == CliTail.MINUS
        assert parse_variant("bm3-") == ("bm3-", CliTail.MINUS, 3)
        assert parse_variant("bm12").bm_depth == 12
        with pytest.raises(ConfigurationError):
            parse_variant("bm")


class TestValidateCommand:
    """Tests for the validate command."""

    def test_default_model_passes(self, invoke: Invoke) -> None:
        """Test that every check passes on the default Coulomb model."""
        code, payload = invoke("validate")
        assert code == 0, payload["diagnostics"]["failed"]
        names = [check["name"] for check in payload["result"]["checks"]]
        assert "contour pole-free" in names
        assert "contour two-pole" in names
        assert "pole-match 0" in names
        assert "cross-method" in names

    def test_printed_sign_fails(self, invoke: Invoke) -> None:
        """Test exit code 1 when the charge sign is flipped."""
        code, payload = invoke("validate", "--printed-sign", "--n-poles", "1")
        assert code == 1
        assert any(name.startswith("pole-match") for name in payload["diagnostics"]["failed"])

    def test_cut_contour_rejected(self, invoke: Invoke) -> None:
        """Test exit code 2 for a contour crossing the continuum."""
        code, payload = invoke("validate", "--contour", "0.5", "0", "1", "1")
        assert code == 2
        assert payload["error"]["code"] == "CONTOUR_INVALID"

    def test_zero_radius_contour_rejected(self, invoke: Invoke) -> None:
        """Test exit code 2 and a CONFIG record for a degenerate contour."""
        code, payload = invoke("validate", "--contour", "-1", "0", "0", "1")
        assert code == 2
        assert payload["error"]["code"] == "CONFIG"
        assert payload["error"]["field"] == "contour"

    def test_contour_model_errors_wrapped(self, settings: Settings) -> None:
        """Test that a contour rejected by the contour model becomes a ConfigurationError."""
        cfg = RunConfig.build({"command": "validate"}, settings=settings)
        cfg = cfg.model_copy(update={"contour": [-1.0, 0.0, -0.3, 0.3]})
        with pytest.raises(ConfigurationError) as exc_info:
            cmd_validate(cfg, settings)
        assert exc_info.value.field == "contour"

    def test_oscillator_invariants(self, invoke: Invoke) -> None:
        """Test that the oscillator runs the structural checks only."""
        code, payload = invoke("validate", "--model", "oscillator", "--E", "-0.8", "0.3")
        assert code == 0
        names = {check["name"] for check in payload["result"]["checks"]}
        assert not any(name.startswith("contour") for name in names)


class TestScanCommand:
    """Tests for the scan command."""

    def test_line_scan(self, invoke: Invoke) -> None:
        """Test G00 and the density of states along a line."""
        code, payload = invoke(
            "scan", "--eps", "-4", "0.5", "--eps-end", "-2", "0.5", "--points", "5"
        )
        assert code == 0
        points = payload["result"]["scan"]
        assert len(points) == 5
        for point in points:
            g00 = complex(point["g00"]["re"], point["g00"]["im"])
            assert point["dos"] == pytest.approx(-g00.imag / np.pi, rel=1e-15)
        assert payload["diagnostics"]["failures"] == 0

    def test_failed_points_reported(self, invoke: Invoke) -> None:
        """Test that a failing energy is recorded without aborting the scan."""
        code, payload = invoke(
            "scan", "--eps", "-1.5", "0", "--eps-end", "-0.5", "0", "--points", "3"
        )
        assert code == 0
        middle = payload["result"]["scan"][1]
        assert middle["g00"] is None
        assert middle["error"]["code"] == "SINGULAR_ENERGY"
        assert payload["diagnostics"]["failures"] == 1


class TestConfigFile:
    """Tests for config-file handling."""

    def test_flags_override_file(self, invoke: Invoke, tmp_path: Path) -> None:
        """Test flags > config file."""
        config = tmp_path / "run.env"
        config.write_text("N=7\ntol=1e-12\nbS=1.5\n", encoding="utf-8")
        code, payload = invoke("green", "--config", str(config), "--N", "5")
        assert code == 0
        assert payload["config"]["N"] == 5
        assert payload["config"]["tol"] == 1e-12
        assert payload["config"]["bS"] == 1.5

    def test_unknown_key(self, invoke: Invoke, tmp_path: Path) -> None:
        """Test exit code 2 for an unknown config key."""
        config = tmp_path / "run.env"
        config.write_text("frobnicate=1\n", encoding="utf-8")
        code, payload = invoke("green", "--config", str(config))
        assert code == 2
        assert payload["error"]["field"] == "frobnicate"

    def test_missing_file(self, invoke: Invoke, tmp_path: Path) -> None:
        """Test exit code 2 for a missing config file."""
        code, _ = invoke("green", "--config", str(tmp_path / "absent.env"))
        assert code == 2


class TestMain:
    """Tests for the console entry point."""

    def test_main_returns_exit_code(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that main runs a command with a log level override."""
        assert main(["green", "--N", "3", "--log-level", "debug"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["result"]["N"] == 3

    @pytest.mark.parametrize(
        "module", ["app.main", "app.operators.coulomb", "app.services.greens"]
    )
    def test_fresh_interpreter_import(self, module: str) -> None:
        """Test that each entry module imports on its own in a new interpreter."""
        result = subprocess.run(
            [sys.executable, "-c", f"import {module}"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).resolve().parents[1],
            check=False,
        )
        assert result.returncode == 0, result.stderr
