"""Convergence and contour study for the Coulomb continued fraction."""

import logging
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.cli.commands import build_convergence_table
from app.config import get_settings
from app.constants import DEFAULT_VARIANTS
from app.core.exceptions import JacobiGreenError
from app.models.physics import CoulombModel, EnergyPoint
from app.operators import CoulombOperator
from app.services.greens import GreensService
from app.services.validation import ValidationService

# Setup logging
logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

DEPTHS = (1, 2, 5, 10, 20, 50, 100)


def _fmt(value: complex | None) -> str:
    if value is None:
        return "diverged".center(26)
    return f"{value.real:+.12f}{value.imag:+.3e}j".rjust(26)


def print_table(greens: GreensService, model: CoulombModel, eps: complex) -> None:
    """Print G00 approximants for every default variant at selected depths."""
    op = CoulombOperator(model)
    table = build_convergence_table(
        greens, op, EnergyPoint(eps=eps), DEFAULT_VARIANTS, max(DEPTHS), 1e-6, 100_000
    )
    print(f"{'n':>4}  " + "  ".join(label.center(26) for label in table.variants))
    for row in table.rows:
        if row.n in DEPTHS:
            print(f"{row.n:>4}  " + "  ".join(_fmt(v) for v in row.values))
    print(f"exact {_fmt(table.exact)}")
    for label, reason in table.reasons.items():
        print(f"  {label}: {reason}")


def main() -> None:
    """Run the bound-region, high-energy and contour studies."""
    settings = get_settings()
    greens = GreensService(settings)
    validation = ValidationService(settings, greens)

    print("\n" + "=" * 70)
    print("COULOMB CONTINUED-FRACTION STUDY")
    print("=" * 70)

    # Study 1: bound region, fast convergence for every tail
    print("\n[Study 1] bS = 5, eps = -100")
    print("-" * 50)
    print_table(greens, CoulombModel(D=3, l=0, Zp=2.0, bS=5.0), -100.0)

    # Study 2: high energy, only the accelerated columns converge
    print("\n[Study 2] bS = 1, eps = 1000 + i")
    print("-" * 50)
    print_table(greens, CoulombModel(D=3, l=0, Zp=2.0, bS=1.0), 1000 + 1j)

    # Study 3: contour integrals against bound-state overlaps
    print("\n[Study 3] Contour residues, Z' = 2, bS = 1")
    print("-" * 50)
    model = CoulombModel(D=3, l=0, Zp=2.0, bS=1.0)
    try:
        for report in validation.residue_suite(model, 3):
            print(
                f"{report.label:>10}: integral {report.integral.real:+.15f}"
                f"  expected {report.expected.real:+.15f}  error {report.abs_error:.2e}"
            )
        print("✓ Residue suite finished")
    except JacobiGreenError as e:
        print(f"✗ Residue suite failed: {e.message}")


if __name__ == "__main__":
    main()
