"""Application constants and enumerations."""

from enum import Enum
from typing import NamedTuple


class ModelKind(str, Enum):
    """Hamiltonian families with a Jacobi-matrix representation."""

    COULOMB = "coulomb"
    OSCILLATOR = "oscillator"


class Method(str, Enum):
    """Green's matrix construction."""

    A = "A"
    B = "B"
    BOTH = "both"


class TailKind(str, Enum):
    """How the tail of a continued fraction is closed."""

    ZERO = "zero"
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"
    EXPLICIT = "explicit"


class Sheet(str, Enum):
    """Riemann sheet of the resolvent."""

    PHYSICAL = "physical"
    UNPHYSICAL = "unphysical"


class CliTail(str, Enum):
    """Tail names accepted on the command line."""

    ZERO = "zero"
    PLUS = "plus"
    MINUS = "minus"


class OutputFormat(str, Enum):
    """Payload encodings."""

    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class ExitCode(int, Enum):
    """Process exit codes of the command-line front end."""

    OK = 0
    CHECK_FAILED = 1
    CONFIG_ERROR = 2
    NUMERICAL_ERROR = 3


class TableVariant(NamedTuple):
    """One column of a convergence table."""

    label: str
    tail: CliTail
    bm_depth: int = 0


# Columns printed by `converge` when no variants are requested
DEFAULT_VARIANTS: tuple[TableVariant, ...] = (
    TableVariant("w=0", CliTail.ZERO),
    TableVariant("w+", CliTail.PLUS),
    TableVariant("w-", CliTail.MINUS),
    TableVariant("bm1", CliTail.PLUS, 1),
    TableVariant("bm5", CliTail.PLUS, 5),
    TableVariant("bm8", CliTail.PLUS, 8),
)

# Relative guard band around the Coulomb off-diagonal zero at eps = -bS^2
SINGULAR_ENERGY_BAND = 1e-12

# Relative modulus gap below which two fixed points count as tied
FIXED_POINT_TIE = 1e-12

# Significant digits printed for floats in csv/json/text payloads
FLOAT_DIGITS = 17
