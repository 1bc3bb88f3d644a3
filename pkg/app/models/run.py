"""Run configuration of the command-line front end."""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import Settings
from app.constants import DEFAULT_VARIANTS, CliTail, Method, ModelKind, OutputFormat
from app.core.exceptions import ConfigurationError
from app.models.physics import CoulombModel, EnergyPoint, OscillatorModel


class RunConfig(BaseModel):
    """Fully resolved options of one command-line run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["green", "converge", "validate", "scan"] = "green"

    # model
    model: ModelKind = ModelKind.COULOMB
    D: int = 3
    l: int = Field(default=0, ge=0)  # noqa: E741
    Zp: float = 2.0
    bS: float = Field(default=1.0, gt=0)
    omega: float = Field(default=1.0, gt=0)
    omegaP: float = Field(default=1.3, gt=0)
    printed_sign: bool = False

    # energy
    eps_re: float = -4.0
    eps_im: float = 0.0

    # numerics
    N: int = Field(default=20, ge=1)
    method: Method = Method.B
    tail: CliTail = CliTail.PLUS
    bm_depth: int = Field(default=0, ge=0)
    tol: float = Field(default=1e-14, gt=0)
    nmax: int = Field(default=100_000, ge=2)

    # converge
    depth: int = Field(default=100, ge=1, description="Rows of the convergence table")
    variants: list[str] = Field(default_factory=lambda: [v.label for v in DEFAULT_VARIANTS])
    table_tol: float = Field(default=1e-6, gt=0)

    # scan
    eps_end_re: float = 0.0
    eps_end_im: float = 0.0
    points: int = Field(default=11, ge=2)

    # validate
    n_poles: int = Field(default=2, ge=0, le=3)
    contour: list[float] | None = Field(default=None, min_length=4, max_length=4)

    # output
    output: OutputFormat = OutputFormat.JSON
    output_path: str | None = None

    @field_validator("variants", "contour", mode="before")
    @classmethod
    def split_lists(cls, v: Any) -> Any:
        """Accept a comma-separated string, as found in config files."""
        if isinstance(v, str):
            return [item.strip() for item in v.split(",") if item.strip()]
        return v

    @field_validator("contour")
    @classmethod
    def positive_radii(cls, v: list[float] | None) -> list[float] | None:
        """Contour radii RX and RY must be positive."""
        if v is not None and min(v[2], v[3]) <= 0:
            raise ValueError("contour radii must be positive")
        return v

    @model_validator(mode="after")
    def consistent_model(self) -> "RunConfig":
        if self.model == ModelKind.OSCILLATOR and self.printed_sign:
            raise ValueError("printed_sign applies to the Coulomb model only")
        if self.model == ModelKind.COULOMB and self.D < 2:
            raise ValueError("the Coulomb model needs D >= 2")
        if self.model == ModelKind.OSCILLATOR and self.D < 1:
            raise ValueError("the oscillator model needs D >= 1")
        return self

    @classmethod
    def defaults_from(cls, settings: Settings) -> dict[str, Any]:
        """Run options whose defaults come from the application settings."""
        return {
            "N": settings.truncation,
            "tail": settings.tail,
            "bm_depth": settings.bm_depth,
            "tol": settings.tol,
            "nmax": settings.nmax,
            "table_tol": settings.table_tol,
            "output": settings.output,
        }

    @classmethod
    def build(
        cls,
        flags: dict[str, Any],
        file_values: dict[str, Any] | None = None,
        settings: Settings | None = None,
    ) -> "RunConfig":
        """
        Merge options with precedence flags > config file > settings.

        Args:
            flags: Options given on the command line; None values are ignored.
            file_values: Flat key=value pairs from a config file.
            settings: Application settings supplying the numerical defaults.

        Returns:
            Validated RunConfig.

        Raises:
            ConfigurationError: On unknown keys or invalid values.
        """
        merged: dict[str, Any] = cls.defaults_from(settings) if settings else {}
        merged.update({k: v for k, v in (file_values or {}).items() if v is not None})
        merged.update({k: v for k, v in flags.items() if v is not None})
        try:
            return cls(**merged)
        except ValidationError as exc:
            error = exc.errors()[0]
            field = ".".join(str(part) for part in error["loc"]) or None
            raise ConfigurationError(f"Invalid configuration: {error['msg']}", field) from exc

    @property
    def energy(self) -> EnergyPoint:
        """Energy of the run."""
        return EnergyPoint.of(self.eps_re, self.eps_im)

    def physical_model(self) -> CoulombModel | OscillatorModel:
        """
        The model described by this run.

        Raises:
            ConfigurationError: If the model parameters are invalid.
        """
        try:
            if self.model == ModelKind.COULOMB:
                return CoulombModel(D=self.D, l=self.l, Zp=self.Zp, bS=self.bS)
            return OscillatorModel(D=self.D, l=self.l, omega=self.omega, omegaP=self.omegaP)
        except ValidationError as exc:
            error = exc.errors()[0]
            field = ".".join(str(part) for part in error["loc"]) or None
            raise ConfigurationError(f"Invalid model: {error['msg']}", field) from exc

    def public_view(self) -> dict[str, Any]:
        """Options echoed in the output payload."""
        return self.model_dump(mode="json", exclude={"output_path"})
