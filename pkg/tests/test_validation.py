"""Tests for contour integrals, overlaps and the validation suites."""

import numpy as np
import pytest
from scipy.integrate import quad

from app.core.exceptions import ContourInvalidError, NoBoundStatesError
from app.models.physics import CoulombModel, EnergyPoint, OscillatorModel
from app.models.results import ContourSpec
from app.operators import (
    CoulombOperator,
    OscillatorOperator,
    coulomb_bound_wavefunction,
    cs_function,
    oscillator_spectrum,
)
from app.services.greens import GreensService
from app.services.validation import ValidationService, has_continuum, pole_positions


class TestContours:
    """Tests for contour geometry checks."""

    def test_enclosed_poles(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that only the level inside the circle is listed."""
        assert validation.check_contour(coulomb_op, ContourSpec.circle(-1.0, 0.3)) == [0]
        assert validation.check_contour(coulomb_op, ContourSpec.circle(-10.0, 0.1)) == []

    def test_cut_crossing_rejected(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that a contour meeting [0, inf) is invalid for the Coulomb problem."""
        with pytest.raises(ContourInvalidError) as exc_info:
            validation.contour_integral_g00(coulomb_op, ContourSpec.circle(0.5, 1.0))
        assert exc_info.value.code == "CONTOUR_INVALID"

    def test_pole_on_contour_rejected(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that a contour through a pole is invalid."""
        with pytest.raises(ContourInvalidError):
            validation.check_contour(coulomb_op, ContourSpec.circle(-1.5, 0.5))

    def test_oscillator_has_no_cut(
        self, validation: ValidationService, oscillator_op: OscillatorOperator
    ) -> None:
        """Test that contours on the positive axis are fine for the oscillator."""
        assert not has_continuum(oscillator_op)
        assert validation.check_contour(oscillator_op, ContourSpec.circle(1.5, 0.5)) == [0]

    def test_pole_positions(self, coulomb_op: CoulombOperator, coulomb_model: CoulombModel) -> None:
        """Test the known poles of both operators."""
        assert pole_positions(coulomb_op, 2) == [-1.0, -0.25]
        assert pole_positions(CoulombOperator(coulomb_model, printed_sign=True)) == []
        assert pole_positions(OscillatorOperator(OscillatorModel(D=2)), 2) == [1.0, 3.0]

    def test_default_contours(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test the placement of the pole-free, single-pole and two-pole circles."""
        free = validation.pole_free_contour(coulomb_model)
        assert free.center == -10.0
        assert free.radius_x == 0.1
        single = validation.single_pole_contour(coulomb_model, 0)
        assert single.center == -1.0
        assert single.radius_x == pytest.approx(0.375)
        two = validation.multi_pole_contour(coulomb_model, 2)
        assert two.encloses(-1.0) and two.encloses(-0.25)
        assert not two.encloses(-1 / 9)
        assert not two.meets_cut()


class TestOverlaps:
    """Tests for bound-state overlaps by quadrature."""

    def test_matched_ground_state(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test overlap 1 when bS = Z'/2 makes phi_0 the ground state."""
        assert validation.overlap_cs_bound(coulomb_model, 0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("nr", [1, 2, 5])
    def test_against_adaptive_quadrature(self, validation: ValidationService, nr: int) -> None:
        """Test the composite Gauss-Legendre overlap against scipy quad."""
        model = CoulombModel(D=3, l=1, Zp=2.0, bS=0.7)
        def integrand(r: float) -> float:
            return float(cs_function(0, model, r) / r * coulomb_bound_wavefunction(nr, model, r))

        expected, _ = quad(
            integrand,
            0.0,
            np.inf,
            epsabs=1e-14,
            limit=400,
        )
        assert validation.overlap_cs_bound(model, nr) == pytest.approx(expected, abs=1e-10)

    def test_decay_with_level(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test |overlap(nr=6)| < |overlap(nr=0)|."""
        first = validation.overlap_cs_bound(coulomb_model, 0)
        sixth = validation.overlap_cs_bound(coulomb_model, 6)
        assert first > 0
        assert abs(sixth) < abs(first)

    def test_repulsive_model(self, validation: ValidationService) -> None:
        """Test that overlaps need bound states."""
        with pytest.raises(NoBoundStatesError):
            validation.overlap_cs_bound(CoulombModel(Zp=-1.0), 0)


class TestResidues:
    """Tests for contour integrals of G00."""

    def test_pole_free(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        coulomb_model: CoulombModel,
    ) -> None:
        """Test that a contour without poles integrates to zero."""
        contour = validation.pole_free_contour(coulomb_model)
        report = validation.residue_report(coulomb_op, coulomb_model, contour, "pole-free")
        assert report.poles_enclosed == []
        assert report.abs_error <= 1e-12

    def test_single_pole(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        coulomb_model: CoulombModel,
    ) -> None:
        """Test the ground-state residue against the squared overlap."""
        contour = validation.single_pole_contour(coulomb_model, 0)
        report = validation.residue_report(coulomb_op, coulomb_model, contour, "pole 0")
        assert report.poles_enclosed == [0]
        assert report.abs_error <= 1e-10
        assert abs(report.integral.imag) <= 1e-11

    def test_two_pole_additivity(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        coulomb_model: CoulombModel,
    ) -> None:
        """Test that the two-pole integral is the sum of the single-pole ones."""
        singles = [
            validation.contour_integral_g00(
                coulomb_op, validation.single_pole_contour(coulomb_model, n)
            )
            for n in (0, 1)
        ]
        both = validation.contour_integral_g00(
            coulomb_op, validation.multi_pole_contour(coulomb_model, 2)
        )
        assert abs(both - sum(singles)) <= 1e-9

    def test_deformation_invariance(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        coulomb_model: CoulombModel,
    ) -> None:
        """Test that a circle and an ellipse around the same pole agree."""
        circle = validation.single_pole_contour(coulomb_model, 0)
        ellipse = ContourSpec(
            center=-1.0 + 0.05j, radius_x=0.3, radius_y=0.6, points_per_quadrant=48
        )
        first = validation.contour_integral_g00(coulomb_op, circle)
        second = validation.contour_integral_g00(coulomb_op, ellipse)
        assert abs(first - second) <= 1e-10

    def test_oscillator_residue(
        self, validation: ValidationService, oscillator_op: OscillatorOperator
    ) -> None:
        """Test the oscillator ground-state residue (1 - z)^nu."""
        integral = validation.contour_integral_g00(oscillator_op, ContourSpec.circle(1.5, 0.5))
        expected = float(oscillator_op.eigen_overlaps(1)[0])
        assert abs(integral - expected) <= 1e-10

    def test_printed_sign_residue(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test that the flipped charge misses the expected residue."""
        op = CoulombOperator(coulomb_model, printed_sign=True)
        contour = validation.single_pole_contour(coulomb_model, 0)
        report = validation.residue_report(op, coulomb_model, contour, "printed")
        assert report.abs_error > 0.1

    def test_suite_without_poles(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test n_poles = 0: a single pole-free report."""
        reports = validation.residue_suite(coulomb_model, 0)
        assert len(reports) == 1
        assert reports[0].abs_error <= 1e-12

    def test_suite_with_one_pole(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test n_poles = 1: pole-free plus the ground state."""
        reports = validation.residue_suite(coulomb_model, 1)
        assert [r.label for r in reports] == ["pole-free", "pole 0"]
        assert reports[1].poles_enclosed == [0]
        assert reports[1].abs_error <= 1e-10

    def test_suite_limit(self, validation: ValidationService, coulomb_model: CoulombModel) -> None:
        """Test that at most three single-pole contours are allowed."""
        with pytest.raises(ValueError):
            validation.residue_suite(coulomb_model, 4)


class TestPoles:
    """Tests for pole location and matching."""

    def test_oscillator_pole(self, validation: ValidationService) -> None:
        """Test the lowest pole of a p-wave oscillator at omega nu = 2.5."""
        op = OscillatorOperator(OscillatorModel(D=3, l=1, omega=1.0, omegaP=1.5))
        assert validation.locate_pole(op, (2.4, 2.6)) == pytest.approx(2.5, abs=1e-8)

    def test_decoupled_energy(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that 1/G00 reduces to J00 where J01 vanishes."""
        assert validation.inverse_g00(coulomb_op, -1.0) == 0j
        near = validation.inverse_g00(coulomb_op, -1.0 + 1e-6)
        assert abs(near) <= 1e-5

    def test_coulomb_poles_match(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that the first three poles sit on the spectrum."""
        checks = validation.pole_matching(coulomb_op, coulomb_op.model)
        assert [c.name for c in checks] == ["pole-match 0", "pole-match 1", "pole-match 2"]
        assert all(c.passed for c in checks), [c.detail for c in checks]

    def test_scaled_basis_poles_match(self, validation: ValidationService) -> None:
        """Test pole matching with a basis scale away from the ground state."""
        op = CoulombOperator(CoulombModel(D=3, l=1, Zp=2.0, bS=0.6))
        assert all(c.passed for c in validation.pole_matching(op, op.model))

    def test_printed_sign_poles_mismatch(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test that the flipped charge fails every pole-matching check."""
        op = CoulombOperator(coulomb_model, printed_sign=True)
        assert not any(c.passed for c in validation.pole_matching(op, coulomb_model))


    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_oscillator_poles_mismatched_basis(
        self,
        validation: ValidationService,
        oscillator_op: OscillatorOperator,
        oscillator_model: OscillatorModel,
        n: int,
    ) -> None:
        """Test that the lowest three poles on a basis of frequency 1.3 sit at omega(2n + nu)."""
        expected = oscillator_spectrum(oscillator_model, n)
        found = validation.locate_pole(oscillator_op, (expected - 0.05, expected + 0.05))
        assert found == pytest.approx(expected, abs=1e-8)
        assert abs(validation.inverse_g00(oscillator_op, complex(found))) <= 1e-6


class TestInvariantSuite:
    """Tests for the structural invariant suite."""

    @pytest.mark.parametrize("N", [5, 20])
    @pytest.mark.parametrize("eps", [-4.0 + 0.5j, -2.5, -7.0 + 2.0j])
    def test_bound_region(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        N: int,
        eps: complex,
    ) -> None:
        """Test that every invariant passes in the bound region."""
        checks = validation.invariant_suite(coulomb_op, EnergyPoint(eps=eps), N)
        names = {c.name for c in checks}
        assert {"symmetry", "factorization", "recurrence", "resolvent", "dense-oracle"} <= names
        assert "cross-method" in names
        assert all(c.passed for c in checks), [(c.name, c.value) for c in checks]

    def test_scattering_region(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that the dense oracle is skipped above the threshold."""
        checks = validation.invariant_suite(coulomb_op, EnergyPoint.of(3.0, 1.0), 10)
        assert "dense-oracle" not in {c.name for c in checks}
        assert all(c.passed for c in checks), [(c.name, c.value) for c in checks]

    def test_oscillator(
        self, validation: ValidationService, oscillator_op: OscillatorOperator
    ) -> None:
        """Test the invariants on the oscillator."""
        checks = validation.invariant_suite(oscillator_op, EnergyPoint.of(-0.8, 0.3), 12)
        assert all(c.passed for c in checks), [(c.name, c.value) for c in checks]

    def test_method_b_failure_reported(
        self, validation: ValidationService, coulomb_model: CoulombModel
    ) -> None:
        """Test that a singular Method B build becomes a failed check."""
        op = CoulombOperator(CoulombModel(D=3, l=0, Zp=2.0, bS=0.5))
        checks = validation.invariant_suite(op, EnergyPoint.of(-1.0), 20)
        assert [c.name for c in checks] == ["method-B"]
        assert not checks[0].passed

    def test_large_truncation(
        self, validation: ValidationService, coulomb_op: CoulombOperator
    ) -> None:
        """Test that every invariant, including the cross-method check, holds at N = 100."""
        checks = validation.invariant_suite(coulomb_op, EnergyPoint.of(-4.0, 0.5), 100)
        assert {"dense-oracle", "cross-method"} <= {c.name for c in checks}
        assert all(c.passed for c in checks), [(c.name, c.value) for c in checks]

    def test_raw_asymmetry_detected(
        self,
        validation: ValidationService,
        coulomb_op: CoulombOperator,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        """Test that an asymmetric tridiagonal solve fails the symmetry check."""
        solve = GreensService.solve_tridiagonal

        def skewed(self: GreensService, diag: np.ndarray, off: np.ndarray) -> np.ndarray:
            values = np.array(solve(self, diag, off))
            values[0, 3] += 0.5
            return values

        monkeypatch.setattr(GreensService, "solve_tridiagonal", skewed)
        checks = validation.invariant_suite(coulomb_op, EnergyPoint.of(-4.0, 0.5), 10)
        symmetry = next(c for c in checks if c.name == "symmetry")
        assert not symmetry.passed
        assert symmetry.value >= 1e-2
