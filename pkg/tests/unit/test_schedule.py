"""
Unit tests for relaxation, stopping and perturbation schemas.
"""

import pytest
from pydantic import ValidationError

from proxnet.schemas.schedule import (
    PerturbationSchedule,
    RelaxationSchedule,
    ScheduleMode,
    StopCriteria,
)


class TestRelaxationSchedule:
    """Test schedule validation and evaluation."""

    def test_default_is_constant_one(self):
        """Test the plain Krasnosel'skii-Mann default."""
        s = RelaxationSchedule()
        assert s.mode is ScheduleMode.CONSTANT
        assert s.lambda_at(0) == 1.0
        assert s.lambda_at(10**6) == 1.0

    def test_constant_must_be_positive(self):
        """Test the constant-mode precondition."""
        with pytest.raises(ValidationError):
            RelaxationSchedule(value=0.0)

    def test_averaged_constant(self):
        """Test the open interval (0, 1/α)."""
        s = RelaxationSchedule(mode="averaged", value=1.9, alpha=0.5)
        assert s.contains(1.99)
        assert not s.contains(2.0)
        assert not s.contains(0.0)
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="averaged", value=2.0, alpha=0.5)

    def test_needs_alpha(self):
        """Test that non-constant modes need α in [1/2, 1]."""
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="averaged", value=1.0)
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="averaged", value=1.0, alpha=0.4)

    def test_averaged_decay(self):
        """Test the clipped 1/α − d/(n+1) family."""
        s = RelaxationSchedule(mode="averaged", alpha=0.5, d=1.0, epsilon=0.1)
        assert s.lambda_at(0) == pytest.approx(1.0)
        assert s.lambda_at(3) == pytest.approx(1.75)
        assert s.lambda_at(1000) == pytest.approx(1.9)
        steep = RelaxationSchedule(mode="averaged", alpha=0.5, d=5.0, epsilon=0.1)
        assert steep.lambda_at(0) == pytest.approx(0.1)

    def test_averaged_decay_needs_epsilon(self):
        """Test that the decay family needs a margin."""
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="averaged", alpha=0.5, d=1.0)
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="averaged", alpha=0.5, d=1.0, epsilon=1.0)

    def test_margin(self):
        """Test the closed interval [ε, (1−ε)(ε + 1/α)]."""
        s = RelaxationSchedule(mode="margin", value=0.99, alpha=1.0, epsilon=0.1)
        lo, hi, lo_closed, hi_closed = s.interval()
        assert (lo, hi) == pytest.approx((0.1, 0.99))
        assert lo_closed and hi_closed
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="margin", value=1.0, alpha=1.0, epsilon=0.1)
        with pytest.raises(ValidationError):
            RelaxationSchedule(mode="margin", value=0.5, alpha=1.0, epsilon=0.6)


class TestStopCriteria:
    """Test stopping-rule defaults."""

    def test_defaults(self):
        """Test defaults from settings."""
        stop = StopCriteria()
        assert stop.tol == 1e-10
        assert stop.max_iter == 1_000_000

    def test_invalid(self):
        """Test positivity constraints."""
        with pytest.raises(ValidationError):
            StopCriteria(tol=0.0)
        with pytest.raises(ValidationError):
            StopCriteria(max_iter=-1)


class TestPerturbationSchedule:
    """Test the summable decay sequences."""

    def test_decay(self):
        """Test c/(n+1)²."""
        p = PerturbationSchedule(c_nu=1.0, c_omega=0.5)
        assert p.nu(0) == 1.0
        assert p.nu(1) == 0.25
        assert p.nu(9) == pytest.approx(0.01)
        assert p.omega(1) == 0.125
        assert p.rho(5) == 0.0
        assert not p.is_zero

    def test_zero_default(self):
        """Test that the default perturbs nothing."""
        assert PerturbationSchedule().is_zero

    def test_negative_constant(self):
        """Test that constants must be nonnegative."""
        with pytest.raises(ValidationError):
            PerturbationSchedule(c_eta=-1.0)
