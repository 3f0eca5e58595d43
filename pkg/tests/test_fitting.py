import numpy as np
import pytest

from ahdeform.errors import FitUnstableError, GridTooCoarseError, WindowError
from ahdeform.fitting import decay_exponent, fit_leading


@pytest.fixture
def t(fixture_grid):
    return fixture_grid.nodes


def test_exact_leading_term(t):
    """A pure t^3 law is fitted exactly."""
    fit = fit_leading(t, 3.0 * t**3, 3)
    assert np.isclose(fit.coefficient, 3.0, rtol=1e-10)
    assert abs(fit.correction) < 1e-8
    assert fit.drift < 1e-10
    assert fit.nodes >= 8


def test_correction_term(t):
    """The next power is fitted as the correction."""
    fit = fit_leading(t, 2.0 * t**3 - 5.0 * t**4, 3)
    assert np.isclose(fit.coefficient, 2.0, rtol=1e-9)
    assert np.isclose(fit.correction, -5.0, rtol=1e-7)


def test_three_term_model(t):
    fit = fit_leading(t, t**4 + 2.0 * t**5 + 7.0 * t**6, 4, terms=3)
    assert np.isclose(fit.coefficient, 1.0, rtol=1e-9)


def test_wrong_power_is_unstable(t):
    """Data decaying slower than t^n drifts between windows."""
    with pytest.raises(FitUnstableError) as exc:
        fit_leading(t, t**2, 3)
    assert exc.value.full != exc.value.half


def test_zero_data_is_stable(t):
    """Coefficients under the absolute floor never count as drift."""
    fit = fit_leading(t, np.zeros_like(t), 3)
    assert fit.coefficient == 0.0
    assert fit.drift == 0.0


def test_window_outside_grid(t):
    with pytest.raises(WindowError):
        fit_leading(t, t**3, 3, window=(0.5, 2.0))
    with pytest.raises(WindowError):
        fit_leading(t, t**3, 3, window=(0.1, 0.05))


def test_window_too_narrow(t):
    """Fewer than eight nodes in the window is too coarse."""
    with pytest.raises(GridTooCoarseError):
        fit_leading(t, t**3, 3, window=(0.5, 0.51))


def test_decay_exponent(t):
    assert np.isclose(decay_exponent(t, 2.0 * t**4), 4.0, atol=1e-9)
    assert decay_exponent(t, np.zeros_like(t)) == float("inf")


def test_decay_exponent_noise_floor(t):
    """Samples at roundoff level are ignored."""
    noise = 1e-16 * np.cos(1000.0 * t)
    assert decay_exponent(t, noise, atol=1e-12) == float("inf")
