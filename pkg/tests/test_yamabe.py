import numpy as np
import pytest
from conftest import normal_form_plus, tail_profile
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ahdeform.curvature import scalar_curvature
from ahdeform.errors import DomainError, HypothesisError
from ahdeform.fitting import decay_exponent
from ahdeform.geometry import (
    MetricProfile,
    RadialGrid,
    make_ads_schwarzschild,
    make_tail_perturbed,
)
from ahdeform.yamabe import (
    nonlinearity_derivative,
    nonlinearity_F,
    solve_yamabe,
    yamabe_source,
)


def test_nonlinearity():
    """F vanishes to second order at 0 and is positive elsewhere."""
    assert nonlinearity_F(0.0, 3) == 0.0
    assert nonlinearity_derivative(0.0, 3) == 0.0
    assert np.isclose(nonlinearity_F(-0.1, 4), 2.0 * (0.9**3 - 1.0 + 0.3), rtol=1e-12)
    v = np.linspace(-0.9, 2.0, 30)
    assert np.all(nonlinearity_F(v, 5) >= 0.0)


def test_nonlinearity_domain():
    with pytest.raises(DomainError):
        nonlinearity_F(-1.0, 3)
    with pytest.raises(DomainError):
        nonlinearity_derivative(np.array([0.0, -2.0]), 3)


def test_hyperbolic_needs_no_correction(hyperbolic3):
    """Hyperbolic space already has the target curvature."""
    solution = solve_yamabe(hyperbolic3)
    assert solution.iterations == 0
    assert np.max(np.abs(solution.v)) <= 1e-12
    assert abs(solution.v_n) <= 1e-8


def test_tail_fixture_solution(tail_solution):
    """R >= -n(n-1) gives a non-positive correction with negative decay coefficient."""
    assert tail_solution.residual_norm <= 1e-10
    assert tail_solution.v.max() <= 1e-14
    assert -0.01 < tail_solution.v_n < -1e-4
    assert tail_solution.iterations >= 2


def test_newton_history_decreases(tail_solution):
    history = tail_solution.residual_history
    assert len(history) == tail_solution.iterations + 1
    assert all(b < a for a, b in zip(history, history[1:]))
    assert tail_solution.quadratic_constant is not None


def test_source_sign_and_decay(tail_fixture, tail_solution):
    """The equation's source is non-positive and decays faster than t^n."""
    f = yamabe_source(tail_fixture, tail_solution.v)
    # positive values are curvature round-off near t_min
    assert f.max() <= 1e-10
    assert decay_exponent(tail_fixture.t, f, (0.01, 0.1)) >= 3.5


def test_curvature_hypothesis(fixture_grid, hyperbolic3):
    """Curvature below -n(n-1) is refused before solving."""
    metric = MetricProfile(3, fixture_grid, 1.0 + 0.01 * hyperbolic3.t**4)
    with pytest.raises(HypothesisError):
        solve_yamabe(metric)


def test_ads_schwarzschild_is_degenerate():
    """An Einstein slice needs no correction beyond discretization noise."""
    grid = RadialGrid(1e-3, 0.8, 64, 3)
    solution = solve_yamabe(make_ads_schwarzschild(3, 1.0, grid), curvature_tol=1e-5)
    assert np.max(np.abs(solution.v)) <= 1e-5
    assert abs(solution.v_n) <= 1e-5


def _shoot(c, t_min, t_max):
    """Integrate the radial equation inward from v(t_max) = c, v'(t_max) = 0."""

    def rhs(x, y):
        t = np.exp(x)
        v, w = y  # w = t v_t
        a, a_t, a_tt = tail_profile(t)
        r_hat = normal_form_plus(t, a, a_t, a_tt) / 8.0
        drift = a_t / a - 1.0 / np.tanh(t)
        source = 3.0 * v + r_hat * (1.0 + v) + 0.75 * ((1.0 + v) ** 5 - 1.0 - 5.0 * v)
        return [w, w - t * drift * w + t**2 * source / np.sinh(t) ** 2]

    return solve_ivp(
        rhs,
        (np.log(t_max), np.log(t_min)),
        [c, 0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-20,
        dense_output=True,
    )


def test_matches_shooting_oracle(tail_fixture, tail_solution):
    """Collocation agrees with an independent shooting solve of the same ODE."""
    t = tail_fixture.t
    t_min, t_max = t[0], t[-1]

    def robin_mismatch(c):
        end = _shoot(c, t_min, t_max).y[:, -1]
        return end[1] - 3.0 * end[0]

    guess = tail_solution.v[-1]
    c = brentq(robin_mismatch, guess - 1e-5, guess + 1e-5, xtol=1e-16, rtol=1e-15)
    shot = _shoot(c, t_min, t_max)
    v = shot.sol(np.log(t))[0]
    assert np.max(np.abs(tail_solution.v - v)) <= 1e-6


_RNG = np.random.default_rng(20231)
SIGN_FIXTURES = [(-float(_RNG.uniform(0.003, 0.05)), int(_RNG.integers(4, 7))) for _ in range(10)]


@pytest.mark.parametrize("eps,power", SIGN_FIXTURES)
def test_maximum_principle_signs(hyperbolic3, eps, power):
    """Negative tails give v <= 0, v_n < 0 and a non-positive, fast-decaying source."""
    metric = make_tail_perturbed(hyperbolic3, eps, power)
    assert scalar_curvature(metric).R.min() + 6.0 >= -1e-9
    solution = solve_yamabe(metric)
    assert solution.v.max() <= 1e-12
    assert solution.v_n < 0.0
    f = yamabe_source(metric, solution.v)
    assert f.max() <= 1e-10
    # samples at the curvature noise floor carry no slope information
    assert decay_exponent(metric.t, f, (0.01, 0.1), atol=1e-10) >= 3.5
