import numpy as np
import pytest

from ahdeform.errors import (
    DimensionError,
    ExtrapolationError,
    HorizonError,
    InvalidGridError,
    ProfileError,
    SupportError,
)
from ahdeform.geometry import (
    GeneralProfile,
    MetricProfile,
    RadialGrid,
    bump,
    check_dim,
    horizon_coordinate,
    horizon_radius,
    make_ads_schwarzschild,
    make_bumped,
    make_hyperbolic,
    make_tail_perturbed,
    profile_from_dict,
    resample,
    smooth_step,
)


def test_grid_is_geometric():
    """Nodes are uniform in log t and hit both ends exactly."""
    grid = RadialGrid(1e-3, 1.0, 64, 2)
    t = grid.nodes
    assert grid.size == 257
    assert t[0] == 1e-3
    assert t[-1] == 1.0
    assert np.allclose(np.diff(np.log(t)), grid.spacing, rtol=1e-10)


def test_refinement_nests():
    """Every node of a level is a node of the next one."""
    coarse = RadialGrid(1e-3, 1.0, 64, 1)
    fine = coarse.refine()
    assert fine.level == 2
    assert np.allclose(fine.nodes[::2], coarse.nodes, rtol=1e-13)


@pytest.mark.parametrize(
    "t_min,t_max,intervals",
    [(0.0, 1.0, 64), (-1.0, 1.0, 64), (1.0, 0.5, 64), (1e-3, 1.0, 0), (1e-3, float("inf"), 64)],
)
def test_invalid_grid(t_min, t_max, intervals):
    """Non-positive, inverted, empty or unbounded grids are rejected."""
    with pytest.raises(InvalidGridError):
        RadialGrid(t_min, t_max, intervals)


def test_grid_from_nodes():
    """A grid is recovered from its own nodes; arbitrary spacing is rejected."""
    grid = RadialGrid(1e-2, 2.0, 16, 2)
    assert RadialGrid.from_nodes(grid.nodes, level=2) == grid
    with pytest.raises(InvalidGridError):
        RadialGrid.from_nodes([0.1, 0.2, 0.25, 0.9])


@pytest.mark.parametrize("n", [2, 8])
def test_dimension_range(n):
    """Only 3 <= n <= 7 is supported."""
    with pytest.raises(DimensionError):
        check_dim(n)


def test_profile_arrays_are_read_only(fixture_grid):
    """Profiles never change once built."""
    metric = make_hyperbolic(3, fixture_grid)
    with pytest.raises(ValueError):
        metric.a[0] = 2.0


def test_profile_rejects_bad_samples(fixture_grid):
    """Wrong length and non-positive samples are rejected."""
    with pytest.raises(ProfileError):
        MetricProfile(3, fixture_grid, np.ones(10))
    a = np.ones(fixture_grid.size)
    a[5] = 0.0
    with pytest.raises(ProfileError):
        MetricProfile(3, fixture_grid, a)


def test_profile_dict_round_trip(tail_fixture):
    """Both profile kinds survive a dict round trip bit for bit."""
    back = profile_from_dict(tail_fixture.to_dict())
    assert isinstance(back, MetricProfile)
    assert np.array_equal(back.a, tail_fixture.a)
    assert back.grid == tail_fixture.grid

    general = tail_fixture.to_general()
    back = profile_from_dict(general.to_dict())
    assert isinstance(back, GeneralProfile)
    assert np.array_equal(back.p, general.p)
    assert np.array_equal(back.q, general.q)


def test_profile_dict_version_checked(tail_fixture):
    data = dict(tail_fixture.to_dict())
    data["version"] = 99
    with pytest.raises(ProfileError):
        profile_from_dict(data)


def test_shape_functions():
    """Bump peaks at 1 with compact support; the step is monotone from 0 to 1."""
    assert bump(np.array([0.0]))[0] == 1.0
    assert np.all(bump(np.array([-1.0, 1.0, 1.5])) == 0.0)
    x = np.linspace(-0.5, 1.5, 201)
    step = smooth_step(x)
    assert np.all(step[x <= 0.0] == 0.0)
    assert np.all(step[x >= 1.0] == 1.0)
    assert np.all(np.diff(step) >= 0.0)
    assert np.isclose(smooth_step(np.array([0.5]))[0], 0.5)


def test_make_bumped_support(hyperbolic3):
    """The bump support must lie strictly inside the grid."""
    bumped = make_bumped(hyperbolic3, center=0.5, width=0.2, amplitude=0.1)
    inside = np.abs(hyperbolic3.t - 0.5) < 0.2
    assert np.all(bumped.a[~inside] == 1.0)
    assert np.isclose(bumped.a.max(), 1.1, atol=1e-3)
    with pytest.raises(SupportError):
        make_bumped(hyperbolic3, center=0.9, width=0.2, amplitude=0.1)


def test_make_tail_perturbed(hyperbolic3):
    """The tail multiplies a by 1 + eps t^k and needs k > n."""
    tail = make_tail_perturbed(hyperbolic3, -0.01, 4)
    assert np.allclose(tail.a, 1.0 - 0.01 * hyperbolic3.t**4, rtol=1e-15)
    with pytest.raises(ProfileError):
        make_tail_perturbed(hyperbolic3, -0.01, 3)


def test_horizon_radius():
    """r_h solves V(r_h) = 0; for n = 3, m = 1 it is 1."""
    assert np.isclose(horizon_radius(3, 1.0), 1.0, atol=1e-12)
    r_h = horizon_radius(4, 0.7)
    assert np.isclose(1.0 + r_h**2 - 1.4 / r_h**2, 0.0, atol=1e-12)


def test_horizon_coordinate():
    """The horizon lies at finite t, deeper for smaller masses."""
    t_h = horizon_coordinate(3, 1.0)
    assert 1.4 < t_h < 1.9
    assert horizon_coordinate(3, 0.5) > t_h


def test_small_mass_horizon_is_outside_the_chart():
    """For small m the whole chart 0 < t < inf stays outside the horizon."""
    assert horizon_coordinate(3, 0.1) == float("inf")
    with pytest.raises(HorizonError):
        make_ads_schwarzschild(3, 0.1, RadialGrid(1e-3, 2.0, 64, 0), through_horizon=True)


def test_ads_schwarzschild_small_mass_limit():
    """a -> 1 as m -> 0, linearly in m."""
    grid = RadialGrid(1e-3, 0.8, 64, 2)
    deviations = [
        float(np.max(np.abs(make_ads_schwarzschild(3, m, grid).a - 1.0)))
        for m in (0.2, 0.1, 0.01)
    ]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[2] < 2e-2
    assert deviations[1] / deviations[2] == pytest.approx(10.0, rel=0.25)


def test_ads_schwarzschild_outer_region():
    """The outer slice has a > 1 and a -> 1 at infinity."""
    grid = RadialGrid(1e-3, 0.8, 64, 2)
    metric = make_ads_schwarzschild(3, 1.0, grid)
    assert np.all(metric.a[1:] > 1.0)
    assert abs(metric.a[0] - 1.0) < 1e-6
    # area radius r = sqrt(q) stays outside the horizon
    assert np.all(np.sqrt(metric.q) > horizon_radius(3, 1.0))


def test_ads_schwarzschild_past_horizon():
    """Without the bridge option the grid must end before the horizon."""
    with pytest.raises(HorizonError):
        make_ads_schwarzschild(3, 1.0, RadialGrid(1e-3, 2.5, 64, 0))


def test_resample_nested_copies_samples(tail_fixture):
    """Coinciding nodes carry the source samples exactly."""
    coarse = resample(tail_fixture, tail_fixture.grid.at_level(2))
    assert np.array_equal(coarse.a, tail_fixture.a[::2])
    assert resample(tail_fixture, tail_fixture.grid) is tail_fixture


def test_resample_interpolates(tail_fixture):
    """Off-node values follow the smooth profile."""
    grid = RadialGrid(2e-3, 0.9, 50, 0)
    moved = resample(tail_fixture, grid)
    assert np.allclose(moved.a, 1.0 - 0.01 * grid.nodes**4, atol=1e-8)


def test_resample_refuses_extrapolation(tail_fixture):
    with pytest.raises(ExtrapolationError):
        resample(tail_fixture, RadialGrid(1e-3, 1.5, 64, 0))
