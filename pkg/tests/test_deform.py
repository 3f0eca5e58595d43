import numpy as np
import pytest
from scipy.optimize import brentq

from ahdeform.deform import (
    CutoffSpec,
    MassClause,
    build_family,
    conformal_multiply,
    glue,
    member_deviations,
    superharmonic_extent,
    verify_family,
)
from ahdeform.errors import CutoffError, DomainError, ProfileError
from ahdeform.geometry import RadialGrid, make_hyperbolic
from ahdeform.mass import mass_aspect, normalize
from ahdeform.yamabe import solve_yamabe

CUTOFF = CutoffSpec(0.15, 0.75)


@pytest.fixture(scope="module")
def tail_family(tail_fixture, tail_solution):
    return build_family(tail_fixture, tail_solution, CUTOFF, (0.05, 0.025))


@pytest.fixture(scope="module")
def tail_report(tail_family):
    return verify_family(tail_family)


def test_cutoff_validation():
    with pytest.raises(CutoffError):
        CutoffSpec(0.5, 0.5)
    with pytest.raises(CutoffError):
        CutoffSpec(0.15, 0.75).check_inside(0.7)


def test_cutoff_profile():
    """phi is 1 near infinity, 0 from t1 inward and non-increasing."""
    t = np.linspace(0.01, 1.0, 400)
    phi = CUTOFF.phi(t)
    assert np.all(phi[t <= 0.15] == 1.0)
    assert np.all(phi[t >= 0.75] == 0.0)
    assert np.all(np.diff(phi) <= 0.0)


def test_unit_factor_is_identity(hyperbolic3):
    """u = 1 reproduces the base coefficients."""
    general = conformal_multiply(hyperbolic3, np.ones(hyperbolic3.grid.size))
    assert np.array_equal(general.p, hyperbolic3.p)
    assert np.array_equal(general.q, hyperbolic3.q)


def test_conformal_factor_checked(hyperbolic3):
    with pytest.raises(ProfileError):
        conformal_multiply(hyperbolic3, np.ones(5))
    with pytest.raises(ProfileError):
        conformal_multiply(hyperbolic3, -np.ones(hyperbolic3.grid.size))


def test_glue_takes_each_side_exactly(tail_fixture, tail_solution):
    """Samples come from h_s where phi = 1 and from g where phi = 0."""
    h_s = conformal_multiply(tail_fixture, tail_solution.factor(0.1))
    g_s = glue(tail_fixture, h_s, CUTOFF)
    t = tail_fixture.t
    near, far = t <= 0.15, t >= 0.75
    assert np.array_equal(g_s.p[near], h_s.p[near])
    assert np.array_equal(g_s.q[near], h_s.q[near])
    assert np.array_equal(g_s.p[far], tail_fixture.p[far])
    assert np.array_equal(g_s.q[far], tail_fixture.q[far])


@pytest.mark.parametrize("s", [0.0, 1.0, -0.1])
def test_parameter_range(tail_fixture, tail_solution, s):
    with pytest.raises(DomainError):
        build_family(tail_fixture, tail_solution, CUTOFF, (s,))


def test_cutoff_must_end_inside_grid(tail_fixture, tail_solution):
    with pytest.raises(CutoffError):
        build_family(tail_fixture, tail_solution, CutoffSpec(0.15, 1.2), (0.05,))


def test_family_verifies(tail_report):
    """Small s passes mass decrease, curvature bound and equality region."""
    assert not tail_report.degenerate
    assert tail_report.passed
    for member in tail_report.members:
        assert member.mass_clause == MassClause.PASS
        assert member.measured_drop < 0.0
        assert member.minR_plus >= -1e-6
        assert member.equality_region_ok
        assert 0.15 < member.annulus_min_t < 0.75


def test_glued_mass_equals_conformal_mass(tail_report):
    """The glued metric coincides with h_s near infinity, so their masses agree."""
    for member in tail_report.members:
        assert abs(member.mu_s - member.mu_conformal) <= 1e-6


def test_deviation_is_linear_in_s(tail_family, tail_report):
    """Coefficient deviation from the base scales like s."""
    first, second = member_deviations(tail_family)
    assert first == tail_report.members[0].deviation
    assert np.isclose(first / second, 2.0, rtol=0.05)
    assert np.isfinite(tail_report.deviation_constant)


def test_member_lookup(tail_family):
    assert tail_family.member(0.025) is tail_family.members[1]


def test_member_dict(tail_report):
    data = tail_report.to_dict()
    assert data["passed"] is True
    assert [m["s"] for m in data["members"]] == [0.05, 0.025]
    assert data["members"][0]["violations"] == []


def test_hyperbolic_family_is_degenerate(hyperbolic3):
    """v = 0 leaves every member equal to the base; the mass clause does not apply."""
    family = build_family(hyperbolic3, solve_yamabe(hyperbolic3), CUTOFF, (0.2, 0.1))
    report = verify_family(family)
    assert report.degenerate
    assert report.passed
    assert all(m.mass_clause == MassClause.DEGENERATE for m in report.members)
    assert report.drop_per_s_spread == 0.0
    assert abs(mass_aspect(normalize(family.members[0])).mu) <= 1e-7


def test_superharmonic_extent():
    """u = 1 - 0.1 t^3 on hyperbolic space is superharmonic up to t coth t = 2."""
    grid = RadialGrid(1e-3, 2.5, 64, 3)
    metric = make_hyperbolic(3, grid)
    u = 1.0 - 0.1 * metric.t**3
    extent = superharmonic_extent(metric, u)
    t_star = brentq(lambda t: t / np.tanh(t) - 2.0, 1.0, 2.5)
    assert t_star * np.exp(-2.0 * grid.spacing) <= extent <= t_star * np.exp(grid.spacing)


def test_superharmonic_everywhere(hyperbolic3):
    u = 1.0 - 0.1 * hyperbolic3.t**3
    assert superharmonic_extent(hyperbolic3, u) == hyperbolic3.t[-1]
