import numpy as np
import pytest

from ahdeform.errors import AsymptoticMismatchError, ProfileError
from ahdeform.geometry import (
    GeneralProfile,
    MetricProfile,
    RadialGrid,
    make_ads_schwarzschild,
)
from ahdeform.mass import (
    check_lemma_coefficients,
    general_mass,
    mass_aspect,
    normalize,
    normalize_with_coordinates,
    predicted_mass_drop,
    sphere_area,
)
from ahdeform.yamabe import solve_yamabe

LEMMA_S = (0.4, 0.2, 0.1, 0.05)


@pytest.fixture(scope="module")
def lemma_reports(tail_fixture, tail_solution):
    return [check_lemma_coefficients(tail_fixture, tail_solution, s) for s in LEMMA_S]


def test_sphere_area():
    assert np.isclose(sphere_area(3), 4.0 * np.pi)
    assert np.isclose(sphere_area(4), 2.0 * np.pi**2)


def test_predicted_drop():
    """In dimension 3 the drop is 32 s v_n / 3."""
    assert np.isclose(predicted_mass_drop(3, 0.1, -0.003), 32.0 * 0.1 * -0.003 / 3.0)
    assert np.isclose(predicted_mass_drop(3, 0.5, -1.0), -16.0 / 3.0)
    assert np.isclose(predicted_mass_drop(4, 0.5, -1.0), -15.0 / 4.0)
    assert predicted_mass_drop(5, 0.2, 0.0) == 0.0


def test_mass_aspect_of_known_profile(fixture_grid):
    """a = 1 + 3 t^3 has gamma_bar = 3 and mu = 6."""
    t = fixture_grid.nodes
    report = mass_aspect(MetricProfile(3, fixture_grid, 1.0 + 3.0 * t**3))
    assert np.isclose(report.gamma_bar, 3.0, rtol=1e-8)
    assert np.isclose(report.mu, 6.0, rtol=1e-8)
    assert np.isclose(report.total_mass, 24.0 * np.pi, rtol=1e-8)


def test_hyperbolic_mass_vanishes(hyperbolic3):
    assert abs(mass_aspect(hyperbolic3).mu) <= 1e-12


def test_mass_aspect_needs_normal_form(hyperbolic3):
    with pytest.raises(ProfileError):
        mass_aspect(hyperbolic3.to_general())


def test_normalize_recovers_hyperbolic_coordinate():
    """Hyperbolic space pulled back by tau = t + 0.05 t^5 normalizes to a = 1."""
    grid = RadialGrid(1e-3, 1.0, 64, 3)
    t = grid.nodes
    tau = t + 0.05 * t**5
    dtau = 1.0 + 0.25 * t**4
    metric = GeneralProfile(3, grid, dtau**2 / np.sinh(tau) ** 2, 1.0 / np.sinh(tau) ** 2)
    norm = normalize_with_coordinates(metric)
    assert np.allclose(norm.tau, tau, rtol=1e-9, atol=1e-12)
    assert np.max(np.abs(norm.profile.a - 1.0)) <= 1e-7
    assert abs(mass_aspect(norm.profile).mu) <= 1e-7
    assert abs(general_mass(metric).mu) <= 1e-7


def test_normalize_normal_form_is_identity(tail_fixture):
    """A metric already in normal form keeps its profile."""
    again = normalize(tail_fixture.to_general())
    assert np.allclose(again.a, tail_fixture.a, atol=1e-12)
    assert np.isclose(again.grid.t_max, tail_fixture.grid.t_max, rtol=1e-12)


def test_asymptotic_mismatch(fixture_grid):
    """Constant rescalings are not asymptotically hyperbolic."""
    p = 4.0 / np.sinh(fixture_grid.nodes) ** 2
    with pytest.raises(AsymptoticMismatchError):
        normalize(GeneralProfile(3, fixture_grid, p, p))


def test_ads_mass_is_linear_in_m():
    """AdS-Schwarzschild has mass aspect mu = 2(n-1)m/n."""
    grid = RadialGrid(1e-3, 0.8, 64, 3)
    heavy = mass_aspect(make_ads_schwarzschild(3, 1.0, grid)).mu
    light = mass_aspect(make_ads_schwarzschild(3, 0.5, grid)).mu
    assert heavy == pytest.approx(4.0 / 3.0, rel=1e-3)
    assert light == pytest.approx(2.0 / 3.0, rel=1e-3)
    assert np.isclose(heavy / light, 2.0, rtol=1e-2)


def test_tail_fixture_base_mass(tail_fixture):
    """A t^4 tail does not change the mass aspect."""
    assert abs(mass_aspect(tail_fixture).mu) <= 1e-8


def test_lemma_mass_drop(lemma_reports):
    """Measured and closed-form mass drops agree to one percent."""
    for report in lemma_reports:
        assert report.measured_drop < 0.0
        assert report.rel_err <= 0.01


def test_lemma_drop_is_linear_in_s(lemma_reports):
    ratios = np.array([r.measured_drop / r.s for r in lemma_reports])
    assert (ratios.max() - ratios.min()) / abs(ratios.mean()) <= 0.02


def test_lemma_expansions(lemma_reports):
    """The three coordinate-change coefficients follow their closed forms."""
    for report in lemma_reports:
        names = [e.name for e in report.expansions]
        assert names == ["sinh_ratio", "conformal_factor", "radial_stretch"]
        for expansion in report.expansions:
            assert expansion.rel_err <= 1e-4


def test_lemma_report_dict(lemma_reports):
    data = lemma_reports[0].to_dict()
    assert data["s"] == 0.4
    assert data["measured_drop"] == pytest.approx(data["mu_conformal"] - data["mu_base"])
    assert len(data["expansions"]) == 3


def test_degenerate_lemma_skips_expansions(hyperbolic3):
    report = check_lemma_coefficients(hyperbolic3, solve_yamabe(hyperbolic3), 0.1)
    assert report.predicted_drop == 0.0
    assert report.expansions == ()
    assert report.rel_err <= 1e-7
