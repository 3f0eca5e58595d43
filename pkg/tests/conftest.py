"""Shared fixtures: the frozen tail fixture, its Yamabe solution and analytic oracles."""

import json
from pathlib import Path

import numpy as np
import pytest

from ahdeform.geometry import RadialGrid, make_hyperbolic, make_tail_perturbed
from ahdeform.yamabe import solve_yamabe

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TAIL_EPS = -0.01
TAIL_POWER = 4


def tail_profile(t, eps=TAIL_EPS):
    """``a, a_t, a_tt`` of ``a = 1 + eps t^4``."""
    return 1.0 + eps * t**4, 4.0 * eps * t**3, 12.0 * eps * t**2


def normal_form_plus(t, a, a_t, a_tt):
    """Closed-form ``R + 6`` of ``sinh^-2(t)(dt^2 + a h0)`` in dimension 3."""
    s, c = np.sinh(t), np.cosh(t)
    compact = -2.0 * a_tt / a + a_t**2 / (2.0 * a**2) + 2.0 / a
    return s**2 * (compact - 2.0) + 4.0 * a_t / a * s * c


@pytest.fixture(scope="session")
def fixture_grid():
    return RadialGrid(1e-3, 1.0, 64, 3)


@pytest.fixture(scope="session")
def hyperbolic3(fixture_grid):
    return make_hyperbolic(3, fixture_grid)


@pytest.fixture(scope="session")
def tail_fixture(fixture_grid):
    return make_tail_perturbed(make_hyperbolic(3, fixture_grid), TAIL_EPS, TAIL_POWER)


@pytest.fixture(scope="session")
def tail_solution(tail_fixture):
    return solve_yamabe(tail_fixture)


@pytest.fixture(scope="session")
def tail_plus_exact():
    """Exact ``R + 6`` of the tail fixture as a function of ``t``."""

    def plus(t):
        return normal_form_plus(t, *tail_profile(t))

    return plus


@pytest.fixture
def config_data():
    """Load a shipped configuration document by stem, as a mutable dict."""

    def load(name: str) -> dict:
        with open(CONFIG_DIR / f"{name}.json", encoding="utf-8") as fh:
            return json.load(fh)

    return load
