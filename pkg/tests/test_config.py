import json

import pytest
from pydantic import ValidationError

from ahdeform.config import OUTPUT_DIR_ENV, RunConfig
from ahdeform.errors import ConfigError


@pytest.mark.parametrize("name", ["hyperbolic", "ads_schwarzschild", "ads_past_horizon", "tail_fixture"])
def test_shipped_configs_validate(config_data, name):
    config = RunConfig.from_dict(config_data(name), env={})
    assert config.grid.report_level == config.grid.levels[-1]


def test_defaults(config_data):
    config = RunConfig.from_dict(config_data("hyperbolic"), env={})
    assert config.tolerances.solver == 1e-10
    assert config.tolerances.mass_rtol == 0.01
    assert config.fit.window == (0.01, 0.1)
    assert config.lemma_sweep == config.s_values
    assert config.workers is None


def test_lemma_sweep_override(config_data):
    config = RunConfig.from_dict(config_data("tail_fixture"), env={})
    assert config.s_values == [0.05, 0.025]
    assert config.lemma_sweep == [0.4, 0.2, 0.1, 0.05]


def test_unknown_keys_rejected(config_data):
    data = config_data("hyperbolic")
    data["cutof"] = {"t0": 0.1, "t1": 0.2}
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data, env={})


@pytest.mark.parametrize(
    "path,value",
    [
        (("cutoff", "t1"), 0.9),  # reaches the core region
        (("cutoff", "t0"), 0.0005),  # below t_min
        (("metric", "t_omega"), 1.5),
        (("fit", "window"), [0.01, 2.0]),
        (("grid", "levels"), [2, 1]),
    ],
)
def test_ordering_constraints(config_data, path, value):
    data = config_data("hyperbolic")
    data.setdefault(path[0], {})[path[1]] = value
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data, env={})


@pytest.mark.parametrize("s_values", [[0.0], [1.0], [0.2, -0.1], []])
def test_parameter_range(config_data, s_values):
    data = config_data("hyperbolic")
    data["s_values"] = s_values
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data, env={})


def test_metric_kind_requirements(config_data):
    """Each metric kind names the parameters it needs."""
    data = config_data("ads_schwarzschild")
    del data["metric"]["m"]
    with pytest.raises(ConfigError, match="requires m"):
        RunConfig.from_dict(data, env={})

    data = config_data("tail_fixture")
    data["metric"]["power"] = 3
    with pytest.raises(ConfigError, match="tail power"):
        RunConfig.from_dict(data, env={})


def test_static_window_inside_grid(config_data):
    data = config_data("hyperbolic")
    data["static_windows"] = [[0.3, 1.0]]
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data, env={})


def test_output_directory_override(config_data):
    data = config_data("hyperbolic")
    assert RunConfig.from_dict(data, env={}).output.directory == "out/hyperbolic"
    overridden = RunConfig.from_dict(data, env={OUTPUT_DIR_ENV: "/tmp/elsewhere"})
    assert overridden.output.directory == "/tmp/elsewhere"


def test_config_is_frozen(config_data):
    config = RunConfig.from_dict(config_data("hyperbolic"), env={})
    with pytest.raises(ValidationError):
        config.workers = 4


def test_round_trip(config_data):
    config = RunConfig.from_dict(config_data("tail_fixture"), env={})
    assert RunConfig.from_dict(config.to_dict(), env={}) == config


def test_from_file(tmp_path, config_data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config_data("hyperbolic")), encoding="utf-8")
    assert RunConfig.from_file(path, env={}).metric.kind == "hyperbolic"

    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_file(path, env={})
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "missing.json", env={})
