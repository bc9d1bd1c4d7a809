import pytest

from halfline.config import DEFAULT_TOLERANCES, RunConfig, config_from_dict
from halfline.errors import ResolutionError, ValidationError


def test_defaults_and_grids():
    cfg = RunConfig()
    assert cfg.x_grid.n == 1500 and cfg.F_grid.x_min == -12.0 and cfg.F_grid.x_max == 30.0
    assert cfg.k_grid.is_symmetric()
    assert dict(cfg.tolerances) == dict(DEFAULT_TOLERANCES)


def test_tolerance_overrides_are_layered():
    cfg = RunConfig().with_tolerances(solve=1e-9)
    assert cfg.tol("solve") == 1e-9 and cfg.tol("support") == DEFAULT_TOLERANCES["support"]
    with pytest.raises(ValidationError):
        RunConfig(tolerances={"nonsense": 1.0})


@pytest.mark.parametrize("kw, err", [
    ({"h": 0.0}, ValidationError),
    ({"x_neg": 1.0}, ValidationError),
    ({"h": 0.07}, ValidationError),
    ({"k_max": 1.0, "dk": 0.4}, ValidationError),
    ({"dk": 0.1}, ResolutionError),
])
def test_invalid_configurations(kw, err):
    with pytest.raises(err):
        RunConfig(**kw)


def test_config_from_dict_round_trip():
    cfg = RunConfig(x_max=10.0, h=0.05, k_max=30.0, dk=0.02, x_neg=-10.0, seed=7).with_tolerances(fit_residual=1e-6)
    back = config_from_dict(cfg.to_dict())
    assert back == cfg
    with pytest.raises(ValidationError):
        config_from_dict({"x_mx": 3.0})
    with pytest.raises(ValidationError):
        config_from_dict({"h": "fine"})
    with pytest.raises(ValidationError):
        config_from_dict({"tolerances": {"solve": "tight"}})


def test_config_is_frozen():
    with pytest.raises(AttributeError):
        RunConfig().h = 0.1
