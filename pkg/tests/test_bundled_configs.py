from pathlib import Path

import pytest

from nesssim.config import load_config, make_bath_spec, make_model_spec

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.cfg")))
def test_bundled_config_resolves(name):
    cfg = load_config(CONFIG_DIR / name, environ={})
    make_model_spec(cfg)
    make_bath_spec(cfg)


def test_ideal_parameters():
    cfg = load_config(CONFIG_DIR / "xxz_ideal.cfg", environ={})
    assert cfg["model.n"] == 32
    assert cfg["model.delta"] == 0.5
    assert cfg["bath.mu_left"] == 0.22 and cfg["bath.mu_right"] == -0.22
    assert cfg["evolve.tau"] == 0.05


def test_diffusive_parameters():
    cfg = load_config(CONFIG_DIR / "xxz_diffusive.cfg", environ={})
    assert cfg["model.delta"] == 1.5
    assert cfg["bath.mu_left"] == 0.02
    assert cfg["observe.skip_left"] == 2 and cfg["observe.skip_right"] == 2


def test_staggered_parameters():
    cfg = load_config(CONFIG_DIR / "xxz_staggered.cfg", environ={})
    spec = make_model_spec(cfg)
    assert spec.fields is not None
    assert spec.fields[0] == 0.0 and spec.fields[1] == -0.5
    assert cfg["observe.skip_left"] == 5


def test_tilted_ising_parameters():
    cfg = load_config(CONFIG_DIR / "tilted_ising.cfg", environ={})
    assert cfg["model.hx"] == 3.375 and cfg["model.hz"] == 2.0
    assert cfg["bath.gamma"] == 2.0
    assert cfg["bath.T_left"] == 20.0 and cfg["bath.T_right"] == 30.0
    assert cfg["observe.skip_left"] == 4
