"""Tests for `config.py`"""

import pytest
from omegaconf import OmegaConf
from dyrex.io import Config, DyadicInterval, SpaceSpec
from dyrex.rearrangement import build_parity_shift


def test_init(base_config, params_config):
    """Test the `__init__` function of `Config`.

    Load + merge

    Args:
        base_config: the initial config params
        params_config: the config params to override
    """
    base_cfg = OmegaConf.load(base_config)
    base_cfg["params_config"] = params_config
    cfg = Config(base_cfg)

    assert cfg.cfg.subcommand == "umd"
    assert cfg.cfg.exponents.p == 3.0
    assert cfg.cfg.budget.restarts == 2
    assert cfg.cfg.budget.iterations == 60
    assert "rearrangement" in cfg.cfg

    cfg = Config.from_yaml(base_config, params_config)
    assert cfg.get_space() == SpaceSpec.lp(4, 2)


def test_setter(base_config):
    """Test the setter function of `Config`.

    set hyperparameters

    Args:
        base_config: the initial config params
    """
    base_cfg = OmegaConf.load(base_config)
    cfg = Config(base_cfg)
    hparams = {
        "depth": 3,
        "rearrangement.builder": "glued",
        "budget.samples": 10,
    }

    assert cfg.set_hparams(hparams)
    assert cfg.cfg.depth == 3
    assert cfg.cfg.rearrangement.builder == "glued"
    assert cfg.cfg.budget.restarts == 4

    hparams = {"test_config": -1}

    assert cfg.set_hparams(hparams)
    assert "test_config" in cfg.cfg
    assert cfg.cfg.test_config == -1

    assert not cfg.set_hparams({})


def test_getters(base_config):
    """Test each getter function in the config class.

    Args:
        base_config: the config params to override
    """
    base_cfg = OmegaConf.load(base_config)
    cfg = Config(base_cfg)

    assert cfg.get_subcommand() == "semenov"
    assert cfg.get_depth() == 2
    assert cfg.get_space() == SpaceSpec.scalar()
    assert cfg.get_rearrangement() == build_parity_shift(2)
    assert cfg.get_exponents() == {"p": 2.0, "q": 1.5, "p_star": 2.0}
    assert cfg.get_budget()["anneal_steps"] == 200
    assert cfg.get_caps()["semenov_intervals"] == 15
    assert cfg.get_seed() == 0
    assert cfg.get_sweep_range() == [1, 2, 3]
    assert cfg.get_decomposition() is None
    assert cfg.get_collection() is None
    assert cfg.get("does.not.exist", 7) == 7

    cfg.set_hparams({"sweep.n": "2,4"})
    assert cfg.get_sweep_range() == [2, 4]
    cfg.set_hparams({"sweep.n": [1, 5]})
    assert cfg.get_sweep_range() == [1, 5]
    cfg.set_hparams({"sweep.n": 3})
    assert cfg.get_sweep_range() == [3]

    cfg.set_hparams({"space": {"kind": "lp", "r": 1.5, "d": 3}})
    assert cfg.get_space() == SpaceSpec.lp(1.5, 3)

    cfg.set_hparams({"collection": ["1:0", "2:3"]})
    assert cfg.get_collection().to_list() == ["1:0", "2:3"]

    cfg.set_hparams(
        {"rearrangement.builder": "block", "rearrangement.blocks": ["1:0", "1:1"]}
    )
    tau = cfg.get_rearrangement()
    assert tau("2:0") == DyadicInterval(2, 2)
    assert tau("2:3") == DyadicInterval(2, 1)
    assert tau("1:0") == DyadicInterval(1, 0)


def test_seed_from_env(base_config, monkeypatch):
    """The seed falls back to `DYREX_SEED` when the config leaves it null.

    Args:
        base_config: the initial config params
        monkeypatch: pytest environment patcher
    """
    cfg = Config(OmegaConf.load(base_config))
    cfg.set_hparams({"seed": None})

    monkeypatch.setenv("DYREX_SEED", "11")
    assert cfg.get_seed() == 11

    monkeypatch.delenv("DYREX_SEED")
    assert cfg.get_seed() == 0


def test_package_defaults(package_config, monkeypatch):
    """The shipped config leaves the seed to `DYREX_SEED` and restarts at 64.

    Args:
        package_config: the base config shipped with the package
        monkeypatch: pytest environment patcher
    """
    cfg = Config.from_yaml(package_config)
    assert cfg.get("seed") is None
    assert cfg.get_budget()["restarts"] == 64

    monkeypatch.setenv("DYREX_SEED", "11")
    assert cfg.get_seed() == 11

    monkeypatch.delenv("DYREX_SEED")
    assert cfg.get_seed() == 0


@pytest.mark.parametrize(
    "hparams, field",
    [
        ({"exponents.p": 0.5}, "exponents.p"),
        ({"subcommand": "bogus"}, "subcommand"),
        ({"depth": 4, "mode": "exact"}, "depth"),
        ({"subcommand": "verify-42", "exponents.q": 2.5}, "exponents.q"),
        ({"exponents.p_star": 1.5}, "exponents.p_star"),
        ({"rearrangement.builder": "file"}, "rearrangement.path"),
        ({"budget.restarts": 0}, "budget.restarts"),
        ({"space": "lp:0.5:2"}, "space"),
        ({"subcommand": "verify-maximal", "depth": 5}, "kappa"),
        ({"subcommand": "verify-42", "depth": 4}, "kappa"),
        (
            {"rearrangement.builder": "file", "rearrangement.path": "missing.perm.json"},
            "rearrangement",
        ),
        (
            {"rearrangement.builder": "block", "rearrangement.blocks": ["2:0"], "depth": 4},
            "rearrangement",
        ),
        ({"subcommand": "verify-52", "decomposition": "missing.json"}, "decomposition"),
        ({"subcommand": "carleson", "collection": "missing.json"}, "collection"),
    ],
)
def test_validate(make_config, hparams, field):
    """Test that `validate` names the offending field.

    Args:
        make_config: config factory
        hparams: overrides making the config invalid
        field: the field expected at the start of the error
    """
    cfg = make_config()
    cfg.validate()

    cfg.set_hparams(hparams)
    with pytest.raises(ValueError, match=f"^{field}"):
        cfg.validate()
