"""Test config paths."""

import os
import pytest
from omegaconf import OmegaConf
from dyrex.io import Config


@pytest.fixture
def config_dir(pytestconfig):
    """Get the dir path to configs."""
    return os.path.join(pytestconfig.rootdir, "tests/configs")


@pytest.fixture
def base_config(config_dir):
    """Get the full path to base config."""
    return os.path.join(config_dir, "base.yaml")


@pytest.fixture
def package_config(pytestconfig):
    """Get the full path to the base config shipped with the package."""
    return os.path.join(pytestconfig.rootdir, "dyrex/experiments/configs/base.yaml")


@pytest.fixture
def params_config(config_dir):
    """Get the full path to the supplementary params config."""
    return os.path.join(config_dir, "params.yaml")


@pytest.fixture
def make_config(base_config, tmp_path):
    """Get a factory of configs writing into a temporary `outdir`.

    Returns:
        A function taking dotted overrides and returning a `Config`.
    """

    def _make(**hparams):
        cfg = Config(OmegaConf.load(base_config))
        cfg.set_hparams({"outdir": str(tmp_path)})
        cfg.set_hparams({key.replace("__", "."): val for key, val in hparams.items()})
        return cfg

    return _make
