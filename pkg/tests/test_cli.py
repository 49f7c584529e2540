"""Tests for the experiment runner behind the `dyrex` command."""

import json
import pandas as pd
import pytest
from dyrex.io import RearrangementMap
from dyrex.io.config import SUBCOMMANDS
from dyrex.rearrangement import build_glued_blocks
from dyrex.experiments.run import RUNNERS, main


def _result(tmp_path, stem):
    """Load the JSON result written for a stem."""
    return json.loads((tmp_path / f"{stem}.json").read_text())


def test_runners():
    """Every subcommand has a runner."""
    assert set(RUNNERS) == set(SUBCOMMANDS)


def test_semenov(make_config, tmp_path):
    """Test the exact Semenov run of the parity shift.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    cfg = make_config(mode="exact")

    assert main(cfg) == 0
    document = _result(tmp_path, "semenov.parity.N2")
    assert document["passed"]
    assert document["config"]["depth"] == 2
    assert document["result"]["semenov"]["value"] == "2"
    assert document["result"]["semenov"]["kind"] == "exact"
    assert document["result"]["shadow"]["value"] == "2"


def test_carleson(make_config, tmp_path):
    """All of D_0^2 has Carleson constant 3 and is mapped onto itself.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    assert main(make_config(subcommand="carleson")) == 0

    result = _result(tmp_path, "carleson.parity.N2")["result"]
    assert len(result["collection"]) == 7
    assert result["carleson"]["fraction"] == "3"
    assert result["image_carleson"]["float"] == 3.0


@pytest.mark.parametrize("subcommand", ["norm", "umd"])
def test_estimates(make_config, tmp_path, subcommand):
    """Scalar L^2 estimates are exactly one.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
        subcommand: the estimate to run
    """
    depth = 2 if subcommand == "norm" else 1
    assert main(make_config(subcommand=subcommand, depth=depth)) == 0

    estimate = _result(tmp_path, f"{subcommand}.parity.N{depth}")["result"]["estimate"]
    assert estimate["value"] == pytest.approx(1.0, abs=1e-6)


def test_sweep(make_config, tmp_path):
    """The sweep table increases with n.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    cfg = make_config(
        subcommand="sweep",
        space="lp:1.2:16",
        exponents__q=2.0,
        output_format="csv",
    )

    assert main(cfg) == 0
    table = pd.read_csv(tmp_path / "sweep.parity.N2.csv")
    assert table["n"].tolist() == [1, 2, 3]
    assert list(table.columns) == ["n", "lower_bound", "witness_ratio", "seconds"]
    assert table["lower_bound"].is_monotonic_increasing


def test_example(make_config, tmp_path):
    """The emitted permutation file reads back as the built map.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    cfg = make_config(subcommand="example", depth=3, rearrangement__builder="glued")

    assert main(cfg) == 0
    path = tmp_path / "glued_N3.perm.json"
    assert RearrangementMap.from_json(path) == build_glued_blocks(3)
    assert _result(tmp_path, "example.glued.N3")["result"]["path"] == str(path)


def test_failed_check(make_config, tmp_path):
    """A too small κ fails the maximal inequality with status 1.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    cfg = make_config(subcommand="verify-maximal", kappa=1.0)

    assert main(cfg) == 1
    document = _result(tmp_path, "verify-maximal.parity.N2")
    assert not document["passed"]
    assert document["result"]["report"]["counterexample"] is not None


@pytest.mark.parametrize(
    "subcommand, hparams, key",
    [
        ("distortion", {}, "distortion"),
        ("type", {}, "estimate"),
        ("verify-monotone", {}, "report"),
        ("verify-42", {}, "report"),
        ("verify-52", {"kappa": 2.0}, "report"),
        ("condition-c", {}, "report"),
    ],
)
def test_checks(make_config, tmp_path, subcommand, hparams, key):
    """The remaining subcommands pass on the parity shift.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
        subcommand: the subcommand to run
        hparams: extra overrides
        key: the result entry written by the subcommand
    """
    assert main(make_config(subcommand=subcommand, **hparams)) == 0

    document = _result(tmp_path, f"{subcommand}.parity.N2")
    assert document["passed"]
    assert document["subcommand"] == subcommand
    assert key in document["result"]
    if subcommand == "type":
        assert document["result"]["estimate"]["value"] == pytest.approx(1.0)


def test_same_seed(make_config, tmp_path):
    """Two runs with the same seed write the same result.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
    """
    documents = []
    for _ in range(2):
        assert main(make_config(subcommand="norm", mode="search", seed=3)) == 0
        document = _result(tmp_path, "norm.parity.N2")
        del document["timestamp"]
        documents.append(document)

    assert documents[0] == documents[1]
    assert documents[0]["result"]["estimate"]["seed"] == 3


@pytest.mark.parametrize(
    "hparams, field",
    [
        ({"exponents__p": 0.5}, "exponents.p"),
        ({"subcommand": "verify-maximal", "depth": 5}, "kappa"),
        (
            {"rearrangement__builder": "file", "rearrangement__path": "missing.perm.json"},
            "rearrangement",
        ),
        (
            {"subcommand": "verify-monotone", "monotone_operator": "bogus"},
            "monotone_operator",
        ),
    ],
)
def test_invalid_config(make_config, tmp_path, capsys, hparams, field):
    """Invalid configs return status 2 and write nothing.

    Args:
        make_config: config factory
        tmp_path: pytest temporary directory
        capsys: pytest output capture
        hparams: overrides making the config invalid
        field: the field named on stderr
    """
    assert main(make_config(**hparams)) == 2
    assert f"Invalid config: {field}" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())
