"""Data structures for handling config parsing."""

import os
import math
from omegaconf import DictConfig, OmegaConf
from pprint import pprint
from typing import Union
from dyrex.io.space_spec import SpaceSpec

SUBCOMMANDS = (
    "norm",
    "semenov",
    "carleson",
    "distortion",
    "umd",
    "type",
    "verify-maximal",
    "verify-monotone",
    "verify-42",
    "verify-52",
    "condition-c",
    "example",
    "sweep",
)

BUILDERS = ("identity", "parity", "glued", "block", "level", "file")


class Config:
    """Class handling loading experiment components based on config params."""

    def __init__(self, cfg: DictConfig, params_cfg: DictConfig = None):
        """Initialize the class with config from hydra/omega conf.

        First uses the base config then overwrites with a specific `params_config`.

        Args:
            cfg: The `DictConfig` containing all the experiment parameters.
            params_cfg: The `DictConfig` containing a subset of parameters to override.
        """
        base_cfg = cfg

        if "params_config" in cfg and cfg.params_config:
            params_cfg = OmegaConf.load(cfg.params_config)

        if params_cfg:
            pprint(f"Overwriting base config with {params_cfg}")
            self.cfg = OmegaConf.merge(base_cfg, params_cfg)
        else:
            self.cfg = cfg

    def __repr__(self):
        """Object representation of config class."""
        return f"Config({self.cfg})"

    def __str__(self):
        """Return a string representation of config class."""
        return f"Config({self.cfg})"

    @classmethod
    def from_yaml(cls, base_cfg_path: str, params_cfg_path: str = None) -> "Config":
        """Load config directly from yaml.

        Args:
            base_cfg_path: path to base config file.
            params_cfg_path: path to override params.
        """
        base_cfg = OmegaConf.load(base_cfg_path)
        params_cfg = OmegaConf.load(params_cfg_path) if params_cfg_path else None
        return cls(base_cfg, params_cfg)

    def set_hparams(self, hparams: dict) -> bool:
        """Setter function for overwriting specific parameters.

        Args:
            hparams: A dict mapping dotted keys to new values.

        Returns:
            `True` if config is successfully updated, `False` otherwise
        """
        if hparams == {} or hparams is None:
            print("Nothing to update!")
            return False
        for hparam, val in hparams.items():
            try:
                OmegaConf.update(self.cfg, hparam, val)
            except Exception as e:
                print(f"Failed to update {hparam} to {val} due to {e}")
                return False
        return True

    def to_dict(self) -> dict:
        """Get the resolved config as plain containers, for echoing into outputs."""
        return OmegaConf.to_container(self.cfg, resolve=True)

    def get(self, key: str, default=None):
        """Get a possibly dotted key, returning `default` if it is missing or null."""
        value = OmegaConf.select(self.cfg, key, default=None)
        return default if value is None else value

    def get_subcommand(self) -> str:
        """Getter for the subcommand."""
        return str(self.get("subcommand", "semenov"))

    def get_depth(self) -> int:
        """Getter for the depth N."""
        return int(self.get("depth", 2))

    def get_space(self) -> SpaceSpec:
        """Getter for the coefficient space.

        Accepts either a mapping `{kind, r, d}` or the short form `lp:<r>:<d>`.

        Returns:
            A `SpaceSpec`.
        """
        space = self.get("space", "scalar")
        if isinstance(space, str):
            return SpaceSpec.parse(space)
        space = OmegaConf.to_container(space) if isinstance(space, DictConfig) else space
        return SpaceSpec.from_dict(space)

    def get_exponents(self) -> dict:
        """Getter for the exponents p, q and p_star (p_star defaults to p)."""
        p = float(self.get("exponents.p", 2.0))
        q = float(self.get("exponents.q", p))
        p_star = float(self.get("exponents.p_star", p))
        return {"p": p, "q": q, "p_star": p_star}

    def get_budget(self) -> dict:
        """Getter for search budgets."""
        defaults = {"restarts": 64, "iterations": 200, "samples": 200, "anneal_steps": 2000}
        return {key: int(self.get(f"budget.{key}", val)) for key, val in defaults.items()}

    def get_caps(self) -> dict:
        """Getter for exact-mode size caps."""
        defaults = {
            "semenov_intervals": 15,
            "umd_intervals": 7,
            "exact_coefficients": 64,
            "rademacher_levels": 12,
        }
        return {key: int(self.get(f"caps.{key}", val)) for key, val in defaults.items()}

    def get_seed(self) -> int:
        """Getter for the seed: config `seed`, else `DYREX_SEED`, else 0."""
        seed = self.get("seed")
        if seed is None:
            seed = os.environ.get("DYREX_SEED", 0)
        return int(seed)

    def get_rearrangement(self) -> "RearrangementMap":
        """Getter for the rearrangement map named by `rearrangement.builder`.

        Returns:
            A `RearrangementMap` built at the configured depth or loaded from file.
        """
        from dyrex.rearrangement import (
            build_identity,
            build_parity_shift,
            build_glued_blocks,
            build_block_perm,
            build_level_permutation,
        )
        from dyrex.io.rearrangement_map import RearrangementMap

        builder = str(self.get("rearrangement.builder", "identity"))
        depth = self.get_depth()
        if builder == "identity":
            return build_identity(depth)
        if builder == "parity":
            return build_parity_shift(depth)
        if builder == "glued":
            return build_glued_blocks(depth)
        if builder == "block":
            blocks = list(self.get("rearrangement.blocks", []))
            return build_block_perm(blocks, depth).map
        if builder == "level":
            return build_level_permutation(depth, self.get_seed())
        if builder == "file":
            return RearrangementMap.from_json(self.get("rearrangement.path"))
        raise ValueError(f"rearrangement.builder: unknown builder '{builder}'")

    def get_decomposition(self) -> Union["CDecomposition", None]:
        """Getter for the condition C decomposition file, if configured."""
        from dyrex.io.decomposition import CDecomposition

        path = self.get("decomposition")
        return None if path is None else CDecomposition.from_json(path)

    def get_collection(self) -> Union["IntervalCollection", None]:
        """Getter for an interval collection: a list of `"k:i"` or a JSON file path."""
        from pathlib import Path
        from dyrex.io.interval import IntervalCollection

        collection = self.get("collection")
        if collection is None:
            return None
        if isinstance(collection, str):
            return IntervalCollection.from_json(Path(collection).read_text())
        return IntervalCollection(list(collection))

    def get_sweep_range(self) -> list[int]:
        """Getter for the sweep values, accepting `"a..b"` ranges or lists."""
        n = self.get("sweep.n", "1..5")
        if isinstance(n, str):
            if ".." in n:
                lo, hi = n.split("..")
                return list(range(int(lo), int(hi) + 1))
            return [int(v) for v in n.split(",")]
        if isinstance(n, int):
            return [n]
        return [int(v) for v in n]

    def validate(self) -> None:
        """Check exponent ranges, per-mode depth caps and that inputs load.

        Raises:
            ValueError: naming the offending field.
        """
        subcommand = self.get_subcommand()
        if subcommand not in SUBCOMMANDS:
            raise ValueError(
                f"subcommand: '{subcommand}' is not one of {', '.join(SUBCOMMANDS)}"
            )
        depth = self.get_depth()
        if depth < 0:
            raise ValueError(f"depth: must be >= 0, found {depth}")
        exponents = self.get_exponents()
        for name in ("p", "q", "p_star"):
            value = exponents[name]
            if not 1 <= value < math.inf:
                raise ValueError(f"exponents.{name}: must lie in [1, inf), found {value}")
        if exponents["p_star"] < exponents["p"]:
            raise ValueError("exponents.p_star: must be >= exponents.p")
        try:
            self.get_space()
        except ValueError as e:
            raise ValueError(f"space: {e}")
        builder = str(self.get("rearrangement.builder", "identity"))
        if builder not in BUILDERS:
            raise ValueError(f"rearrangement.builder: unknown builder '{builder}'")
        if builder == "file" and not self.get("rearrangement.path"):
            raise ValueError("rearrangement.path: required when builder is 'file'")
        budget = self.get_budget()
        for key, value in budget.items():
            if value <= 0:
                raise ValueError(f"budget.{key}: invalid-budget, must be > 0")
        if float(self.get("tolerance", 0.05)) < 0:
            raise ValueError("tolerance: must be >= 0")

        mode = str(self.get("mode", "auto"))
        caps = self.get_caps()
        n_intervals = 2 ** (depth + 1) - 1
        if subcommand == "semenov" and mode == "exact":
            if n_intervals > caps["semenov_intervals"]:
                raise ValueError(
                    f"depth: exact semenov search allows at most "
                    f"{caps['semenov_intervals']} intervals, depth {depth} has {n_intervals}"
                )
        if subcommand in ("carleson", "distortion") and mode == "exact":
            if n_intervals > caps["semenov_intervals"]:
                raise ValueError(
                    f"depth: exact {subcommand} allows at most "
                    f"{caps['semenov_intervals']} intervals, depth {depth} has {n_intervals}"
                )
        if subcommand == "umd" and mode == "exact":
            if n_intervals > caps["umd_intervals"]:
                raise ValueError(
                    f"depth: exact umd allows at most {caps['umd_intervals']} "
                    f"intervals, depth {depth} has {n_intervals}"
                )
        if subcommand == "norm" and mode == "exact":
            if n_intervals * self.get_space().d > caps["exact_coefficients"]:
                raise ValueError(
                    f"depth: exact norm allows at most {caps['exact_coefficients']} "
                    f"coefficients"
                )
        if subcommand in ("verify-monotone", "verify-42", "verify-52") and mode == "exact":
            if depth + 1 > caps["rademacher_levels"]:
                raise ValueError(
                    f"depth: exact Rademacher averages allow at most "
                    f"{caps['rademacher_levels']} levels"
                )
        if subcommand == "verify-42":
            p, q = exponents["p"], exponents["q"]
            if not 1 < q < p:
                raise ValueError(
                    f"exponents.q: invalid-exponents, need 1 < q < p, found q={q}, p={p}"
                )
        if subcommand not in ("umd", "type", "sweep"):
            try:
                tau = self.get_rearrangement()
            except (ValueError, OSError, KeyError, TypeError) as e:
                raise ValueError(f"rearrangement: {e}")
            if (
                subcommand in ("verify-maximal", "verify-42")
                and self.get("kappa") is None
                and len(tau) > caps["semenov_intervals"]
            ):
                raise ValueError(
                    f"kappa: required when the domain has more than "
                    f"{caps['semenov_intervals']} intervals"
                )
        if subcommand in ("verify-52", "condition-c"):
            try:
                self.get_decomposition()
            except (ValueError, OSError, KeyError, TypeError) as e:
                raise ValueError(f"decomposition: {e}")
        if subcommand == "carleson":
            try:
                self.get_collection()
            except (ValueError, OSError, KeyError, TypeError) as e:
                raise ValueError(f"collection: {e}")
        output_format = str(self.get("output_format", "json"))
        if output_format not in ("json", "csv"):
            raise ValueError(f"output_format: must be json or csv, found {output_format}")
