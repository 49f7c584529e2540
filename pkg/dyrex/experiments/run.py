"""Script to run dyrex experiments and write machine readable reports."""

from dyrex.io import Config, IntervalCollection
from dyrex.dyadic import carleson_constant
from dyrex.rearrangement import (
    carleson_distortion,
    carleson_image,
    semenov_exact,
    semenov_heuristic,
    shadow_semenov,
)
from dyrex.operators import (
    glued_type_witness,
    operator_norm_exact_small,
    operator_norm_search,
    rearrangement_operator,
    type_constant,
    umd_constant,
)
from dyrex.extrapolation import (
    RademacherAverageOperator,
    SquareFunctionOperator,
    check_condition_C,
    check_condition_C_all,
    check_extrapolation_42,
    check_tau_monotone,
    check_theorem_52,
    maximal_inequality_suite,
)
from dyrex.io.estimate import _jsonable
from datetime import datetime, timezone
from omegaconf import DictConfig, ListConfig, OmegaConf
from pathlib import Path
from pprint import pprint
from typing import Optional

import hydra
import json
import logging
import sys
import time
import warnings
import pandas as pd

logger = logging.getLogger(__name__)


def _n_intervals(depth: int) -> int:
    return 2 ** (depth + 1) - 1


def get_kappa(config: Config, tau) -> float:
    """Get κ from the config or, at exact sizes, from the exact Semenov constant.

    Args:
        config: the experiment config.
        tau: the rearrangement.

    Returns:
        The constant κ.
    """
    kappa = config.get("kappa")
    if kappa is not None:
        return float(kappa)
    cap = config.get_caps()["semenov_intervals"]
    if len(tau) > cap:
        raise ValueError(
            f"kappa: required when the domain has more than {cap} intervals"
        )
    return float(semenov_exact(tau, cap).value)


def get_monotone_operator(config: Config, tau):
    """Get the τ-monotone operator named by `monotone_operator`."""
    name = str(config.get("monotone_operator", "square"))
    space = config.get_space()
    if name == "square":
        return SquareFunctionOperator(tau, space)
    if name == "rademacher":
        mode = str(config.get("mode", "exact"))
        mode = "exact" if mode in ("auto", "exact") else "sampled"
        return RademacherAverageOperator(
            tau, space, mode, config.get_budget()["samples"], config.get_seed()
        )
    raise ValueError(f"monotone_operator: unknown operator '{name}'")


def _operator_param(config: Config, key: str):
    """Get `operator.<key>` as plain lists."""
    value = config.get(f"operator.{key}")
    if isinstance(value, ListConfig):
        return OmegaConf.to_container(value)
    return value


def _mode(config: Config, exact_fits: bool, fallback: str) -> str:
    """Resolve `mode: auto` to exact when the instance fits the cap."""
    mode = str(config.get("mode", "auto"))
    if mode != "auto":
        return mode
    if not exact_fits:
        warnings.warn(f"Instance exceeds the exact cap, using {fallback} mode")
    return "exact" if exact_fits else fallback


def run_norm(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Estimate ‖Id_X ⊗ T_{p,τ}‖."""
    tau = config.get_rearrangement()
    space = config.get_space()
    p = config.get_exponents()["p"]
    budget, caps, seed = config.get_budget(), config.get_caps(), config.get_seed()
    op = rearrangement_operator(tau, p, space)
    fits = _n_intervals(tau.source_depth) * space.d <= caps["exact_coefficients"]
    if _mode(config, fits, "search") == "exact":
        estimate = operator_norm_exact_small(
            op, p, caps["exact_coefficients"], budget["restarts"],
            budget["iterations"], seed,
        )
    else:
        estimate = operator_norm_search(
            op, p, budget["restarts"], budget["iterations"], seed,
            verbose=bool(config.get("verbose", False)),
        )
    return {"estimate": estimate.to_dict()}, True, None


def run_semenov(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Get the Semenov constant (exact or heuristic) and the shadow ratio."""
    tau = config.get_rearrangement()
    budget, caps, seed = config.get_budget(), config.get_caps(), config.get_seed()
    mode = _mode(config, len(tau) <= caps["semenov_intervals"], "heuristic")
    if mode == "exact":
        result = semenov_exact(tau, caps["semenov_intervals"])
    else:
        result = semenov_heuristic(
            tau, budget["restarts"], budget["anneal_steps"], seed
        )
    shadow_cert = shadow_semenov(tau)
    return {"semenov": result.to_dict(), "shadow": shadow_cert.to_dict()}, True, None


def run_carleson(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Get ⟦E⟧ and ⟦τ(E)⟧ for the configured collection (default D_0^N)."""
    tau = config.get_rearrangement()
    collection = config.get_collection()
    if collection is None:
        collection = IntervalCollection.all_intervals(tau.source_depth)
    value = carleson_constant(collection)
    image = carleson_image(tau, collection)
    payload = {
        "collection": collection.to_list(),
        "carleson": _jsonable(value),
        "image_carleson": _jsonable(image),
    }
    return payload, True, None


def run_distortion(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Get both Carleson distortion ratios."""
    tau = config.get_rearrangement()
    budget, caps, seed = config.get_budget(), config.get_caps(), config.get_seed()
    fits = tau.is_bijective and len(tau) <= caps["semenov_intervals"]
    mode = _mode(config, fits, "sampled")
    result = carleson_distortion(
        tau, mode, caps["semenov_intervals"], budget["samples"], seed
    )
    return {"distortion": result.to_dict()}, True, None


def run_umd(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Get the truncated UMD_p lower bound of X."""
    depth, space = config.get_depth(), config.get_space()
    p = config.get_exponents()["p"]
    budget, caps, seed = config.get_budget(), config.get_caps(), config.get_seed()
    mode = _mode(config, _n_intervals(depth) <= caps["umd_intervals"], "random")
    estimate = umd_constant(
        space, p, depth, mode, budget["restarts"], budget["iterations"], seed,
        budget["samples"], caps["umd_intervals"],
    )
    return {"estimate": estimate.to_dict()}, True, None


def run_type(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Get the type p lower bound of X restricted to `type.n` vectors."""
    space = config.get_space()
    p = config.get_exponents()["p"]
    n = int(config.get("type.n", 4))
    budget, caps, seed = config.get_budget(), config.get_caps(), config.get_seed()
    mode = str(config.get("mode", "auto"))
    mode = mode if mode in ("exact", "sampled") else "auto"
    estimate = type_constant(
        space, p, n, mode, budget["restarts"], budget["iterations"], seed,
        cap=caps["rademacher_levels"],
    )
    return {"estimate": estimate.to_dict()}, True, None


def run_verify_maximal(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Check the maximal inequality on random adapted sequences."""
    tau = config.get_rearrangement()
    kappa = get_kappa(config, tau)
    report = maximal_inequality_suite(
        tau, kappa, samples=config.get_budget()["samples"], seed=config.get_seed()
    )
    return {"report": report.to_dict()}, report.passed, None


def run_verify_monotone(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Check τ-monotonicity of the configured operator."""
    tau = config.get_rearrangement()
    operator = get_monotone_operator(config, tau)
    report = check_tau_monotone(
        operator,
        tau,
        float(config.get("c", 1.0)),
        config.get_budget()["samples"],
        config.get_seed(),
    )
    return {"report": report.to_dict()}, report.passed, None


def run_verify_42(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Check the extrapolation bound from L^p to L^q."""
    tau = config.get_rearrangement()
    exponents, budget = config.get_exponents(), config.get_budget()
    report = check_extrapolation_42(
        get_monotone_operator(config, tau),
        get_kappa(config, tau),
        float(config.get("c", 1.0)),
        exponents["p"],
        exponents["q"],
        budget["restarts"],
        budget["iterations"],
        config.get_seed(),
        float(config.get("tolerance", 0.05)),
    )
    return {"report": report.to_dict()}, report.passed, None


def run_verify_52(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Check condition C and the H^1 bound of A_1."""
    tau = config.get_rearrangement()
    exponents, budget = config.get_exponents(), config.get_budget()
    decomposition = config.get_decomposition()
    report = check_theorem_52(
        tau,
        exponents["p"],
        config.get("kappa"),
        exponents["p_star"],
        matrix=_operator_param(config, "matrix"),
        gamma=_operator_param(config, "gamma"),
        decompositions=None if decomposition is None else [decomposition],
        space=config.get_space(),
        restarts=budget["restarts"],
        iterations=budget["iterations"],
        seed=config.get_seed(),
        tolerance=float(config.get("tolerance", 0.05)),
        cap=config.get_caps()["exact_coefficients"],
    )
    return {"report": report.to_dict()}, report.passed, None


def run_condition_c(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Check condition C for the configured decomposition or every root."""
    tau = config.get_rearrangement()
    exponents, budget = config.get_exponents(), config.get_budget()
    decomposition = config.get_decomposition()
    gamma = _operator_param(config, "gamma")
    if decomposition is not None:
        report = check_condition_C(
            decomposition, tau, gamma, config.get_space(),
            budget["restarts"], budget["iterations"], seed=config.get_seed(),
        )
    else:
        report = check_condition_C_all(
            tau, config.get("kappa"), exponents["p"], exponents["p_star"],
            gamma=gamma, space=config.get_space(), restarts=budget["restarts"],
            iterations=budget["iterations"], seed=config.get_seed(),
        )
    return {"report": report.to_dict()}, report.passed, None


def run_example(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Emit the configured rearrangement as a permutation file."""
    tau = config.get_rearrangement()
    builder = str(config.get("rearrangement.builder", "identity"))
    path = _outdir(config) / f"{builder}_N{tau.source_depth}.perm.json"
    tau.to_json(path)
    logger.info(f"Wrote {builder} permutation to {path}")
    return {"path": str(path), "map": tau.to_dict()}, True, None


def run_sweep(config: Config) -> tuple[dict, bool, Optional[pd.DataFrame]]:
    """Tabulate the glued family witness ratios over n."""
    space = config.get_space()
    q = config.get_exponents()["q"]
    rows = []
    for n in config.get_sweep_range():
        start = time.perf_counter()
        estimate = glued_type_witness(n, space, q)
        rows.append(
            {
                "n": n,
                "lower_bound": estimate.value,
                "witness_ratio": estimate.meta["witness_ratio"],
                "seconds": time.perf_counter() - start,
            }
        )
        logger.info(f"n={n}: lower bound {estimate.value:.9g}")
    table = pd.DataFrame(rows, columns=["n", "lower_bound", "witness_ratio", "seconds"])
    increasing = bool((table["lower_bound"].diff().dropna() > 0).all())
    payload = {"rows": table.drop(columns="seconds").to_dict(orient="records")}
    return payload, increasing, table


RUNNERS = {
    "norm": run_norm,
    "semenov": run_semenov,
    "carleson": run_carleson,
    "distortion": run_distortion,
    "umd": run_umd,
    "type": run_type,
    "verify-maximal": run_verify_maximal,
    "verify-monotone": run_verify_monotone,
    "verify-42": run_verify_42,
    "verify-52": run_verify_52,
    "condition-c": run_condition_c,
    "example": run_example,
    "sweep": run_sweep,
}


def _outdir(config: Config) -> Path:
    """Get the absolute output directory, creating it."""
    outdir = Path(hydra.utils.to_absolute_path(str(config.get("outdir", "./results"))))
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def write_outputs(
    config: Config, payload: dict, passed: bool, table: Optional[pd.DataFrame] = None
) -> Path:
    """Write the JSON report (or the CSV table) with the echoed config.

    Args:
        config: the experiment config.
        payload: the JSON-ready result.
        passed: whether every check passed.
        table: optional table for `output_format: csv`.

    Returns:
        The path of the written file.
    """
    subcommand = config.get_subcommand()
    builder = str(config.get("rearrangement.builder", "identity"))
    stem = f"{subcommand}.{builder}.N{config.get_depth()}"
    outdir = _outdir(config)
    if str(config.get("output_format", "json")) == "csv" and table is not None:
        outpath = outdir / f"{stem}.csv"
        table.to_csv(outpath, index=False)
    else:
        outpath = outdir / f"{stem}.json"
        document = {
            "subcommand": subcommand,
            "passed": passed,
            "config": config.to_dict(),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "result": _jsonable(payload),
        }
        outpath.write_text(json.dumps(document, sort_keys=True, indent=2))
    print(f"Saving {subcommand} results to {outpath}")
    return outpath


def main(config: Config) -> int:
    """Validate, run and write one experiment.

    Args:
        config: the experiment config.

    Returns:
        0 if every check passed, 1 if a check failed, 2 for an invalid config.
    """
    try:
        config.validate()
    except ValueError as e:
        print(f"Invalid config: {e}", file=sys.stderr)
        return 2
    if config.get("verbose", False):
        logging.basicConfig(level=logging.DEBUG)
    pprint(f"Final experiment config: {config}")
    try:
        payload, passed, table = RUNNERS[config.get_subcommand()](config)
    except (ValueError, OSError) as e:
        print(f"Invalid config: {e}", file=sys.stderr)
        return 2
    write_outputs(config, payload, passed, table)
    if not passed:
        print(json.dumps(_jsonable(payload), sort_keys=True), file=sys.stderr)
    return 0 if passed else 1


@hydra.main(config_path="configs", config_name="base", version_base=None)
def run(cfg: DictConfig) -> int:
    """Run an experiment based on the config.

    Args:
        cfg: the config dict parsed by `hydra`.
    """
    exp_cfg = Config(cfg)
    status = main(exp_cfg)
    if status and exp_cfg.get("exit_nonzero_on_failure", True):
        sys.exit(status)
    return status


if __name__ == "__main__":
    # example calls:

    # exact Semenov constant of the parity shift:
    # python run.py subcommand=semenov rearrangement.builder=parity depth=2 mode=exact

    # override with params config:
    # python run.py +params_config=configs/params.yaml

    # divergence table of the glued families:
    # python run.py subcommand=sweep space=lp:1.2:16 exponents.q=2 sweep.n=1..5 output_format=csv
    run()
