"""Tests for Haar transforms, L^p_X norms and H^1 atoms."""

import math
import numpy as np
import pytest
import torch
from dyrex.io import (
    Atom,
    HaarExpansion,
    SignPattern,
    SpaceSpec,
    StoppingTimeGrid,
    DTYPE,
)
from dyrex.space import (
    analyze,
    atomic_combination,
    build_atom,
    expectation_norm,
    grid_norm_p,
    h1_norm,
    h1_norm_coeffs,
    h1at_upper_bound,
    hp_norm,
    haar_function,
    lp_norm,
    martingale_projection,
    project,
    refine,
    simple_atom,
    synthesize,
    validate_atom,
)


def test_haar_function():
    """Test values and norms of single Haar functions."""
    h = haar_function("1:0", depth=1)

    assert h.values().flatten().tolist() == [1.0, -1.0, 0.0, 0.0]
    assert h.is_zero_mean
    assert lp_norm(h, 2) == pytest.approx(math.sqrt(0.5))
    assert lp_norm(h, 1) == pytest.approx(0.5)
    assert h1_norm(h) == pytest.approx(0.5)
    assert h1_norm(haar_function("0:0")) == pytest.approx(1.0)

    mirrored = haar_function("1:0", depth=1, sign=-1)
    assert mirrored.values().flatten().tolist() == [-1.0, 1.0, 0.0, 0.0]

    v = haar_function("0:0", space=SpaceSpec.lp(1, 3))
    assert lp_norm(v, 2) == pytest.approx(3.0)

    with pytest.raises(ValueError):
        haar_function("0:0", sign=0)
    with pytest.raises(ValueError, match="invalid-depth"):
        haar_function("2:0", depth=1)


def test_transform(random_expansion):
    """Synthesis and analysis are mutually inverse.

    Args:
        random_expansion: seeded expansion factory
    """
    space = SpaceSpec.lp(3, 2)
    f = random_expansion(4, space, seed=3)
    f.mean = torch.tensor([0.5, -1.0], dtype=DTYPE)

    values = f.values()
    mean, coeffs = analyze(values, 4)
    assert values.shape == (32, 2)
    assert torch.allclose(mean, f.mean)
    assert torch.allclose(coeffs, f.coeffs)
    assert torch.allclose(HaarExpansion.from_values(values, space).coeffs, f.coeffs)

    batch = torch.randn(5, 7, 1, dtype=DTYPE)
    out = synthesize(torch.zeros(5, 1, dtype=DTYPE), batch, 2)
    assert out.shape == (5, 8, 1)

    with pytest.raises(ValueError, match="invalid-depth"):
        synthesize(torch.zeros(1, dtype=DTYPE), torch.zeros(6, 1, dtype=DTYPE), 2)


def test_projection(random_expansion):
    """E(f | F_n) keeps exactly the levels below n.

    Args:
        random_expansion: seeded expansion factory
    """
    f = random_expansion(3, seed=1)
    for n in range(5):
        truncated = HaarExpansion(3, f.space, mean=f.mean, coeffs=f.coeffs.clone())
        truncated.coeffs[2**n - 1 :] = 0
        assert torch.allclose(martingale_projection(f, n), truncated.values())

    coarse = project(f.values(), 2)
    assert torch.allclose(refine(coarse[::4], 4), coarse)
    with pytest.raises(ValueError, match="invalid-depth"):
        project(f.values(), 5)


def test_expansion_algebra(random_expansion):
    """Test coefficient access, level slices, padding and sums.

    Args:
        random_expansion: seeded expansion factory
    """
    f = random_expansion(2, seed=0)
    g = random_expansion(3, seed=1)

    total = f + g
    assert total.depth == 3
    assert torch.allclose(total.values(), f.extend(3).values() + g.values())
    assert torch.allclose(f.coefficient("1:1"), f.coeffs[2])
    assert f.coefficient("3:0").abs().sum() == 0
    levels = sum((f.level_slice(k) for k in range(3)), HaarExpansion.zeros(2))
    assert torch.allclose(levels.coeffs, f.coeffs)
    assert torch.allclose(HaarExpansion.from_json(f.to_json()).coeffs, f.coeffs)

    table = f.to_csv()
    assert list(table.columns) == ["cell", "x0"]
    assert len(table) == 8

    with pytest.raises(ValueError, match="invalid-depth"):
        HaarExpansion(2, coeffs=torch.zeros(6, 1, dtype=DTYPE))


def test_h1_norm(random_expansion):
    """Test the H^1 norm against L^1 and its batched version.

    Args:
        random_expansion: seeded expansion factory
    """
    space = SpaceSpec.lp(1.5, 3)
    f = random_expansion(3, space, seed=5)

    assert h1_norm(f) >= lp_norm(f, 1) - 1e-12
    assert hp_norm(f, 1.0) == pytest.approx(h1_norm(f))
    # the maximal function dominates |f|
    assert hp_norm(f, 3.0) >= lp_norm(f, 3.0) - 1e-12
    batched = h1_norm_coeffs(f.coeffs.unsqueeze(0), 3, space)
    assert float(batched[0]) == pytest.approx(h1_norm(f))

    with pytest.raises(ValueError, match="not-zero-mean"):
        h1_norm(HaarExpansion(1, mean=1.0))


@pytest.mark.parametrize("p", [0.5, math.inf, math.nan])
def test_lp_norm_exponent(p):
    """`lp_norm` and `grid_norm_p` accept only finite p >= 1.

    Args:
        p: an invalid exponent
    """
    f = HaarExpansion.haar("1:0", 2)

    with pytest.raises(ValueError, match="invalid-exponent"):
        lp_norm(f, p)
    with pytest.raises(ValueError, match="invalid-exponent"):
        grid_norm_p(torch.ones(4, dtype=DTYPE), p)


def test_stopping_time():
    """Test construction and adaptedness of stopping times."""
    nu = StoppingTimeGrid.hitting(["1:0", "2:3"], 1)

    assert nu.values.tolist() == [1.0, 1.0, math.inf, 2.0]
    assert nu.stopped_measure() == pytest.approx(0.75)
    assert StoppingTimeGrid.constant(2).stopped_measure() == 0

    with pytest.raises(ValueError, match="not adapted"):
        StoppingTimeGrid(1, [1, 2, math.inf, math.inf])
    with pytest.raises(ValueError):
        StoppingTimeGrid(1, [3, 3, 3, 3])
    with pytest.raises(ValueError, match="disjoint"):
        StoppingTimeGrid.hitting(["1:0", "2:1"], 2)


def test_sign_pattern():
    """Test the multiplier patterns."""
    assert SignPattern.from_bits(1, 0b010)["1:0"] == -1.0
    assert SignPattern.by_level(2, [1, -1, 1])["1:1"] == -1.0
    assert SignPattern.constant(2)["2:3"] == 1.0

    with pytest.raises(ValueError):
        SignPattern(1, [0.0, 2.0, 0.0])


def test_validate_atom():
    """Test both atom conditions."""
    assert validate_atom(simple_atom("2:1", 3)).passed
    assert validate_atom(simple_atom("1:0", 2, SpaceSpec.lp(2, 4))).passed

    too_big = Atom(
        haar_function("0:0", depth=1).scale(5), StoppingTimeGrid.hitting(["0:0"], 1)
    )
    report = validate_atom(too_big)
    assert not report.passed
    assert report.details["clause"] == "b"

    early = Atom(haar_function("0:0", depth=1), StoppingTimeGrid.hitting(["1:0"], 1))
    report = validate_atom(early)
    assert not report.passed
    assert report.details == {"clause": "a", "level": 1}


def test_random_atoms():
    """Random atoms are valid with H^1 norm at most one."""
    for seed in range(200):
        space = SpaceSpec.lp(1 + seed % 3, 1 + seed % 4) if seed % 2 else None
        atom = build_atom(1 + seed % 4, space, seed=seed)
        report = validate_atom(atom)
        assert report.passed, report.details
        assert h1_norm(atom.expansion) <= 1 + 1e-12
        assert expectation_norm(atom.expansion) <= 1 + 1e-12

    atom = build_atom(3, seed=0, fill=1.0)
    assert validate_atom(atom).lhs == pytest.approx(1.0)


def test_h1at_upper_bound():
    """Atomic decompositions certify Σ|μ_k| as an H^1 upper bound."""
    rng = np.random.default_rng(0)
    for trial in range(100):
        count = int(rng.integers(1, 5))
        atoms = [build_atom(3, seed=1000 * trial + k) for k in range(count)]
        weights = rng.standard_normal(count)
        f, decomposition = atomic_combination(atoms, weights)

        bound = h1at_upper_bound(f, decomposition)
        assert bound == pytest.approx(float(np.abs(weights).sum()))
        assert h1_norm(f) <= bound + 1e-9

    atom = simple_atom("1:1", 2)
    f, decomposition = atomic_combination([atom], [2.0])
    with pytest.raises(ValueError, match="mismatch"):
        h1at_upper_bound(f.scale(2.0), decomposition)

    bad = Atom(
        haar_function("0:0", depth=2).scale(5), StoppingTimeGrid.hitting(["0:0"], 2)
    )
    with pytest.raises(ValueError, match="clause b"):
        h1at_upper_bound(bad.expansion, [(1.0, bad)])

    with pytest.raises(ValueError):
        atomic_combination([atom], [1.0, 2.0])
