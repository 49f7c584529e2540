"""Tests for the maximal inequality, τ-monotone operators and condition C."""

import json
import pytest
import torch
from fractions import Fraction
from dyrex.io import AdaptedSequence, CDecomposition, SpaceSpec, DTYPE
from dyrex.rearrangement import build_glued_blocks, build_identity, build_parity_shift
from dyrex.operators import restart_generator
from dyrex.extrapolation import (
    RademacherAverageOperator,
    SquareFunctionOperator,
    a_rademacher,
    apply_A_p,
    a_square,
    check_condition_C,
    check_condition_C_all,
    check_extrapolation_42,
    check_maximal_inequality,
    check_tau_monotone,
    check_theorem_52,
    extrapolation_factor,
    level_values,
    maximal_inequality_suite,
    normalized_image_identity,
    p_shift,
    random_adapted_multipliers,
    semenov_decomposition,
    shift_matrix,
    sup_power_identity,
    h1_bound_factor,
)


def test_shift(parity_2):
    """Test the matrix of P_{k,τ}.

    Args:
        parity_2: parity shift on D_0^2
    """
    matrix = shift_matrix(parity_2, 1)

    assert matrix.shape == (8, 2)
    assert matrix[:, 0].tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert p_shift(parity_2, 1, [2.0, 5.0]).tolist() == [5.0] * 4 + [2.0] * 4
    assert p_shift(parity_2, 1, [2.0, 2.0, 5.0, 5.0], grid_level=2).tolist() == [
        5.0,
        5.0,
        2.0,
        2.0,
    ]

    with pytest.raises(ValueError, match="invalid-weights"):
        level_values([1.0, 2.0, 3.0, 3.0], 1)
    with pytest.raises(ValueError, match="invalid-depth"):
        shift_matrix(parity_2, 3)


def test_adapted_sequence():
    """Test validation of adapted sequences."""
    Z = AdaptedSequence([[1.0], [1.0, 2.0]])

    assert Z.depth == 1
    assert Z.values.tolist() == [[1.0, 1.0], [1.0, 2.0]]
    assert Z.level(1).tolist() == [1.0, 2.0]

    with pytest.raises(ValueError, match="not nondecreasing"):
        AdaptedSequence([[2.0], [1.0, 3.0]])
    with pytest.raises(ValueError, match="not constant"):
        AdaptedSequence(torch.tensor([[1.0, 2.0], [3.0, 3.0]], dtype=DTYPE))
    with pytest.raises(ValueError, match="nonnegative"):
        AdaptedSequence([[-1.0], [0.0, 0.0]])


def test_maximal_inequality(identity_3):
    """Test the maximal inequality for single sequences.

    Args:
        identity_3: identity on D_0^3
    """
    Z = AdaptedSequence([[1.0], [1.0, 2.0], [1.0, 1.0, 2.0, 4.0]])

    report = check_maximal_inequality(identity_3, Z, 1.0)
    assert report.passed
    assert report.lhs == pytest.approx(report.rhs)

    report = check_maximal_inequality(identity_3, Z, 0.5)
    assert not report.passed
    assert report.counterexample is not None


@pytest.mark.parametrize(
    "tau, kappa",
    [(build_parity_shift(6), 2.0), (build_glued_blocks(6), 3.0)],
    ids=["parity", "glued"],
)
def test_maximal_suite(tau, kappa):
    """The maximal inequality holds on random sequences with κ the Semenov constant.

    Args:
        tau: the rearrangement
        kappa: its Semenov constant
    """
    report = maximal_inequality_suite(tau, kappa, samples=1000, seed=0)

    assert report.passed, report.counterexample
    assert report.details["worst_ratio"] <= kappa + 1e-12

    with pytest.raises(ValueError, match="invalid-budget"):
        maximal_inequality_suite(tau, kappa, samples=0)


def test_maximal_suite_failure():
    """κ = 1 is too small for the parity shift, and the failure is replayable."""
    tau = build_parity_shift(2)
    report = maximal_inequality_suite(tau, 1.0, samples=200, seed=3)

    assert not report.passed
    sample = report.counterexample["sample"]
    Z = AdaptedSequence.random(2, restart_generator(3, sample))
    assert not check_maximal_inequality(tau, Z, 1.0).passed


@pytest.mark.parametrize("space", [SpaceSpec.scalar(), SpaceSpec.lp(3, 2)])
def test_square_monotone(space, level_perms):
    """The square function is τ-monotone with constant 1.

    Args:
        space: the coefficient space
        level_perms: random level permutations of D_0^5
    """
    for tau in (build_parity_shift(5), level_perms[0]):
        report = check_tau_monotone(SquareFunctionOperator(tau, space), tau, 1.0, 500)
        assert report.passed, report.counterexample


def test_rademacher_monotone(parity_3):
    """The exact Rademacher average is τ-monotone with constant 1.

    Args:
        parity_3: parity shift on D_0^3
    """
    tau = build_parity_shift(5)
    A = RademacherAverageOperator(tau, SpaceSpec.lp(1.5, 2))
    report = check_tau_monotone(A, tau, 1.0, 500, seed=1)
    assert report.passed, report.counterexample
    assert A.signs.shape == (64, 6)

    # half the constant must fail
    A = RademacherAverageOperator(parity_3)
    assert not check_tau_monotone(A, parity_3, 0.5, 50).passed

    with pytest.raises(ValueError, match="too-large"):
        RademacherAverageOperator(build_parity_shift(12))


def test_operator_values(parity_3, random_expansion):
    """A scalar square function of one level is |T d_k|.

    Args:
        parity_3: parity shift on D_0^3
        random_expansion: seeded expansion factory
    """
    f = random_expansion(3, seed=2)
    single = f.level_slice(2)

    square = a_square(parity_3, single)
    rademacher = a_rademacher(parity_3, single)
    assert square.shape == (16,)
    assert torch.allclose(square, rademacher)
    assert torch.all(a_square(parity_3, f) >= square - 1e-12)


def test_identities(parity_3, random_expansion):
    """Test the pointwise identities of the shift operators.

    Args:
        parity_3: parity shift on D_0^3
        random_expansion: seeded expansion factory
    """
    for seed in range(10):
        gamma = random_adapted_multipliers(3, restart_generator(seed, 0))
        assert sup_power_identity(parity_3, gamma, 2.5).passed
        f = random_expansion(3, SpaceSpec.lp(2, 3), seed=seed)
        assert normalized_image_identity(parity_3, f, gamma).passed


def test_extrapolation_factor():
    """Test the factor c (3p / (q - 1)) κ^(1/r)."""
    assert extrapolation_factor(2.0, 1.5, 1.0) == pytest.approx(12.0)
    assert extrapolation_factor(2.0, 1.5, 2.0, c=2.0) == pytest.approx(
        24.0 * 2 ** (1 / 1.5 - 1 / 2)
    )

    with pytest.raises(ValueError, match="invalid-exponents"):
        extrapolation_factor(2.0, 2.0, 1.0)
    with pytest.raises(ValueError, match="invalid-exponents"):
        extrapolation_factor(2.0, 1.0, 1.0)


@pytest.mark.parametrize(
    "tau, kappa",
    [(build_parity_shift(3), 2.0), (build_identity(3), 1.0)],
    ids=["parity", "identity"],
)
def test_extrapolation_42(tau, kappa):
    """The searched L^q norm stays below the extrapolated bound.

    Args:
        tau: the rearrangement
        kappa: its Semenov constant
    """
    A = SquareFunctionOperator(tau)
    report = check_extrapolation_42(A, kappa, 1.0, 2.0, 1.5, restarts=2, iterations=30)

    assert report.passed
    factor = extrapolation_factor(2.0, 1.5, kappa)
    assert report.details["factor"] == pytest.approx(factor)
    # the square function is an isometry of L^2 on scalars
    assert report.details["norm_p"].value == pytest.approx(1.0, abs=1e-6)


def test_condition_C(parity_2):
    """Test the three clauses on single and multi part decompositions.

    Args:
        parity_2: parity shift on D_0^2
    """
    dec = semenov_decomposition(parity_2, "1:0")
    assert dec.kappa == 2.0
    assert len(dec.parts[0]) == 3

    report = check_condition_C(dec, parity_2, restarts=2, iterations=20, samples=2)
    assert report.passed
    assert report.details["C2"].details["beta_kind"] == ["exact"]
    assert report.details["C3"].lhs == pytest.approx(1.0)

    dec = CDecomposition(
        "0:0",
        [["0:0"], ["1:0", "2:0", "2:1"], ["1:1", "2:2", "2:3"]],
        p=2.0,
        kappa=2.0,
    )
    report = check_condition_C(dec, parity_2, restarts=2, iterations=20, samples=2)
    assert report.details["C1"].passed
    assert report.details["C1"].lhs == 2
    # every image union is all of [0, 1)
    assert report.details["C2"].details["image_measures"] == [Fraction(1)] * 3
    assert not report.details["C2"].passed
    assert not report.passed


@pytest.mark.parametrize(
    "parts",
    [
        [["1:0", "2:0"]],
        [["1:0", "2:0", "2:1"], ["2:1"]],
        [["1:0", "2:0", "2:1", "2:2"]],
        [["1:0", "2:0", "2:1"], []],
    ],
)
def test_invalid_decomposition(parity_2, parts):
    """Decompositions that do not partition Q(J_0) are rejected.

    Args:
        parity_2: parity shift on D_0^2
        parts: the defective parts
    """
    dec = CDecomposition("1:0", parts, kappa=2.0)
    with pytest.raises(ValueError, match="invalid-decomposition"):
        check_condition_C(dec, parity_2)


def test_decomposition_exponents(tmp_path):
    """Test exponent checks and the decomposition file layout.

    Args:
        tmp_path: pytest temporary directory
    """
    dec = CDecomposition("1:1", [["1:1"]], p=2.0, p_star=3.0, kappa=1.5)
    assert dec.q_star == pytest.approx(1.5)

    path = tmp_path / "dec.json"
    path.write_text(json.dumps(dec.to_dict()))
    assert CDecomposition.from_json(path) == dec

    with pytest.raises(ValueError, match="invalid-exponents"):
        CDecomposition("0:0", [["0:0"]], p=1.0)
    with pytest.raises(ValueError, match="invalid-exponents"):
        CDecomposition("0:0", [["0:0"]], p=2.0, p_star=1.5)


def test_condition_C_all(parity_2):
    """Every root of the parity shift satisfies condition C with κ = 2.

    Args:
        parity_2: parity shift on D_0^2
    """
    report = check_condition_C_all(parity_2, restarts=2, iterations=20, samples=2)

    assert report.passed
    assert len(report.details["roots"]) == 7


def test_apply_A_p(parity_2, random_expansion):
    """A_p relabels along τ and applies S to every coefficient.

    Args:
        parity_2: parity shift on D_0^2
        random_expansion: seeded expansion factory
    """
    f = random_expansion(2, SpaceSpec.lp(2, 2), seed=7)
    S = torch.tensor([[0.0, 1.0], [2.0, 0.0]], dtype=DTYPE)
    g = apply_A_p(S, parity_2, None, 3.0, f)

    assert torch.allclose(g.coefficient("1:1"), S @ f.coefficient("1:0"))
    assert torch.allclose(g.coefficient("2:2"), S @ f.coefficient("2:2"))

    # γ_I = 8 scales by 8^(1/3) = 2
    gamma = torch.full((7,), 8.0, dtype=DTYPE)
    g = apply_A_p(torch.eye(2, dtype=DTYPE), parity_2, gamma, 3.0, f)
    assert torch.allclose(g.coefficient("0:0"), 2 * f.coefficient("0:0"))


def test_h1_bound():
    """The searched H^1 norm of A_1 stays below the bound."""
    tau = build_parity_shift(3)
    report = check_theorem_52(
        tau, p=2.0, kappa=2.0, restarts=2, iterations=20, atoms=4, seed=0
    )

    assert report.passed
    assert report.details["condition_C"].passed
    assert report.details["norm_p"].kind == "exact"
    assert report.details["norm_p"].value == pytest.approx(1.0)
    assert report.rhs == pytest.approx(h1_bound_factor(2.0, 2.0, 2.0))
    assert report.rhs == pytest.approx(36 * 2**1.5)

    with pytest.raises(ValueError, match="invalid-exponents"):
        check_theorem_52(tau, p=1.0)
