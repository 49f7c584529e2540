"""Coefficientwise linear operators on Haar expansions."""

import attrs
import math
import torch
from typing import Optional, Union
from numpy.typing import ArrayLike
from dyrex.io.interval import DyadicInterval
from dyrex.io.expansion import HaarExpansion, SignPattern
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import n_intervals, synthesize
from dyrex.space.haar import lp_norm_values


def _to_long(data) -> torch.Tensor:
    """Convert target positions to a LongTensor."""
    return torch.as_tensor(data, dtype=torch.long)


def _to_weights(data) -> torch.Tensor:
    """Convert weights to a float64 tensor."""
    return torch.as_tensor(data, dtype=DTYPE)


def _to_matrix(data) -> Optional[torch.Tensor]:
    """Convert an optional matrix S to a float64 tensor."""
    return None if data is None else torch.as_tensor(data, dtype=DTYPE)


@attrs.define(eq=False)
class LinearHaarOperator:
    """The map Σ a_I h_I ↦ Σ w_I S a_I h_{σ(I)} for an injection σ of positions.

    Rearrangement operators, martingale transforms and the operators A_p are
    instances of it.

    Attributes:
        source_depth: depth N of the inputs.
        target_depth: depth L of the outputs.
        targets: breadth-first target position σ(I) of every source position.
        weights: scalar weight w_I of every source position.
        matrix: optional dense S of shape (d_out, d_in).
        source_space: the space X of input coefficients.
        target_space: the space Y of output coefficients.
        keep_mean: whether the mean is mapped by S (otherwise inputs must have
            mean zero).
    """

    source_depth: int = attrs.field(converter=int)
    target_depth: int = attrs.field(converter=int)
    targets: torch.Tensor = attrs.field(converter=_to_long)
    weights: torch.Tensor = attrs.field(converter=_to_weights)
    matrix: Optional[torch.Tensor] = attrs.field(default=None, converter=_to_matrix)
    source_space: SpaceSpec = attrs.field(factory=SpaceSpec.scalar)
    target_space: SpaceSpec = attrs.field(default=None)
    keep_mean: bool = False

    def __attrs_post_init__(self) -> None:
        """Check shapes and injectivity."""
        n = n_intervals(self.source_depth)
        if self.target_space is None:
            self.target_space = self.source_space
        if self.targets.shape != (n,) or self.weights.shape != (n,):
            raise ValueError(
                f"invalid-depth: operator on depth {self.source_depth} needs {n} targets "
                f"and weights, found {tuple(self.targets.shape)} and "
                f"{tuple(self.weights.shape)}"
            )
        if len(torch.unique(self.targets)) != n:
            raise ValueError("domain-mismatch: target positions are not injective")
        if int(self.targets.max()) >= n_intervals(self.target_depth) or int(self.targets.min()) < 0:
            raise ValueError(
                f"invalid-depth: target positions exceed depth {self.target_depth}"
            )
        if self.matrix is not None:
            expected = (self.target_space.d, self.source_space.d)
            if tuple(self.matrix.shape) != expected:
                raise ValueError(
                    f"invalid-map: S has shape {tuple(self.matrix.shape)}, "
                    f"expected {expected}"
                )
        elif self.target_space.d != self.source_space.d:
            raise ValueError("invalid-map: spaces of different dimension need a matrix S")

    def apply_coeffs(self, coeffs: torch.Tensor) -> torch.Tensor:
        """Map coefficient tensors of shape (..., n_src, d_in) to (..., n_tgt, d_out)."""
        scaled = coeffs * self.weights.unsqueeze(-1)
        if self.matrix is not None:
            scaled = scaled @ self.matrix.T
        out = torch.zeros(
            *scaled.shape[:-2],
            n_intervals(self.target_depth),
            scaled.shape[-1],
            dtype=scaled.dtype,
        )
        return out.index_copy(scaled.dim() - 2, self.targets, scaled)

    def apply_mean(self, mean: torch.Tensor) -> torch.Tensor:
        """Map the mean (..., d_in) to (..., d_out)."""
        if self.matrix is None:
            return mean
        return mean @ self.matrix.T

    def __call__(self, f: HaarExpansion) -> HaarExpansion:
        """Apply the operator to an expansion.

        Args:
            f: expansion of depth <= source_depth over the source space.

        Returns:
            The image expansion of depth target_depth.
        """
        if f.depth > self.source_depth:
            raise ValueError(
                f"invalid-depth: expansion depth {f.depth} exceeds operator depth "
                f"{self.source_depth}"
            )
        if not self.keep_mean and not f.is_zero_mean:
            raise ValueError("not-zero-mean: operator is defined on zero mean functions")
        if f.space.d != self.source_space.d:
            raise ValueError(
                f"invalid-map: expansion dimension {f.space.d} does not match "
                f"{self.source_space.d}"
            )
        f = f.extend(self.source_depth)
        mean = self.apply_mean(f.mean) if self.keep_mean else None
        return HaarExpansion(
            self.target_depth,
            self.target_space,
            mean=mean,
            coeffs=self.apply_coeffs(f.coeffs),
        )

    def ratio_terms(
        self, coeffs: torch.Tensor, p: float
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Get (‖T f‖_p, ‖f‖_p) for batched zero mean coefficient tensors.

        Args:
            coeffs: tensor of shape (..., n_src, d_in).
            p: the exponent.

        Returns:
            Numerator and denominator tensors of shape (...).
        """
        zeros_in = torch.zeros(*coeffs.shape[:-2], coeffs.shape[-1], dtype=coeffs.dtype)
        image = self.apply_coeffs(coeffs)
        zeros_out = torch.zeros(*image.shape[:-2], image.shape[-1], dtype=image.dtype)
        num = lp_norm_values(
            synthesize(zeros_out, image, self.target_depth), p, self.target_space
        )
        den = lp_norm_values(
            synthesize(zeros_in, coeffs, self.source_depth), p, self.source_space
        )
        return num, den

    def dense_matrix(self) -> torch.Tensor:
        """Get the matrix of the operator in coefficient coordinates.

        Rows are indexed by (target position, output component) and columns by
        (source position, input component), both flattened in row major order.
        """
        n_src = n_intervals(self.source_depth)
        d_in = self.source_space.d
        eye = torch.eye(n_src * d_in, dtype=DTYPE).reshape(n_src * d_in, n_src, d_in)
        image = self.apply_coeffs(eye)
        return image.reshape(n_src * d_in, -1).T


def _relabel_targets(tau: RearrangementMap) -> list[int]:
    """Breadth-first target positions of τ on D_0^N."""
    n = n_intervals(tau.source_depth)
    return [tau(DyadicInterval.from_bfs_index(j)).bfs_index for j in range(n)]


def gamma_weights(tau: RearrangementMap) -> torch.Tensor:
    """Get γ_I = |I| / |τ(I)| in breadth-first order."""
    n = n_intervals(tau.source_depth)
    return torch.tensor(
        [float(tau.gamma(DyadicInterval.from_bfs_index(j))) for j in range(n)],
        dtype=DTYPE,
    )


def rearrangement_operator(
    tau: RearrangementMap, p: float, space: SpaceSpec = None
) -> LinearHaarOperator:
    """Get Id_X ⊗ T_{p,τ}: a_I h_I ↦ γ_I^{1/p} a_I h_{τ(I)}."""
    if not 1 <= p < math.inf:
        raise ValueError(f"invalid-exponent: p must lie in [1, inf), found {p}")
    return LinearHaarOperator(
        tau.source_depth,
        tau.target_depth,
        _relabel_targets(tau),
        gamma_weights(tau).pow(1.0 / p),
        source_space=space or SpaceSpec.scalar(),
    )


def martingale_transform_operator(
    theta: SignPattern, space: SpaceSpec = None
) -> LinearHaarOperator:
    """Get the Haar multiplier a_I h_I ↦ θ_I a_I h_I (mean untouched)."""
    n = n_intervals(theta.depth)
    return LinearHaarOperator(
        theta.depth,
        theta.depth,
        torch.arange(n),
        theta.signs,
        source_space=space or SpaceSpec.scalar(),
        keep_mean=True,
    )


def identity_operator(depth: int, space: SpaceSpec = None) -> LinearHaarOperator:
    """Get the identity on zero mean expansions of a given depth."""
    n = n_intervals(depth)
    return LinearHaarOperator(
        depth, depth, torch.arange(n), torch.ones(n, dtype=DTYPE),
        source_space=space or SpaceSpec.scalar(),
    )


def a_p_operator(
    matrix: Union[ArrayLike, torch.Tensor],
    tau: RearrangementMap,
    p: float,
    gamma: Union[ArrayLike, torch.Tensor] = None,
    source_space: SpaceSpec = None,
    target_space: SpaceSpec = None,
) -> LinearHaarOperator:
    """Get A_p: Σ a_I h_I ↦ Σ S a_I γ_I^{1/p} h_{τ(I)}.

    Args:
        matrix: S: X → Y as a dense (d_Y, d_X) matrix.
        tau: the injection τ.
        p: the exponent.
        gamma: positive weights γ_I in breadth-first order, defaults to |I|/|τ(I)|.
        source_space: X, defaults to ℓ_2^{d_X} (scalars if d_X = 1).
        target_space: Y, defaults to the same kind as X with dimension d_Y.

    Returns:
        The operator.
    """
    matrix = torch.as_tensor(matrix, dtype=DTYPE)
    if matrix.dim() != 2:
        raise ValueError(f"invalid-map: S must be a matrix, found shape {tuple(matrix.shape)}")
    d_out, d_in = matrix.shape
    source_space = source_space or (
        SpaceSpec.scalar() if d_in == 1 else SpaceSpec.lp(2.0, d_in)
    )
    if source_space.d != d_in:
        raise ValueError(
            f"invalid-map: S has {d_in} columns but X has dimension {source_space.d}"
        )
    if target_space is None:
        target_space = (
            SpaceSpec.scalar() if d_out == 1 else SpaceSpec.lp(source_space.r, d_out)
        )
    gamma = gamma_weights(tau) if gamma is None else torch.as_tensor(gamma, dtype=DTYPE)
    if torch.any(gamma <= 0):
        raise ValueError("invalid-weights: γ_I must be positive")
    return LinearHaarOperator(
        tau.source_depth,
        tau.target_depth,
        _relabel_targets(tau),
        gamma.pow(1.0 / p),
        matrix=matrix,
        source_space=source_space,
        target_space=target_space,
    )


def apply_rearrangement(tau: RearrangementMap, p: float, f: HaarExpansion) -> HaarExpansion:
    """Apply Id_X ⊗ T_{p,τ} to a zero mean expansion.

    Args:
        tau: injective map with source depth >= depth(f).
        p: the exponent.
        f: zero mean expansion.

    Returns:
        The expansion Σ γ_I^{1/p} a_I h_{τ(I)} of depth target_depth(τ).
    """
    return rearrangement_operator(tau, p, f.space)(f)


def apply_martingale_transform(theta: SignPattern, f: HaarExpansion) -> HaarExpansion:
    """Apply Σ a_I h_I ↦ Σ θ_I a_I h_I, keeping the mean."""
    if f.depth != theta.depth:
        raise ValueError(
            f"invalid-depth: signs of depth {theta.depth} for expansion of depth {f.depth}"
        )
    return martingale_transform_operator(theta, f.space)(f)
