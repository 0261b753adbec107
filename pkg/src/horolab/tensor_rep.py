"""Tensor products of two truncated models with commuting parabolic maps.

Coefficients of a tensor vector live on the product of the two inner
windows and are stored as a matrix ``F`` of shape ``(N1, N2)``: the first
index is the left factor's weight, the second the right factor's.  The
two difference operators act one-sidedly,

    L1 F = (M1 - I) F          (left map, first index)
    L2 F = F (M2 - I)^T        (right map, second index)

so they commute exactly up to floating point.  ``l_op`` materialises the
corresponding sparse operators on flattened coefficients for small
contract checks; the matrix form above is what production paths use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .errors import NegativeOrderUnsupported
from .rep_core import TruncatedRep, build_rep, horocycle_map, sobolev_weights

__all__ = [
    "TensorRep",
    "build_tensor",
    "apply_l1",
    "apply_l2",
    "l_op",
    "tensor_sobolev_weights",
    "tensor_sobolev_norm",
    "ComponentList",
    "glue",
    "acceptance_components",
]


@dataclass(frozen=True, eq=False)
class TensorRep:
    """Two factors plus their window horocycle maps.

    ``M1`` is the time-``T`` map of the left factor (first coefficient
    index), ``M2`` the time-``S`` map of the right factor (second index).
    Both are window restrictions of padded exponentials.
    """

    left: TruncatedRep
    right: TruncatedRep
    T: float
    S: float
    M1: np.ndarray = field(repr=False)
    M2: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left.window_dim, self.right.window_dim)


def build_tensor(
    left: TruncatedRep | tuple,
    right: TruncatedRep | tuple,
    T: float,
    S: float,
) -> TensorRep:
    """Assemble a tensor model from two factors.

    Factors may be prebuilt reps or ``(mu, K, pad)`` tuples.
    """
    if not isinstance(left, TruncatedRep):
        left = build_rep(*left)
    if not isinstance(right, TruncatedRep):
        right = build_rep(*right)
    return TensorRep(
        left=left,
        right=right,
        T=float(T),
        S=float(S),
        M1=horocycle_map(left, T),
        M2=horocycle_map(right, S),
    )


def _check_shape(t: TensorRep, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != t.shape:
        raise ValueError(f"expected coefficients of shape {t.shape}, got {coeffs.shape}")
    return coeffs


def apply_l1(t: TensorRep, coeffs: np.ndarray) -> np.ndarray:
    """Left difference operator on a coefficient matrix."""
    coeffs = _check_shape(t, coeffs)
    return t.M1 @ coeffs - coeffs


def apply_l2(t: TensorRep, coeffs: np.ndarray) -> np.ndarray:
    """Right difference operator on a coefficient matrix."""
    coeffs = _check_shape(t, coeffs)
    return coeffs @ t.M2.T - coeffs


def l_op(t: TensorRep, which: int) -> scipy.sparse.csr_matrix:
    """Sparse flattened form of L1 or L2 (row-major flattening).

    Intended for small contract checks; at production window sizes use
    ``apply_l1``/``apply_l2`` instead of materialising this.
    """
    n1, n2 = t.shape
    if which == 1:
        return scipy.sparse.kron(
            scipy.sparse.csr_matrix(t.M1 - np.eye(n1)), scipy.sparse.eye(n2), format="csr"
        )
    if which == 2:
        return scipy.sparse.kron(
            scipy.sparse.eye(n1), scipy.sparse.csr_matrix(t.M2 - np.eye(n2)), format="csr"
        )
    raise ValueError(f"which must be 1 or 2, got {which}")


def tensor_sobolev_weights(t: TensorRep, r: float, *, form: str = "sum") -> np.ndarray:
    """Order-``r`` weights on the coefficient grid.

    ``form="sum"`` uses ``(w1_j + w2_k) ** r`` where ``w_i`` are the
    factor base weights; ``form="product"`` uses ``(w1_j w2_k) ** r``.
    The sum form is the default everywhere in the laboratory.
    """
    if r < 0:
        raise NegativeOrderUnsupported(f"order r = {r} < 0")
    w1 = sobolev_weights(t.left, 1.0)
    w2 = sobolev_weights(t.right, 1.0)
    if form == "sum":
        base = w1[:, None] + w2[None, :]
    elif form == "product":
        base = w1[:, None] * w2[None, :]
    else:
        raise ValueError(f"unknown weight form {form!r}")
    return base ** float(r)


def tensor_sobolev_norm(
    t: TensorRep, coeffs: np.ndarray, r: float, *, form: str = "sum"
) -> float:
    """Order-``r`` Sobolev norm of a tensor coefficient matrix."""
    coeffs = _check_shape(t, coeffs)
    w = tensor_sobolev_weights(t, r, form=form)
    return float(np.sqrt(np.sum(w * np.abs(coeffs) ** 2)))


@dataclass(frozen=True)
class ComponentList:
    """Weighted finite list of tensor components with a spectral-gap floor.

    Weights must be positive and sum to one; every component's Casimir
    parameters must sit at least ``gap`` away from zero.
    """

    components: tuple[TensorRep, ...]
    weights: tuple[float, ...]
    gap: float

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("component list must be nonempty")
        if len(self.weights) != len(self.components):
            raise ValueError("one weight per component")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if self.gap <= 0:
            raise ValueError("gap must be positive")
        for t in self.components:
            if min(abs(t.left.mu), abs(t.right.mu)) < self.gap - 1e-12:
                raise ValueError(
                    f"component ({t.left.mu}, {t.right.mu}) violates gap {self.gap}"
                )


def glue(norms, weights) -> float:
    """Aggregate per-component norms: sqrt(sum_i w_i n_i^2)."""
    norms = np.asarray(norms, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if norms.shape != weights.shape:
        raise ValueError("norms and weights must have matching shapes")
    return float(np.sqrt(np.sum(weights * norms**2)))


def acceptance_components(
    K: int, pad: int | None = None, T: float = 1.0, S: float = 1.0
) -> ComponentList:
    """The default three-component list used by the standard experiments.

    Casimir pairs (0.25, 0.25), (5, 5), (-2, 5) with equal weights; the
    gap floor is the smallest parameter magnitude present.
    """
    pairs = [(0.25, 0.25), (5.0, 5.0), (-2.0, 5.0)]
    comps = tuple(
        build_tensor(build_rep(mu, K, pad), build_rep(th, K, pad), T, S)
        for mu, th in pairs
    )
    return ComponentList(components=comps, weights=(1 / 3, 1 / 3, 1 / 3), gap=0.25)
