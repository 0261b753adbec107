"""Truncated weight-basis models of unitary SL(2,R) representations.

A model is a finite slab of the weight basis, indexed by the rotation
frequency k.  The three generators act tridiagonally; the parabolic
generator exponentiates to the time-T horocycle map.  Everything
downstream (invariant distributions, coboundary solves, the splitting
cascade) consumes these matrices, so this module is deliberately small
and heavily checked.

Conventions
-----------
* ``mu`` is the Casimir parameter.  ``mu > 0`` gives a two-sided weight
  window; ``mu = -n^2 + n`` with integer ``n >= 2`` gives a lowest-weight
  window starting at ``k = n``.  ``mu = 0`` and other negatives are
  rejected.
* Raising/lowering coefficients: the raising operator sends basis vector
  ``k`` to ``-sqrt(mu + k(k+1))`` times vector ``k+1``; the lowering
  operator sends it to ``+sqrt(mu + k(k-1))`` times vector ``k-1``.
* The geodesic generator is ``(raise + lower)/2``; the rotation generator
  is the diagonal ``2ik``; the two parabolic generators are the half sum
  and half difference of those, which makes the upper parabolic generator
  exactly skew-Hermitian and complex symmetric on the slab.
* Sobolev weights are ``(1 + mu + 2 k^2) ** r``; on every admissible
  window the base is positive.

Truncation is two-layered: an inner window of half-width ``K`` (the
vectors the laboratory actually reports about) inside a padded slab of
extra half-width ``pad``.  Operator products are only trusted on columns
far enough from the slab edge; ``interior_mask`` encodes that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import InvalidCasimir, NegativeOrderUnsupported, TruncationTooSmall

__all__ = [
    "RepParams",
    "TruncatedRep",
    "build_rep",
    "bracket_residuals",
    "casimir_residual",
    "horocycle_map",
    "horocycle_map_padded",
    "sobolev_weights",
    "sobolev_norm",
]


def _lowest_weight(mu: float) -> int:
    """Integer lowest weight n >= 2 with mu = -n^2 + n, or raise."""
    n_real = (1.0 + np.sqrt(1.0 - 4.0 * mu)) / 2.0
    n = int(round(n_real))
    if n < 2 or abs(mu - (-n * n + n)) > 1e-9 * max(1.0, abs(mu)):
        raise InvalidCasimir(
            f"mu = {mu}: negative Casimir must equal -n^2 + n for integer n >= 2"
        )
    return n


@dataclass(frozen=True)
class RepParams:
    """Parameters of one truncated model."""

    mu: float
    K: int
    pad: int

    def __post_init__(self):
        if self.mu == 0:
            raise InvalidCasimir("mu = 0 is outside the supported families")
        if self.pad < 0:
            raise ValueError("pad must be nonnegative")


@dataclass(frozen=True, eq=False)
class TruncatedRep:
    """One truncated representation slab.

    Attributes
    ----------
    params : RepParams
    index : ndarray of int
        Weight indices of the padded slab, increasing.
    window : ndarray of bool
        Marks the inner (reported) window inside the padded slab.
    raising_op, lowering_op : ndarray
        Ladder matrices on the slab.
    geodesic, rotation, parabolic_up, parabolic_down : ndarray
        Generator matrices on the slab.  ``parabolic_up`` is the one
        whose exponential is the horocycle map.

    Equality is identity (the arrays make value equality useless), which
    also keeps instances usable as cache keys.
    """

    params: RepParams
    index: np.ndarray
    window: np.ndarray
    raising_op: np.ndarray = field(repr=False)
    lowering_op: np.ndarray = field(repr=False)
    geodesic: np.ndarray = field(repr=False)
    rotation: np.ndarray = field(repr=False)
    parabolic_up: np.ndarray = field(repr=False)
    parabolic_down: np.ndarray = field(repr=False)

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def dim(self) -> int:
        """Padded slab dimension."""
        return self.index.size

    @property
    def window_index(self) -> np.ndarray:
        return self.index[self.window]

    @property
    def window_dim(self) -> int:
        return int(self.window.sum())

    def interior_mask(self, steps: int = 1) -> np.ndarray:
        """Columns at least ``steps`` away from both slab edges.

        Products of up to ``steps + 1`` generator factors are exact on
        these columns (each factor moves mass at most one step).
        """
        m = np.ones(self.dim, dtype=bool)
        if steps > 0:
            m[:steps] = False
            m[-steps:] = False
        return m


def _ladder(index: np.ndarray, mu: float) -> tuple[np.ndarray, np.ndarray]:
    n = index.size
    up = np.zeros((n, n), dtype=complex)
    down = np.zeros((n, n), dtype=complex)
    for i, k in enumerate(index):
        if i + 1 < n:
            up[i + 1, i] = -np.sqrt(mu + k * (k + 1.0))
        if i > 0:
            down[i - 1, i] = np.sqrt(mu + k * (k - 1.0))
    return up, down


def build_rep(mu: float, K: int, pad: int | None = None) -> TruncatedRep:
    """Build the truncated model for Casimir ``mu``.

    Parameters
    ----------
    mu : float
        Casimir parameter; positive, or -n^2 + n with integer n >= 2.
    K : int
        Inner window half-width (two-sided case) or the count of weights
        past the lowest one (lowest-weight case).
    pad : int, optional
        Extra slab half-width beyond the window.  Defaults to ``K``.

    Raises
    ------
    InvalidCasimir
        For ``mu = 0`` or an unsupported negative value.
    TruncationTooSmall
        If the window cannot hold an interior column.
    """
    mu = float(mu)
    if pad is None:
        pad = K
    params = RepParams(mu=mu, K=int(K), pad=int(pad))

    if mu > 0:
        if K < 2:
            raise TruncationTooSmall(f"K = {K}: need K >= 2 for a usable window")
        index = np.arange(-(K + pad), K + pad + 1)
        window = np.abs(index) <= K
    else:
        n = _lowest_weight(mu)
        if K < 2:
            raise TruncationTooSmall(f"K = {K}: need K >= 2 for a usable window")
        index = np.arange(n, n + K + pad + 1)
        window = index <= n + K

    up, down = _ladder(index, mu)
    geodesic = (up + down) / 2.0
    rotation = np.diag(2j * index.astype(float))
    # B = U + V = -i (raise - lower); W = U - V = rotation
    b = -1j * (up - down)
    parabolic_up = (b + rotation) / 2.0
    parabolic_down = (b - rotation) / 2.0

    for arr in (index, window, up, down, geodesic, rotation, parabolic_up, parabolic_down):
        arr.setflags(write=False)
    return TruncatedRep(
        params=params,
        index=index,
        window=window,
        raising_op=up,
        lowering_op=down,
        geodesic=geodesic,
        rotation=rotation,
        parabolic_up=parabolic_up,
        parabolic_down=parabolic_down,
    )


def _col_norms(a: np.ndarray, mask: np.ndarray) -> float:
    return float(np.linalg.norm(a[:, mask], ord=np.inf)) if mask.any() else 0.0


def bracket_residuals(rep: TruncatedRep) -> dict[str, float]:
    """Max-norm residuals of the defining bracket relations.

    Measured on interior columns only; one-step edge columns are excluded
    because a two-factor product already leaks off the slab there.
    """
    x = rep.geodesic
    u = rep.parabolic_up
    v = rep.parabolic_down
    mask = rep.interior_mask(1)

    def brk(a, b):
        return a @ b - b @ a

    return {
        "[X,U]-U": _col_norms(brk(x, u) - u, mask),
        "[X,V]+V": _col_norms(brk(x, v) + v, mask),
        "[U,V]-2X": _col_norms(brk(u, v) - 2.0 * x, mask),
    }


def casimir_residual(rep: TruncatedRep) -> float:
    """Max interior-column residual of the Casimir acting as ``mu``.

    The Casimir here is ``-(X^2 + (UV + VU)/2)``.
    """
    x, u, v = rep.geodesic, rep.parabolic_up, rep.parabolic_down
    cas = -(x @ x + (u @ v + v @ u) / 2.0)
    resid = cas - rep.mu * np.eye(rep.dim)
    return _col_norms(resid, rep.interior_mask(1))


@lru_cache(maxsize=64)
def _expm_cached(rep: TruncatedRep, t: float) -> np.ndarray:
    m = scipy.linalg.expm(t * rep.parabolic_up)
    m.setflags(write=False)
    return m


def horocycle_map_padded(rep: TruncatedRep, t: float) -> np.ndarray:
    """Time-``t`` horocycle map on the full padded slab."""
    return _expm_cached(rep, float(t))


def horocycle_map(rep: TruncatedRep, t: float) -> np.ndarray:
    """Time-``t`` horocycle map restricted to the inner window.

    The exponential is computed on the padded slab and then cut, so the
    window block sees curvature from pad-distance neighbours rather than
    a hard slab edge.
    """
    m = horocycle_map_padded(rep, t)
    out = m[np.ix_(rep.window, rep.window)]
    out.setflags(write=False)
    return out


def sobolev_weights(rep: TruncatedRep, r: float, *, padded: bool = False) -> np.ndarray:
    """Sobolev weights ``(1 + mu + 2 k^2) ** r`` on the window (or slab)."""
    if r < 0:
        raise NegativeOrderUnsupported(f"order r = {r} < 0")
    k = rep.index if padded else rep.window_index
    base = 1.0 + rep.mu + 2.0 * k.astype(float) ** 2
    return base ** float(r)


def sobolev_norm(rep: TruncatedRep, coeffs: np.ndarray, r: float) -> float:
    """Order-``r`` Sobolev norm of a coefficient vector on the window."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] != rep.window_dim:
        raise ValueError(
            f"expected {rep.window_dim} window coefficients, got {coeffs.shape[-1]}"
        )
    w = sobolev_weights(rep, r)
    return float(np.sqrt(np.sum(w * np.abs(coeffs) ** 2, axis=-1)))
