"""Coboundary and joint-transfer solvers plus the splitting projector.

Every solve here runs in exactly the weighted geometry that detected the
invariant distributions (one shared SVD per factor): the primitive is

    P = W^(-s/2) pinv(A) f,    A = (M - I) W^(-s/2),

with the pseudo-inverse cut at the distribution tolerance.  Two facts
follow directly from that algebra and are what the laboratory tests:

* (M - I) P - f equals the component of f along the detected kernel
  directions, so the residual is exactly the size of the annihilator
  violation of the data;
* if f = (M - I) g, then P - g lies in the span of the function-side
  numerical kernel up to float error.

The splitting projector R sends a tensor coefficient matrix to
sum_n gamma_n (x) D_n(columns); its complement has exactly vanishing
pairings columnwise, which is what makes the column solves of ``split``
clean without any further projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AnnihilatorViolation,
    ColumnObstruction,
    CompatibilityViolation,
    IllConditioned,
)
from .inv_dist import (
    DistributionSet,
    _weighted_svd,
    dual_basis,
    invariant_distributions,
)
from .rep_core import TruncatedRep, horocycle_map, sobolev_norm, sobolev_weights
from .tensor_rep import TensorRep, apply_l1, apply_l2, tensor_sobolev_norm

__all__ = [
    "CoboundarySolution",
    "TransferSolution",
    "SplitResult",
    "solve_coboundary",
    "solve_transfer",
    "splitting_R",
    "split",
    "delta2_check",
    "RATIO_ORDERS",
]

RATIO_ORDERS = (0.0, 1.0, 2.0)

PAIRING_TOL = 1e-8
COMPAT_TOL = 1e-8


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 0 else np.inf


def _pinv_apply(ds: DistributionSet, rhs: np.ndarray) -> np.ndarray:
    """Apply the weighted pseudo-inverse to one vector or to columns.

    Shares the cached SVD with the distribution extraction; singular
    values below ``ds.tol`` are discarded.
    """
    u, sig, vh, damp = _weighted_svd(ds.rep, ds.T, ds.smooth_order)
    keep = sig >= ds.tol
    c = u.conj().T @ rhs
    y = np.zeros_like(c)
    inv = 1.0 / sig[keep]
    if rhs.ndim == 1:
        y[keep] = c[keep] * inv
        out = damp * (vh.conj().T @ y)
    else:
        y[keep, :] = c[keep, :] * inv[:, None]
        out = damp[:, None] * (vh.conj().T @ y)
    if not np.all(np.isfinite(out)):
        raise IllConditioned("pseudo-inverse produced non-finite values")
    return out


@dataclass(frozen=True)
class CoboundarySolution:
    """Primitive of one coboundary solve."""

    P: np.ndarray = field(repr=False)
    residual: float
    pairings: np.ndarray = field(repr=False)
    ratio_table: tuple[tuple[float, float], ...]


def solve_coboundary(
    rep: TruncatedRep, f: np.ndarray, t: float, ds: DistributionSet
) -> CoboundarySolution:
    """Solve (M - I) P = f for data with vanishing invariant pairings.

    Raises
    ------
    AnnihilatorViolation
        If some |D_n(f)| exceeds 1e-8 ||f||.
    IllConditioned
        If the solve produces non-finite values.
    """
    f = np.asarray(f, dtype=complex)
    if ds.rep is not rep:
        raise ValueError("distribution set belongs to a different model")
    if ds.T is None or float(t) != ds.T:
        raise ValueError("distribution set was built for a different map time")
    scale = np.linalg.norm(f)
    pairings = np.abs(ds.pair(f))
    worst = pairings.max() if pairings.size else 0.0
    if worst > PAIRING_TOL * max(scale, 1e-300):
        raise AnnihilatorViolation(
            f"invariant pairing {worst:.3e} exceeds {PAIRING_TOL:.0e} * ||f||"
        )
    p = _pinv_apply(ds, f)
    resid = float(np.linalg.norm((horocycle_map(rep, t) @ p - p) - f))
    table = tuple(
        (r, _safe_ratio(sobolev_norm(rep, p, r), sobolev_norm(rep, f, 3 * r + 6)))
        for r in RATIO_ORDERS
    )
    return CoboundarySolution(P=p, residual=resid, pairings=pairings, ratio_table=table)


def _right_distributions(t: TensorRep, ds_left: DistributionSet) -> DistributionSet:
    """Right-factor distribution set in the same geometry as ds_left.

    Dense-ladder spectra make the gap guard fire at standard tolerances,
    so internal right-factor sets opt out of it deliberately.
    """
    return invariant_distributions(
        t.right, t.S, ds_left.tol, smooth_order=ds_left.smooth_order, gap_check=False
    )


def _kernel_frame(ds: DistributionSet) -> tuple[np.ndarray, np.ndarray]:
    """Damping weights and the orthonormal kernel directions in the
    weighted coordinates (kernel_funcs columns are damp * v_i)."""
    damp = sobolev_weights(ds.rep, ds.smooth_order / 2.0) ** -1.0
    return damp, ds.kernel_funcs / damp[:, None]


@dataclass(frozen=True)
class TransferSolution:
    """Joint primitive of the two-sided transfer problem."""

    P: np.ndarray = field(repr=False)
    residual1: float
    residual2: float
    ratio_table: tuple[tuple[float, float], ...]


def solve_transfer(
    t: TensorRep,
    f: np.ndarray,
    g: np.ndarray,
    ds_left: DistributionSet,
    *,
    column_tol: float = PAIRING_TOL,
) -> TransferSolution:
    """Solve L1 P = f, L2 P = g jointly.

    The data must commute (L2 f = L1 g); each left-factor column of f
    must be clean of invariant pairings.  The solve runs columnwise on
    factor one, then corrects the factor-two residual along the left
    kernel directions by factor-two coboundary solves, and finally
    removes the joint-kernel component so the answer is the canonical
    representative orthogonal to span{k1_i (x) k2_j}.

    Raises
    ------
    CompatibilityViolation
        If ||L2 f - L1 g|| > 1e-8 max(||f||, ||g||).
    ColumnObstruction
        If a column of f pairs with an invariant distribution beyond
        ``column_tol`` times ||f||.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    scale = max(np.linalg.norm(f), np.linalg.norm(g), 1e-300)
    compat = np.linalg.norm(apply_l2(t, f) - apply_l1(t, g))
    if compat > COMPAT_TOL * scale:
        raise CompatibilityViolation(
            f"||L2 f - L1 g|| = {compat:.3e} exceeds {COMPAT_TOL:.0e} * scale"
        )

    fnorm = max(np.linalg.norm(f), 1e-300)
    col_pairings = np.abs(ds_left.pair(f))          # (m, N2)
    if col_pairings.size:
        worst_col = int(np.argmax(col_pairings.max(axis=0)))
        worst = float(col_pairings[:, worst_col].max())
        if worst > column_tol * fnorm:
            raise ColumnObstruction(worst_col, worst)

    p = _pinv_apply(ds_left, f)

    # factor-two residual lives (numerically) along the left kernel
    # directions that the columnwise pseudo-inverse cannot see; match it
    # there by factor-two coboundary solves in the weighted coordinates
    ds_right = _right_distributions(t, ds_left)
    damp1, v1k = _kernel_frame(ds_left)
    damp2, v2k = _kernel_frame(ds_right)
    if v1k.shape[1] > 0:
        g_res = g - apply_l2(t, p)
        x = v1k.conj().T @ (g_res / damp1[:, None])           # (m1, N2)
        corr = np.zeros_like(x)
        for i in range(x.shape[0]):
            corr[i] = _pinv_apply(ds_right, x[i])
        p = p + damp1[:, None] * (v1k @ corr)

    # canonical representative: the weighted coordinates of P carry no
    # joint-kernel component (the part no residual can determine)
    if v1k.shape[1] and v2k.shape[1]:
        h = p / damp1[:, None] / damp2[None, :]
        joint = v1k @ (v1k.conj().T @ h @ v2k.conj()) @ v2k.T
        p = p - damp1[:, None] * joint * damp2[None, :]

    if not np.all(np.isfinite(p)):
        raise IllConditioned("transfer solve produced non-finite values")

    residual1 = float(np.linalg.norm(apply_l1(t, p) - f))
    residual2 = float(np.linalg.norm(apply_l2(t, p) - g))
    table = tuple(
        (
            r,
            _safe_ratio(
                tensor_sobolev_norm(t, p, r), tensor_sobolev_norm(t, f, 3 * r + 6)
            ),
        )
        for r in RATIO_ORDERS
    )
    return TransferSolution(
        P=p, residual1=residual1, residual2=residual2, ratio_table=table
    )


def splitting_R(t: TensorRep, f: np.ndarray, ds_left: DistributionSet) -> np.ndarray:
    """Splitting projector: sum_n gamma_n (x) (D_n paired with columns).

    Projects onto the invariant-distribution component of the left
    factor.  Exactly idempotent and exactly commuting with L2, by the
    biorthogonality of the duals.
    """
    f = np.asarray(f, dtype=complex)
    if ds_left.duals is None:
        ds_left = dual_basis(ds_left)
    return ds_left.duals.T @ (ds_left.vectors @ f)


@dataclass(frozen=True)
class SplitResult:
    """Outcome of one splitting step.

    ``report`` rows are (r, ||f_res||_r / ||phi||_{3r+10},
    ||g_res||_r / ||phi||_{3r+10}, ||P||_r / ||f||_{9r+25},
    ||P||_r / ||f||_{9r+28}); ``consistency`` is the defect of the
    exact identity L2 f_res - L1 g_res = phi.
    """

    P: np.ndarray = field(repr=False)
    f_res: np.ndarray = field(repr=False)
    g_res: np.ndarray = field(repr=False)
    phi_norm: float
    report: tuple[tuple[float, float, float, float, float], ...]
    consistency: float


def split(
    t: TensorRep, f: np.ndarray, g: np.ndarray, ds_left: DistributionSet
) -> SplitResult:
    """One splitting step: strip the invariant component of f, solve the
    rest as a factor-one coboundary, and report the residual pair.

    The residual pair (f_res, g_res) = (f - L1 P, g - L2 P) carries the
    same defect phi = L2 f - L1 g as the input, exactly (both difference
    operators commute with subtracting L-images of one P).
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    phi = apply_l2(t, f) - apply_l1(t, g)
    f_perp = f - splitting_R(t, f, ds_left)
    p = _pinv_apply(ds_left, f_perp)
    f_res = f - apply_l1(t, p)
    g_res = g - apply_l2(t, p)
    consistency = float(
        np.linalg.norm((apply_l2(t, f_res) - apply_l1(t, g_res)) - phi)
    )
    phi_norm = float(np.linalg.norm(phi))
    rows = []
    for r in RATIO_ORDERS:
        phi_r = tensor_sobolev_norm(t, phi, 3 * r + 10)
        f_r = tensor_sobolev_norm(t, f, 9 * r + 25)
        f_r_alt = tensor_sobolev_norm(t, f, 9 * r + 28)
        p_r = tensor_sobolev_norm(t, p, r)
        rows.append(
            (
                r,
                _safe_ratio(tensor_sobolev_norm(t, f_res, r), phi_r),
                _safe_ratio(tensor_sobolev_norm(t, g_res, r), phi_r),
                _safe_ratio(p_r, f_r),
                _safe_ratio(p_r, f_r_alt),
            )
        )
    return SplitResult(
        P=p,
        f_res=f_res,
        g_res=g_res,
        phi_norm=phi_norm,
        report=tuple(rows),
        consistency=consistency,
    )


def delta2_check(t: TensorRep, b1: np.ndarray, b2: np.ndarray) -> float:
    """Defect ||L2 b1 - L1 b2|| of a candidate primitive pair."""
    return float(np.linalg.norm(apply_l2(t, b1) - apply_l1(t, b2)))
