"""Invariant distributions of the time-T horocycle map on a truncated slab.

A distribution here is a row vector d acting on window coefficients by
the bilinear pairing D(f) = sum_k d_k f_k.  Invariance under the map M
means D((M - I) f) = 0 for admissible f.

On a finite slab the difference M - I has no numerical kernel at usable
tolerances: the exponential spreads mass across a range that grows with
the frequency, so the raw singular spectrum bottoms out around 5e-4 even
at K = 32.  The laboratory therefore detects invariance against smooth
test vectors only: with W the diagonal Sobolev base weight, the operator

    A = (M - I) W^(-s/2)        (s = smooth order, default 8)

is the difference seen through order-s/2 smoothing, and the invariant
distributions are the left singular vectors of A with singular value
below the tolerance.  All downstream solvers reuse exactly this weighted
geometry (same cached SVD), which is what makes their residual and
kernel-membership guarantees hold by construction.

The detected families are ladders without a clean spectral break, so by
default a guard refuses tolerances that land inside a tight cluster
(bracketing singular values within a factor of 10).  Experiments that
deliberately cut inside a ladder pass ``gap_check=False``.

Distributions are ordered by increasing regularity score
``-sum_k |d_k|^2 w_k^(-2)``: descending smooth-norm mass, so the most
regular (slowest-decaying-pairing) functional comes first.  The flow
(infinitesimal) invariants are computed separately as the structural
left null space of the generator restricted to slab-complete columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import DegenerateTruncation, RankDeficient
from .rep_core import TruncatedRep, horocycle_map, sobolev_norm, sobolev_weights

__all__ = [
    "DistributionSet",
    "DecayReport",
    "invariant_distributions",
    "flow_invariant_distributions",
    "dual_basis",
    "annihilator_project",
    "decay_report",
    "kernel_clean",
    "span_residual",
    "kernel_distance",
    "DEFAULT_SMOOTH_ORDER",
    "GAP_FACTOR",
]

DEFAULT_SMOOTH_ORDER = 8.0
GAP_FACTOR = 10.0

# tol must cut well inside float territory but stay below the raw
# spectral floor of the hard-window difference
TOL_RANGE = (1e-14, 1e-4)


@dataclass(frozen=True, eq=False)
class DistributionSet:
    """Detected invariant distributions of one truncated model.

    Attributes
    ----------
    rep : TruncatedRep
    T : float or None
        Map time; ``None`` marks a flow-invariant (generator) set.
    tol : float
        Singular-value threshold used for detection.
    smooth_order : float
        Smoothing order s of the weighted geometry (0 for flow sets).
    vectors : ndarray, shape (m, N)
        Distribution rows, most regular first.  Rows are conjugates of
        orthonormal left singular vectors, so the stack is orthonormal.
    sigmas : ndarray, shape (m,)
        Singular values (or structural residuals) per distribution.
    scores : ndarray, shape (m,)
        Regularity scores used for the ordering.
    kernel_funcs : ndarray, shape (N, mk)
        Function-side numerical kernel of the weighted difference
        (columns W^(-s/2) v_i), same ordering.  Empty for flow sets.
    duals : ndarray or None, shape (m, N)
        Biorthogonal dual functions, filled by ``dual_basis``.
    """

    rep: TruncatedRep
    T: float | None
    tol: float
    smooth_order: float
    vectors: np.ndarray = field(repr=False)
    sigmas: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)
    kernel_funcs: np.ndarray = field(repr=False)
    duals: np.ndarray | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def pair(self, coeffs: np.ndarray) -> np.ndarray:
        """Pair every distribution with a window vector (or each column
        of a coefficient matrix)."""
        return self.vectors @ np.asarray(coeffs)


@lru_cache(maxsize=64)
def _weighted_svd(rep: TruncatedRep, t: float, smooth_order: float):
    """SVD of the smoothing-weighted window difference (cached).

    Returns ``(u, sig, vh, damp)`` with ``A = (M - I) diag(damp)`` and
    ``damp = w^(-s/2)``.  The cache is keyed by rep identity, so every
    consumer of one rep shares one factorisation.
    """
    m = horocycle_map(rep, t)
    e = m - np.eye(rep.window_dim)
    damp = sobolev_weights(rep, smooth_order / 2.0) ** -1.0
    a = e * damp[None, :]
    u, sig, vh = np.linalg.svd(a)
    for arr in (u, sig, vh, damp):
        arr.setflags(write=False)
    return u, sig, vh, damp


def _regularity_scores(rep: TruncatedRep, vectors: np.ndarray) -> np.ndarray:
    w = sobolev_weights(rep, 1.0)
    return -np.sum(np.abs(vectors) ** 2 * w[None, :] ** -2.0, axis=1)


def _ordered(rep, vectors, sigmas, kernel_funcs):
    scores = _regularity_scores(rep, vectors)
    order = np.argsort(scores, kind="stable")
    kf = kernel_funcs[:, order] if kernel_funcs.shape[1] == len(order) else kernel_funcs
    return vectors[order], sigmas[order], scores[order], kf


def invariant_distributions(
    rep: TruncatedRep,
    t: float,
    tol: float = 1e-8,
    *,
    smooth_order: float = DEFAULT_SMOOTH_ORDER,
    gap_check: bool = True,
) -> DistributionSet:
    """Detect invariant distributions of the time-``t`` map.

    Parameters
    ----------
    rep : TruncatedRep
    t : float
        Map time.  ``t = 0`` returns the entire dual space (everything
        is invariant under the identity).
    tol : float
        Detection threshold, required inside ``(1e-14, 1e-4)``.
    smooth_order : float, keyword
        Smoothing order of the test-vector weighting.
    gap_check : bool, keyword
        Refuse thresholds that land inside a singular-value cluster
        (bracketing ratio below 10).  The detected ladders are dense,
        so standard-tolerance runs on dense spectra must opt out.

    Raises
    ------
    DegenerateTruncation
        If ``gap_check`` is on, the kernel is nonempty, and the first
        retained singular value is within a factor of 10 of the last
        kernel one.
    """
    if not (TOL_RANGE[0] < tol < TOL_RANGE[1]):
        raise ValueError(f"tol = {tol} outside supported range {TOL_RANGE}")
    n = rep.window_dim

    if t == 0:
        eye = np.eye(n)
        vectors, sigmas, scores, kf = _ordered(rep, eye.copy(), np.zeros(n), eye.copy())
        ds = DistributionSet(
            rep=rep, T=0.0, tol=tol, smooth_order=smooth_order,
            vectors=vectors, sigmas=sigmas, scores=scores, kernel_funcs=kf,
        )
        return dual_basis(ds)

    u, sig, vh, damp = _weighted_svd(rep, float(t), float(smooth_order))
    m = int(np.count_nonzero(sig < tol))
    if gap_check and 0 < m < n:
        last_kernel = sig[n - m]      # sig is descending
        first_kept = sig[n - m - 1]
        if first_kept / last_kernel < GAP_FACTOR:
            raise DegenerateTruncation(
                f"singular values bracket the threshold too tightly: "
                f"{last_kernel:.3e} vs {first_kept:.3e} "
                f"(ratio {first_kept / last_kernel:.2f} < {GAP_FACTOR})"
            )

    # smallest singular value first
    cols = np.arange(n - 1, n - m - 1, -1)
    vectors = u[:, cols].conj().T.copy()
    sigmas = sig[cols].copy()
    kernel_funcs = (damp[:, None] * vh[cols].conj().T).copy()
    vectors, sigmas, scores, kernel_funcs = _ordered(rep, vectors, sigmas, kernel_funcs)
    ds = DistributionSet(
        rep=rep, T=float(t), tol=tol, smooth_order=float(smooth_order),
        vectors=vectors, sigmas=sigmas, scores=scores, kernel_funcs=kernel_funcs,
    )
    return dual_basis(ds)


def flow_invariant_distributions(rep: TruncatedRep) -> DistributionSet:
    """Distributions annihilating the range of the parabolic generator.

    The generator is restricted to window columns that are complete in
    the slab (a tridiagonal column is trusted only if both its neighbour
    entries live inside the window; the lowest-weight bottom column is
    complete because its lowering coefficient vanishes identically).
    The left null space of that rectangular restriction is structural,
    so it is computed exactly rather than thresholded.
    """
    uw = rep.parabolic_up[np.ix_(rep.window, rep.window)]
    two_sided = rep.mu > 0
    cols = np.ones(rep.window_dim, dtype=bool)
    cols[-1] = False
    if two_sided:
        cols[0] = False
    b = uw[:, cols]
    ns = scipy.linalg.null_space(b.conj().T)
    vectors = ns.conj().T.copy()
    sigmas = np.array([np.linalg.norm(v.conj() @ b) for v in vectors])
    vectors, sigmas, scores, _ = _ordered(
        rep, vectors, sigmas, np.zeros((rep.window_dim, 0))
    )
    ds = DistributionSet(
        rep=rep, T=None, tol=0.0, smooth_order=0.0,
        vectors=vectors, sigmas=sigmas, scores=scores,
        kernel_funcs=np.zeros((rep.window_dim, 0)),
    )
    return dual_basis(ds)


def dual_basis(ds: DistributionSet) -> DistributionSet:
    """Attach the minimal-norm biorthogonal dual functions.

    Duals satisfy D_n(gamma_m) = delta_nm with each gamma of minimal
    l2 norm; for a single distribution this is conj(d) / |d|^2.

    Raises
    ------
    RankDeficient
        If the distribution stack is numerically dependent.
    """
    if ds.count == 0:
        return replace(ds, duals=np.zeros((0, ds.rep.window_dim)))
    stack = ds.vectors
    svals = np.linalg.svd(stack, compute_uv=False)
    if svals[-1] < 1e-10 * svals[0]:
        raise RankDeficient(
            f"distribution stack condition {svals[0] / svals[-1]:.3e}"
        )
    duals = np.linalg.pinv(stack).T.copy()
    duals.setflags(write=False)
    return replace(ds, duals=duals)


def annihilator_project(ds: DistributionSet, coeffs: np.ndarray) -> np.ndarray:
    """Remove every invariant component: f - sum_n D_n(f) gamma_n.

    The result pairs to zero with each distribution in the set (up to
    the conditioning of the dual stack) and the operation is idempotent.
    """
    if ds.duals is None:
        ds = dual_basis(ds)
    coeffs = np.asarray(coeffs)
    if ds.count == 0:
        return coeffs.copy()
    return coeffs - ds.duals.T @ (ds.vectors @ coeffs)


def kernel_clean(ds: DistributionSet, coeffs: np.ndarray) -> np.ndarray:
    """Remove the weighted-coordinate kernel components of a vector (or
    of each column of a matrix).

    After cleaning, the difference image of the result has no component
    along the detected distributions beyond float noise, so solver
    round-trips on cleaned data close to machine accuracy.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if ds.kernel_funcs.shape[1] == 0:
        return coeffs.copy()
    damp = sobolev_weights(ds.rep, ds.smooth_order / 2.0) ** -1.0
    vk = ds.kernel_funcs / damp[:, None]        # orthonormal columns
    if coeffs.ndim == 1:
        h = coeffs / damp
        return coeffs - damp * (vk @ (vk.conj().T @ h))
    h = coeffs / damp[:, None]
    return coeffs - damp[:, None] * (vk @ (vk.conj().T @ h))


def span_residual(ds: DistributionSet, vec: np.ndarray) -> float:
    """Relative distance of a unit-normalised vector from the span of
    the set's (conjugated) singular vectors."""
    vec = np.asarray(vec, dtype=complex)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        return 0.0
    vec = vec / nrm
    basis = ds.vectors.conj()          # orthonormal rows spanning the subspace
    proj = basis.T @ (basis @ vec.conj()).conj()
    # rows are orthonormal, so the projection is exact
    return float(np.linalg.norm(vec - proj))


def kernel_distance(ds: DistributionSet, coeffs: np.ndarray) -> float:
    """Relative distance of a window vector from the function-side
    numerical kernel span."""
    coeffs = np.asarray(coeffs, dtype=complex)
    nrm = np.linalg.norm(coeffs)
    if nrm == 0:
        return 0.0
    if ds.kernel_funcs.shape[1] == 0:
        return 1.0
    q, _ = np.linalg.qr(ds.kernel_funcs)
    resid = coeffs - q @ (q.conj().T @ coeffs)
    return float(np.linalg.norm(resid) / nrm)


@dataclass(frozen=True)
class DecayReport:
    """Pairing-decay table for one probe vector.

    Rows are ``(n, pairing, envelope, ratio)`` with n the 1-based rank
    in regularity order, pairing ``|D_n(probe)|``, envelope
    ``norm(probe, 3r+8) * n^-(r+2)`` and ratio their quotient.
    """

    r: float
    probe_norm: float
    rows: tuple[tuple[int, float, float, float], ...]

    @property
    def pairings(self) -> np.ndarray:
        return np.array([row[1] for row in self.rows])

    @property
    def slope(self) -> float:
        """Least-squares slope of log pairing against log rank."""
        p = self.pairings
        keep = p > 0
        if keep.sum() < 2:
            return 0.0
        n = np.arange(1, len(p) + 1, dtype=float)[keep]
        coef = np.polyfit(np.log(n), np.log(p[keep]), 1)
        return float(coef[0])

    def monotone_violations(
        self, *, start: int = 3, floor_rel: float = 1e-2, slack: float = 1.25
    ) -> int:
        """Count upticks past rank ``start`` among rows above the noise
        floor (``floor_rel`` times the largest pairing), allowing a
        multiplicative ``slack``."""
        p = self.pairings
        if len(p) == 0:
            return 0
        floor = floor_rel * p.max()
        bad = 0
        for i in range(start - 1, len(p) - 1):
            if p[i] >= floor and p[i + 1] >= floor and p[i + 1] > slack * p[i]:
                bad += 1
        return bad

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "pairing", "envelope", "ratio"])
            for row in self.rows:
                writer.writerow([row[0], f"{row[1]:.12e}", f"{row[2]:.12e}", f"{row[3]:.12e}"])


def decay_report(ds: DistributionSet, probe: np.ndarray, r: float) -> DecayReport:
    """Tabulate |D_n(probe)| against the regularity-ordered envelope."""
    probe = np.asarray(probe)
    norm = sobolev_norm(ds.rep, probe, 3.0 * r + 8.0)
    pairings = np.abs(ds.pair(probe))
    rows = []
    for i, p in enumerate(pairings):
        n = i + 1
        env = norm * float(n) ** -(r + 2.0)
        ratio = p / env if env > 0 else np.inf
        rows.append((n, float(p), float(env), float(ratio)))
    return DecayReport(r=float(r), probe_norm=norm, rows=tuple(rows))
