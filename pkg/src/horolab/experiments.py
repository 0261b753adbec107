"""Seeded experiment drivers shared by the CLI and the test suite.

Every driver is deterministic given (component parameters, seed) and
returns a plain dict of JSON-friendly values; rendering and file layout
live in the CLI layer.  Random data follows one model throughout:
complex Gaussians damped by (1 + |index|^2)^-4 per factor, so test
functions are smooth in the weight-index sense and their norms converge
as the window grows.
"""

from __future__ import annotations

import numpy as np

from .cocycle_solver import (
    delta2_check,
    solve_coboundary,
    solve_transfer,
    split,
    splitting_R,
)
from .inv_dist import (
    annihilator_project,
    decay_report,
    flow_invariant_distributions,
    invariant_distributions,
    kernel_clean,
    kernel_distance,
    span_residual,
)
from .rep_core import (
    bracket_residuals,
    build_rep,
    casimir_residual,
    horocycle_map,
    horocycle_map_padded,
)
from .tensor_rep import TensorRep, apply_l1, apply_l2
from .vf_cohomology import (
    SLOT_NAMES,
    VfSection,
    apply_bbl,
    cascade_split,
    constant_cohomology,
)

__all__ = [
    "random_smooth_vector",
    "random_smooth_tensor",
    "random_smooth_section",
    "cleaned_tensor",
    "cleaned_section",
    "run_build_rep",
    "run_solve",
    "run_transfer",
    "run_split",
    "run_cascade",
    "run_const_cohomology",
    "run_decay",
    "run_sweep",
    "DECAY_TOL",
    "SWEEP_KS",
]

# dense-ladder detection threshold used for decay studies: low enough
# that only physical families survive
DECAY_TOL = 1e-12

SWEEP_KS = (8, 16, 32, 64)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


def _profile(index: np.ndarray) -> np.ndarray:
    return (1.0 + index.astype(float) ** 2) ** -4.0


def random_smooth_vector(rep, seed: int, stream: int = 0) -> np.ndarray:
    """Window vector with Gaussian coefficients damped like index^-8."""
    rng = _rng(seed, stream)
    n = rep.window_dim
    raw = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return raw * _profile(rep.window_index)


def random_smooth_tensor(t: TensorRep, seed: int, stream: int = 0) -> np.ndarray:
    """Coefficient matrix damped like (1 + j^2 + k^2)^-4."""
    rng = _rng(seed, stream)
    n1, n2 = t.shape
    raw = rng.standard_normal((n1, n2)) + 1j * rng.standard_normal((n1, n2))
    j = t.left.window_index.astype(float)
    k = t.right.window_index.astype(float)
    damp = (1.0 + j[:, None] ** 2 + k[None, :] ** 2) ** -4.0
    return raw * damp


def cleaned_tensor(t: TensorRep, x: np.ndarray, ds_left, ds_right) -> np.ndarray:
    """Strip both factors' weighted kernel components from a matrix."""
    x = kernel_clean(ds_left, x)
    return kernel_clean(ds_right, x.T).T


def random_smooth_section(t: TensorRep, seed: int, base_stream: int = 0) -> VfSection:
    parts = {
        name: random_smooth_tensor(t, seed, base_stream + i)
        for i, name in enumerate(SLOT_NAMES)
    }
    return VfSection(**parts)


def cleaned_section(t: TensorRep, sec: VfSection, ds_left, ds_right) -> VfSection:
    return VfSection(
        **{
            name: cleaned_tensor(t, getattr(sec, name), ds_left, ds_right)
            for name in SLOT_NAMES
        }
    )


def _left_right_sets(t: TensorRep, tol: float, smooth_order: float = 8.0):
    ds_left = invariant_distributions(
        t.left, t.T, tol, smooth_order=smooth_order, gap_check=False
    )
    ds_right = invariant_distributions(
        t.right, t.S, tol, smooth_order=smooth_order, gap_check=False
    )
    return ds_left, ds_right


def run_build_rep(mu: float, k: int, pad: int | None, t: float, tol: float) -> dict:
    """Model health report: bracket/Casimir residuals, map unitarity,
    detected distribution count, flow-set containment."""
    rep = build_rep(mu, k, pad)
    mp = horocycle_map_padded(rep, t)
    unitarity = float(
        np.linalg.norm(mp.conj().T @ mp - np.eye(rep.dim)) / np.sqrt(rep.dim)
    )
    ds = invariant_distributions(rep, t, tol, gap_check=False)
    flow = flow_invariant_distributions(rep)
    containment = [
        span_residual(ds, flow.vectors[i].conj()) for i in range(flow.count)
    ]
    return {
        "mu": mu,
        "K": k,
        "pad": rep.params.pad,
        "window_dim": rep.window_dim,
        "bracket_residuals": bracket_residuals(rep),
        "casimir_residual": casimir_residual(rep),
        "map_unitarity_defect": unitarity,
        "distribution_count": ds.count,
        "flow_count": flow.count,
        "flow_residuals": [float(s) for s in flow.sigmas],
        "containment_residuals": containment,
    }


def run_solve(mu: float, k: int, pad: int | None, t: float, tol: float, seed: int) -> dict:
    """Coboundary round trip on the single factor."""
    rep = build_rep(mu, k, pad)
    ds = invariant_distributions(rep, t, tol, gap_check=False)
    g = random_smooth_vector(rep, seed, stream=1)
    m = horocycle_map(rep, t)
    f = annihilator_project(ds, m @ g - g)
    sol = solve_coboundary(rep, f, t, ds)
    fnorm = float(np.linalg.norm(f))
    diff = sol.P - g
    return {
        "mu": mu,
        "K": k,
        "seed": seed,
        "f_norm": fnorm,
        "residual": sol.residual,
        "residual_rel": sol.residual / fnorm,
        "primitive_kernel_distance": kernel_distance(ds, diff),
        "ratio_table": [[r, v] for r, v in sol.ratio_table],
    }


def run_transfer(component: TensorRep, tol: float, seed: int) -> dict:
    """Joint transfer round trip on one tensor component."""
    t = component
    ds_left, ds_right = _left_right_sets(t, tol)
    p0 = cleaned_tensor(t, random_smooth_tensor(t, seed, stream=2), ds_left, ds_right)
    f = apply_l1(t, p0)
    g = apply_l2(t, p0)
    sol = solve_transfer(t, f, g, ds_left)
    return {
        "mu": t.left.mu,
        "theta": t.right.mu,
        "K": t.left.params.K,
        "seed": seed,
        "f_norm": float(np.linalg.norm(f)),
        "g_norm": float(np.linalg.norm(g)),
        "residual1": sol.residual1,
        "residual2": sol.residual2,
        "residual1_rel": sol.residual1 / max(np.linalg.norm(f), 1e-300),
        "residual2_rel": sol.residual2 / max(np.linalg.norm(g), 1e-300),
        "primitive_defect": float(np.linalg.norm(sol.P - p0)),
        "ratio_table": [[r, v] for r, v in sol.ratio_table],
    }


def run_split(component: TensorRep, tol: float, seed: int) -> dict:
    """One splitting step on independent random data."""
    t = component
    ds_left, _ = _left_right_sets(t, tol)
    f = random_smooth_tensor(t, seed, stream=3)
    g = random_smooth_tensor(t, seed, stream=4)
    res = split(t, f, g, ds_left)
    rf = splitting_R(t, f, ds_left)
    return {
        "mu": t.left.mu,
        "theta": t.right.mu,
        "K": t.left.params.K,
        "seed": seed,
        "phi_norm": res.phi_norm,
        "consistency": res.consistency,
        "R_component_norm": float(np.linalg.norm(rf)),
        "f_res_norm": float(np.linalg.norm(res.f_res)),
        "g_res_norm": float(np.linalg.norm(res.g_res)),
        "report": [list(row) for row in res.report],
        "defect_check": delta2_check(t, res.f_res, res.g_res),
    }


def run_cascade(component: TensorRep, tol: float, seed: int) -> dict:
    """Round-trip cascade on a cleaned coboundary section pair."""
    t = component
    ds_left, ds_right = _left_right_sets(t, tol)
    h0 = cleaned_section(
        t, random_smooth_section(t, seed, base_stream=10), ds_left, ds_right
    )
    f_sec = apply_bbl(t, 1, h0)
    y_sec = apply_bbl(t, 2, h0)
    res = cascade_split(t, f_sec, y_sec, ds_left)
    scale = max(h0.norm(), 1e-300)
    return {
        "mu": t.left.mu,
        "theta": t.right.mu,
        "K": t.left.params.K,
        "seed": seed,
        "input_norm": h0.norm(),
        "phi_norm": res.phi_norm,
        "preservation": res.preservation,
        "F_res_rel": res.F_res.norm() / scale,
        "Y_res_rel": res.Y_res.norm() / scale,
        "H_defect_rel": (res.H - h0).norm() / scale,
        "slot_norms": [list(row) for row in res.slot_norms],
    }


def run_const_cohomology() -> dict:
    """Exact constant-section cohomology under both frame conventions."""
    out = {}
    for convention in ("adjoint", "section"):
        res = constant_cohomology(convention=convention)
        out[convention] = {
            "cocycle_dim": res.cocycle_dim,
            "coboundary_dim": res.coboundary_dim,
            "quotient_dim": res.quotient_dim,
            "quotient_basis": [[str(x) for x in v] for v in res.quotient_basis],
        }
    return out


def run_decay(mu: float, k: int, pad: int | None, t: float, seed: int,
              orders=(0.0, 1.0, 2.0)) -> dict:
    """Pairing-decay tables for one probe at the decay-study threshold."""
    rep = build_rep(mu, k, pad)
    ds = invariant_distributions(rep, t, DECAY_TOL, gap_check=False)
    probe = random_smooth_vector(rep, seed, stream=5)
    tables = {}
    for r in orders:
        rep_r = decay_report(ds, probe, r)
        tables[str(r)] = {
            "rows": [list(row) for row in rep_r.rows],
            "slope": rep_r.slope,
            "monotone_violations": rep_r.monotone_violations(),
            "probe_norm": rep_r.probe_norm,
        }
    return {
        "mu": mu,
        "K": k,
        "seed": seed,
        "tol": DECAY_TOL,
        "count": ds.count,
        "tables": tables,
    }


def run_sweep(mu: float, theta: float, t: float, s: float, tol: float, seed: int,
              ks=None) -> dict:
    """Window-size sweep: counts, containment, solve-ratio trends."""
    rows = []
    for k in SWEEP_KS if ks is None else ks:
        rep = build_rep(mu, k, k)
        ds = invariant_distributions(rep, t, tol, gap_check=False)
        flow = flow_invariant_distributions(rep)
        containment = max(
            (span_residual(ds, flow.vectors[i].conj()) for i in range(flow.count)),
            default=0.0,
        )
        solve = run_solve(mu, k, k, t, tol, seed)
        rows.append(
            {
                "K": k,
                "count": ds.count,
                "flow_count": flow.count,
                "containment": containment,
                "solve_ratio_r0": solve["ratio_table"][0][1],
                "solve_residual_rel": solve["residual_rel"],
            }
        )
    return {"mu": mu, "theta": theta, "tol": tol, "seed": seed, "rows": rows}
