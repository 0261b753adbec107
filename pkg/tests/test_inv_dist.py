import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import _oracles
from horolab import (
    DegenerateTruncation,
    RankDeficient,
    annihilator_project,
    build_rep,
    decay_report,
    dual_basis,
    flow_invariant_distributions,
    horocycle_map,
    invariant_distributions,
    kernel_clean,
    kernel_distance,
    sobolev_norm,
    span_residual,
)
from horolab.inv_dist import DecayReport
from horolab.experiments import random_smooth_vector

# Detected family sizes at tol 1e-8, smoothing order 8, t = 1, pad = K.
# Frozen from the implementation and cross-checked below against an
# independent SVD route; treat a change as a real behaviour change.
FROZEN_COUNTS = {
    0.25: {8: 4, 16: 20, 32: 51},
    5.0: {8: 4, 16: 20, 32: 52},
    -2.0: {8: 4, 16: 11, 32: 27},
}

FLOW_DIMS = {0.25: 2, 5.0: 2, -2.0: 1}


@pytest.fixture(scope="module")
def all_ds(rep16, rep16_theta, rep16_low, rep32, rep32_theta, rep32_low, ds16, ds32):
    reps = {
        (0.25, 16): rep16, (5.0, 16): rep16_theta, (-2.0, 16): rep16_low,
        (0.25, 32): rep32, (5.0, 32): rep32_theta, (-2.0, 32): rep32_low,
    }
    out = {(0.25, 16): ds16, (0.25, 32): ds32}
    for key, rep in reps.items():
        if key not in out:
            out[key] = invariant_distributions(rep, 1.0, 1e-8, gap_check=False)
    for mu in FROZEN_COUNTS:
        out[(mu, 8)] = invariant_distributions(
            build_rep(mu, 8), 1.0, 1e-8, gap_check=False
        )
    return out


@pytest.mark.parametrize("mu", sorted(FROZEN_COUNTS))
@pytest.mark.parametrize("k", [8, 16, 32])
def test_detected_counts_frozen(all_ds, mu, k):
    assert all_ds[(mu, k)].count == FROZEN_COUNTS[mu][k]


def test_count_matches_independent_svd_route():
    # same definition, different exponential (Taylor) and different
    # LAPACK driver (gesvd): the count is a property of the model, not
    # of one code path
    assert _oracles.oracle_kernel_count(0.25, 16, 16, 1.0, 1e-8) == 20
    assert _oracles.oracle_kernel_count(-2.0, 8, 8, 1.0, 1e-8) == 4


def test_counts_grow_with_window(all_ds):
    for mu in FROZEN_COUNTS:
        counts = [all_ds[(mu, k)].count for k in (8, 16, 32)]
        assert counts == sorted(counts)


@pytest.mark.parametrize("tol", [1e-15, 1e-14, 1e-4, 1e-3])
def test_tolerance_range_enforced(rep16, tol):
    with pytest.raises(ValueError):
        invariant_distributions(rep16, 1.0, tol)


def test_gap_guard_refuses_intra_ladder_cut(rep16):
    with pytest.raises(DegenerateTruncation) as err:
        invariant_distributions(rep16, 1.0, 1e-8)
    assert "ratio" in str(err.value)


def test_identity_time_returns_full_dual(rep8):
    ds = invariant_distributions(rep8, 0.0, 1e-8)
    assert ds.count == rep8.window_dim
    assert ds.duals is not None
    # everything is invariant under the identity; pairings are exact
    e0 = np.zeros(rep8.window_dim)
    e0[0] = 1.0
    assert np.abs(ds.pair(e0)).max() == 1.0


def test_vectors_orthonormal(ds16):
    gram = ds16.vectors @ ds16.vectors.conj().T
    assert np.abs(gram - np.eye(ds16.count)).max() <= 1e-12


def test_regularity_ordering(ds16):
    assert np.all(np.diff(ds16.scores) >= -1e-15)


def test_sigmas_below_tolerance(ds16):
    assert ds16.sigmas.max() < ds16.tol


def test_invariance_against_smooth_vectors(rep16, ds16):
    m = horocycle_map(rep16, 1.0)
    for seed in range(5):
        f = random_smooth_vector(rep16, seed)
        moved = np.abs(ds16.pair(m @ f - f)).max()
        assert moved <= ds16.tol * sobolev_norm(rep16, f, 8.0) * (1 + 1e-10)


def test_kernel_funcs_are_near_fixed(rep16, ds16):
    m = horocycle_map(rep16, 1.0)
    img = m @ ds16.kernel_funcs - ds16.kernel_funcs
    col_norms = np.linalg.norm(img, axis=0)
    assert np.abs(col_norms - ds16.sigmas).max() <= 1e-12


def test_dual_biorthogonality(ds16):
    gram = ds16.vectors @ ds16.duals.T
    assert np.abs(gram - np.eye(ds16.count)).max() <= 1e-12


def test_dual_basis_rejects_dependent_stack(ds16):
    row = ds16.vectors[:1]
    bad = dataclasses.replace(
        ds16, vectors=np.vstack([row, row]), sigmas=np.zeros(2),
        scores=np.zeros(2), duals=None,
    )
    with pytest.raises(RankDeficient):
        dual_basis(bad)


def test_annihilator_project(rep16, ds16):
    f = random_smooth_vector(rep16, 11)
    clean = annihilator_project(ds16, f)
    assert np.abs(ds16.pair(clean)).max() <= 1e-12 * np.linalg.norm(f)
    again = annihilator_project(ds16, clean)
    assert np.linalg.norm(again - clean) <= 1e-13 * np.linalg.norm(f)


@settings(derandomize=True, deadline=None, max_examples=20)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_annihilator_project_property(rep16, ds16, seed):
    f = random_smooth_vector(rep16, seed)
    clean = annihilator_project(ds16, f)
    assert np.abs(ds16.pair(clean)).max() <= 1e-10 * max(np.linalg.norm(f), 1e-300)


@pytest.mark.parametrize("mu", sorted(FLOW_DIMS))
def test_flow_invariant_dimensions(mu, rep16, rep16_theta, rep16_low):
    rep = {0.25: rep16, 5.0: rep16_theta, -2.0: rep16_low}[mu]
    flow = flow_invariant_distributions(rep)
    assert flow.count == FLOW_DIMS[mu]
    assert flow.T is None
    assert flow.sigmas.max() <= 1e-12
    assert flow.duals is not None


def test_flow_sets_inside_map_span(all_ds, rep32, rep32_theta, rep32_low):
    # the infinitesimal invariants must be visible to the time-1 map
    # detection once the window is large enough
    for mu, rep in ((0.25, rep32), (5.0, rep32_theta), (-2.0, rep32_low)):
        ds = all_ds[(mu, 32)]
        flow = flow_invariant_distributions(rep)
        for i in range(flow.count):
            assert span_residual(ds, flow.vectors[i].conj()) <= 1e-4


def test_span_residual_basics(ds16):
    inside = ds16.vectors[0].conj()
    assert span_residual(ds16, inside) <= 1e-12
    assert span_residual(ds16, np.zeros(ds16.rep.window_dim)) == 0.0


def test_kernel_distance(rep16, ds16):
    in_kernel = ds16.kernel_funcs[:, 0]
    assert kernel_distance(ds16, in_kernel) <= 1e-12
    assert kernel_distance(ds16, np.zeros(rep16.window_dim)) == 0.0
    flow = flow_invariant_distributions(rep16)
    assert kernel_distance(flow, np.ones(rep16.window_dim)) == 1.0


def test_kernel_clean(rep16, ds16):
    f = random_smooth_vector(rep16, 21)
    c = kernel_clean(ds16, f)
    assert c.shape == f.shape
    # cleaned data has (numerically) no kernel component, so the
    # difference image pairs to float noise, not sigma-level noise
    m = horocycle_map(rep16, 1.0)
    assert np.abs(ds16.pair(m @ c - c)).max() <= 1e-13 * sobolev_norm(rep16, f, 8.0)
    twice = kernel_clean(ds16, c)
    assert np.linalg.norm(twice - c) <= 1e-13 * np.linalg.norm(f)
    # matrix variant cleans columns
    mat = np.column_stack([f, f])
    cm = kernel_clean(ds16, mat)
    assert np.abs(cm[:, 0] - c).max() <= 1e-15
    # flow sets have no function-side kernel: cleaning is the identity
    flow = flow_invariant_distributions(rep16)
    assert np.array_equal(kernel_clean(flow, f), f)


def test_decay_report_structure(rep32, ds32_decay):
    probe = random_smooth_vector(rep32, 0, stream=5)
    rep_r = decay_report(ds32_decay, probe, 1.0)
    assert len(rep_r.rows) == ds32_decay.count
    ns = [row[0] for row in rep_r.rows]
    assert ns == list(range(1, ds32_decay.count + 1))
    norm = sobolev_norm(rep32, probe, 11.0)
    for n, pairing, env, ratio in rep_r.rows:
        assert env == pytest.approx(norm * n ** -3.0, rel=1e-12)
        if env > 0:
            assert ratio == pytest.approx(pairing / env, rel=1e-12)


def test_decay_report_csv(tmp_path, rep32, ds32_decay):
    probe = random_smooth_vector(rep32, 0, stream=5)
    path = tmp_path / "decay.csv"
    decay_report(ds32_decay, probe, 0.0).to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,pairing,envelope,ratio"
    assert len(lines) == ds32_decay.count + 1


def test_decay_pairings_fall(rep32, ds32_decay):
    # at the decay-study threshold only well-resolved families survive,
    # and their pairings against smooth data decay with the rank
    assert ds32_decay.count == 22
    probe = random_smooth_vector(rep32, 3, stream=5)
    rep_r = decay_report(ds32_decay, probe, 0.0)
    assert rep_r.slope <= -2.0
    assert rep_r.monotone_violations() == 0


def test_empty_decay_report():
    empty = DecayReport(r=0.0, probe_norm=1.0, rows=())
    assert empty.slope == 0.0
    assert empty.monotone_violations() == 0
    assert empty.pairings.size == 0
