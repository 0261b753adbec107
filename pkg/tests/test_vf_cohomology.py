import numpy as np
import pytest

import _oracles
from horolab import (
    StageObstruction,
    VfSection,
    adjoint_identities_check,
    apply_bbl,
    apply_l1,
    apply_l2,
    bbl_op,
    cascade_split,
    constant_cohomology,
    delta_v2_check,
    pushforward_matrix,
)
from horolab.vf_cohomology import SLOT_NAMES, ConstVf
from horolab.experiments import (
    cleaned_section,
    random_smooth_section,
    random_smooth_tensor,
)


@pytest.mark.parametrize("convention", ["adjoint", "section"])
@pytest.mark.parametrize("t", [1.0, 0.5, -2.0])
def test_pushforward_is_unipotent(convention, t):
    a = pushforward_matrix(t, convention)
    n = a - np.eye(3)
    assert np.abs(n @ n @ n).max() == 0.0


def test_pushforward_exact_entries():
    assert np.array_equal(
        pushforward_matrix(1.0),
        np.array([[1.0, 1.0, -1.0], [0.0, 1.0, -2.0], [0.0, 0.0, 1.0]]),
    )
    assert np.array_equal(
        pushforward_matrix(1.0, "section"),
        np.array([[1.0, -2.0, -1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]]),
    )


@pytest.mark.parametrize("convention", ["adjoint", "section"])
def test_pushforward_group_law(convention):
    a = pushforward_matrix(0.3, convention) @ pushforward_matrix(0.7, convention)
    assert np.abs(a - pushforward_matrix(1.0, convention)).max() <= 1e-14


def test_pushforward_rejects_unknown_convention():
    with pytest.raises(ValueError):
        pushforward_matrix(1.0, "frame")


@pytest.mark.parametrize("t", [1.0, 0.25, -3.0])
def test_adjoint_identities(t):
    res = adjoint_identities_check(t)
    assert set(res) == {
        "conjugation_vs_pushforward",
        "series_vs_pushforward",
        "bracket_XU_minus_U",
    }
    assert max(res.values()) <= 1e-14


def test_section_algebra(tensor16):
    a = random_smooth_section(tensor16, 0)
    b = random_smooth_section(tensor16, 1)
    total = a + b - a
    assert np.abs(total.h1 - b.h1).max() <= 1e-15
    assert ((2.0 * a).norm()) == pytest.approx(2.0 * a.norm())
    back = VfSection.from_stack(a.to_stack(), a.shape)
    assert all(
        np.array_equal(getattr(back, s), getattr(a, s)) for s in SLOT_NAMES
    )
    zero = VfSection.zeros(a.shape)
    assert zero.norm() == 0.0


def test_section_rejects_mixed_shapes():
    good = np.zeros((3, 3))
    with pytest.raises(ValueError):
        VfSection(h1=good, g1=good, f1=good, h3=good, g3=good, f3=np.zeros((2, 2)))


@pytest.mark.parametrize("which", [1, 2])
def test_block_operator_mixing_matches_pushforward(tensor16, which):
    sec = random_smooth_section(tensor16, 2)
    out = apply_bbl(tensor16, which, sec)
    a = pushforward_matrix(tensor16.T if which == 1 else tensor16.S)
    if which == 1:
        triple = (sec.h1, sec.g1, sec.f1)
        got = (out.h1, out.g1, out.f1)
        tr = lambda x: tensor16.M1 @ x
        plain = [(out.h3, sec.h3), (out.g3, sec.g3), (out.f3, sec.f3)]
        other = apply_l1
    else:
        triple = (sec.h3, sec.g3, sec.f3)
        got = (out.h3, out.g3, out.f3)
        tr = lambda x: x @ tensor16.M2.T
        plain = [(out.h1, sec.h1), (out.g1, sec.g1), (out.f1, sec.f1)]
        other = apply_l2
    for i in range(3):
        want = tr(sum(a[i, j] * triple[j] for j in range(3))) - triple[i]
        assert np.abs(got[i] - want).max() <= 1e-13
    for got_slot, src in plain:
        assert np.array_equal(got_slot, other(tensor16, src))


def test_block_operator_rejects_bad_factor(tensor16):
    sec = random_smooth_section(tensor16, 3)
    with pytest.raises(ValueError):
        apply_bbl(tensor16, 0, sec)
    with pytest.raises(ValueError):
        bbl_op(tensor16, 3)


@pytest.mark.parametrize("which", [1, 2])
def test_sparse_block_operator_matches_action(tensor8, which):
    sec = random_smooth_section(tensor8, 4)
    direct = apply_bbl(tensor8, which, sec).to_stack()
    via_op = bbl_op(tensor8, which) @ sec.to_stack()
    assert np.abs(direct - via_op).max() <= 1e-12


def test_block_operators_commute(tensor16):
    sec = random_smooth_section(tensor16, 5)
    lhs = apply_bbl(tensor16, 1, apply_bbl(tensor16, 2, sec))
    rhs = apply_bbl(tensor16, 2, apply_bbl(tensor16, 1, sec))
    assert (lhs - rhs).norm() <= 1e-13 * max(sec.norm(), 1.0)


def test_coboundary_pair_has_zero_defect(tensor16):
    h = random_smooth_section(tensor16, 6)
    beta1 = apply_bbl(tensor16, 1, h)
    beta2 = apply_bbl(tensor16, 2, h)
    assert delta_v2_check(tensor16, beta1, beta2) <= 1e-13 * max(h.norm(), 1.0)


@pytest.mark.parametrize("convention", ["adjoint", "section"])
def test_constant_cohomology_dimensions(convention):
    res = constant_cohomology(convention=convention)
    assert (res.cocycle_dim, res.coboundary_dim, res.quotient_dim) == (8, 4, 4)
    # representatives: V1 and U2 on the first member, U1 and V2 on the
    # second, as positions in the 12-coordinate (F | Y) layout
    positions = [
        [i for i, x in enumerate(v) if x != 0] for v in res.quotient_basis
    ]
    assert positions == [[2], [3], [6], [11]]


@pytest.mark.parametrize("convention", ["adjoint", "section"])
def test_constant_cohomology_against_float_ranks(convention):
    a_t = pushforward_matrix(1.0, convention)
    a_s = pushforward_matrix(1.0, convention)
    d = _oracles.oracle_constant_delta(a_t, a_s)
    img = _oracles.oracle_constant_image(a_t, a_s)
    assert 12 - np.linalg.matrix_rank(d) == 8
    assert np.linalg.matrix_rank(img) == 4
    res = constant_cohomology(convention=convention)
    # every exact cocycle lies in the float kernel of delta
    for v in res.cocycle_basis:
        vec = np.array([float(x) for x in v])
        assert np.abs(d @ vec).max() <= 1e-12
    # coboundaries are delta-closed and inside the image column span
    basis = np.vstack([[float(x) for x in v] for v in res.coboundary_basis])
    aug = np.hstack([img, basis.T])
    assert np.linalg.matrix_rank(aug) == 4
    # quotient representatives are independent modulo the image
    reps = np.vstack([[float(x) for x in v] for v in res.quotient_basis])
    assert np.linalg.matrix_rank(np.hstack([img, reps.T])) == 8


def test_constant_cohomology_rejects_zero_times():
    with pytest.raises(ValueError):
        constant_cohomology(t=0)
    with pytest.raises(ValueError):
        constant_cohomology(s=0)


def test_const_vf_container():
    v = ConstVf(f_coeffs=(1, 0, 0, 0, 0, 0), y_coeffs=(0,) * 6)
    assert len(v.to_vector()) == 12
    with pytest.raises(ValueError):
        ConstVf(f_coeffs=(1, 0), y_coeffs=(0,) * 6)


def test_cascade_round_trip(tensor16, ds16, ds16_theta):
    h0 = cleaned_section(
        tensor16, random_smooth_section(tensor16, 0, base_stream=10), ds16, ds16_theta
    )
    f_sec = apply_bbl(tensor16, 1, h0)
    y_sec = apply_bbl(tensor16, 2, h0)
    res = cascade_split(tensor16, f_sec, y_sec, ds16)
    scale = max(h0.norm(), 1e-300)
    assert (res.H - h0).norm() <= 1e-8 * scale
    assert res.F_res.norm() <= 1e-8 * scale
    assert res.Y_res.norm() <= 1e-8 * scale
    assert res.preservation <= 1e-12 * max(res.phi_norm, 1.0)
    assert set(res.stages) == {
        (1, 1, "f1"), (1, 2, "g1"), (1, 3, "h1"),
        (2, 1, "f3"), (2, 2, "g3"), (2, 3, "h3"),
    }
    assert [name for name, _, _ in res.slot_norms] == list(SLOT_NAMES)


def test_cascade_preserves_obstruction_on_any_pair(tensor16, ds16):
    f_sec = random_smooth_section(tensor16, 1, base_stream=20)
    y_sec = random_smooth_section(tensor16, 1, base_stream=30)
    res = cascade_split(tensor16, f_sec, y_sec, ds16)
    scale = max(f_sec.norm(), y_sec.norm(), 1.0)
    assert res.preservation <= 1e-10 * scale
    assert res.phi_norm > 0


def cascade_inputs(tensor16, ds16, ds16_theta, seed):
    h0 = cleaned_section(
        tensor16, random_smooth_section(tensor16, seed, base_stream=10),
        ds16, ds16_theta,
    )
    return apply_bbl(tensor16, 1, h0), apply_bbl(tensor16, 2, h0)


def test_cascade_localises_first_factor_obstruction(tensor16, ds16, ds16_theta):
    f_sec, y_sec = cascade_inputs(tensor16, ds16, ds16_theta, 2)
    smooth = random_smooth_tensor(tensor16, 3, stream=40)
    inject = 0.1 * np.linalg.norm(f_sec.g1) * np.outer(
        ds16.duals[0], smooth[0] / np.linalg.norm(smooth[0])
    )
    dirty = VfSection(**{**f_sec.slots(), "g1": f_sec.g1 + inject})
    with pytest.raises(StageObstruction) as err:
        cascade_split(tensor16, dirty, y_sec, ds16, obstruction_tol=1e-4)
    assert (err.value.factor, err.value.stage, err.value.slot) == (1, 2, "g1")
    assert err.value.size > 1e-4


def test_cascade_localises_second_factor_obstruction(tensor16, ds16, ds16_theta):
    f_sec, y_sec = cascade_inputs(tensor16, ds16, ds16_theta, 4)
    smooth = random_smooth_tensor(tensor16, 5, stream=41)
    inject = 0.1 * np.linalg.norm(y_sec.f3) * np.outer(
        smooth[:, 0] / np.linalg.norm(smooth[:, 0]), ds16_theta.duals[0]
    )
    dirty = VfSection(**{**y_sec.slots(), "f3": y_sec.f3 + inject})
    with pytest.raises(StageObstruction) as err:
        cascade_split(tensor16, f_sec, dirty, ds16, obstruction_tol=1e-4)
    assert (err.value.factor, err.value.stage, err.value.slot) == (2, 1, "f3")


def test_cascade_without_guard_keeps_obstruction_in_residue(
    tensor16, ds16, ds16_theta
):
    f_sec, y_sec = cascade_inputs(tensor16, ds16, ds16_theta, 6)
    smooth = random_smooth_tensor(tensor16, 7, stream=42)
    inject = 0.1 * np.linalg.norm(f_sec.g1) * np.outer(
        ds16.duals[0], smooth[0] / np.linalg.norm(smooth[0])
    )
    dirty = VfSection(**{**f_sec.slots(), "g1": f_sec.g1 + inject})
    res = cascade_split(tensor16, dirty, y_sec, ds16)
    # the injected invariant component survives the cascade unchanged,
    # parked in the matching residual slot
    defect = np.linalg.norm(res.F_res.g1 - inject)
    assert defect <= 1e-6 * np.linalg.norm(inject)
