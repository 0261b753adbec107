"""Cohomology of constant-coefficient vector fields under two commuting
parabolic translations, and the three-stage splitting cascade.

A vector-field section assigns to the model a sl2 x sl2 coefficient
field; here sections are truncated to one tensor component, so a section
is six coefficient matrices, one per basis direction

    (U1, X1, V1) in the first factor,  (U2, X2, V2) in the second,

stored in the slots (h1, g1, f1) and (h3, g3, f3): h multiplies the
parabolic direction U, g the geodesic X, f the opposite parabolic V.

Translating a vector field by time T along the first parabolic flow
pushes the first-factor frame forward by the unipotent mixing matrix

    A(T) = [[1, T, -T^2], [0, 1, -2T], [0, 0, 1]]

acting on (h, g, f) coordinates, and leaves the second-factor frame
alone.  The block difference operator of factor one is therefore
"translate coefficients, mix the first triple, subtract identity";
factor two mirrors this.  Both operators commute.

On constant sections translation is trivial and the whole calculus
collapses to the 3x3 mixing matrices; ``constant_cohomology`` computes
cocycles, coboundaries and the quotient exactly over rationals, for the
adjoint convention and for the section-frame convention (the mixing
matrices differ, the three spaces do not).

``cascade_split`` peels a general pair (F, Y) with L2 F = L1 Y three
slots at a time: the V-slots are plain splitting problems; each solved
slot feeds corrections into the next stage through the mixing matrix.
What remains in the first-factor slots after a stage is (numerically)
exactly the invariant obstruction of that stage's input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse

from .cocycle_solver import SplitResult, _right_distributions, split, splitting_R
from .errors import StageObstruction
from .inv_dist import DistributionSet
from .tensor_rep import TensorRep, apply_l1, apply_l2

__all__ = [
    "SL2_U",
    "SL2_X",
    "SL2_V",
    "VfSection",
    "ConstVf",
    "CohomologyResult",
    "CascadeResult",
    "pushforward_matrix",
    "adjoint_identities_check",
    "apply_bbl",
    "bbl_op",
    "cascade_split",
    "constant_cohomology",
    "delta_v2_check",
    "SLOT_NAMES",
]

SL2_U = np.array([[0.0, 1.0], [0.0, 0.0]])
SL2_X = np.array([[0.5, 0.0], [0.0, -0.5]])
SL2_V = np.array([[0.0, 0.0], [1.0, 0.0]])

SLOT_NAMES = ("h1", "g1", "f1", "h3", "g3", "f3")

CONVENTIONS = ("adjoint", "section")


def _mix_exact(t: Fraction, convention: str) -> list[list[Fraction]]:
    t = Fraction(t)
    if convention == "adjoint":
        return [
            [Fraction(1), t, -t * t],
            [Fraction(0), Fraction(1), -2 * t],
            [Fraction(0), Fraction(0), Fraction(1)],
        ]
    if convention == "section":
        return [
            [Fraction(1), -2 * t, -t * t],
            [Fraction(0), Fraction(1), t],
            [Fraction(0), Fraction(0), Fraction(1)],
        ]
    raise ValueError(f"unknown convention {convention!r}; pick from {CONVENTIONS}")


def pushforward_matrix(t: float, convention: str = "adjoint") -> np.ndarray:
    """Unipotent mixing matrix of the time-``t`` parabolic translation
    on (h, g, f) frame coordinates."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; pick from {CONVENTIONS}")
    t = float(t)
    if convention == "adjoint":
        return np.array([[1.0, t, -t * t], [0.0, 1.0, -2.0 * t], [0.0, 0.0, 1.0]])
    return np.array([[1.0, -2.0 * t, -t * t], [0.0, 1.0, t], [0.0, 0.0, 1.0]])


def adjoint_identities_check(t: float = 1.0) -> dict[str, float]:
    """Verify the frame pushforward two independent ways.

    Way one: conjugate the 2x2 basis matrices by exp(-tU) directly.
    Way two: exponentiate the (nilpotent) bracket action on frame
    coordinates; the series terminates after the quadratic term.
    Both must reproduce ``pushforward_matrix(t)`` and the primitive
    bracket identity [X, U] = U.
    """
    t = float(t)
    basis = (SL2_U, SL2_X, SL2_V)
    e_minus = np.array([[1.0, -t], [0.0, 1.0]])
    e_plus = np.array([[1.0, t], [0.0, 1.0]])

    def coords(z):
        # z = h U + g X + f V reads off as h = z01, g = z00 - z11, f = z10
        return np.array([z[0, 1], z[0, 0] - z[1, 1], z[1, 0]])

    conj = np.column_stack([coords(e_minus @ z @ e_plus) for z in basis])

    # bracket action of -tU on frame coordinates, exponentiated
    ad = np.array([[0.0, t, 0.0], [0.0, 0.0, -2.0 * t], [0.0, 0.0, 0.0]])
    series = np.eye(3) + ad + ad @ ad / 2.0

    target = pushforward_matrix(t)
    bracket = SL2_X @ SL2_U - SL2_U @ SL2_X
    return {
        "conjugation_vs_pushforward": float(np.abs(conj - target).max()),
        "series_vs_pushforward": float(np.abs(series - target).max()),
        "bracket_XU_minus_U": float(np.abs(bracket - SL2_U).max()),
    }


@dataclass(frozen=True, eq=False)
class VfSection:
    """Six coefficient matrices of one truncated vector-field section."""

    h1: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)
    f1: np.ndarray = field(repr=False)
    h3: np.ndarray = field(repr=False)
    g3: np.ndarray = field(repr=False)
    f3: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = self.h1.shape
        for name in SLOT_NAMES:
            if getattr(self, name).shape != shape:
                raise ValueError("all six slots must share one shape")

    @property
    def shape(self):
        return self.h1.shape

    def slots(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in SLOT_NAMES}

    def norm(self) -> float:
        return float(
            np.sqrt(sum(np.sum(np.abs(getattr(self, s)) ** 2) for s in SLOT_NAMES))
        )

    def __add__(self, other):
        return VfSection(**{s: getattr(self, s) + getattr(other, s) for s in SLOT_NAMES})

    def __sub__(self, other):
        return VfSection(**{s: getattr(self, s) - getattr(other, s) for s in SLOT_NAMES})

    def __rmul__(self, c):
        return VfSection(**{s: c * getattr(self, s) for s in SLOT_NAMES})

    def to_stack(self) -> np.ndarray:
        return np.concatenate([getattr(self, s).ravel() for s in SLOT_NAMES])

    @classmethod
    def from_stack(cls, vec: np.ndarray, shape) -> "VfSection":
        n = shape[0] * shape[1]
        parts = {}
        for i, s in enumerate(SLOT_NAMES):
            parts[s] = vec[i * n : (i + 1) * n].reshape(shape)
        return cls(**parts)

    @classmethod
    def zeros(cls, shape) -> "VfSection":
        return cls(**{s: np.zeros(shape, dtype=complex) for s in SLOT_NAMES})


def apply_bbl(t: TensorRep, which: int, sec: VfSection) -> VfSection:
    """Block difference operator of one factor acting on a section.

    Factor ``which`` translates coefficients with its own map, mixes its
    own frame triple with the unipotent matrix, and subtracts the
    identity; the other factor's triple just sees the scalar difference
    operator.
    """
    if which == 1:
        tt = t.T
        tr = lambda x: t.M1 @ x
        th, tg, tf = tr(sec.h1), tr(sec.g1), tr(sec.f1)
        return VfSection(
            h1=th + tt * tg - tt * tt * tf - sec.h1,
            g1=tg - 2.0 * tt * tf - sec.g1,
            f1=tf - sec.f1,
            h3=apply_l1(t, sec.h3),
            g3=apply_l1(t, sec.g3),
            f3=apply_l1(t, sec.f3),
        )
    if which == 2:
        ss = t.S
        tr = lambda x: x @ t.M2.T
        th, tg, tf = tr(sec.h3), tr(sec.g3), tr(sec.f3)
        return VfSection(
            h1=apply_l2(t, sec.h1),
            g1=apply_l2(t, sec.g1),
            f1=apply_l2(t, sec.f1),
            h3=th + ss * tg - ss * ss * tf - sec.h3,
            g3=tg - 2.0 * ss * tf - sec.g3,
            f3=tf - sec.f3,
        )
    raise ValueError(f"which must be 1 or 2, got {which}")


def bbl_op(t: TensorRep, which: int) -> scipy.sparse.csr_matrix:
    """Materialised sparse form of the block operator on stacked slots.

    Slot order follows ``SLOT_NAMES`` with row-major flattening inside
    each slot.  Intended for small contract checks.
    """
    n1, n2 = t.shape
    n = n1 * n2
    eye = scipy.sparse.eye(n, format="csr")
    if which == 1:
        tt = t.T
        tr = scipy.sparse.kron(scipy.sparse.csr_matrix(t.M1), scipy.sparse.eye(n2), format="csr")
    elif which == 2:
        tt = t.S
        tr = scipy.sparse.kron(scipy.sparse.eye(n1), scipy.sparse.csr_matrix(t.M2), format="csr")
    else:
        raise ValueError(f"which must be 1 or 2, got {which}")
    mixed = [
        [tr - eye, tt * tr, -tt * tt * tr],
        [None, tr - eye, -2.0 * tt * tr],
        [None, None, tr - eye],
    ]
    plain = [[tr - eye, None, None], [None, tr - eye, None], [None, None, tr - eye]]
    z = [[None] * 3] * 3
    if which == 1:
        blocks = [row_m + row_z for row_m, row_z in zip(mixed, z)] + [
            row_z + row_p for row_z, row_p in zip(z, plain)
        ]
    else:
        blocks = [row_p + row_z for row_p, row_z in zip(plain, z)] + [
            row_z + row_m for row_z, row_m in zip(z, mixed)
        ]
    return scipy.sparse.bmat(blocks, format="csr")


def delta_v2_check(t: TensorRep, beta1: VfSection, beta2: VfSection) -> float:
    """Defect of a candidate section pair under the two block operators."""
    return (apply_bbl(t, 2, beta1) - apply_bbl(t, 1, beta2)).norm()


# ---------------------------------------------------------------------------
# constant sections, exact arithmetic


@dataclass(frozen=True)
class ConstVf:
    """A constant section pair (F, Y): twelve rational coefficients in
    the basis (U1, X1, V1, U2, X2, V2) per member."""

    f_coeffs: tuple
    y_coeffs: tuple

    def __post_init__(self):
        if len(self.f_coeffs) != 6 or len(self.y_coeffs) != 6:
            raise ValueError("each member carries six coefficients")

    def to_vector(self) -> tuple:
        return tuple(self.f_coeffs) + tuple(self.y_coeffs)


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _kernel_basis(rows: list[list[Fraction]], nvars: int) -> list[tuple]:
    rref, pivots = _rref(rows)
    free = [c for c in range(nvars) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * nvars
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -rref[r][fc]
        basis.append(tuple(vec))
    return basis


def _rank(rows: list[list[Fraction]]) -> int:
    return len(_rref(rows)[0])


@dataclass(frozen=True)
class CohomologyResult:
    """Exact cohomology of constant sections under one convention."""

    convention: str
    cocycle_basis: tuple
    coboundary_basis: tuple
    quotient_basis: tuple

    @property
    def cocycle_dim(self) -> int:
        return len(self.cocycle_basis)

    @property
    def coboundary_dim(self) -> int:
        return len(self.coboundary_basis)

    @property
    def quotient_dim(self) -> int:
        return len(self.quotient_basis)


def constant_cohomology(
    t: Fraction | int = 1,
    s: Fraction | int = 1,
    convention: str = "adjoint",
) -> CohomologyResult:
    """Cocycles, coboundaries and the quotient on constant sections.

    Exact over rationals.  On constants translation is the identity, so
    the factor-one operator is pure frame mixing on the first triple and
    zero on the second (and mirrored).  The quotient representatives are
    (V1, U2) for the first member and (U1, V2) for the second, checked
    against the computed spaces before being returned.
    """
    t, s = Fraction(t), Fraction(s)
    if t == 0 or s == 0:
        raise ValueError("translation times must be nonzero")
    a_t = _mix_exact(t, convention)
    a_s = _mix_exact(s, convention)

    def mix_minus_id(a, triple):
        return tuple(
            sum(a[i][j] * triple[j] for j in range(3)) - triple[i] for i in range(3)
        )

    # delta(F, Y) = L2 F - L1 Y on constants: factor-one output triple is
    # -(A_t - I) Y.triple1, factor-two output is (A_s - I) F.triple2
    rows = []
    for out in range(6):
        row = [Fraction(0)] * 12
        for var in range(12):
            probe = [Fraction(0)] * 12
            probe[var] = Fraction(1)
            f_tri2 = probe[3:6]
            y_tri1 = probe[6:9]
            head = mix_minus_id(a_t, y_tri1)
            tail = mix_minus_id(a_s, f_tri2)
            val = (
                [-x for x in head] + list(tail)
            )[out]
            row[var] = val
        rows.append(row)
    cocycle_basis = tuple(_kernel_basis(rows, 12))

    # coboundary of a constant H: F-part (A_t - I) H.triple1, Y-part
    # (A_s - I) H.triple2
    image = []
    for var in range(6):
        h = [Fraction(0)] * 6
        h[var] = Fraction(1)
        f_part = list(mix_minus_id(a_t, h[0:3])) + [Fraction(0)] * 3
        y_part = [Fraction(0)] * 3 + list(mix_minus_id(a_s, h[3:6]))
        vec = tuple(f_part + y_part)
        if any(x != 0 for x in vec):
            image.append(vec)
    image_rref, _ = _rref([list(v) for v in image])
    coboundary_basis = tuple(tuple(r) for r in image_rref)

    # claimed quotient representatives, in (F | Y) coordinates
    def unit(i):
        v = [Fraction(0)] * 12
        v[i] = Fraction(1)
        return tuple(v)

    claimed = (unit(2), unit(3), unit(6), unit(11))  # V1, U2 | U1, V2

    cocycle_rows = [list(v) for v in cocycle_basis]
    for rep_vec in claimed:
        if _rank(cocycle_rows + [list(rep_vec)]) != len(cocycle_basis):
            raise ArithmeticError("quotient representative is not a cocycle")
    stack = [list(v) for v in coboundary_basis]
    if _rank(stack + [list(v) for v in claimed]) != len(coboundary_basis) + 4:
        raise ArithmeticError("quotient representatives not independent mod image")
    if len(cocycle_basis) != len(coboundary_basis) + 4:
        raise ArithmeticError("unexpected cohomology dimensions")

    return CohomologyResult(
        convention=convention,
        cocycle_basis=cocycle_basis,
        coboundary_basis=coboundary_basis,
        quotient_basis=claimed,
    )


# ---------------------------------------------------------------------------
# the cascade


@dataclass(frozen=True, eq=False)
class CascadeResult:
    """Outcome of a three-stage cascade on one tensor component.

    ``stages`` maps (factor, stage, slot) to the underlying one-slot
    split result; ``preservation`` is the defect of the exact identity
    that the residual pair carries the same obstruction as the input.
    """

    H: VfSection
    F_res: VfSection
    Y_res: VfSection
    phi_norm: float
    preservation: float
    slot_norms: tuple
    stages: dict

    @property
    def residual_norms(self) -> tuple[float, float]:
        return (self.F_res.norm(), self.Y_res.norm())


def _swap(t: TensorRep) -> TensorRep:
    return TensorRep(left=t.right, right=t.left, T=t.S, S=t.T, M1=t.M2, M2=t.M1)


def cascade_split(
    t: TensorRep,
    f_sec: VfSection,
    y_sec: VfSection,
    ds_left: DistributionSet,
    *,
    obstruction_tol: float | None = None,
) -> CascadeResult:
    """Peel a compatible section pair down to its invariant residue.

    Stage order per factor: V-slot, then X-slot, then U-slot; each
    solved slot feeds the next stage through the frame mixing.  The
    right-factor distribution set is built internally in the same
    weighted geometry as ``ds_left``.

    With ``obstruction_tol`` set, each stage input is tested for an
    invariant component before solving and a ``StageObstruction``
    pinpoints the first offending (factor, stage, slot).

    Slots reachable by the solves are recovered up to the numerical
    kernel of the weighted geometry; coboundary data whose slots carry
    no kernel component round-trips to float accuracy.
    """
    ds_right = _right_distributions(t, ds_left)
    ts = _swap(t)
    tt, ss = t.T, t.S

    def check(factor, stage, slot, x):
        if obstruction_tol is None:
            return
        nx = np.linalg.norm(x)
        if nx == 0:
            return
        if factor == 1:
            r = splitting_R(t, x, ds_left)
        else:
            r = splitting_R(ts, x.T, ds_right)
        rel = float(np.linalg.norm(r) / nx)
        if rel > obstruction_tol:
            raise StageObstruction(factor, stage, slot, rel)

    stages: dict[tuple, SplitResult] = {}

    # factor one: V, X, U slots of the first triple
    check(1, 1, "f1", f_sec.f1)
    s11 = split(t, f_sec.f1, y_sec.f1, ds_left)
    stages[(1, 1, "f1")] = s11
    hf1 = s11.P

    in12 = f_sec.g1 + 2.0 * tt * (t.M1 @ hf1)
    check(1, 2, "g1", in12)
    s12 = split(t, in12, y_sec.g1, ds_left)
    stages[(1, 2, "g1")] = s12
    hg1 = s12.P

    in13 = f_sec.h1 - tt * (t.M1 @ hg1) + tt * tt * (t.M1 @ hf1)
    check(1, 3, "h1", in13)
    s13 = split(t, in13, y_sec.h1, ds_left)
    stages[(1, 3, "h1")] = s13
    hh1 = s13.P

    # factor two, mirrored through the swapped model
    def msplit(fm, gm):
        return split(ts, fm.T, gm.T, ds_right)

    check(2, 1, "f3", y_sec.f3)
    s21 = msplit(y_sec.f3, f_sec.f3)
    stages[(2, 1, "f3")] = s21
    hf3 = s21.P.T

    in22 = y_sec.g3 + 2.0 * ss * (hf3 @ t.M2.T)
    check(2, 2, "g3", in22)
    s22 = msplit(in22, f_sec.g3)
    stages[(2, 2, "g3")] = s22
    hg3 = s22.P.T

    in23 = y_sec.h3 - ss * (hg3 @ t.M2.T) + ss * ss * (hf3 @ t.M2.T)
    check(2, 3, "h3", in23)
    s23 = msplit(in23, f_sec.h3)
    stages[(2, 3, "h3")] = s23
    hh3 = s23.P.T

    h_sec = VfSection(h1=hh1, g1=hg1, f1=hf1, h3=hh3, g3=hg3, f3=hf3)
    f_res = f_sec - apply_bbl(t, 1, h_sec)
    y_res = y_sec - apply_bbl(t, 2, h_sec)

    phi = apply_bbl(t, 2, f_sec) - apply_bbl(t, 1, y_sec)
    phi_res = apply_bbl(t, 2, f_res) - apply_bbl(t, 1, y_res)
    preservation = (phi_res - phi).norm()

    slot_norms = tuple(
        (
            name,
            float(np.linalg.norm(getattr(f_res, name))),
            float(np.linalg.norm(getattr(y_res, name))),
        )
        for name in SLOT_NAMES
    )
    return CascadeResult(
        H=h_sec,
        F_res=f_res,
        Y_res=y_res,
        phi_norm=phi.norm(),
        preservation=preservation,
        slot_norms=slot_norms,
        stages=stages,
    )
