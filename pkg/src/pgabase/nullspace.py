"""Analytical nullspace of the dynamics regressor.

Three geometric facts generate linear dependencies among the stacked
inertia vectors ``[hat(N_1); ...; hat(N_n)]``:

* shared points: a point attached to both bodies of a joint lets inertia
  move between them (one column per symmetric pair of shared points);
* fixed points: points of a base-connected body that never accelerate;
* planar rotations: bodies that only rotate about a fixed direction.

Column ``k`` of ``B_null`` satisfies ``Y @ B_null[:, k] = 0`` for every
state.  All tetrahedral points use the spatial assignment, so the joint
frame coordinates below are columns of the initial joint transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import pga
from .rigid_body import hat, sym_outer
from .robot_model import JointType, RobotModel, _is_parallel

_POINT_NAMES = "xyzO"
_SHARED = {
    JointType.R: (2, 3),
    JointType.P: (0, 1, 2),
    JointType.U: (3,),
    JointType.S: (3,),
    JointType.F: (),
}


class NullspaceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ColumnTag:
    """Where a nullspace column comes from.

    ``principle`` is 1 (shared points), 2 (fixed points) or 3 (planar
    rotation); ``joint`` is ``"tree"`` or ``"loop"`` with a 1-based ``index``;
    ``bodies`` are the 1-based body indices with nonzero blocks (0 = base
    never appears); ``relation`` names the point pair, e.g. ``"zO"``.
    """

    principle: int
    joint: str
    index: int
    joint_type: str
    bodies: tuple[int, ...]
    relation: str

    def as_dict(self) -> dict:
        return {
            "principle": self.principle,
            "joint": self.joint,
            "index": self.index,
            "joint_type": self.joint_type,
            "bodies": list(self.bodies),
            "relation": self.relation,
        }


def joint_frame_points(motor) -> np.ndarray:
    """Homogeneous coordinates of the moved frame points, rows (x, y, z, O)."""
    return pga.point_coords(pga.sandwich(np.asarray(motor, dtype=float), pga.FRAME_POINTS))


def ssp(motor, joint_type: JointType) -> tuple[np.ndarray, np.ndarray]:
    """Shared-point coordinates ``(c_parent, c_child)``, each ``(n_s, 4)``."""
    joint_type = JointType(joint_type)
    c = joint_frame_points(motor)[list(_SHARED[joint_type])].reshape(-1, 4)
    return c, c.copy()


def jng_index(n_s: int, i: int, j: int) -> int:
    """1-based column index for the shared-point pair ``(i, j)``, ``1 <= i <= j <= n_s``."""
    return (2 * n_s - i + 2) * (i - 1) // 2 + j - i + 1


def jng(n: int, n_s: int, p: int, c: int, c_parent, c_child) -> np.ndarray:
    """Principle-1 columns for one joint between bodies ``p`` and ``c``.

    Body indices are 0-based with ``p = -1`` for the base.  The child
    block carries ``+hat(...)`` and the parent block ``-hat(...)``: moving
    the inertia of a shared-point pair from one body to the other leaves
    every generalized force unchanged.
    """
    c_parent = np.asarray(c_parent, dtype=float).reshape(-1, 4)
    c_child = np.asarray(c_child, dtype=float).reshape(-1, 4)
    out = np.zeros((10 * n, n_s * (n_s + 1) // 2))
    for i in range(1, n_s + 1):
        for j in range(i, n_s + 1):
            k = jng_index(n_s, i, j) - 1
            if i == j:
                child = np.outer(c_child[j - 1], c_child[j - 1])
                par = np.outer(c_parent[j - 1], c_parent[j - 1])
            else:
                child = sym_outer(c_child[i - 1], c_child[j - 1])
                par = sym_outer(c_parent[i - 1], c_parent[j - 1])
            if p >= 0:
                out[10 * p:10 * p + 10, k] = -hat(par)
            out[10 * c:10 * c + 10, k] = hat(child)
    return out


def _pair_name(n_s_points, i, j) -> str:
    return _POINT_NAMES[n_s_points[i]] + _POINT_NAMES[n_s_points[j]]


@dataclass(frozen=True)
class NullspaceBasis:
    B_null: np.ndarray
    tags: tuple[ColumnTag, ...]

    @property
    def d(self) -> int:
        return self.B_null.shape[1]

    @property
    def n_params(self) -> int:
        return self.B_null.shape[0]

    @property
    def n_base(self) -> int:
        return self.n_params - self.d

    def complement(self) -> np.ndarray:
        return complement(self.B_null)

    def counts(self) -> dict:
        out = {1: 0, 2: 0, 3: 0}
        for t in self.tags:
            out[t.principle] += 1
        return {f"principle_{k}": v for k, v in out.items()}


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.columns: list[np.ndarray] = []
        self.tags: list[ColumnTag] = []

    def block(self, body: int, sym: np.ndarray, tag: ColumnTag, parent_sym=None, parent: int = -1):
        col = np.zeros(10 * self.n)
        col[10 * body:10 * body + 10] = hat(sym)
        if parent_sym is not None and parent >= 0:
            col[10 * parent:10 * parent + 10] -= hat(parent_sym)
        self.columns.append(col)
        self.tags.append(tag)

    def extend(self, cols: np.ndarray, tags: list[ColumnTag]):
        self.columns.extend(cols.T)
        self.tags.extend(tags)

    def result(self) -> NullspaceBasis:
        b = np.array(self.columns).T if self.columns else np.zeros((10 * self.n, 0))
        return NullspaceBasis(b, tuple(self.tags))


def _principle1(builder, n, jt, motor, p, c, joint, index):
    cp, cc = ssp(motor, jt)
    n_s = cp.shape[0]
    if n_s == 0:
        return
    cols = jng(n, n_s, p, c, cp, cc)
    names = _SHARED[jt]
    bodies = tuple(b + 1 for b in (p, c) if b >= 0)
    tags = [None] * cols.shape[1]
    for i in range(n_s):
        for j in range(i, n_s):
            k = jng_index(n_s, i + 1, j + 1) - 1
            tags[k] = ColumnTag(1, joint, index, jt.value, bodies, _pair_name(names, i, j))
    builder.extend(cols, tags)


def _gravity_is_zero(g) -> bool:
    return not np.any(np.asarray(g) != 0.0)


def drng(model: RobotModel, g=None) -> NullspaceBasis:
    """Nullspace basis ``B_null`` (``10 n x d``) with per-column provenance.

    ``g`` overrides the model's gravity bivector.  Gravity tests are exact
    comparisons with zero on the declared data.
    """
    g = model.g if g is None else np.asarray(g, dtype=float)
    if g.shape == (6,):
        g = pga.line(g)
    n = model.n
    out = _Builder(n)
    for i in range(n):
        jt = model.type[i]
        p = int(model.parent[i])
        _principle1(out, n, jt, model.M0[i], p, i, "tree", i + 1)
        cx, cy, cz, co = joint_frame_points(model.M0[i])

        def tag(principle, relation, bodies=(i + 1,)):
            return ColumnTag(principle, "tree", i + 1, jt.value, bodies, relation)

        if p < 0:
            fixed = []
            if jt in (JointType.S, JointType.U):
                if _gravity_is_zero(g):
                    fixed = [("Ox", co, cx), ("Oy", co, cy), ("Oz", co, cz)]
            elif jt is JointType.P:
                fixed = [("Ox", co, cx), ("Oy", co, cy), ("Oz", co, cz)]
            elif jt is JointType.R:
                if _gravity_is_zero(pga.commutator(model.L0[i], g)):
                    fixed = [("Ox", co, cx), ("Oy", co, cy)]
                fixed += [("zx", cz, cx), ("zy", cz, cy)]
            for rel, a, b in fixed:
                out.block(i, sym_outer(a, b), tag(2, rel))

        if model.is_pr[i]:
            if jt is JointType.R:
                out.block(i, np.outer(cx, cx) - np.outer(cy, cy), tag(3, "xx-yy"))
                out.block(i, sym_outer(cx, cy), tag(3, "xy"))
                if p >= 0:
                    out.block(i, sym_outer(cz, cx), tag(3, "zx"))
                    out.block(i, sym_outer(cz, cy), tag(3, "zy"))
            elif jt is JointType.P and p >= 0:
                cd = np.concatenate([model.d_pr[i], [0.0]])
                out.block(i, sym_outer(cd, co), tag(3, "Od"))
                if _is_parallel(model.d_pr[i], cz[:3]):
                    both = (p + 1, i + 1)
                    out.block(i, sym_outer(co, cx), tag(3, "Ox-transfer", both), sym_outer(co, cx), p)
                    out.block(i, sym_outer(co, cy), tag(3, "Oy-transfer", both), sym_outer(co, cy), p)

    for l in range(model.nl):
        _principle1(out, n, model.ltype[l], model.Ml[l], int(model.lparent[l]), int(model.lchild[l]),
                    "loop", l + 1)
    return out.result()


def rank_of(a: np.ndarray, rel_tol: float) -> int:
    """Numerical rank from pivoted QR, relative to the largest pivot."""
    if a.size == 0:
        return 0
    r = scipy.linalg.qr(a, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > rel_tol * diag[0]))


def complement(b_null: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(B_null)``.

    Uses a complete pivoted QR factorization; raises :class:`NullspaceError`
    if ``B_null`` is rank deficient, which would mean a principle column was
    emitted twice.
    """
    b_null = np.asarray(b_null, dtype=float)
    rows, d = b_null.shape
    if d == 0:
        return np.eye(rows)
    q, r, _ = scipy.linalg.qr(b_null, mode="full", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rel_tol * max(diag[0], np.linalg.norm(b_null))))
    if rank < d:
        raise NullspaceError(f"nullspace columns are dependent: rank {rank} < {d}")
    return q[:, d:]
