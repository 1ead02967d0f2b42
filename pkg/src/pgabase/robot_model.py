"""Constrained kinematic-tree robot description.

A robot is a tree of ``n`` bodies connected to a fixed base by tree joints,
plus ``nl`` loop joints that close kinematic loops.  Bodies are numbered
``1..n`` in files with ``0`` as the base; in memory they are ``0..n-1`` with
``-1`` as the base.

Every body frame is given at the initial configuration (``M0``), expressed in
the spatial frame.  The joint connecting a body to its parent sits at the
origin of that frame.  Revolute joints turn about the frame z axis and
prismatic joints slide along it.  A universal joint turns first about the
frame x axis (fixed in the parent) and then about the frame y axis (fixed in
the child).  Spherical joints are parameterised by successive rotations
about the frame x, y and z axes.  A floating joint uses six exponential
coordinates on the basis bivectors (e23, e31, e12, e01, e02, e03).

Loop joints introduce planar rotations only through the tree joints; a
description must not rely on a loop joint to create planar motion (the
nullspace analysis assumes this modelling convention).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pga
from .rigid_body import InertiaError, is_physically_feasible, unhat
from .tolerances import GEOMETRY_TOL

# Motors in files are printed with finite precision; anything within this
# distance of unit is renormalised, anything further is rejected.
FILE_MOTOR_TOL = 1e-9
PARALLEL_TOL = 1e-9


class JointType(str, enum.Enum):
    R = "R"
    P = "P"
    U = "U"
    S = "S"
    F = "F"

    @property
    def dof(self) -> int:
        return _DOF[self]


_DOF = {JointType.R: 1, JointType.P: 1, JointType.U: 2, JointType.S: 3, JointType.F: 6}


class RobotFileError(ValueError):
    """Invalid robot description; the message names the offending field."""


@dataclass(frozen=True, eq=False)
class RobotModel:
    name: str
    type: tuple[JointType, ...]
    parent: np.ndarray
    M0: np.ndarray
    L0: np.ndarray
    q0: np.ndarray
    actuated: np.ndarray
    g: np.ndarray
    ltype: tuple[JointType, ...] = ()
    lparent: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    lchild: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    Ml: np.ndarray = field(default_factory=lambda: np.zeros((0, 16)))
    is_pr: np.ndarray | None = None
    d_pr: np.ndarray | None = None
    inertia: np.ndarray | None = None
    q_a_low: np.ndarray | None = None
    q_a_high: np.ndarray | None = None
    provenance: str = ""

    def __post_init__(self):
        if self.is_pr is None or self.d_pr is None:
            is_pr, d_pr = pri(self)
            object.__setattr__(self, "is_pr", is_pr)
            object.__setattr__(self, "d_pr", d_pr)

    @property
    def n(self) -> int:
        return len(self.type)

    @property
    def nl(self) -> int:
        return len(self.ltype)

    @property
    def dof_offsets(self) -> np.ndarray:
        """Start index of each body's joint coordinates in the tree vector ``q``."""
        sizes = [t.dof for t in self.type]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    @property
    def nq(self) -> int:
        return int(self.dof_offsets[-1])

    @property
    def passive(self) -> np.ndarray:
        mask = np.ones(self.nq, dtype=bool)
        mask[self.actuated] = False
        return np.flatnonzero(mask)

    @property
    def n_actuated(self) -> int:
        return len(self.actuated)

    def coordinates(self, body: int) -> range:
        off = self.dof_offsets
        return range(int(off[body]), int(off[body + 1]))

    def with_gravity(self, g) -> "RobotModel":
        """Copy of the model with a different gravity bivector.

        Accepts 3 numbers (the ideal part, e.g. ``(0, 0, 9.81)`` for gravity
        pulling along -z), 6 Plucker numbers or 16 multivector slots.
        """
        g = np.asarray(g, dtype=float)
        if g.shape == (3,):
            g = np.concatenate([np.zeros(3), g])
        if g.shape == (6,):
            g = pga.line(g)
        return _replace(self, g=g)

    def transformed(self, motor) -> "RobotModel":
        """The same robot moved rigidly by ``motor`` in the spatial frame."""
        motor = np.asarray(motor, dtype=float)
        t = pga.motor_to_homogeneous(motor)
        inertia = None
        if self.inertia is not None:
            from .rigid_body import hat

            inertia = np.array([hat(t @ unhat(th) @ t.T) for th in self.inertia])
        model = _replace(
            self,
            M0=np.array([pga.normalize_motor(pga.compose(m, motor)) for m in self.M0]),
            Ml=np.array([pga.normalize_motor(pga.compose(m, motor)) for m in self.Ml]).reshape(-1, 16),
            L0=pga.sandwich(motor, self.L0),
            g=pga.sandwich(motor, self.g),
            inertia=inertia,
        )
        return model


def _replace(model: RobotModel, **changes) -> RobotModel:
    import dataclasses

    changes.setdefault("is_pr", None)
    changes.setdefault("d_pr", None)
    return dataclasses.replace(model, **changes)


# --------------------------------------------------------------------------
# Planar-rotation indicator


def _is_parallel(a, b) -> bool:
    return float(np.linalg.norm(np.cross(a, b))) <= PARALLEL_TOL


def pri(model: RobotModel) -> tuple[np.ndarray, np.ndarray]:
    """Flag bodies whose motion is a planar rotation about a fixed direction.

    A body qualifies when every joint between it and the base is prismatic
    or revolute with one common rotation direction.  Returns the flags and
    a ``(n, 3)`` array with that direction (zero when the chain so far is
    purely prismatic).

    The parallel test compares the joint direction with the last rotation
    direction on the chain.  For a prismatic parent (zero direction) this
    is the parent's inherited ``d_pr`` rather than its own zero vector, so a
    chain such as R(z)-P-R(x) is not mistaken for a planar one.
    """
    n = model.n
    is_pr = np.zeros(n, dtype=int)
    d_pr = np.zeros((n, 3))
    for i in range(n):
        t = model.type[i]
        if t not in (JointType.R, JointType.P):
            continue
        l_d = pga.line_coords(model.L0[i])[:3]
        p = int(model.parent[i])
        if p < 0:
            is_pr[i] = 1
            d_pr[i] = l_d
            continue
        if not is_pr[p]:
            continue
        l_dp = pga.line_coords(model.L0[p])[:3]
        reference = l_dp if np.linalg.norm(l_dp) > 0 else d_pr[p]
        if not _is_parallel(l_d, reference):
            continue
        is_pr[i] = 1
        if np.linalg.norm(l_dp) != 0:
            d_pr[i] = l_dp
        elif np.linalg.norm(d_pr[p]) != 0:
            d_pr[i] = d_pr[p]
        else:
            d_pr[i] = l_d
    return is_pr, d_pr


# --------------------------------------------------------------------------
# Loading and validation


def _fail(where: str, msg: str):
    raise RobotFileError(f"{where}: {msg}")


def _array(doc: dict, key: str, shape_tail: tuple, where: str, required=True, length=None):
    if key not in doc:
        if required:
            _fail(where, f"missing field '{key}'")
        return None
    try:
        arr = np.asarray(doc[key], dtype=float)
    except (TypeError, ValueError):
        _fail(f"{where}.{key}", "must be numeric")
    if length is not None and arr.shape[:1] != (length,) and not (length == 0 and arr.size == 0):
        _fail(f"{where}.{key}", f"expected {length} entries, found {arr.shape[0] if arr.ndim else 0}")
    if length == 0:
        return arr.reshape((0,) + shape_tail)
    if arr.shape[1:] != shape_tail:
        _fail(f"{where}.{key}", f"each entry must have shape {shape_tail}, got {arr.shape[1:]}")
    return arr


def _joint_types(values, where: str) -> tuple[JointType, ...]:
    if not isinstance(values, list):
        _fail(where, "must be a list of joint type letters")
    out = []
    for k, v in enumerate(values):
        try:
            out.append(JointType(v))
        except ValueError:
            _fail(f"{where}[{k + 1}]", f"unknown joint type {v!r} (expected one of R, P, U, S, F)")
    return tuple(out)


def _indices(values, where: str, length: int) -> np.ndarray:
    if not isinstance(values, list) or len(values) != length:
        _fail(where, f"expected a list of {length} integers")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        _fail(where, "entries must be integers")
    return np.array(values, dtype=int)


def _unit_motors(arr: np.ndarray, where: str) -> np.ndarray:
    out = np.zeros((arr.shape[0], 16))
    for k, c in enumerate(arr):
        m = pga.motor(c)
        err = pga.motor_norm_error(m)
        if err > FILE_MOTOR_TOL:
            _fail(f"{where}[{k + 1}]", f"motor is not unit (|~MM - 1| = {err:.3e})")
        out[k] = pga.normalize_motor(m, tol=FILE_MOTOR_TOL)
    return out


def model_from_dict(doc: dict, source: str = "<robot>") -> RobotModel:
    """Build and validate a :class:`RobotModel` from a parsed description."""
    if not isinstance(doc, dict):
        _fail(source, "top level must be a JSON object")
    where = source
    types = _joint_types(doc.get("type"), f"{where}.type")
    n = len(types)
    if n == 0:
        _fail(f"{where}.type", "robot has no bodies")
    if "n" in doc and doc["n"] != n:
        _fail(f"{where}.n", f"declares {doc['n']} bodies but 'type' lists {n}")

    parent = _indices(doc.get("parent"), f"{where}.parent", n) - 1
    for i in range(n):
        if not -1 <= parent[i] < i:
            _fail(f"{where}.parent[{i + 1}]", f"parent {parent[i] + 1} must be smaller than the body index {i + 1}")
        if types[i] is JointType.F and parent[i] != -1:
            _fail(f"{where}.type[{i + 1}]", "floating joints must connect a body to the base")

    m0 = _unit_motors(_array(doc, "M0", (8,), where, length=n), f"{where}.M0")
    l0_raw = _array(doc, "L0", (6,), where, length=n)
    l0 = pga.line(l0_raw)

    ltypes = _joint_types(doc.get("ltype", []), f"{where}.ltype")
    nl = len(ltypes)
    if "nl" in doc and doc["nl"] != nl:
        _fail(f"{where}.nl", f"declares {doc['nl']} loop joints but 'ltype' lists {nl}")
    lparent = _indices(doc.get("lparent", []), f"{where}.lparent", nl) - 1
    lchild = _indices(doc.get("lchild", []), f"{where}.lchild", nl) - 1
    for l in range(nl):
        if ltypes[l] is JointType.F:
            _fail(f"{where}.ltype[{l + 1}]", "loop joints cannot be floating")
        if not -1 <= lparent[l] < lchild[l] < n:
            _fail(f"{where}.lparent[{l + 1}]",
                  f"loop parent {lparent[l] + 1} must be smaller than loop child {lchild[l] + 1} (and within 0..{n})")
    ml = _unit_motors(_array(doc, "Ml", (8,), where, length=nl), f"{where}.Ml") if nl else np.zeros((0, 16))

    for i, t in enumerate(types):
        _check_axis(t, m0[i], l0[i], f"{where}.L0[{i + 1}]")

    nq = sum(t.dof for t in types)
    q0 = _array(doc, "q0", (), where, length=nq)
    actuated = _indices(doc.get("actuated"), f"{where}.actuated", len(doc.get("actuated") or [])) - 1
    if len(actuated) == 0:
        _fail(f"{where}.actuated", "at least one actuated coordinate is required")
    if len(set(actuated.tolist())) != len(actuated) or actuated.min() < 0 or actuated.max() >= nq:
        _fail(f"{where}.actuated", f"indices must be distinct and within 1..{nq}")
    offsets = np.concatenate([[0], np.cumsum([t.dof for t in types])])
    for i, t in enumerate(types):
        if t is JointType.F and not set(range(offsets[i], offsets[i + 1])) <= set(actuated.tolist()):
            _fail(f"{where}.actuated", f"coordinates of floating joint {i + 1} must all be actuated")
    if nl == 0 and len(actuated) != nq:
        _fail(f"{where}.actuated", "an open tree must actuate every coordinate")

    g = _array(doc, "g", (), where, length=6)
    g_line = pga.line(g)

    inertia = None
    if "inertia" in doc:
        inertia = _array(doc, "inertia", (10,), where, length=n)
        for i, th in enumerate(inertia):
            try:
                feasible = is_physically_feasible(unhat(th))
            except InertiaError as exc:
                _fail(f"{where}.inertia[{i + 1}]", str(exc))
            if not feasible:
                _fail(f"{where}.inertia[{i + 1}]", "pseudo-inertia is not positive definite")

    q_lo = q_hi = None
    sampling = doc.get("sampling")
    if sampling is not None:
        q_lo = _array(sampling, "q_a_low", (), f"{where}.sampling", length=len(actuated))
        q_hi = _array(sampling, "q_a_high", (), f"{where}.sampling", length=len(actuated))
        if np.any(q_lo > q_hi):
            _fail(f"{where}.sampling", "q_a_low must not exceed q_a_high")

    model = RobotModel(
        name=str(doc.get("name", Path(source).stem)),
        type=types,
        parent=parent,
        M0=m0,
        L0=l0,
        q0=q0,
        actuated=actuated,
        g=g_line,
        ltype=ltypes,
        lparent=lparent,
        lchild=lchild,
        Ml=ml,
        inertia=inertia,
        q_a_low=q_lo,
        q_a_high=q_hi,
        provenance=str(doc.get("provenance", "")),
    )
    for key in ("is_pr", "d_pr"):
        if key in doc:
            declared = np.asarray(doc[key], dtype=float)
            computed = getattr(model, key)
            if declared.shape != computed.shape or not np.allclose(declared, computed, atol=GEOMETRY_TOL):
                _fail(f"{where}.{key}", "does not match the planar-rotation analysis of the geometry")
    return model


def _check_axis(t: JointType, m0, l0, where: str) -> None:
    frame = pga.motor_to_homogeneous(m0)
    z, origin = frame[:3, 2], frame[:3, 3]
    coords = pga.line_coords(l0)
    if t is JointType.R:
        expected = pga.axis_line(z, origin)
    elif t is JointType.P:
        expected = np.concatenate([np.zeros(3), z])
    else:
        expected = np.zeros(6)
    if not np.allclose(coords, expected, atol=GEOMETRY_TOL * 100):
        kind = {"R": "the z axis of M0", "P": "the direction (0; z) of M0"}.get(t.value, "zero")
        _fail(where, f"joint line {coords.tolist()} must equal {kind} ({expected.round(12).tolist()})")


def load(path) -> RobotModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RobotFileError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RobotFileError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    return model_from_dict(doc, source=str(path))


def model_to_dict(model: RobotModel) -> dict:
    """Inverse of :func:`model_from_dict` (1-based indices, 8/6-number motors and lines)."""
    doc = {
        "name": model.name,
        "provenance": model.provenance,
        "n": model.n,
        "type": [t.value for t in model.type],
        "parent": (model.parent + 1).tolist(),
        "nl": model.nl,
        "ltype": [t.value for t in model.ltype],
        "lparent": (model.lparent + 1).tolist(),
        "lchild": (model.lchild + 1).tolist(),
        "q0": model.q0.tolist(),
        "actuated": (model.actuated + 1).tolist(),
        "M0": pga.motor_coords(model.M0).tolist(),
        "Ml": pga.motor_coords(model.Ml).tolist(),
        "L0": pga.line_coords(model.L0).tolist(),
        "g": pga.line_coords(model.g).tolist(),
        "is_pr": model.is_pr.tolist(),
        "d_pr": model.d_pr.tolist(),
    }
    if model.inertia is not None:
        doc["inertia"] = model.inertia.tolist()
    if model.q_a_low is not None:
        doc["sampling"] = {"q_a_low": model.q_a_low.tolist(), "q_a_high": model.q_a_high.tolist()}
    return doc


def dump(model: RobotModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def gravity_vector(model: RobotModel) -> np.ndarray:
    """Ideal part ``(Gx, Gy, Gz)`` of the gravity bivector."""
    return pga.line_coords(model.g)[3:]


__all__ = [
    "JointType",
    "RobotModel",
    "RobotFileError",
    "pri",
    "load",
    "dump",
    "model_from_dict",
    "model_to_dict",
    "gravity_vector",
]
