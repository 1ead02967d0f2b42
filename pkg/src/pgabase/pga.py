"""Projective geometric algebra G(3,0,1).

Multivectors are plain numpy arrays whose trailing axis holds the 16
coefficients over the basis blades listed in :data:`BLADES`.  Every function
broadcasts over leading axes, so a stack of points or lines is processed in
one call.  :class:`Multivector` wraps a single element with operator
overloads for interactive use.

The basis orientation follows the usual robotics convention for PGA:

* planes ``a e1 + b e2 + c e3 + d e0`` for ``ax + by + cz + d = 0``;
* lines ``dx e23 + dy e31 + dz e12 + px e01 + py e02 + pz e03``;
* points ``x e032 + y e013 + z e021 + w e123``.

Motors act as ``X = ~M X0 M``.  With that convention the bivector
``V = 2 ~M dM/dt`` carries (angular velocity, linear velocity at the
origin) of the spatial twist on the (e23, e31, e12) and (e01, e02, e03)
slots.
"""

from __future__ import annotations

import itertools

import numpy as np

from .tolerances import GEOMETRY_TOL, MOTOR_UNIT_TOL, RIGID_TOL

BLADES = (
    "1",
    "e0", "e1", "e2", "e3",
    "e01", "e02", "e03", "e23", "e31", "e12",
    "e021", "e013", "e032", "e123",
    "e0123",
)
GRADES = np.array([len(b) - 1 if b != "1" else 0 for b in BLADES])

S = 0
E0, E1, E2, E3 = 1, 2, 3, 4
E01, E02, E03, E23, E31, E12 = 5, 6, 7, 8, 9, 10
E021, E013, E032, E123 = 11, 12, 13, 14
E0123 = 15

# Slots of the grade views in their documented coordinate order.
PLANE_SLOTS = np.array([E1, E2, E3, E0])
LINE_SLOTS = np.array([E23, E31, E12, E01, E02, E03])
POINT_SLOTS = np.array([E032, E013, E021, E123])
MOTOR_SLOTS = np.array([S, E23, E31, E12, E01, E02, E03, E0123])

_METRIC = (0.0, 1.0, 1.0, 1.0)


def _blade_factors(name: str) -> tuple[int, ...]:
    return () if name == "1" else tuple(int(c) for c in name[1:])


def _sort_sign(factors) -> tuple[int, tuple[int, ...]]:
    """Bubble-sort basis vectors, returning (permutation sign, sorted)."""
    f = list(factors)
    sign = 1
    for i in range(len(f)):
        for j in range(len(f) - 1 - i):
            if f[j] > f[j + 1]:
                f[j], f[j + 1] = f[j + 1], f[j]
                sign = -sign
    return sign, tuple(f)


def _canonical(factors) -> tuple[float, int]:
    """Reduce a word of basis vectors to (coefficient, bitmap)."""
    sign, f = _sort_sign(factors)
    coeff = float(sign)
    out: list[int] = []
    for v in f:
        if out and out[-1] == v:
            out.pop()
            coeff *= _METRIC[v]
        else:
            out.append(v)
    bitmap = sum(1 << v for v in out)
    return coeff, bitmap


# bitmap -> (slot, orientation of the named blade relative to sorted order)
_SLOT_OF_BITMAP = {}
for _slot, _name in enumerate(BLADES):
    _s, _b = _canonical(_blade_factors(_name))
    _SLOT_OF_BITMAP[_b] = (_slot, _s)


def _product_table(outer: bool) -> np.ndarray:
    table = np.zeros((16, 16, 16))
    for i, j in itertools.product(range(16), range(16)):
        fi, fj = _blade_factors(BLADES[i]), _blade_factors(BLADES[j])
        if outer and set(fi) & set(fj):
            continue
        coeff, bitmap = _canonical(fi + fj)
        if coeff == 0.0:
            continue
        k, orient = _SLOT_OF_BITMAP[bitmap]
        table[i, j, k] = coeff * orient
    return table


_GP_TABLE = _product_table(outer=False)
_WEDGE_TABLE = _product_table(outer=True)
_GP_FLAT = _GP_TABLE.reshape(256, 16)
_WEDGE_FLAT = _WEDGE_TABLE.reshape(256, 16)

_REVERSE_SIGN = np.where((GRADES == 2) | (GRADES == 3), -1.0, 1.0)

# The dual swaps these slot pairs; each pair is listed once.
_DUAL_PAIRS = (
    (S, E0123), (E0, E123), (E1, E032), (E2, E013), (E3, E021),
    (E01, E23), (E02, E31), (E03, E12),
)
_DUAL_PERM = np.arange(16)
for _a, _b in _DUAL_PAIRS:
    _DUAL_PERM[_a], _DUAL_PERM[_b] = _b, _a


def _bilinear(a, b, flat_table) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    outer = a[..., :, None] * b[..., None, :]
    return outer.reshape(outer.shape[:-2] + (256,)) @ flat_table


def geometric_product(a, b) -> np.ndarray:
    """Geometric product of two multivector arrays."""
    return _bilinear(a, b, _GP_FLAT)


def wedge(a, b) -> np.ndarray:
    """Outer (meet) product."""
    return _bilinear(a, b, _WEDGE_FLAT)


def dual(x) -> np.ndarray:
    """Coefficient-permuting dual, e.g. ``e032 <-> e1`` and ``e23 <-> e01``.

    It is linear and an involution.  On bivectors the pairing
    ``e23<->e01, e31<->e02, e12<->e03`` is what makes :func:`vee` of two
    points reproduce the Plücker formula ``[w1 p2 - w2 p1; p1 x p2]``.
    """
    return np.asarray(x, dtype=float)[..., _DUAL_PERM]


def vee(a, b) -> np.ndarray:
    """Join product ``(a* ^ b*)*``."""
    return dual(wedge(dual(a), dual(b)))


def reverse(x) -> np.ndarray:
    return np.asarray(x, dtype=float) * _REVERSE_SIGN


def grade(x, k: int) -> np.ndarray:
    """Project onto grade ``k`` (other slots zeroed)."""
    return np.where(GRADES == k, np.asarray(x, dtype=float), 0.0)


def commutator(x, v) -> np.ndarray:
    """Commutator product ``(xv - vx) / 2``."""
    return 0.5 * (geometric_product(x, v) - geometric_product(v, x))


def sandwich(m, x, tol: float = RIGID_TOL) -> np.ndarray:
    """Apply motor ``m`` to ``x`` as ``~m x m``.

    Raises :class:`MotorError` when ``~m m`` deviates from 1 by more than
    ``tol`` (pass ``tol=None`` to skip the check).
    """
    m = np.asarray(m, dtype=float)
    rev = reverse(m)
    if tol is not None:
        err = float(np.max(np.abs(geometric_product(rev, m) - _ONE)))
        if err > tol:
            raise MotorError(f"sandwich needs a unit motor (|~M M - 1| = {err:.3g})")
    return geometric_product(geometric_product(rev, x), m)


def pairing(w, v) -> np.ndarray:
    """Scalar ``e0123`` coefficient of ``w ^ v`` (power of wrench on twist)."""
    return wedge(w, v)[..., E0123]


# --------------------------------------------------------------------------
# Grade views


def _embed(coords, slots) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    out = np.zeros(coords.shape[:-1] + (16,))
    out[..., slots] = coords
    return out


def plane(coords) -> np.ndarray:
    """Plane from ``(a, b, c, d)`` of ``ax + by + cz + d = 0``."""
    return _embed(coords, PLANE_SLOTS)


def line(coords) -> np.ndarray:
    """Bivector from 6 Plücker numbers ``(dx, dy, dz, px, py, pz)``."""
    return _embed(coords, LINE_SLOTS)


def point(coords) -> np.ndarray:
    """Trivector from homogeneous ``(x, y, z, w)``.

    A 3-vector is promoted to a Euclidean point with ``w = 1``.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] == 3:
        coords = np.concatenate([coords, np.ones(coords.shape[:-1] + (1,))], axis=-1)
    return _embed(coords, POINT_SLOTS)


def motor(coords) -> np.ndarray:
    """Even element from the 8 coefficients ``(c1..c8)``."""
    return _embed(coords, MOTOR_SLOTS)


def plane_coords(x) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., PLANE_SLOTS]


def line_coords(x) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., LINE_SLOTS]


def point_coords(x) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., POINT_SLOTS]


def motor_coords(x) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., MOTOR_SLOTS]


def scalar(value: float = 1.0) -> np.ndarray:
    out = np.zeros(16)
    out[S] = value
    return out


IDENTITY_MOTOR = scalar(1.0)
_ONE = IDENTITY_MOTOR
IDENTITY_MOTOR.flags.writeable = False

# x, y, z directions and the origin of the spatial frame.
FRAME_POINTS = np.eye(4) @ np.eye(16)[POINT_SLOTS]
FRAME_POINTS.flags.writeable = False


# --------------------------------------------------------------------------
# Motors


class MotorError(ValueError):
    """Raised when a motor or rigid transform fails its unit/rigidity check."""


def motor_norm_error(m) -> float:
    """Largest deviation of ``~m m`` from 1."""
    err = geometric_product(reverse(m), m) - scalar(1.0)
    return float(np.max(np.abs(err)))


def normalize_motor(m, tol: float = 1e-6) -> np.ndarray:
    """Renormalise a nearly unit motor.

    The Euclidean part is scaled to unit norm and the ideal part is made
    orthogonal to it (the Study condition), which restores ``~m m = 1``
    exactly up to rounding.  Inputs further than ``tol`` from unit raise
    :class:`MotorError`.
    """
    m = np.asarray(m, dtype=float)
    if motor_norm_error(m) > tol:
        raise MotorError(f"motor is not unit within {tol:g}: ~MM deviates by {motor_norm_error(m):.3e}")
    c = motor_coords(m)
    rot = c[[0, 1, 2, 3]]
    # Study condition: c1 c8 - (c2 c5 + c3 c6 + c4 c7) = 0.
    signs = np.array([1.0, -1.0, -1.0, -1.0])
    ideal = c[[7, 4, 5, 6]] * signs
    s = np.linalg.norm(rot)
    rot = rot / s
    ideal = ideal / s
    ideal = (ideal - rot * np.dot(rot, ideal)) * signs
    out = motor([rot[0], rot[1], rot[2], rot[3], ideal[1], ideal[2], ideal[3], ideal[0]])
    if motor_norm_error(out) > MOTOR_UNIT_TOL:
        raise MotorError("motor normalisation did not converge")
    return out


def _sinc(t):
    return np.where(np.abs(t) < 1e-4, 1.0 - t * t / 6.0 + t**4 / 120.0, np.sin(t) / np.where(t == 0, 1.0, t))


def _sinc_minus_cos_over_sq(t):
    # (sinc(t) - cos(t)) / t^2, finite at t = 0
    safe = np.where(t == 0, 1.0, t)
    direct = (np.sin(safe) / safe - np.cos(safe)) / (safe * safe)
    return np.where(np.abs(t) < 1e-3, 1.0 / 3.0 - t * t / 30.0 + t**4 / 840.0, direct)


def motor_exp(b) -> np.ndarray:
    """Exponential of a bivector in closed form.

    ``b * b = -theta^2 + beta I`` splits into a Euclidean rotation angle
    ``theta`` and the pitch term ``beta``; the dual-number expansion of
    ``cos`` and ``sin`` gives

        exp(b) = cos(theta) + sinc(theta) b
                 + beta/2 (sinc(theta) I + g(theta) b I)

    with ``g(t) = (sinc t - cos t) / t^2``.
    """
    b = grade(b, 2)
    sq = geometric_product(b, b)
    theta = np.sqrt(np.maximum(-sq[..., S], 0.0))
    beta = sq[..., E0123]
    pseudo = np.zeros(16)
    pseudo[E0123] = 1.0
    bi = geometric_product(b, pseudo)
    sc = _sinc(theta)[..., None]
    g = _sinc_minus_cos_over_sq(theta)[..., None]
    out = sc * b + 0.5 * beta[..., None] * (sc * pseudo + g * bi)
    out[..., S] += np.cos(theta)
    return out


def motor_to_homogeneous(m) -> np.ndarray:
    """4x4 rigid transform whose columns are the moved frame points."""
    moved = sandwich(np.asarray(m, dtype=float)[..., None, :], FRAME_POINTS)
    return np.swapaxes(point_coords(moved), -1, -2)


def check_rigid(t, tol: float = RIGID_TOL) -> np.ndarray:
    """Validate a 4x4 rigid transform and return it as a float array."""
    t = np.asarray(t, dtype=float)
    if t.shape != (4, 4):
        raise MotorError(f"rigid transform must be 4x4, got shape {t.shape}")
    r = t[:3, :3]
    if not np.allclose(t[3], [0.0, 0.0, 0.0, 1.0], atol=tol, rtol=0.0):
        raise MotorError("last row of rigid transform must be (0, 0, 0, 1)")
    if not np.allclose(r.T @ r, np.eye(3), atol=tol, rtol=0.0) or np.linalg.det(r) < 0:
        raise MotorError("rotation block is not a proper orthonormal matrix")
    return t


def _rotation_to_quaternion(r) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a proper rotation matrix (Shepperd)."""
    tr = np.trace(r)
    cand = np.array([tr, r[0, 0], r[1, 1], r[2, 2]])
    k = int(np.argmax(cand))
    if k == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
    elif k == 1:
        s = 2.0 * np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        q = [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
    elif k == 2:
        s = 2.0 * np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        q = [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        q = [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    return q / np.linalg.norm(q)


def motor_from_homogeneous(t) -> np.ndarray:
    """Motor equivalent to a rigid transform (rotate, then translate)."""
    t = check_rigid(t)
    w, x, y, z = _rotation_to_quaternion(t[:3, :3])
    rot = motor([w, x, y, z, 0.0, 0.0, 0.0, 0.0])
    p = t[:3, 3]
    trans = motor([1.0, 0.0, 0.0, 0.0, 0.5 * p[0], 0.5 * p[1], 0.5 * p[2], 0.0])
    return geometric_product(rot, trans)


def compose(first, second) -> np.ndarray:
    """Motor applying ``first`` and then ``second``."""
    return geometric_product(first, second)


def rotation_motor(axis, angle: float, through=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Right-handed rotation by ``angle`` about the line along ``axis`` through ``through``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return motor_exp(0.5 * angle * line(axis_line(axis, through)))


def translation_motor(displacement) -> np.ndarray:
    return motor_exp(0.5 * line(np.concatenate([np.zeros(3), np.asarray(displacement, dtype=float)])))


def axis_line(direction, through) -> np.ndarray:
    """Plücker coordinates of the line along ``direction`` through ``through``.

    As a twist this is a unit right-handed rotation about that line.
    """
    d = np.asarray(direction, dtype=float)
    c = np.asarray(through, dtype=float)
    return np.concatenate([d, np.cross(c, d)])


# --------------------------------------------------------------------------


class Multivector:
    """Immutable element of G(3,0,1) with operator overloads.

    ``*`` is the geometric product, ``^`` the meet, ``&`` the join and
    ``~`` the reverse.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = np.zeros(16) if coeffs is None else np.array(coeffs, dtype=float)
        if c.shape != (16,):
            raise ValueError(f"expected 16 coefficients, got shape {c.shape}")
        c.flags.writeable = False
        self._c = c

    @classmethod
    def blade(cls, name: str, value: float = 1.0) -> "Multivector":
        c = np.zeros(16)
        c[BLADES.index(name)] = value
        return cls(c)

    @classmethod
    def from_point(cls, coords) -> "Multivector":
        return cls(point(coords))

    @classmethod
    def from_line(cls, coords) -> "Multivector":
        return cls(line(coords))

    @classmethod
    def from_plane(cls, coords) -> "Multivector":
        return cls(plane(coords))

    @classmethod
    def from_motor(cls, coords) -> "Multivector":
        return cls(motor(coords))

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, name: str) -> float:
        return float(self._c[BLADES.index(name)])

    def grade(self, k: int) -> "Multivector":
        return Multivector(grade(self._c, k))

    def dual(self) -> "Multivector":
        return Multivector(dual(self._c))

    def __invert__(self) -> "Multivector":
        return Multivector(reverse(self._c))

    @staticmethod
    def _coerce(other):
        if isinstance(other, Multivector):
            return other._c
        return scalar(float(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self._c * other)
        return Multivector(geometric_product(self._c, self._coerce(other)))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self._c * other)
        return Multivector(geometric_product(self._coerce(other), self._c))

    def __xor__(self, other):
        return Multivector(wedge(self._c, self._coerce(other)))

    def __and__(self, other):
        return Multivector(vee(self._c, self._coerce(other)))

    def __add__(self, other):
        return Multivector(self._c + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Multivector(self._c - self._coerce(other))

    def __rsub__(self, other):
        return Multivector(self._coerce(other) - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __truediv__(self, value: float):
        return Multivector(self._c / value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Multivector, int, float)):
            return NotImplemented
        return bool(np.array_equal(self._c, self._coerce(other)))

    def __hash__(self):
        return hash(self._c.tobytes())

    def isclose(self, other, atol: float = GEOMETRY_TOL) -> bool:
        return bool(np.allclose(self._c, self._coerce(other), atol=atol, rtol=0.0))

    def __repr__(self) -> str:
        terms = [f"{v:+.6g}{'' if n == '1' else '*' + n}" for n, v in zip(BLADES, self._c) if v != 0.0]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"
