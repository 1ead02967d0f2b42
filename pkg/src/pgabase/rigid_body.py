"""Tetrahedral-point (TP) model of a rigid body.

A body is described by four points: three infinite points (its x, y, z
directions) and its Euclidean origin.  Writing every mass element in that
basis turns the Newton-Euler wrench into

    w = sum_mn N[m, n] (E_m v Edd_n)

where ``N`` is the 4x4 pseudo-inertia.  The wrench is linear in ``N``, and
each regressor entry is the scalar ``L ^ (E_m v Edd_n)`` for a Jacobian line
``L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pga
from .tolerances import SYMMETRY_TOL

# Row/column pairs picked out by hat, in output order.
HAT_INDEX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2), (0, 3), (1, 3), (2, 3), (3, 3))
PARAMETER_NAMES = ("MXX", "MXY", "MXZ", "MYY", "MYZ", "MZZ", "MX", "MY", "MZ", "M")

_ROWS = np.array([i for i, _ in HAT_INDEX])
_COLS = np.array([j for _, j in HAT_INDEX])
_OFF_DIAGONAL = _ROWS != _COLS


@dataclass(frozen=True)
class TetrahedralPoints:
    """Positions, velocities and accelerations of a body's four TPs.

    Each field is a ``(4, 16)`` array of trivectors ordered (x, y, z, O).
    Velocities and accelerations are ``None`` for a purely geometric frame.
    """

    positions: np.ndarray
    velocities: np.ndarray | None = None
    accelerations: np.ndarray | None = None

    @property
    def homogeneous(self) -> np.ndarray:
        """4x4 matrix whose columns are the homogeneous point coordinates."""
        return pga.point_coords(self.positions).T


def tp_initial(t0) -> TetrahedralPoints:
    """TPs of a body frame given as a rigid transform.

    The rotation columns become the infinite points and the translation
    column the Euclidean origin.
    """
    t0 = pga.check_rigid(t0)
    return TetrahedralPoints(positions=pga.point(t0.T))


def point_kinematics(p0, m, v, vdot, g=None):
    """Position, velocity and acceleration of a body-fixed point.

    ``P = ~M P0 M``, ``Pd = P x V`` and ``Pdd = P x (Vd + G) + Pd x V``, with
    gravity entering as the extra acceleration bivector ``G``.
    """
    p = pga.sandwich(m, p0)
    acc_twist = vdot if g is None else np.asarray(vdot) + np.asarray(g)
    pd = pga.commutator(p, v)
    pdd = pga.commutator(p, acc_twist) + pga.commutator(pd, v)
    return p, pd, pdd


def tp_motion(m, v, vdot, g=None, frame=pga.FRAME_POINTS) -> TetrahedralPoints:
    """Move the TPs ``frame`` by motor ``m`` and attach their rates."""
    p, pd, pdd = point_kinematics(np.asarray(frame), np.asarray(m)[None, :],
                                  np.asarray(v)[None, :], np.asarray(vdot)[None, :],
                                  None if g is None else np.asarray(g)[None, :])
    return TetrahedralPoints(p, pd, pdd)


# --------------------------------------------------------------------------
# Pseudo-inertia


class InertiaError(ValueError):
    pass


def pseudo_inertia_from_classical(mass: float, com, inertia) -> np.ndarray:
    """Pseudo-inertia ``[[Sigma, m c], [m c^T, m]]``.

    ``inertia`` is the 3x3 rotational inertia about the frame origin, so the
    second moment is ``Sigma = tr(J)/2 * I - J``.
    """
    if mass <= 0:
        raise InertiaError(f"mass must be positive, got {mass}")
    j = np.asarray(inertia, dtype=float)
    if not np.allclose(j, j.T, atol=SYMMETRY_TOL, rtol=0.0):
        raise InertiaError("rotational inertia must be symmetric")
    c = np.asarray(com, dtype=float)
    n = np.empty((4, 4))
    n[:3, :3] = 0.5 * np.trace(j) * np.eye(3) - j
    n[:3, 3] = n[3, :3] = mass * c
    n[3, 3] = mass
    return n


def classical_from_pseudo_inertia(n) -> tuple[float, np.ndarray, np.ndarray]:
    """Inverse of :func:`pseudo_inertia_from_classical`: (m, c, J about origin)."""
    n = check_symmetric(n)
    m = n[3, 3]
    sigma = n[:3, :3]
    return m, n[:3, 3] / m, np.trace(sigma) * np.eye(3) - sigma


def is_physically_feasible(n) -> bool:
    """Positive definiteness of the pseudo-inertia (all leading minors > 0)."""
    n = check_symmetric(n)
    return all(np.linalg.det(n[:k, :k]) > 0 for k in range(1, 5))


def check_symmetric(n, tol: float = SYMMETRY_TOL) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape[-2:] != (4, 4):
        raise InertiaError(f"pseudo-inertia must be 4x4, got {n.shape}")
    if np.max(np.abs(n - np.swapaxes(n, -1, -2)), initial=0.0) > tol:
        raise InertiaError("pseudo-inertia is not symmetric")
    return n


def hat(n) -> np.ndarray:
    """Symmetric 4x4 -> R^10 in the (N11, N12, N13, N22, N23, N33, N14, N24, N34, N44) order."""
    n = check_symmetric(n)
    return n[..., _ROWS, _COLS]


def unhat(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != 10:
        raise InertiaError(f"inertia vector must have 10 entries, got {theta.shape[-1]}")
    n = np.zeros(theta.shape[:-1] + (4, 4))
    n[..., _ROWS, _COLS] = theta
    n[..., _COLS, _ROWS] = theta
    return n


def bar(r) -> np.ndarray:
    """4x4 -> R^10 folding off-diagonal pairs, so that ``bar(R) . hat(N) = tr(R^T N)``."""
    r = np.asarray(r, dtype=float)
    out = r[..., _ROWS, _COLS].copy()
    out[..., _OFF_DIAGONAL] += r[..., _COLS[_OFF_DIAGONAL], _ROWS[_OFF_DIAGONAL]]
    return out


def sym_outer(a, b) -> np.ndarray:
    """``a b^T + b a^T``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.outer(a, b) + np.outer(b, a)


# --------------------------------------------------------------------------
# Dynamics


def join_matrix(points, accelerations) -> np.ndarray:
    """``(4, 4, 16)`` array of ``E_m v Edd_n``."""
    points = np.asarray(points)
    accelerations = np.asarray(accelerations)
    return pga.vee(points[:, None, :], accelerations[None, :, :])


def tp_wrench(n, tp: TetrahedralPoints) -> np.ndarray:
    """Wrench bivector ``sum_mn N_mn (E_m v Edd_n)`` of a moving body."""
    if tp.accelerations is None:
        raise ValueError("tetrahedral points carry no accelerations")
    n = check_symmetric(n)
    return np.einsum("mn,mnk->k", n, join_matrix(tp.positions, tp.accelerations))


def regressor_coeff(line, em, edd_n) -> np.ndarray:
    """Dynamics regressor coefficient ``L ^ (E_m v Edd_n)`` (the e0123 part)."""
    return pga.pairing(line, pga.vee(em, edd_n))


# --------------------------------------------------------------------------
# Adapter between bivector coordinates and classical 6-vectors.
#
#   twist  (e23, e31, e12 | e01, e02, e03) = (omega | v at origin)
#   wrench (e23, e31, e12 | e01, e02, e03) = (force | moment about origin)
#
# The power w ^ V equals f.v + n.omega with these slots.


def twist_from_vectors(omega, v) -> np.ndarray:
    return pga.line(np.concatenate([np.asarray(omega, float), np.asarray(v, float)]))


def twist_to_vectors(twist) -> tuple[np.ndarray, np.ndarray]:
    c = pga.line_coords(twist)
    return c[..., :3], c[..., 3:]


def wrench_from_vectors(force, moment) -> np.ndarray:
    return pga.line(np.concatenate([np.asarray(force, float), np.asarray(moment, float)]))


def wrench_to_vectors(wrench) -> tuple[np.ndarray, np.ndarray]:
    c = pga.line_coords(wrench)
    return c[..., :3], c[..., 3:]
