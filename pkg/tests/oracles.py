"""Independent reference implementations used by the test-suite.

Nothing here calls the package's dynamics or nullspace code.  The oracles
are classical: 3x3 rotation matrices, the 6x6 spatial inertia, textbook
recursive Newton-Euler on Denavit-Hartenberg frames, finite differences
and SVD nullspaces.
"""

from __future__ import annotations

import numpy as np

from pgabase import pga
from pgabase.robot_model import model_from_dict


def skew(a):
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def random_rotation(rng):
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_rigid(rng, scale=1.0):
    t = np.eye(4)
    t[:3, :3] = random_rotation(rng)
    t[:3, 3] = rng.normal(size=3) * scale
    return t


def random_body(rng):
    """Mass, centre of mass and a positive definite inertia about the COM."""
    m = rng.uniform(0.2, 5.0)
    c = rng.normal(size=3) * 0.3
    a = rng.normal(size=(3, 3)) * 0.2
    principal = np.sort(rng.uniform(0.01, 0.5, 3))
    # Triangle inequality on principal moments keeps the body physical.
    principal[2] = min(principal[2], principal[0] + principal[1] - 1e-3)
    r = np.linalg.qr(a)[0]
    return m, c, r @ np.diag(principal) @ r.T


def spatial_inertia(m, c, i_com):
    """6x6 spatial inertia about the origin, ordering (angular; linear)."""
    cx = skew(c)
    return np.block([[i_com + m * cx @ cx.T, m * cx], [m * cx.T, m * np.eye(3)]])


def newton_euler_wrench(m, c, i_com, omega, v, alpha, a):
    """Classical spatial wrench ``I a + v x* I v`` returned as (force, moment at origin).

    ``(omega, v)`` is the spatial twist and ``(alpha, a)`` its derivative
    plus the gravity term.  The body quantities are already in the spatial
    frame.
    """
    inertia = spatial_inertia(m, c, i_com)
    twist = np.concatenate([omega, v])
    cross_star = np.block([[skew(omega), skew(v)], [np.zeros((3, 3)), skew(omega)]])
    f = inertia @ np.concatenate([alpha, a]) + cross_star @ inertia @ twist
    return f[3:], f[:3]


# --------------------------------------------------------------------------
# Puma 560 by textbook recursive Newton-Euler


PUMA_A = (0.0, 0.4318, 0.0203, 0.0, 0.0, 0.0)
PUMA_D = (0.0, 0.0, 0.15005, 0.4318, 0.0, 0.0)
PUMA_ALPHA = (np.pi / 2, 0.0, -np.pi / 2, np.pi / 2, -np.pi / 2, 0.0)


def dh(theta, d, a, alpha):
    ct, st, ca, sa = np.cos(theta), np.sin(theta), np.cos(alpha), np.sin(alpha)
    return np.array([[ct, -st * ca, st * sa, a * ct],
                     [st, ct * ca, -ct * sa, a * st],
                     [0, sa, ca, d],
                     [0, 0, 0, 1.0]])


def puma_link_transforms(q):
    return [dh(q[i], PUMA_D[i], PUMA_A[i], PUMA_ALPHA[i]) for i in range(6)]


def puma_frames(q):
    out, t = [], np.eye(4)
    for a in puma_link_transforms(q):
        t = t @ a
        out.append(t)
    return out


def puma_rnea(q, qd, qdd, bodies, gravity=(0.0, 0.0, -9.81)):
    """Joint torques; ``bodies`` holds (m, com, I_com) in the link's own DH frame."""
    z = np.array([0.0, 0.0, 1.0])
    links = puma_link_transforms(q)
    w = np.zeros(3)
    wd = np.zeros(3)
    vd = -np.asarray(gravity, dtype=float)
    forces, moments, rots, pstars = [], [], [], []
    for i in range(6):
        r = links[i][:3, :3]
        pstar = r.T @ links[i][:3, 3]
        wd = r.T @ (wd + z * qdd[i] + np.cross(w, z * qd[i]))
        w = r.T @ (w + z * qd[i])
        vd = np.cross(wd, pstar) + np.cross(w, np.cross(w, pstar)) + r.T @ vd
        m, c, i_c = bodies[i]
        vc = np.cross(wd, c) + np.cross(w, np.cross(w, c)) + vd
        forces.append(m * vc)
        moments.append(i_c @ wd + np.cross(w, i_c @ w))
        rots.append(r)
        pstars.append(pstar)
    # Backward pass: (f, n) is the wrench link i receives from link i-1,
    # in frame i, with the moment taken about the origin of frame i-1
    # (the point on joint axis i).
    tau = np.zeros(6)
    f = np.zeros(3)
    n = np.zeros(3)
    for i in reversed(range(6)):
        _, c, _ = bodies[i]
        if i < 5:
            f = rots[i + 1] @ f
            n = rots[i + 1] @ n
        n = n + np.cross(pstars[i], f) + np.cross(pstars[i] + c, forces[i]) + moments[i]
        f = f + forces[i]
        tau[i] = n @ (rots[i].T @ z)
    return tau


def pseudo_inertia_world(m, c, i_com, frame):
    """4x4 pseudo-inertia of a body given in ``frame`` coordinates, mapped to the world."""
    sigma = m * np.outer(c, c) + 0.5 * np.trace(i_com) * np.eye(3) - i_com
    n = np.empty((4, 4))
    n[:3, :3] = sigma
    n[:3, 3] = n[3, :3] = m * c
    n[3, 3] = m
    return frame @ n @ frame.T


# --------------------------------------------------------------------------
# Synthetic models


def _motor8(t):
    return pga.motor_coords(pga.normalize_motor(pga.motor_from_homogeneous(t))).tolist()


def frame_from_axis(origin, z, x_hint=None):
    z = np.asarray(z, dtype=float)
    z = z / np.linalg.norm(z)
    if x_hint is None:
        x_hint = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = np.asarray(x_hint, dtype=float) - z * (z @ x_hint)
    x /= np.linalg.norm(x)
    t = np.eye(4)
    t[:3, 0], t[:3, 1], t[:3, 2], t[:3, 3] = x, np.cross(z, x), z, origin
    return t


def joint_line6(joint_type, t):
    z, o = t[:3, 2], t[:3, 3]
    if joint_type == "R":
        return np.concatenate([z, np.cross(o, z)]).tolist()
    if joint_type == "P":
        return np.concatenate([np.zeros(3), z]).tolist()
    return [0.0] * 6


def model_doc(types, parents, frames, gravity=(0, 0, 9.81), actuated=None, q0=None, loops=(),
              inertia=None, name="synthetic"):
    """Robot description dict from 4x4 frames.  ``parents`` are 1-based (0 = base).

    ``loops`` holds (type, loop parent, loop child, 4x4 frame) tuples.
    """
    dof = {"R": 1, "P": 1, "U": 2, "S": 3, "F": 6}
    nq = sum(dof[t] for t in types)
    doc = {
        "name": name,
        "type": list(types),
        "parent": list(parents),
        "M0": [_motor8(t) for t in frames],
        "L0": [joint_line6(jt, t) for jt, t in zip(types, frames)],
        "q0": list(q0) if q0 is not None else [0.0] * nq,
        "actuated": list(actuated) if actuated is not None else list(range(1, nq + 1)),
        "g": [0.0, 0.0, 0.0, *gravity],
    }
    if loops:
        doc["ltype"] = [lt for lt, _, _, _ in loops]
        doc["lparent"] = [lp for _, lp, _, _ in loops]
        doc["lchild"] = [lc for _, _, lc, _ in loops]
        doc["Ml"] = [_motor8(t) for _, _, _, t in loops]
    if inertia is not None:
        doc["inertia"] = [list(map(float, th)) for th in inertia]
    return doc


def random_serial_chain(n, rng, types="RP", gravity=(0, 0, 9.81)):
    """Serial chain with random joint axes and origins."""
    jts = [types[k] for k in rng.integers(0, len(types), n)]
    frames = [frame_from_axis(rng.normal(size=3), rng.normal(size=3)) for _ in range(n)]
    return model_from_dict(model_doc(jts, list(range(n)), frames, gravity), "chain")


def four_bar(a=1.0, b=1.0, c=1.0, d=2.5, theta0=0.0):
    """Planar four-bar: crank a at the origin, coupler b, rocker c pivoted at (d, 0, 0).

    Returns the model and the closed-form solver ``theta -> (coupler, rocker)``
    absolute angles on the upper assembly branch.
    """

    def closed_form(theta):
        pa = np.array([a * np.cos(theta), a * np.sin(theta)])
        pd = np.array([d, 0.0])
        dist = np.linalg.norm(pd - pa)
        if dist > b + c or dist < abs(b - c):
            return None
        # Circle intersection, upper branch.
        along = (b * b - c * c + dist * dist) / (2 * dist)
        h = np.sqrt(max(b * b - along * along, 0.0))
        u = (pd - pa) / dist
        pb = pa + along * u + h * np.array([-u[1], u[0]])
        return (np.arctan2(*(pb - pa)[::-1]), np.arctan2(*(pb - pd)[::-1]), pb)

    phi0, psi0, pb0 = closed_form(theta0)
    ez = np.array([0.0, 0.0, 1.0])
    frames = [
        frame_from_axis([0, 0, 0], ez),
        frame_from_axis([a * np.cos(theta0), a * np.sin(theta0), 0], ez),
        frame_from_axis([d, 0, 0], ez),
    ]
    loop = ("R", 2, 3, frame_from_axis([pb0[0], pb0[1], 0.0], ez))
    # Absolute angles as coordinates: joint 2 measures the coupler relative to the crank.
    q0 = [theta0, phi0 - theta0, psi0]
    doc = model_doc("RRR", [0, 1, 0], frames, actuated=[1], q0=q0, loops=[loop], name="four-bar")
    return model_from_dict(doc, "four-bar"), closed_form


# --------------------------------------------------------------------------
# Linear algebra


def svd_nullspace(a, rel_tol=1e-9):
    """Orthonormal basis of the right nullspace of ``a``."""
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > rel_tol * s[0])) if s.size else 0
    return vt[rank:].T


def subspace_distance(a, b):
    """Largest principal-angle sine between two column spaces of equal dimension."""
    qa = np.linalg.qr(a)[0]
    qb = np.linalg.qr(b)[0]
    return float(np.linalg.norm(qb - qa @ (qa.T @ qb), 2))
