"""Kinematics of a constrained kinematic tree.

Body motors are *displacements* from the initial configuration: body ``i``
sits at ``M0[i]`` composed with ``D[i]``, and ``D[i] = 1`` at ``q = q0``.
This is the spatial assignment used by the regressor, where every body's
tetrahedral points coincide with the spatial frame at the initial
configuration.

A joint coordinate ``q_k`` about an initial joint line ``A_k`` contributes
``exp((q_k - q0_k)/2 * A_k)``.  Multi-DOF joints are chains of such
one-axis factors, applied in the order documented in :mod:`robot_model`.
Twists are spatial: ``V = 2 ~D dD/dt``, and the current joint line of
coordinate ``k`` is ``L_k = ~D_before A_k D_before``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pga
from .robot_model import JointType, RobotModel
from .tolerances import LOOP_MAX_ITER, LOOP_RESIDUAL_TOL

_BASIS_LINES = pga.line(np.eye(6))


class KinematicsError(RuntimeError):
    pass


class OutOfWorkspace(KinematicsError):
    """Loop-closure equations have no solution near the requested branch."""


class SingularConfiguration(KinematicsError):
    """The passive-coordinate Jacobian ``J_p`` lost column rank."""


# --------------------------------------------------------------------------
# Joint screws


def joint_screws(model: RobotModel) -> list[list[tuple[int, np.ndarray]]]:
    """Initial joint lines per body as ``(coordinate index, line)`` pairs.

    Floating joints yield an empty list; they are handled separately.
    """
    out = []
    for i, t in enumerate(model.type):
        coords = list(model.coordinates(i))
        if t in (JointType.R, JointType.P):
            out.append([(coords[0], model.L0[i])])
            continue
        if t is JointType.F:
            out.append([])
            continue
        frame = pga.motor_to_homogeneous(model.M0[i])
        origin = frame[:3, 3]
        axes = [pga.line(pga.axis_line(frame[:3, a], origin)) for a in range(len(coords))]
        out.append(list(zip(coords, axes)))
    return out


@dataclass(frozen=True)
class TreePass:
    """Result of one recursion over the tree.

    ``lines[i, k]`` is the current joint line of coordinate ``k`` as seen
    from body ``i`` (zero when ``k`` is not an ancestor coordinate).
    ``accels`` excludes nothing: it is the full spatial acceleration for the
    supplied ``qdd``.
    """

    motors: np.ndarray
    lines: np.ndarray
    twists: np.ndarray
    accels: np.ndarray


def tree_pass(model: RobotModel, q, qd=None, qdd=None, screws=None) -> TreePass:
    q = np.asarray(q, dtype=float)
    nq = model.nq
    qd = np.zeros(nq) if qd is None else np.asarray(qd, dtype=float)
    qdd = np.zeros(nq) if qdd is None else np.asarray(qdd, dtype=float)
    screws = joint_screws(model) if screws is None else screws
    n = model.n
    motors = np.zeros((n, 16))
    lines = np.zeros((n, nq, 16))
    twists = np.zeros((n, 16))
    accels = np.zeros((n, 16))
    for i in range(n):
        p = int(model.parent[i])
        if p >= 0:
            d, v, vd = motors[p].copy(), twists[p].copy(), accels[p].copy()
            lines[i] = lines[p]
        else:
            d, v, vd = pga.IDENTITY_MOTOR.copy(), np.zeros(16), np.zeros(16)
        if model.type[i] is JointType.F:
            k = list(model.coordinates(i))
            b = pga.line(q[k] - model.q0[k])
            d = pga.motor_exp(0.5 * b)
            v = pga.line(qd[k])
            vd = pga.line(qdd[k])
            lines[i, k] = _BASIS_LINES
        for k, a in screws[i]:
            lk = pga.sandwich(d, a)
            vd = vd + pga.commutator(lk, v) * qd[k] + lk * qdd[k]
            v = v + lk * qd[k]
            lines[i, k] = lk
            d = pga.geometric_product(pga.motor_exp(0.5 * (q[k] - model.q0[k]) * a), d)
        motors[i] = d
        twists[i] = v
        accels[i] = vd
    return TreePass(motors, lines, twists, accels)


def forward_tree(model: RobotModel, q) -> np.ndarray:
    """Body poses ``M0[i] D[i]`` for tree coordinates ``q``; equal to ``M0`` at ``q0``."""
    d = tree_pass(model, q).motors
    return pga.geometric_product(model.M0, d)


# --------------------------------------------------------------------------
# Loop-closure residuals
#
# Each loop joint frame Ml contributes the frame points x, y, z (infinite)
# and O (Euclidean), attached once to the loop parent and once to the loop
# child.  A residual row is either a coordinate of a difference of such
# points or a dot product of two such differences.

_X, _Y, _Z, _O = range(4)


@dataclass(frozen=True)
class _Tracked:
    pos: np.ndarray   # (3,)
    jac: np.ndarray   # (nq, 3)
    vel: np.ndarray   # (3,)
    acc: np.ndarray   # (3,)


def _track(point0, body: int, tp: TreePass, with_rates: bool) -> _Tracked:
    nq = tp.lines.shape[1]
    if body < 0:
        c = pga.point_coords(point0)[:3]
        z = np.zeros(3)
        return _Tracked(c, np.zeros((nq, 3)), z, z)
    p = pga.sandwich(tp.motors[body], point0)
    jac = pga.point_coords(pga.commutator(p[None, :], tp.lines[body]))[:, :3]
    vel = acc = np.zeros(3)
    if with_rates:
        pd = pga.commutator(p, tp.twists[body])
        pdd = pga.commutator(p, tp.accels[body]) + pga.commutator(pd, tp.twists[body])
        vel = pga.point_coords(pd)[:3]
        acc = pga.point_coords(pdd)[:3]
    return _Tracked(pga.point_coords(p)[:3], jac, vel, acc)


def _diff(a: _Tracked, b: _Tracked) -> _Tracked:
    return _Tracked(a.pos - b.pos, a.jac - b.jac, a.vel - b.vel, a.acc - b.acc)


def _rows_diff(u: _Tracked):
    return u.pos, u.jac.T, u.acc


def _rows_dot(u: _Tracked, w: _Tracked):
    val = np.array([u.pos @ w.pos])
    jac = (u.jac @ w.pos + w.jac @ u.pos)[None, :]
    acc = np.array([u.acc @ w.pos + 2.0 * u.vel @ w.vel + u.pos @ w.acc])
    return val, jac, acc


def loop_residual_rows(model: RobotModel, tp: TreePass, with_rates: bool = False):
    """Stack ``C(q)``, ``dC/dq`` (over all tree coordinates) and ``d2C/dt2``.

    ``d2C/dt2`` is only meaningful when ``tp`` carries twists and
    accelerations; it is the constraint acceleration for those rates.
    """
    vals, jacs, accs = [], [], []
    for l in range(model.nl):
        frame_points = pga.sandwich(model.Ml[l], pga.FRAME_POINTS)
        lp, lc = int(model.lparent[l]), int(model.lchild[l])

        def pair(idx):
            return (_track(frame_points[idx], lp, tp, with_rates),
                    _track(frame_points[idx], lc, tp, with_rates))

        t = model.ltype[l]
        rows = []
        if t in (JointType.S, JointType.U, JointType.R):
            op, oc = pair(_O)
            rows.append(_rows_diff(_diff(op, oc)))
        if t is JointType.R:
            zp, zc = pair(_Z)
            rows.append(_rows_diff(_diff(zp, zc)))
        elif t is JointType.U:
            xp, _ = pair(_X)
            _, yc = pair(_Y)
            rows.append(_rows_dot(xp, yc))
        elif t is JointType.P:
            xp, xc = pair(_X)
            yp, yc = pair(_Y)
            op, oc = pair(_O)
            rows.append(_rows_diff(_diff(xp, xc)))
            rows.append(_rows_diff(_diff(yp, yc)))
            offset = _diff(oc, op)
            rows.append(_rows_dot(offset, xp))
            rows.append(_rows_dot(offset, yp))
        for v, j, a in rows:
            vals.append(v)
            jacs.append(j)
            accs.append(a)
    if not vals:
        nq = model.nq
        return np.zeros(0), np.zeros((0, nq)), np.zeros(0)
    return np.concatenate(vals), np.vstack(jacs), np.concatenate(accs)


@dataclass(frozen=True)
class LoopResidual:
    residual: np.ndarray
    J_a: np.ndarray
    J_p: np.ndarray


def loop_residual(model: RobotModel, q) -> LoopResidual:
    tp = tree_pass(model, q)
    c, j, _ = loop_residual_rows(model, tp)
    return LoopResidual(c, j[:, model.actuated], j[:, model.passive])


def condition_number(j_p: np.ndarray) -> float:
    if j_p.shape[1] == 0:
        return 1.0
    s = np.linalg.svd(j_p, compute_uv=False)
    if s[-1] == 0.0 or len(s) < j_p.shape[1]:
        return float("inf")
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class LoopSolution:
    q: np.ndarray
    converged: bool
    residual_norm: float
    iterations: int


def _newton(model, q, screws, max_iter):
    passive = model.passive
    c = loop_residual_rows(model, tree_pass(model, q, screws=screws))[0]
    norm = np.max(np.abs(c), initial=0.0)
    it = 0
    while norm >= LOOP_RESIDUAL_TOL and it < max_iter:
        it += 1
        tp = tree_pass(model, q, screws=screws)
        c, j, _ = loop_residual_rows(model, tp)
        step = np.linalg.lstsq(j[:, passive], -c, rcond=None)[0]
        alpha = 1.0
        for _ in range(30):
            trial = q.copy()
            trial[passive] += alpha * step
            c_new = loop_residual_rows(model, tree_pass(model, trial, screws=screws))[0]
            new_norm = np.max(np.abs(c_new))
            if new_norm < norm or alpha < 1e-6:
                break
            alpha *= 0.5
        q, norm = trial, new_norm
        if not np.isfinite(norm):
            break
    return q, norm, it


def _polish(model, q, screws, norm):
    """One extra Newton step once converged; kept only if it lowers the residual.

    Quadratic convergence takes a residual just under the tolerance down to
    round-off, which the finite-difference and regressor checks rely on.
    """
    passive = model.passive
    c, j, _ = loop_residual_rows(model, tree_pass(model, q, screws=screws))
    trial = q.copy()
    trial[passive] -= np.linalg.lstsq(j[:, passive], c, rcond=None)[0]
    new_norm = np.max(np.abs(loop_residual_rows(model, tree_pass(model, trial, screws=screws))[0]))
    return (trial, new_norm) if new_norm < norm else (q, norm)


def loop_solve(model: RobotModel, q_a, q_p_guess=None, max_iter: int = LOOP_MAX_ITER,
               continuation: bool = True) -> LoopSolution:
    """Solve ``C(q) = 0`` for the passive coordinates.

    Newton iterations use least squares on ``J_p`` (loop equations of
    overconstrained mechanisms are redundant) with step halving whenever
    the residual does not decrease.  Convergence means ``max|C| < 1e-10``
    within ``max_iter`` iterations.

    With ``continuation`` the actuated coordinates are moved from the
    initial configuration in steps of at most 0.1, re-solving at each step;
    this keeps the solution on the assembly branch of ``q0``.
    """
    q_a = np.asarray(q_a, dtype=float)
    screws = joint_screws(model)
    if model.nl == 0:
        q = model.q0.copy()
        q[model.actuated] = q_a
        return LoopSolution(q, True, 0.0, 0)

    if q_p_guess is not None or not continuation:
        q = model.q0.copy()
        q[model.actuated] = q_a
        if q_p_guess is not None:
            q[model.passive] = q_p_guess
        q, norm, it = _newton(model, q, screws, max_iter)
        if norm < LOOP_RESIDUAL_TOL:
            q, norm = _polish(model, q, screws, norm)
        return LoopSolution(q, bool(norm < LOOP_RESIDUAL_TOL), float(norm), it)

    start = model.q0[model.actuated]
    steps = max(1, int(np.ceil(np.max(np.abs(q_a - start), initial=0.0) / 0.1)))
    q = model.q0.copy()
    total = 0
    norm = 0.0
    for s in range(1, steps + 1):
        q[model.actuated] = start + (q_a - start) * s / steps
        q, norm, it = _newton(model, q, screws, max_iter)
        total += it
        if norm >= LOOP_RESIDUAL_TOL:
            return LoopSolution(q, False, float(norm), total)
    q, norm = _polish(model, q, screws, norm)
    return LoopSolution(q, True, float(norm), total)


# --------------------------------------------------------------------------
# Body states


@dataclass(frozen=True)
class BodyState:
    motor: np.ndarray
    twist: np.ndarray
    twist_rate: np.ndarray
    jacobian: np.ndarray


@dataclass(frozen=True)
class MechanismState:
    """Kinematic state of every body for one sample.

    ``motors`` are displacements ``D[i]`` (identity at ``q0``); ``jacobian``
    has shape ``(n, N_A, 16)`` and holds the lines ``L^i_j`` with respect to
    the actuated coordinates, so ``twists[i] = jacobian[i].T @ qd_a``.
    """

    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    motors: np.ndarray
    twists: np.ndarray
    accels: np.ndarray
    jacobian: np.ndarray
    cond_jp: float

    def body(self, i: int) -> BodyState:
        return BodyState(self.motors[i], self.twists[i], self.accels[i], self.jacobian[i])

    def __len__(self):
        return len(self.motors)


def passive_sensitivity(j_a: np.ndarray, j_p: np.ndarray) -> np.ndarray:
    """``dq_p/dq_a = -J_p^+ J_a``; raises if ``J_p`` is rank deficient."""
    if j_p.shape[1] == 0:
        return np.zeros((0, j_a.shape[1]))
    cond = condition_number(j_p)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularConfiguration(f"passive Jacobian is singular (condition number {cond:.3e})")
    return -np.linalg.lstsq(j_p, j_a, rcond=None)[0]


def jacobian_lines(model: RobotModel, tp: TreePass, sensitivity: np.ndarray) -> np.ndarray:
    """Lines ``L^i_j`` w.r.t. actuated coordinates: ``L_a + L_p dq_p/dq_a``."""
    la = tp.lines[:, model.actuated, :]
    lp = tp.lines[:, model.passive, :]
    return la + np.einsum("npk,pa->nak", lp, sensitivity)


def body_states(model: RobotModel, q_a, qd_a, qdd_a, q_p_guess=None) -> MechanismState:
    """Assemble ``(D, V, dV/dt, L^i_j)`` for every body.

    Passive rates follow from differentiating ``C(q) = 0`` once and twice:
    ``qd_p = -J_p^+ J_a qd_a`` and ``qdd_p = -J_p^+ c0`` where ``c0`` is the
    constraint acceleration evaluated with ``qdd_p = 0``.
    """
    q_a = np.asarray(q_a, dtype=float)
    qd_a = np.asarray(qd_a, dtype=float)
    qdd_a = np.asarray(qdd_a, dtype=float)
    na = model.n_actuated
    for name, arr in (("q_a", q_a), ("qd_a", qd_a), ("qdd_a", qdd_a)):
        if arr.shape != (na,):
            raise ValueError(f"{name} must have {na} entries, got shape {arr.shape}")
    sol = loop_solve(model, q_a, q_p_guess)
    if not sol.converged:
        raise OutOfWorkspace(f"loop closure did not converge (max|C| = {sol.residual_norm:.3e})")
    q = sol.q
    screws = joint_screws(model)
    act, pas = model.actuated, model.passive

    tp = tree_pass(model, q, screws=screws)
    _, j, _ = loop_residual_rows(model, tp)
    j_a, j_p = j[:, act], j[:, pas]
    cond = condition_number(j_p)
    sens = passive_sensitivity(j_a, j_p)

    qd = np.zeros(model.nq)
    qd[act] = qd_a
    qd[pas] = sens @ qd_a
    qdd = np.zeros(model.nq)
    qdd[act] = qdd_a
    tp0 = tree_pass(model, q, qd, qdd, screws=screws)
    _, _, c0 = loop_residual_rows(model, tp0, with_rates=True)
    if len(pas):
        qdd[pas] = -np.linalg.lstsq(j_p, c0, rcond=None)[0]
    accels = tp0.accels + np.einsum("npk,p->nk", tp0.lines[:, pas, :], qdd[pas])
    jac = jacobian_lines(model, tp0, sens)
    return MechanismState(q, qd, qdd, tp0.motors, tp0.twists, accels, jac, cond)
