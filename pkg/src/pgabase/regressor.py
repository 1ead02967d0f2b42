"""Dynamics regressor ``Y`` from body states, and its stacked form.

Under the spatial assignment every body's tetrahedral points are the
spatial frame points at the initial configuration.  For body ``i`` with
displacement ``D`` the points move to ``E = ~D I4 D`` and

    R[j, m, n] = L^i_j ^ (E_m v Edd_n),        Y[:, 10 i : 10 i + 10] = bar(R)

so that ``Y @ theta`` is the vector of actuated generalized forces for the
stacked inertia vector ``theta = [hat(N_1); ...; hat(N_n)]``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pga
from .kinematics import KinematicsError, MechanismState, OutOfWorkspace, body_states
from .rigid_body import TetrahedralPoints, bar, join_matrix, tp_wrench, unhat
from .robot_model import RobotModel
from .tolerances import DEFAULT_COND_GATE


def dr(model: RobotModel, state: MechanismState, g=None) -> np.ndarray:
    """Regressor ``Y`` of shape ``(N_A, 10 n)`` for one sample."""
    g = model.g if g is None else np.asarray(g, dtype=float)
    if g.shape == (6,):
        g = pga.line(g)
    n = model.n
    y = np.zeros((model.n_actuated, 10 * n))
    frame = pga.FRAME_POINTS
    for i in range(n):
        e = pga.sandwich(state.motors[i], frame)
        ed = pga.commutator(e, state.twists[i])
        edd = pga.commutator(e, state.accels[i] + g) + pga.commutator(ed, state.twists[i])
        joins = join_matrix(e, edd)                                    # (4, 4, 16)
        r = pga.pairing(state.jacobian[i][:, None, None, :], joins)   # (N_A, 4, 4)
        y[:, 10 * i:10 * i + 10] = bar(r)
    return y


def generalized_forces(model: RobotModel, state: MechanismState, theta, g=None) -> np.ndarray:
    """``Y @ theta`` evaluated body by body through the TP wrench (a cross-check of :func:`dr`)."""
    g = model.g if g is None else np.asarray(g, dtype=float)
    if g.shape == (6,):
        g = pga.line(g)
    theta = np.asarray(theta, dtype=float).reshape(model.n, 10)
    tau = np.zeros(model.n_actuated)
    for i in range(model.n):
        e = pga.sandwich(state.motors[i], pga.FRAME_POINTS)
        ed = pga.commutator(e, state.twists[i])
        edd = pga.commutator(e, state.accels[i] + g) + pga.commutator(ed, state.twists[i])
        w = tp_wrench(unhat(theta[i]), TetrahedralPoints(e, ed, edd))
        tau += pga.pairing(state.jacobian[i], w)
    return tau


# --------------------------------------------------------------------------
# Sampling and stacking


@dataclass(frozen=True)
class Sample:
    q_a: np.ndarray
    qd_a: np.ndarray
    qdd_a: np.ndarray


def sampling_box(model: RobotModel, q_ranges=None) -> tuple[np.ndarray, np.ndarray]:
    """Sampling box for ``q_a``: explicit ranges, then the model's box, then (0, 1)."""
    na = model.n_actuated
    if q_ranges is not None:
        q_ranges = np.asarray(q_ranges, dtype=float)
        if q_ranges.shape != (na, 2):
            raise ValueError(f"expected {na} (low, high) ranges, got shape {q_ranges.shape}")
        return q_ranges[:, 0].copy(), q_ranges[:, 1].copy()
    if model.q_a_low is not None:
        return model.q_a_low.copy(), model.q_a_high.copy()
    return np.zeros(na), np.ones(na)


def draw_samples(model: RobotModel, count: int, rng: np.random.Generator, q_ranges=None) -> list[Sample]:
    """Uniform samples: ``q_a`` in the sampling box, rates and accelerations in (0, 1)."""
    if count <= 0:
        raise ValueError("sample count must be positive")
    lo, hi = sampling_box(model, q_ranges)
    na = model.n_actuated
    out = []
    for _ in range(count):
        q = rng.uniform(lo, hi)
        qd = rng.uniform(0.0, 1.0, na)
        qdd = rng.uniform(0.0, 1.0, na)
        out.append(Sample(q, qd, qdd))
    return out


class NoValidSamples(RuntimeError):
    pass


@dataclass(frozen=True)
class StackedRegressor:
    Y: np.ndarray
    accepted: int
    rejected_workspace: int
    rejected_condition: int
    rejected_singular: int
    conditions: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.accepted + self.rejected_workspace + self.rejected_condition + self.rejected_singular

    def summary(self) -> dict:
        return {
            "samples": self.total,
            "accepted": self.accepted,
            "rejected_out_of_workspace": self.rejected_workspace,
            "rejected_condition": self.rejected_condition,
            "rejected_singular": self.rejected_singular,
            "rows": int(self.Y.shape[0]),
            "cols": int(self.Y.shape[1]),
        }


def stack(model: RobotModel, samples, g=None, cond_gate: float = DEFAULT_COND_GATE,
          max_accepted: int | None = None) -> StackedRegressor:
    """Concatenate per-sample regressors for the samples that pass the gates.

    A sample is rejected when loop closure fails (out of workspace), when
    ``J_p`` is singular, or when ``cond(J_p) >= cond_gate``.  Open trees
    have no ``J_p`` and are never gated.  ``max_accepted`` stops after that
    many accepted samples.
    """
    blocks = []
    workspace = condition = singular = 0
    conds = []
    for s in samples:
        try:
            state = body_states(model, s.q_a, s.qd_a, s.qdd_a)
        except OutOfWorkspace:
            workspace += 1
            continue
        except KinematicsError:
            singular += 1
            continue
        if model.nl and not state.cond_jp < cond_gate:
            condition += 1
            continue
        conds.append(state.cond_jp)
        blocks.append(dr(model, state, g))
        if max_accepted is not None and len(blocks) >= max_accepted:
            break
    if not blocks:
        raise NoValidSamples(
            f"no valid samples: {workspace} out of workspace, {condition} above condition gate "
            f"{cond_gate:g}, {singular} singular")
    return StackedRegressor(np.vstack(blocks), len(blocks), workspace, condition, singular, conds)


# --------------------------------------------------------------------------
# Export
#
# Binary layout (little endian): uint64 rows, uint64 cols, then rows*cols
# float64 values in row-major order.

_HEADER = struct.Struct("<QQ")


def export_csv(path, matrix, header=None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def export_binary(path, matrix) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(*matrix.shape))
        fh.write(np.ascontiguousarray(matrix).tobytes(order="C"))


def read_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    rows, cols = _HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * cols:
        raise ValueError(f"{path}: header declares {rows}x{cols} but holds {body.size} values")
    return body.reshape(rows, cols).copy()
