"""Builders for the bundled demo robots.

The JSON files under ``robots/`` are produced by :func:`build_demos`; the
geometry of each robot is spelled out here so the files can be regenerated
and audited.  Link inertias are slender-rod approximations that only serve
to make the demos physically plausible; the nullspace analysis never reads
them.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from . import pga
from .rigid_body import hat
from .robot_model import JointType, RobotModel, dump, load

G_DOWN = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 9.81])
DEMO_NAMES = ("puma560", "go2", "2rru1rrs", "2prs1psr")


def demo_path(name: str) -> Path:
    if name not in DEMO_NAMES:
        raise KeyError(f"unknown demo robot {name!r}; choose from {', '.join(DEMO_NAMES)}")
    return Path(str(resources.files("pgabase") / "robots" / f"{name}.json"))


def load_demo(name: str) -> RobotModel:
    return load(demo_path(name))


# --------------------------------------------------------------------------
# Geometry helpers


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def frame(origin, z, x) -> np.ndarray:
    """Motor of a right-handed frame at ``origin`` with the given z and (projected) x axes."""
    z = _unit(z)
    x = np.asarray(x, dtype=float)
    x = _unit(x - z * (x @ z))
    y = np.cross(z, x)
    t = np.eye(4)
    t[:3, 0], t[:3, 1], t[:3, 2], t[:3, 3] = x, y, z, origin
    return pga.normalize_motor(pga.motor_from_homogeneous(t))


def joint_line(joint_type: JointType, motor) -> np.ndarray:
    t = pga.motor_to_homogeneous(motor)
    if joint_type is JointType.R:
        return pga.line(pga.axis_line(t[:3, 2], t[:3, 3]))
    if joint_type is JointType.P:
        return pga.line(np.concatenate([np.zeros(3), t[:3, 2]]))
    return np.zeros(16)


def rod_inertia(start, end, mass: float, radius: float = 0.02) -> np.ndarray:
    """``hat`` of the pseudo-inertia of a uniform rod from ``start`` to ``end``."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    c = 0.5 * (start + end)
    axis = end - start
    length = np.linalg.norm(axis)
    u = axis / length if length > 0 else np.array([0.0, 0.0, 1.0])
    sigma = mass * (np.outer(c, c) + length**2 / 12.0 * np.outer(u, u)
                    + radius**2 / 4.0 * (np.eye(3) - np.outer(u, u)))
    n = np.empty((4, 4))
    n[:3, :3] = sigma
    n[:3, 3] = n[3, :3] = mass * c
    n[3, 3] = mass
    return hat(n)


def _model(name, types, parent, frames, q0, actuated, provenance, inertia, ltypes=(), lparent=(),
           lchild=(), lframes=(), box=None) -> RobotModel:
    types = tuple(JointType(t) for t in types)
    m0 = np.array(frames)
    return RobotModel(
        name=name,
        type=types,
        parent=np.array(parent, dtype=int) - 1,
        M0=m0,
        L0=np.array([joint_line(t, m) for t, m in zip(types, m0)]),
        q0=np.asarray(q0, dtype=float),
        actuated=np.array(actuated, dtype=int) - 1,
        g=pga.line(G_DOWN),
        ltype=tuple(JointType(t) for t in ltypes),
        lparent=np.array(lparent, dtype=int) - 1,
        lchild=np.array(lchild, dtype=int) - 1,
        Ml=np.array(lframes).reshape(-1, 16),
        inertia=np.array(inertia),
        q_a_low=None if box is None else np.asarray(box[0], dtype=float),
        q_a_high=None if box is None else np.asarray(box[1], dtype=float),
        provenance=provenance,
    )


# --------------------------------------------------------------------------
# Puma 560


PUMA_DH = {
    "a": (0.0, 0.4318, 0.0203, 0.0, 0.0, 0.0),
    "d": (0.0, 0.0, 0.15005, 0.4318, 0.0, 0.0),
    "alpha": (np.pi / 2, 0.0, -np.pi / 2, np.pi / 2, -np.pi / 2, 0.0),
}
PUMA_MASSES = (13.0, 17.4, 4.8, 0.82, 0.34, 0.09)


def dh_transform(theta, d, a, alpha) -> np.ndarray:
    ct, st, ca, sa = np.cos(theta), np.sin(theta), np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def puma_frames(q=None) -> list[np.ndarray]:
    """DH frames 0..6 as 4x4 transforms for joint angles ``q`` (default zero)."""
    q = np.zeros(6) if q is None else np.asarray(q, dtype=float)
    out = [np.eye(4)]
    for i in range(6):
        out.append(out[-1] @ dh_transform(q[i], PUMA_DH["d"][i], PUMA_DH["a"][i], PUMA_DH["alpha"][i]))
    return out


def build_puma560() -> RobotModel:
    dh = puma_frames()
    frames = [pga.normalize_motor(pga.motor_from_homogeneous(dh[i])) for i in range(6)]
    inertia = []
    for i in range(6):
        start = dh[i][:3, 3]
        end = dh[i + 1][:3, 3] if i < 5 else start + 0.06 * dh[i][:3, 2]
        if np.linalg.norm(end - start) < 1e-3:
            end = start + 0.05 * dh[i][:3, 2]
        inertia.append(rod_inertia(start, end, PUMA_MASSES[i], radius=0.04))
    return _model(
        "puma560", "RRRRRR", [0, 1, 2, 3, 4, 5], frames, np.zeros(6), range(1, 7),
        "Standard distal Denavit-Hartenberg parameters of the Unimation Puma 560 "
        "(a = 0, 0.4318, 0.0203, 0, 0, 0 m; d = 0, 0, 0.15005, 0.4318, 0, 0 m; "
        "alpha = 90, 0, -90, 90, -90, 0 deg) as tabulated in the robotics literature "
        "(e.g. Corke's Robotics Toolbox). Body i is attached to DH frame i and its joint "
        "frame is DH frame i-1 at q = 0. Masses follow the same source where available; "
        "inertias are slender-rod approximations.",
        inertia,
    )


# --------------------------------------------------------------------------
# Unitree Go2


GO2_HIP = (0.1934, 0.0465)
GO2_THIGH_OFFSET = 0.0955
GO2_THIGH = 0.213
GO2_CALF = 0.213


def build_go2() -> RobotModel:
    ex, ey, ez = np.eye(3)
    frames = [pga.IDENTITY_MOTOR.copy()]
    types = ["F"]
    parent = [0]
    inertia = [rod_inertia([-0.19, 0.0, 0.0], [0.19, 0.0, 0.0], 6.9, radius=0.09)]
    for sx, sy in ((1, -1), (1, 1), (-1, -1), (-1, 1)):
        hip = np.array([sx * GO2_HIP[0], sy * GO2_HIP[1], 0.0])
        thigh = hip + np.array([0.0, sy * GO2_THIGH_OFFSET, 0.0])
        calf = thigh + np.array([0.0, 0.0, -GO2_THIGH])
        foot = calf + np.array([0.0, 0.0, -GO2_CALF])
        base_index = len(frames) + 1
        frames += [frame(hip, ex, ey), frame(thigh, ey, ez), frame(calf, ey, ez)]
        types += ["R", "R", "R"]
        parent += [1, base_index, base_index + 1]
        inertia += [rod_inertia(hip, thigh, 0.68, 0.04), rod_inertia(thigh, calf, 1.15, 0.03),
                    rod_inertia(calf, foot, 0.24, 0.015)]
    return _model(
        "go2", types, parent, frames, np.zeros(18), range(1, 19),
        "Quadruped with a floating trunk and four 3-R legs (hip about x, thigh and calf "
        "about y). Leg offsets follow the published Unitree Go2 description "
        "(hip at (+-0.1934, +-0.0465, 0) m, thigh offset 0.0955 m, thigh and calf "
        "lengths 0.213 m) with straight legs at q = 0. Masses are approximate; inertias "
        "are slender-rod approximations.",
        inertia,
    )


# --------------------------------------------------------------------------
# 2RRU-1RRS parallel mechanism


RRU = {"base_radius": 0.30, "link_a": 0.20, "link_b": 0.25, "platform_half": 0.10}


def build_2rru1rrs() -> RobotModel:
    ex, ey, ez = np.eye(3)
    rb, la, lb, rp = RRU["base_radius"], RRU["link_a"], RRU["link_b"], RRU["platform_half"]
    qa0 = np.array([np.pi / 4, 3 * np.pi / 4, np.pi / 4])

    # Chains 1 and 2 move in the plane x = 0 about axes parallel to x.
    a1, a2 = np.array([0.0, -rb, 0.0]), np.array([0.0, rb, 0.0])
    b1 = a1 + la * np.array([0.0, np.cos(qa0[0]), np.sin(qa0[0])])
    b2 = a2 + la * np.array([0.0, np.cos(qa0[1]), np.sin(qa0[1])])
    height = b1[2] + np.sqrt(lb**2 - (b1[1] + rp) ** 2)
    c1, c2 = np.array([0.0, -rp, height]), np.array([0.0, rp, height])

    # Chain 3 moves in the plane y = 0 about axes parallel to y.
    a3 = np.array([rb, 0.0, 0.0])
    b3 = a3 + la * np.array([-np.cos(qa0[2]), 0.0, np.sin(qa0[2])])
    c3 = np.array([b3[0] - np.sqrt(lb**2 - (height - b3[2]) ** 2), 0.0, height])

    frames = [
        frame(a1, ex, b1 - a1),     # 1 chain 1, link a
        frame(b1, ex, c1 - b1),     # 2 chain 1, link b
        frame(c1, ez, ex),          # 3 platform, U joint: x on link b, y along c1->c2
        frame(a2, ex, b2 - a2),     # 4 chain 2, link a
        frame(b2, ex, c2 - b2),     # 5 chain 2, link b
        frame(a3, ey, b3 - a3),     # 6 chain 3, link a
        frame(b3, ey, c3 - b3),     # 7 chain 3, link b
    ]
    # Loop U at c2: x on the platform (along c1->c2), y on chain 2 link b.
    lframes = [frame(c2, -ez, ey), frame(c3, ez, ex)]
    q0 = np.array([qa0[0], 0.0, 0.0, 0.0, qa0[1], 0.0, qa0[2], 0.0])
    centroid = (c1 + c2 + c3) / 3.0
    inertia = [
        rod_inertia(a1, b1, 0.8), rod_inertia(b1, c1, 0.6),
        rod_inertia(centroid - [0.05, 0.0, 0.0], centroid + [0.05, 0.0, 0.0], 2.0, 0.08),
        rod_inertia(a2, b2, 0.8), rod_inertia(b2, c2, 0.6),
        rod_inertia(a3, b3, 0.8), rod_inertia(b3, c3, 0.6),
    ]
    box = ([np.pi / 9, 11 * np.pi / 18, np.pi / 9], [7 * np.pi / 18, 8 * np.pi / 9, 7 * np.pi / 18])
    return _model(
        "2rru1rrs", "RRURRRR", [0, 1, 2, 0, 4, 0, 6], frames, q0, [1, 5, 7],
        "3-DOF parallel mechanism with chains R-R-U, R-R-U and R-R-S. Dimensions are "
        f"illustrative, chosen for this package: base radius {rb} m, links {la} m and "
        f"{lb} m, platform joints at +-{rp} m. Chains 1 and 2 move in one plane about "
        "parallel horizontal axes; their U joints turn about those axes and about the "
        "common platform line through both U centres, which is what makes the U "
        "rotational constraints redundant. Chain 3 moves in the perpendicular vertical "
        "plane. The actuated base angles start at (45, 135, 45) deg and are sampled in "
        "(20, 70) x (110, 160) x (20, 70) deg. Tree: chain 1 carries the platform through "
        "its U joint; the chain-2 U joint and the chain-3 S joint are loop joints.",
        inertia, "US", [3, 3], [5, 7], lframes, box,
    )


# --------------------------------------------------------------------------
# 2PRS-1PSR parallel mechanism


PRS = {"base_radius": 0.25, "platform_radius": 0.12, "height": 0.30, "joint_offset": 0.05}


def build_2prs1psr() -> RobotModel:
    ez = np.array([0.0, 0.0, 1.0])
    rb, rp, h, off = PRS["base_radius"], PRS["platform_radius"], PRS["height"], PRS["joint_offset"]
    angles = np.deg2rad([90.0, 210.0, 330.0])
    radial = [np.array([np.cos(a), np.sin(a), 0.0]) for a in angles]
    tangential = [np.array([-np.sin(a), np.cos(a), 0.0]) for a in angles]
    base = [rb * r for r in radial]
    lower = [b + off * ez for b in base]
    upper = [rp * r + h * ez for r in radial]

    frames = [
        frame(base[0], ez, radial[0]),                       # 1 slider 1
        frame(lower[0], tangential[0], upper[0] - lower[0]),  # 2 link 1 (R)
        frame(upper[0], ez, radial[0]),                      # 3 platform (S)
        frame(base[1], ez, radial[1]),                       # 4 slider 2
        frame(lower[1], tangential[1], upper[1] - lower[1]),  # 5 link 2 (R)
        frame(base[2], ez, radial[2]),                       # 6 slider 3
        frame(lower[2], ez, radial[2]),                      # 7 link 3 (S)
    ]
    lframes = [frame(upper[1], ez, radial[1]), frame(upper[2], tangential[2], radial[2])]
    q0 = np.zeros(11)
    centroid = sum(upper) / 3.0
    inertia = [
        rod_inertia(base[0], lower[0], 0.5), rod_inertia(lower[0], upper[0], 0.4),
        rod_inertia(centroid - [0.04, 0.0, 0.0], centroid + [0.04, 0.0, 0.0], 1.5, 0.07),
        rod_inertia(base[1], lower[1], 0.5), rod_inertia(lower[1], upper[1], 0.4),
        rod_inertia(base[2], lower[2], 0.5), rod_inertia(lower[2], upper[2], 0.4),
    ]
    box = ([-0.06, -0.06, -0.06], [0.06, 0.06, 0.06])
    return _model(
        "2prs1psr", "PRSPRPS", [0, 1, 2, 0, 4, 0, 6], frames, q0, [1, 6, 8],
        "3-DOF parallel mechanism with chains P-R-S, P-R-S and P-S-R. Dimensions are "
        f"illustrative, chosen for this package: vertical sliders on a base circle of "
        f"radius {rb} m at 90/210/330 deg, the slider-side joints {off} m above the slider "
        f"origin, platform joints on a circle of radius {rp} m at height {h} m. R axes are "
        "tangential, so each P-R pair makes its link rotate in a vertical plane. Slider "
        "displacements start at 0 and are sampled in (-0.06, 0.06) m. Tree: chain 1 "
        "carries the platform through its S joint; the chain-2 S joint and the chain-3 "
        "R joint are loop joints.",
        inertia, "SR", [3, 3], [5, 7], lframes, box,
    )


BUILDERS = {
    "puma560": build_puma560,
    "go2": build_go2,
    "2rru1rrs": build_2rru1rrs,
    "2prs1psr": build_2prs1psr,
}


def build_demos(directory=None) -> list[Path]:
    """Write the four demo descriptions and return their paths."""
    directory = Path(directory) if directory is not None else Path(__file__).parent / "robots"
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, builder in BUILDERS.items():
        path = directory / f"{name}.json"
        dump(builder(), path)
        load(path)
        paths.append(path)
    return paths
