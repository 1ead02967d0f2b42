"""Base inertial parameters of robots from projective geometric algebra.

The package computes the nullspace of the dynamics regressor analytically
from a robot's geometry (:func:`nullspace.drng`) and cross-checks it
against a numerically stacked regressor (:mod:`validation`).
"""

from .nullspace import NullspaceBasis, complement, drng
from .robot_model import JointType, RobotFileError, RobotModel, load, pri

__all__ = [
    "JointType",
    "NullspaceBasis",
    "RobotFileError",
    "RobotModel",
    "complement",
    "drng",
    "load",
    "pri",
]
__version__ = "0.1.0"
