"""Numerical tolerances shared across the package.

Algebraic identities are checked tighter than geometric round-trips, which
accumulate rounding through trigonometric functions.
"""

ALGEBRA_TOL = 1e-12
GEOMETRY_TOL = 1e-10
MOTOR_UNIT_TOL = 1e-12
SYMMETRY_TOL = 1e-12
RIGID_TOL = 1e-9

LOOP_RESIDUAL_TOL = 1e-10
LOOP_MAX_ITER = 50

DEFAULT_COND_GATE = 30.0
DEFAULT_RANK_TOL = 1e-8
MEMBERSHIP_TOL = 1e-8
