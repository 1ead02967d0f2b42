"""Numerical cross-checks of an analytical nullspace.

``numerical_base_analysis`` is the classical approach: a rank-revealing QR
of a stacked regressor.  ``cross_validate`` checks an analytical
``B_null`` against the same data using two criteria:

* ``rank(Y B) == rank(B)``, so no identifiable direction is lost;
* ``||Y B_null||_F / ||Y||_F <= 1e-8``, so every claimed nullspace
  direction really is annihilated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .tolerances import DEFAULT_RANK_TOL, MEMBERSHIP_TOL

# Pivots within this factor of the rank tolerance (either side) are
# reported as near-threshold: the rank decision there is fragile.
NEAR_THRESHOLD_FACTOR = 1e3


@dataclass(frozen=True)
class RankAnalysis:
    rank: int
    independent_columns: np.ndarray
    pivots: np.ndarray
    tol: float
    near_threshold: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "tolerance": self.tol,
            "independent_columns": [int(c) for c in self.independent_columns],
            "relative_pivots": [float(p) for p in self.pivots],
            "near_threshold_pivots": [
                {"position": pos + 1, "column": int(col), "relative_pivot": float(val)}
                for pos, col, val in self.near_threshold
            ],
        }


def numerical_base_analysis(y, tol: float = DEFAULT_RANK_TOL) -> RankAnalysis:
    """Rank and independent columns of ``y`` from column-pivoted QR.

    A column is independent when its pivot ``|R_kk|`` is at least ``tol``
    times the largest pivot.  The full relative pivot spectrum is kept so
    that borderline decisions are visible in reports.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("cannot analyse an empty regressor")
    _, r, perm = scipy.linalg.qr(y, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    top = diag[0] if diag.size else 0.0
    rel = diag / top if top > 0 else np.zeros_like(diag)
    rank = int(np.sum(rel >= tol)) if top > 0 else 0
    near = [(k, perm[k], rel[k]) for k in range(len(rel))
            if tol / NEAR_THRESHOLD_FACTOR <= rel[k] <= tol * NEAR_THRESHOLD_FACTOR]
    return RankAnalysis(rank, np.sort(perm[:rank]), rel, tol, near)


@dataclass(frozen=True)
class CrossValidation:
    rank_yb: int
    rank_b: int
    residual_abs: float
    residual_rel: float
    residual_tol: float
    passed: bool

    @property
    def rank_ok(self) -> bool:
        return self.rank_yb == self.rank_b

    @property
    def residual_ok(self) -> bool:
        return self.residual_rel <= self.residual_tol

    def as_dict(self) -> dict:
        return {
            "rank_YB": self.rank_yb,
            "rank_B": self.rank_b,
            "rank_criterion": "PASS" if self.rank_ok else "FAIL",
            "residual_abs": self.residual_abs,
            "residual_rel": self.residual_rel,
            "residual_tolerance": self.residual_tol,
            "residual_criterion": "PASS" if self.residual_ok else "FAIL",
            "result": "PASS" if self.passed else "FAIL",
        }


def cross_validate(y, b_null, b, rank_tol: float = DEFAULT_RANK_TOL,
                   residual_tol: float = MEMBERSHIP_TOL) -> CrossValidation:
    y = np.asarray(y, dtype=float)
    b_null = np.asarray(b_null, dtype=float)
    b = np.asarray(b, dtype=float)
    if y.shape[1] != b_null.shape[0] or y.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: Y {y.shape}, B_null {b_null.shape}, B {b.shape}")
    rank_b = numerical_base_analysis(b, rank_tol).rank if b.shape[1] else 0
    rank_yb = numerical_base_analysis(y @ b, rank_tol).rank if b.shape[1] else 0
    res_abs = float(np.linalg.norm(y @ b_null)) if b_null.shape[1] else 0.0
    y_norm = float(np.linalg.norm(y))
    res_rel = res_abs / y_norm if y_norm > 0 else 0.0
    passed = rank_yb == rank_b and res_rel <= residual_tol
    return CrossValidation(rank_yb, rank_b, res_abs, res_rel, residual_tol, passed)
