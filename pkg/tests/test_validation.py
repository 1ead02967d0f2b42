import numpy as np
import pytest

from pgabase.validation import NEAR_THRESHOLD_FACTOR, cross_validate, numerical_base_analysis


def low_rank(rng, rows, cols, rank):
    return rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, cols))


def test_rank_of_synthetic_matrix():
    y = low_rank(np.random.default_rng(0), 40, 12, 7)
    out = numerical_base_analysis(y)
    assert out.rank == 7
    assert len(out.independent_columns) == 7
    np.testing.assert_array_equal(out.independent_columns, np.sort(out.independent_columns))
    assert np.linalg.matrix_rank(y[:, out.independent_columns]) == 7
    assert out.pivots[0] == 1.0 and not out.near_threshold


def test_near_threshold_pivot_is_reported():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(30, 6)))
    y = q * np.array([1.0, 0.5, 0.2, 0.1, 3e-8, 1e-20])
    out = numerical_base_analysis(y, tol=1e-8)
    assert out.rank == 5
    flagged = [val for _, _, val in out.near_threshold]
    assert len(flagged) == 1 and flagged[0] == pytest.approx(3e-8, rel=1e-6)
    assert 1e-8 / NEAR_THRESHOLD_FACTOR <= flagged[0] <= 1e-8 * NEAR_THRESHOLD_FACTOR
    report = out.as_dict()
    assert report["near_threshold_pivots"][0]["position"] == 5


def test_empty_input_is_rejected():
    with pytest.raises(ValueError):
        numerical_base_analysis(np.zeros((0, 3)))


def test_cross_validate_pass_and_fail():
    rng = np.random.default_rng(2)
    b_null = np.linalg.qr(rng.normal(size=(10, 3)))[0]
    b = np.linalg.qr(np.hstack([b_null, rng.normal(size=(10, 7))]))[0][:, 3:]
    y = rng.normal(size=(50, 7)) @ b.T
    good = cross_validate(y, b_null, b)
    assert good.passed and good.rank_ok and good.residual_ok
    assert good.rank_yb == good.rank_b == 7
    assert good.as_dict()["result"] == "PASS"

    # Claiming an identifiable direction as null breaks membership.
    wrong = np.hstack([b_null[:, :2], b[:, :1]])
    bad = cross_validate(y, wrong, b)
    assert not bad.passed and not bad.residual_ok
    assert bad.as_dict()["residual_criterion"] == "FAIL"

    # Data that never excites one base direction breaks the rank criterion.
    starved = rng.normal(size=(50, 6)) @ b[:, :6].T
    lost = cross_validate(starved, b_null, b)
    assert not lost.passed and lost.rank_yb == 6 and lost.residual_ok


def test_cross_validate_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        cross_validate(np.zeros((4, 5)), np.zeros((6, 1)), np.zeros((5, 4)))
