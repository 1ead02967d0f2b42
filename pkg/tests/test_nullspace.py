import numpy as np
import pytest

from pgabase import nullspace as ns
from pgabase import pga
from pgabase import regressor as R
from pgabase.robot_model import JointType, model_from_dict

from oracles import frame_from_axis, model_doc, random_serial_chain, svd_nullspace, subspace_distance

EZ, EX, EY = np.eye(3)[2], np.eye(3)[0], np.eye(3)[1]


def spectrum(model, samples=60, seed=0):
    """Analytical d, numerical nullity and membership residual on random states."""
    y = R.stack(model, R.draw_samples(model, samples, np.random.default_rng(seed))).Y
    basis = ns.drng(model)
    s = np.linalg.svd(y, compute_uv=False)
    nullity = y.shape[1] - int(np.sum(s > 1e-9 * s[0]))
    residual = np.linalg.norm(y @ basis.B_null) / np.linalg.norm(y) if basis.d else 0.0
    return basis, nullity, residual, y


# -- building blocks ----------------------------------------------------------


@pytest.mark.parametrize("n_s", [1, 2, 3])
def test_jng_index_is_a_bijection(n_s):
    seen = [ns.jng_index(n_s, i, j) for i in range(1, n_s + 1) for j in range(i, n_s + 1)]
    assert sorted(seen) == list(range(1, n_s * (n_s + 1) // 2 + 1))


@pytest.mark.parametrize("n_s,cols", [(1, 1), (2, 3), (3, 6)])
def test_jng_column_count_and_sign(n_s, cols):
    pts = np.random.default_rng(n_s).normal(size=(n_s, 4))
    out = ns.jng(3, n_s, 0, 2, pts, pts)
    assert out.shape == (30, cols)
    np.testing.assert_array_equal(out[:10], -out[20:])
    assert not out[10:20].any()
    base = ns.jng(3, n_s, -1, 0, pts, pts)
    assert not base[10:].any() and base[:10].any()


def test_ssp_examples():
    cp, cc = ns.ssp(pga.IDENTITY_MOTOR, JointType.R)
    np.testing.assert_array_equal(cp, [[0, 0, 1, 0], [0, 0, 0, 1]])
    np.testing.assert_array_equal(cp, cc)
    shift = pga.translation_motor([1.0, 2.0, 3.0])
    cp, _ = ns.ssp(shift, JointType.S)
    np.testing.assert_allclose(cp, [[1, 2, 3, 1]], atol=1e-15)
    assert ns.ssp(pga.IDENTITY_MOTOR, JointType.F)[0].shape == (0, 4)
    assert ns.ssp(pga.IDENTITY_MOTOR, JointType.P)[0].shape == (3, 4)


# -- the bundled robots -------------------------------------------------------


@pytest.mark.parametrize("name,d", [("puma560", 24), ("go2", 36), ("2rru1rrs", 45), ("2prs1psr", 47)])
def test_demo_nullspace_dimensions(demo_models, name, d):
    basis = ns.drng(demo_models[name])
    assert basis.d == d
    assert basis.n_base == 10 * demo_models[name].n - d
    assert len(basis.tags) == d
    assert sum(basis.counts().values()) == d


def test_gravity_direction_changes_the_dimension(demo_models):
    puma = demo_models["puma560"]
    assert ns.drng(puma.with_gravity([9.81, 0, 0])).d == 22
    assert ns.drng(puma, g=[0, 0, 0, 9.81, 0, 0]).d == 22
    assert ns.drng(puma.with_gravity([0, 0, 0])).d == 24


def test_complement_properties(demo):
    basis = ns.drng(demo)
    b = basis.complement()
    assert b.shape == (10 * demo.n, basis.n_base)
    np.testing.assert_allclose(b.T @ b, np.eye(b.shape[1]), atol=1e-12)
    assert np.max(np.abs(b.T @ basis.B_null)) < 1e-12
    assert ns.rank_of(basis.B_null, 1e-10) == basis.d


def test_complement_rejects_duplicate_columns():
    b = np.random.default_rng(0).normal(size=(20, 3))
    with pytest.raises(ns.NullspaceError):
        ns.complement(np.hstack([b, b[:, :1]]))
    np.testing.assert_array_equal(ns.complement(np.zeros((4, 0))), np.eye(4))


def test_demo_nullspace_matches_numerical(demo):
    basis, nullity, residual, y = spectrum(demo, samples=40)
    assert residual < 1e-8
    assert nullity == basis.d
    assert subspace_distance(basis.B_null, svd_nullspace(y)) < 1e-6


def test_flipped_parent_block_is_detected(demo_models):
    """Negative control: a sign error in a shared-point column is caught."""
    model = demo_models["puma560"]
    basis, _, _, y = spectrum(model, samples=20)
    k = next(i for i, t in enumerate(basis.tags) if t.principle == 1 and len(t.bodies) == 2)
    broken = basis.B_null.copy()
    p = basis.tags[k].bodies[0] - 1
    broken[10 * p:10 * p + 10, k] *= -1
    assert np.linalg.norm(y @ broken) / np.linalg.norm(y) > 1e-3


# -- synthetic mechanisms -----------------------------------------------------


def chain(types, frames, gravity=(0, 0, 9.81), parents=None):
    parents = list(range(len(types))) if parents is None else parents
    return model_from_dict(model_doc(types, parents, frames, gravity), "synthetic")


def assert_complete(model, samples=60):
    basis, nullity, residual, _ = spectrum(model, samples)
    assert residual < 1e-8
    assert nullity == basis.d, (nullity, basis.d)
    return basis


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("types", ["R", "P", "RP"])
def test_random_chains_are_complete(seed, types):
    rng = np.random.default_rng(seed)
    assert_complete(random_serial_chain(int(rng.integers(2, 6)), rng, types))


def test_planar_chain_is_complete():
    frames = [frame_from_axis([k * 0.5, 0.1 * k, 0], EZ) for k in range(4)]
    basis = assert_complete(chain("RRRR", frames, gravity=(0, 9.81, 0)))
    assert basis.counts()["principle_3"] > 0


@pytest.mark.parametrize("gravity", [(0, 0, 9.81), (0, 0, 0)])
@pytest.mark.parametrize("base", ["S", "U"])
def test_spherical_and_universal_bases(base, gravity):
    frames = [frame_from_axis([0.2, 0.1, 0.3], EZ), frame_from_axis([0.2, 0.6, 0.3], EX)]
    basis = assert_complete(chain(base + "R", frames, gravity))
    fixed = [t for t in basis.tags if t.principle == 2]
    assert len(fixed) == (3 if not any(gravity) else 0)


def test_revolute_base_parallel_to_gravity():
    child = frame_from_axis([0.3, 0.5, 0.2], EY)
    vertical = assert_complete(chain("RR", [frame_from_axis([0.3, 0, 0], EZ), child]))
    horizontal = assert_complete(chain("RR", [frame_from_axis([0.3, 0, 0], EX), child]))
    assert vertical.d == horizontal.d + 2


def test_prismatic_along_parent_axis_transfers_inertia():
    frames = [frame_from_axis([0, 0, 0], EZ), frame_from_axis([0.4, 0, 0], EZ),
              frame_from_axis([0.4, 0, 0.5], EY)]
    basis = assert_complete(chain("RPR", frames, gravity=(0, 9.81, 0)))
    assert any(t.relation.endswith("transfer") for t in basis.tags)


def test_branching_tree_is_complete():
    frames = [frame_from_axis([0, 0, 0], EZ), frame_from_axis([0.3, 0, 0], EY),
              frame_from_axis([-0.3, 0, 0], EX), frame_from_axis([0.3, 0.4, 0], EX)]
    assert_complete(chain("RRRR", frames, parents=[0, 1, 1, 2]))


@pytest.mark.xfail(strict=True, reason="known gap: a base prismatic joint followed by a revolute "
                                       "joint about the slide direction, with gravity along it, has "
                                       "two dependencies that no principle generates")
def test_slide_then_rotate_about_the_slide():
    frames = [frame_from_axis([0, 0, 0], EZ), frame_from_axis([0.2, 0.1, 0], EZ)]
    assert_complete(chain("PR", frames))


def test_slide_then_rotate_still_satisfies_membership():
    frames = [frame_from_axis([0, 0, 0], EZ), frame_from_axis([0.2, 0.1, 0], EZ)]
    basis, nullity, residual, _ = spectrum(chain("PR", frames))
    assert residual < 1e-8 and nullity == basis.d + 2
