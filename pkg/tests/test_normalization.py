import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from molshape.features import FeatureVector
from molshape.molecule_io import Molecule
from molshape.normalization import (
    Frame,
    blend_descriptors,
    blend_over_symmetries,
    centroid,
    compute_frame,
    covariance3,
    eigen3,
    fix_signs,
    near_symmetries,
    normalize,
    symmetry_report,
)

from conftest import asymmetric_molecule, random_cloud, random_rotation


# ---- centroid / covariance -------------------------------------------------

def test_centroid_examples():
    assert centroid([[0, 0, 0], [2, 0, 0]]).tolist() == [1, 0, 0]
    assert centroid([[5, -1, 2]]).tolist() == [5, -1, 2]
    assert centroid([[0, 0, 0], [3, 0, 0]], [1, 2]).tolist() == [2, 0, 0]
    with pytest.raises(ValueError):
        centroid([[0, 0, 0]], [0.0])


def test_covariance_examples():
    np.testing.assert_array_equal(covariance3([[1, 0, 0], [-1, 0, 0]]), np.diag([2.0, 0, 0]))
    np.testing.assert_array_equal(covariance3([[1, 1, 0], [-1, -1, 0]]), [[2, 2, 0], [2, 2, 0], [0, 0, 0]])


def test_covariance_translation_invariant(rng):
    pts = rng.normal(size=(12, 3))
    a = pts - centroid(pts)
    shifted = pts + [7.0, -3.0, 11.0]
    b = shifted - centroid(shifted)
    np.testing.assert_allclose(covariance3(a), covariance3(b), atol=1e-12)


# ---- eigen3 ----------------------------------------------------------------

def _check_eigen(C, lam, vecs):
    C = 0.5 * (np.asarray(C) + np.asarray(C).T)
    assert lam[0] >= lam[1] >= lam[2]
    np.testing.assert_allclose(vecs @ vecs.T, np.eye(3), atol=1e-10)
    assert np.linalg.det(vecs) == pytest.approx(1.0, abs=1e-10)
    for k in range(3):
        assert np.linalg.norm(C @ vecs[k] - lam[k] * vecs[k]) <= 1e-9 * (1 + abs(lam[0]))


def test_eigen3_diagonal():
    lam, vecs = eigen3(np.diag([4.0, 1.0, 0.25]))
    np.testing.assert_allclose(lam, [4, 1, 0.25])
    np.testing.assert_allclose(np.abs(vecs), np.eye(3), atol=1e-15)


def test_eigen3_block_example():
    C = [[5, 2, 0], [2, 2, 0], [0, 0, 0.5]]
    lam, vecs = eigen3(C)
    np.testing.assert_allclose(lam, [6, 1, 0.5], atol=1e-12)
    e1 = np.array([2, 1, 0]) / np.sqrt(5)
    assert abs(vecs[0] @ e1) == pytest.approx(1.0, abs=1e-12)
    _check_eigen(C, lam, vecs)


def test_eigen3_identity_and_repeated():
    lam, vecs = eigen3(np.eye(3))
    np.testing.assert_allclose(lam, [1, 1, 1])
    _check_eigen(np.eye(3), lam, vecs)
    Q = random_rotation(np.random.default_rng(3))
    C = Q @ np.diag([2.0, 2.0, 1.0]) @ Q.T
    lam, vecs = eigen3(C)
    _check_eigen(C, lam, vecs)


symmetric = arrays(np.float64, (3, 3), elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=300, deadline=None)
@given(symmetric)
def test_eigen3_residual_property(M):
    C = M + M.T
    lam, vecs = eigen3(C)
    _check_eigen(C, lam, vecs)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(C)[::-1], atol=1e-9 * (1 + abs(lam).max()))


@pytest.mark.parametrize("scale", [1e-150, 1e-80, 1.0, 1e80, 1e150])
def test_eigen3_extreme_magnitudes(scale):
    C = np.array([[0.0, 2.7, 0.0], [2.7, 0.0, 0.0], [0.0, 0.0, 0.3]]) * scale
    lam, vecs = eigen3(C)
    np.testing.assert_allclose(lam / scale, [2.7, 0.3, -2.7], rtol=1e-12)
    np.testing.assert_allclose(vecs @ vecs.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(vecs) == pytest.approx(1.0)


# ---- sign rule -------------------------------------------------------------

def test_fix_signs_flips_heavier_negative_side():
    pts = np.array([[-2.0, 0, 0], [1.0, 0.1, 0], [1.0, -0.05, 0]])
    e = fix_signs(np.eye(3), pts)
    assert e[0].tolist() == [-1, 0, 0]
    assert np.linalg.det(e) == pytest.approx(1.0)


def test_fix_signs_keeps_when_max_wins():
    pts = np.array([[-1.0, 0, 0], [2.0, 0, 0]])
    e = fix_signs(np.eye(3), pts)
    assert e[0].tolist() == [1, 0, 0]


def test_fix_signs_restores_orientation():
    # e_1 flips, e_2 keeps: det becomes -1 and e_3 must be negated
    pts = np.array([[-2.0, -1.0, 0], [1.0, 2.0, 0], [1.0, -0.5, 0]])
    e = fix_signs(np.eye(3), pts)
    np.testing.assert_array_equal(e, np.diag([-1.0, 1.0, -1.0]))


# ---- normalize -------------------------------------------------------------

def test_normalize_output_is_canonical(asym_mol):
    out, frame = normalize(asym_mol)
    P = out.positions
    np.testing.assert_allclose(P.mean(axis=0), 0, atol=1e-12)
    C = covariance3(P)
    off = C - np.diag(np.diag(C))
    assert np.abs(off).max() <= 1e-8 * frame.eigenvalues[0]
    for k in range(2):
        assert -P[:, k].min() < P[:, k].max()
    R = frame.rotation
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-10)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-10)


def test_normalize_idempotent(fixture_molecules):
    for mol in fixture_molecules.values():
        once, _ = normalize(mol)
        twice, frame = normalize(once)
        np.testing.assert_allclose(twice.positions, once.positions, atol=1e-10)


def test_already_normalized_gives_identity_frame(asym_mol):
    once, _ = normalize(asym_mol)
    _, frame = normalize(once)
    np.testing.assert_allclose(frame.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(frame.translation, 0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rigid_motion_invariance(seed):
    mol = asymmetric_molecule(0)
    rng = np.random.default_rng(seed)
    Q, t = random_rotation(rng), rng.normal(scale=20, size=3)
    moved = mol.with_positions(mol.positions @ Q.T + t)
    a, _ = normalize(mol)
    b, _ = normalize(moved)
    np.testing.assert_allclose(b.positions, a.positions, atol=1e-6)


def test_mirror_image_keeps_proper_frame(asym_mol):
    mirrored = asym_mol.with_positions(asym_mol.positions * [1, 1, -1])
    a, fa = normalize(asym_mol)
    b, fb = normalize(mirrored)
    assert np.linalg.det(fa.rotation) == pytest.approx(1.0)
    assert np.linalg.det(fb.rotation) == pytest.approx(1.0)
    # chirality survives: the mirror normalizes to the mirror, not the original
    np.testing.assert_allclose(b.positions, a.positions * [1, 1, -1], atol=1e-9)
    assert not np.allclose(b.positions, a.positions, atol=1e-3)


def test_collinear_molecule_gets_full_frame():
    mol = Molecule.from_arrays(["C", "C", "O"], [[0, 0, 0], [1, 1, 1], [3, 3, 3]])
    out, frame = normalize(mol)
    np.testing.assert_allclose(frame.rotation @ frame.rotation.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(out.positions[:, 1:], 0, atol=1e-12)
    assert symmetry_report(frame, mol.positions).collinear


def test_frame_json_round_trip(asym_mol):
    _, frame = normalize(asym_mol)
    back = Frame.from_dict(frame.to_dict())
    np.testing.assert_array_equal(back.rotation, frame.rotation)
    np.testing.assert_array_equal(back.inverse(back.apply(asym_mol.positions)).round(9), asym_mol.positions.round(9))


# ---- symmetry report -------------------------------------------------------

def test_symmetry_report_examples():
    # octahedron: spherical, every gap and margin ~ 0
    octa = np.vstack([np.eye(3), -np.eye(3)])
    rep = symmetry_report(compute_frame(octa), octa)
    assert rep.gap12 == pytest.approx(0, abs=1e-12)
    assert rep.sign_margins[0] == pytest.approx(0, abs=1e-12)
    # diag(9, 1, 0.1) covariance from +-(a,0,0) etc. with unit weights
    pts = np.array([[1.5, 0, 0], [-1.5, 0, 0], [0, 0.5, 0], [0, -0.5, 0], [0, 0, np.sqrt(0.05)], [0, 0, -np.sqrt(0.05)]]) * np.sqrt(2)
    rep = symmetry_report(compute_frame(pts), pts)
    assert rep.gap12 == pytest.approx(8.0)


# ---- blending --------------------------------------------------------------

def test_blend_examples():
    d = FeatureVector.from_names([1.0, 2.0], ["p", "q"], "g")
    e = FeatureVector.from_names([3.0, -2.0], ["p", "q"], "g")
    np.testing.assert_array_equal(blend_descriptors(d, e, 1.0, 1.0, 0.5).values, [2.0, 0.0])
    np.testing.assert_array_equal(blend_descriptors(d, e, 1.5, 1.0, 0.5).values, d.values)
    np.testing.assert_array_equal(blend_descriptors(d, d, 1.3, 1.0, 0.5).values, d.values)
    with pytest.raises(ValueError):
        blend_descriptors(d, e, 2.0, 1.0, 0.5)
    other = FeatureVector.from_names([1.0, 2.0], ["p", "r"], "g")
    with pytest.raises(ValueError):
        blend_descriptors(d, other, 1.0, 1.0, 0.5)


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.float64, 5, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, 5, elements=st.floats(-1e3, 1e3)),
    st.floats(0, 1),
    st.floats(-5, 5),
)
def test_blend_linear_in_descriptors(a, b, frac, s):
    eps = 0.7
    gap = frac * eps
    lhs = blend_descriptors(s * a, s * b, gap, 0.0, eps)
    rhs = s * blend_descriptors(a, b, gap, 0.0, eps)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


def test_blend_over_symmetries_disabled_for_separated(asym_mol):
    frame = compute_frame(asym_mol.positions)
    calls = []

    def encode(fr):
        calls.append(fr)
        return FeatureVector.from_names(fr.rotation.ravel(), [f"r{i}" for i in range(9)], "rot")

    fv, syms = blend_over_symmetries(asym_mol.positions, frame, encode)
    assert syms == [] and len(calls) == 1
    np.testing.assert_array_equal(fv.values, frame.rotation.ravel())


def test_near_symmetries_detects_swap_and_flip():
    # nearly square planar cloud: lambda_1 ~ lambda_2
    pts = np.array([[2.0, 0, 0.1], [-2.0, 0, 0.1], [0, 2.01, -0.1], [0, -2.01, -0.1], [0.3, 0.2, 0.0]])
    frame = compute_frame(pts)
    kinds = [s.kind for s in near_symmetries(frame, pts)]
    assert kinds[0] == "swap12"
    fv, syms = blend_over_symmetries(pts, frame, lambda fr: FeatureVector.from_names([fr.eigenvalues[0]], ["l"], "g"))
    assert len(syms) == len(kinds)


def test_random_cloud_frame_is_rotation(rng):
    for _ in range(20):
        mol = random_cloud(rng)
        _, frame = normalize(mol)
        assert np.linalg.det(frame.rotation) == pytest.approx(1.0, abs=1e-10)
