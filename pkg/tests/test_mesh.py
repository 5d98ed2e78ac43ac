from collections import Counter

import numpy as np
import pytest

from molshape.cross_section import BchDescriptor, BdcDescriptor
from molshape.mesh import descriptor_mesh, read_obj, sh_mesh, tube_mesh, write_obj
from molshape.spherical_harmonics import ShDescriptor
from molshape.spine import SpineModel, decode_spine

Y00 = 0.5 / np.sqrt(np.pi)

STRAIGHT = SpineModel(6.0, 2, [0, 0, 0], [0, 0, 0])
BENT = SpineModel(5.0, 3, [0, 0, 0.4, 0.1], [0, 0, 0, -0.2])


def edge_counts(faces):
    edges = Counter()
    for a, b, c in faces:
        for u, v in ((a, b), (b, c), (c, a)):
            edges[(min(u, v), max(u, v))] += 1
    return edges


def oriented_edges(faces):
    return Counter((u, v) for a, b, c in faces for u, v in ((a, b), (b, c), (c, a)))


def assert_closed(faces):
    assert set(edge_counts(faces).values()) == {2}
    # consistent orientation: every directed edge appears once
    assert max(oriented_edges(faces).values()) == 1


def test_sphere_from_a00_only():
    coeffs = np.zeros(9)
    coeffs[0] = 2.0 / Y00
    verts, faces = sh_mesh(ShDescriptor(2, coeffs), 12, 16)
    np.testing.assert_allclose(np.linalg.norm(verts, axis=1), 2.0, atol=1e-6)
    assert len(verts) == 2 + 10 * 16
    assert_closed(faces)


def test_sh_mesh_is_outward_oriented():
    coeffs = np.zeros(4)
    coeffs[0] = 1.0 / Y00
    verts, faces = sh_mesh(ShDescriptor(1, coeffs), 10, 12)
    tri = verts[faces]
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    assert np.all(np.einsum("ij,ij->i", normals, tri.mean(axis=1)) > 0)


def test_sh_negative_radii_clamped():
    coeffs = np.zeros(4)
    coeffs[0], coeffs[2] = 0.1 / Y00, 3.0  # a_10 dominates: lower lobe negative
    verts, faces = sh_mesh(ShDescriptor(1, coeffs), 12, 8)
    r = np.linalg.norm(verts, axis=1)
    assert np.all(np.isfinite(r)) and np.any(r == 0.0)
    assert np.all(verts[verts[:, 2] < -1e-12, 2] >= -1e-12) or np.all(r[verts[:, 2] < 0] == 0)


def test_bdc_cylinder_mesh_closed():
    R = 1.5
    bdc = BdcDescriptor(STRAIGHT, 0, [R * R / 2], [R * R / 2], [0.0])
    verts, faces = tube_mesh(bdc, 10, 12)
    side = verts[:-2]
    np.testing.assert_allclose(np.hypot(side[:, 1], side[:, 2]), R, atol=1e-9)
    assert side[:, 0].min() == pytest.approx(-3.0) and side[:, 0].max() == pytest.approx(3.0)
    assert_closed(faces)
    # outward: normals point away from the axis on the side, along -x / +x on the caps
    tri = verts[faces]
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    centre = tri.mean(axis=1)
    assert np.all(np.einsum("ij,ij->i", normals, centre) > 0)


def test_bch_dc0_is_surface_of_revolution():
    b = np.array([[1.0], [0.3], [-0.2]])
    bch = BchDescriptor(STRAIGHT, 2, 0, b)
    nx, nphi = 9, 14
    verts, _ = tube_mesh(bch, nx, nphi)
    ring = verts[: nx * nphi].reshape(nx, nphi, 3)
    radii = np.hypot(ring[..., 1], ring[..., 2])
    np.testing.assert_allclose(radii, radii[:, :1].repeat(nphi, axis=1), atol=1e-12)
    np.testing.assert_allclose(ring[..., 0], ring[:, :1, 0].repeat(nphi, axis=1), atol=1e-12)


def test_bch_negative_radii_clamped_to_spine():
    bch = BchDescriptor(BENT, 1, 0, np.array([[-1.0], [0.0]]))
    verts, faces = tube_mesh(bch, 7, 6)
    x = verts[:, 0] / (BENT.width / 2)
    y, z = decode_spine(BENT, x)
    np.testing.assert_allclose(verts[:, 1], y, atol=1e-12)
    np.testing.assert_allclose(verts[:, 2], z, atol=1e-12)


def test_invalid_bdc_slices_split_the_tube():
    # valid near both ends, invalid in the middle
    bdc = BdcDescriptor(STRAIGHT, 2, [-0.5, 0.0, 1.5], [-0.5, 0.0, 1.5], [0.0, 0.0, 0.0])
    verts, faces = tube_mesh(bdc, 21, 8)
    edges = edge_counts(faces)
    assert set(edges.values()) == {2}
    # two closed components: vertices on each side of x = 0
    assert np.all(np.abs(verts[:, 0]) > 0.5)
    left = np.isin(faces, np.flatnonzero(verts[:, 0] < 0))
    assert np.all(left.all(axis=1) | (~left).all(axis=1))


def test_descriptor_mesh_dispatch():
    sh = ShDescriptor(0, [1.0 / Y00])
    assert len(descriptor_mesh(sh, (6, 8))[0]) == 2 + 4 * 8
    bdc = BdcDescriptor(STRAIGHT, 0, [0.5], [0.5], [0.0])
    v_sqrt2, _ = descriptor_mesh(bdc, (5, 6))
    v_raw, _ = descriptor_mesh(bdc, (5, 6), raw_radii=True)
    np.testing.assert_allclose(np.hypot(*v_sqrt2[:30, 1:].T), 1.0)
    np.testing.assert_allclose(np.hypot(*v_raw[:30, 1:].T), np.sqrt(0.5))


def test_obj_round_trip_is_exact():
    rng = np.random.default_rng(0)
    coeffs = rng.normal(size=16)
    coeffs[0] = 4.0
    verts, faces = sh_mesh(ShDescriptor(3, coeffs), 9, 11)
    text = write_obj(verts, faces, "test mesh")
    assert text.startswith("# test mesh\n") and text.endswith("\n")
    v2, f2 = read_obj(text)
    np.testing.assert_array_equal(v2, verts)
    np.testing.assert_array_equal(f2, faces)
    assert write_obj(v2, f2, "test mesh") == text
    assert all(line.count(" ") == 3 for line in text.splitlines() if line.startswith("f "))
