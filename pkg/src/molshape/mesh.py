"""Triangle meshes of decoded envelopes and a deterministic OBJ writer."""
from __future__ import annotations

import numpy as np

from . import cross_section as xs
from . import spherical_harmonics as sh
from .spine import spine_offsets


def sh_mesh(desc: sh.ShDescriptor, ntheta=24, nphi=32):
    """Closed star-shaped mesh; negative radii are clamped to 0."""
    theta = np.linspace(0.0, np.pi, ntheta)[1:-1]
    phi = np.linspace(0.0, 2.0 * np.pi, nphi, endpoint=False)
    T, PH = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.concatenate([[[0.0, 0.0, 1.0]], sh.directions(T, PH).reshape(-1, 3), [[0.0, 0.0, -1.0]]])
    r = np.maximum(sh.decode_directions(desc, dirs), 0.0)
    verts = dirs * r[:, None]
    rings = len(theta)
    faces = []
    ring = lambda i, j: 1 + i * nphi + (j % nphi)  # noqa: E731
    for j in range(nphi):
        faces.append((0, ring(0, j), ring(0, j + 1)))
    for i in range(rings - 1):
        for j in range(nphi):
            a, b, c, d = ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1)
            faces += [(a, c, b), (b, c, d)]
    south = len(verts) - 1
    for j in range(nphi):
        faces.append((south, ring(rings - 1, j + 1), ring(rings - 1, j)))
    return verts, np.array(faces, dtype=np.int64)


def tube_mesh(desc, nx=24, nphi=32, raw_radii=False):
    """Mesh of a BDC/BCH envelope.  Runs of consecutive valid slices become
    tubes closed by fan caps at the spine; invalid slices leave gaps."""
    grid, xs_kept = xs.surface_points(desc, nx, nphi, raw_radii)
    full = np.linspace(-1.0, 1.0, nx)
    idx = np.searchsorted(full, xs_kept - 1e-12)
    sy, sz = spine_offsets(desc.spine, xs_kept)
    centres = np.column_stack([xs_kept * desc.spine.width / 2.0, sy, sz])
    verts, faces = [], []
    start = 0
    while start < len(idx):
        stop = start
        while stop + 1 < len(idx) and idx[stop + 1] == idx[stop] + 1:
            stop += 1
        base = len(verts)
        run = grid[start : stop + 1]
        verts.extend(run.reshape(-1, 3))
        v = lambda i, j: base + i * nphi + (j % nphi)  # noqa: E731
        for i in range(len(run) - 1):
            for j in range(nphi):
                faces += [(v(i, j), v(i, j + 1), v(i + 1, j)), (v(i, j + 1), v(i + 1, j + 1), v(i + 1, j))]
        if len(run) > 1:
            c0 = len(verts)
            verts.append(centres[start])
            c1 = len(verts)
            verts.append(centres[stop])
            last = len(run) - 1
            for j in range(nphi):
                faces.append((c0, v(0, j + 1), v(0, j)))
                faces.append((c1, v(last, j), v(last, j + 1)))
        start = stop + 1
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def descriptor_mesh(desc, resolution=(24, 32), raw_radii=False):
    n1, n2 = resolution
    if isinstance(desc, sh.ShDescriptor):
        return sh_mesh(desc, n1, n2)
    return tube_mesh(desc, n1, n2, raw_radii)


def write_obj(verts, faces, comment="") -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def read_obj(text):
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)
