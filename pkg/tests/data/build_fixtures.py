"""Regenerate the fixture molecules in this directory.

Geometries are built from internal coordinates with textbook bond lengths
(C-C 1.53, C=C arom 1.39, C-O 1.43, C-N 1.47, C-H 1.09, O-H 0.96, N-H 1.01)
and tetrahedral/trigonal angles.  They are realistic enough for shape
tests, not quantum-chemistry minima.

    python tests/data/build_fixtures.py
"""
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
TET = 109.47


def place(a, b, c, bond, angle, torsion):
    """Atom bonded to a, at ``angle`` a-b and dihedral vs c (degrees)."""
    angle, torsion = math.radians(angle), math.radians(torsion)
    bc = a - b
    bc /= np.linalg.norm(bc)
    n = np.cross(b - c, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d = np.array([-bond * math.cos(angle), bond * math.sin(angle) * math.cos(torsion), bond * math.sin(angle) * math.sin(torsion)])
    return a + d[0] * bc + d[1] * m + d[2] * n


class Builder:
    def __init__(self, name):
        self.name = name
        self.el, self.xyz, self.bonds = [], [], []

    def add(self, el, pos, bonded=None):
        self.el.append(el)
        self.xyz.append(np.asarray(pos, dtype=float))
        if bonded is not None:
            self.bonds.append((bonded, len(self.el) - 1))
        return len(self.el) - 1

    def z(self, el, a, b, c, bond, angle, torsion):
        return self.add(el, place(self.xyz[a], self.xyz[b], self.xyz[c], bond, angle, torsion), a)

    def hydrogens(self, a, b, c, torsions, bond=1.09, angle=TET):
        for t in torsions:
            self.z("H", a, b, c, bond, angle, t)


def ring(b, radius=1.39, centre=(0.0, 0.0, 0.0)):
    idx = []
    for k in range(6):
        t = math.radians(60 * k)
        idx.append(b.add("C", np.array(centre) + radius * np.array([math.cos(t), math.sin(t), 0.0]), idx[-1] if idx else None))
    b.bonds.append((idx[-1], idx[0]))
    return idx


def radial(b, el, atom, centre, bond):
    d = b.xyz[atom] - np.asarray(centre)
    return b.add(el, b.xyz[atom] + bond * d / np.linalg.norm(d), atom)


def methane():
    b = Builder("methane")
    c = b.add("C", [0, 0, 0])
    s = 1.09 / math.sqrt(3)
    for v in ([1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]):
        b.add("H", s * np.array(v), c)
    return b


def benzene():
    b = Builder("benzene")
    r = ring(b)
    for a in r:
        radial(b, "H", a, (0, 0, 0), 1.09)
    return b


def ethanol():
    b = Builder("ethanol")
    c1 = b.add("C", [0, 0, 0])
    c2 = b.add("C", [1.53, 0, 0], c1)
    o = b.add("O", place(b.xyz[c2], b.xyz[c1], np.array([0, 1.0, 0]), 1.43, TET, 180), c2)
    b.z("H", o, c2, c1, 0.96, TET, 180)
    b.hydrogens(c2, c1, o, (120, -120))
    b.hydrogens(c1, c2, o, (60, 180, -60))
    return b


def chain(name, n, torsions):
    """Alkane C_n H_(2n+2) with the given backbone dihedrals."""
    b = Builder(name)
    c = [b.add("C", [0, 0, 0])]
    c.append(b.add("C", [1.53, 0, 0], c[0]))
    c.append(b.add("C", place(b.xyz[c[1]], b.xyz[c[0]], np.array([0, 1.0, 0]), 1.53, TET, 180), c[1]))
    for k in range(3, n):
        c.append(b.z("C", c[k - 1], c[k - 2], c[k - 3], 1.53, TET, torsions[k - 3]))
    b.hydrogens(c[0], c[1], c[2], (60, 180, -60))
    for k in range(1, n - 1):
        b.hydrogens(c[k], c[k - 1], c[k + 1], (120, -120))
    b.hydrogens(c[n - 1], c[n - 2], c[n - 3], (60, 180, -60))
    return b


def epinephrine():
    b = Builder("epinephrine")
    r = ring(b)
    o3 = radial(b, "O", r[2], (0, 0, 0), 1.36)
    o4 = radial(b, "O", r[3], (0, 0, 0), 1.36)
    c7 = radial(b, "C", r[0], (0, 0, 0), 1.51)
    o7 = b.z("O", c7, r[0], r[1], 1.43, TET, 60)
    c8 = b.z("C", c7, r[0], r[1], 1.53, TET, -60)
    n = b.z("N", c8, c7, r[0], 1.47, TET, 180)
    c9 = b.z("C", n, c8, c7, 1.47, TET, 180)
    for a in (r[1], r[4], r[5]):
        radial(b, "H", a, (0, 0, 0), 1.09)
    b.z("H", o3, r[2], r[1], 0.96, TET, 0)
    b.z("H", o4, r[3], r[4], 0.96, TET, 0)
    b.z("H", c7, r[0], r[1], 1.09, TET, 180)
    b.z("H", o7, c7, c8, 0.96, TET, 180)
    b.hydrogens(c8, c7, n, (120, -120))
    b.z("H", n, c8, c7, 1.01, TET, 60)
    b.hydrogens(c9, n, c8, (60, 180, -60))
    return b


def phenylpropanol():
    """Ring plus a gauche side chain; asymmetric and moderately bent."""
    b = Builder("3-phenylpropan-1-ol")
    r = ring(b)
    c1 = radial(b, "C", r[0], (0, 0, 0), 1.51)
    c2 = b.z("C", c1, r[0], r[1], 1.53, TET, 90)
    c3 = b.z("C", c2, c1, r[0], 1.53, TET, 65)
    o = b.z("O", c3, c2, c1, 1.43, TET, 180)
    for a in r[1:]:
        radial(b, "H", a, (0, 0, 0), 1.09)
    b.hydrogens(c1, r[0], c2, (120, -120))
    b.hydrogens(c2, c1, c3, (120, -120))
    b.hydrogens(c3, c2, o, (120, -120))
    b.z("H", o, c3, c2, 0.96, TET, 180)
    return b


def xyz_text(b):
    lines = [str(len(b.el)), b.name]
    lines += [f"{e:<2s} {p[0]:12.6f} {p[1]:12.6f} {p[2]:12.6f}" for e, p in zip(b.el, b.xyz)]
    return "\n".join(lines) + "\n"


def sdf_text(b):
    lines = [b.name, "  molshape-fixture", ""]
    lines.append(f"{len(b.el):3d}{len(b.bonds):3d}  0  0  0  0  0  0  0  0999 V2000")
    for e, p in zip(b.el, b.xyz):
        lines.append(f"{p[0]:10.4f}{p[1]:10.4f}{p[2]:10.4f} {e:<3s} 0  0  0  0  0  0  0  0  0  0  0  0")
    for i, j in b.bonds:
        lines.append(f"{i + 1:3d}{j + 1:3d}  1  0  0  0  0")
    lines += ["M  END", "$$$$"]
    return "\n".join(lines) + "\n"


MOLECULES = {
    "methane": methane,
    "ethanol": ethanol,
    "benzene": benzene,
    "hexane": lambda: chain("hexane", 6, [180, 180, 180]),
    "nonane_u": lambda: chain("nonane-u", 9, [180, 60, 180, 180, 60, 180]),
    "decane_s": lambda: chain("decane-s", 10, [60, 180, 180, -60, -60, 180, 180]),
    "epinephrine": epinephrine,
    "phenylpropanol": phenylpropanol,
}


if __name__ == "__main__":
    sdf = []
    for key, fn in MOLECULES.items():
        b = fn()
        (HERE / f"{key}.xyz").write_text(xyz_text(b))
        sdf.append(sdf_text(b))
    (HERE / "fixtures.sdf").write_text("".join(sdf))
