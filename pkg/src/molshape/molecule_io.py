"""Molecule container plus XYZ and SDF (V2000 atom block) readers."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .elements import canonical_symbol, element_properties


class MoleculeParseError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    element: str
    position: tuple[float, float, float]
    weight: float = 1.0
    mass: float = 0.0
    electronegativity: float = 0.0

    def __post_init__(self):
        if len(self.position) != 3 or not all(math.isfinite(c) for c in self.position):
            raise ValueError(f"non-finite or malformed position {self.position!r}")
        if self.weight < 0:
            raise ValueError("atom weight must be >= 0")

    @classmethod
    def from_symbol(cls, symbol, position, weight=1.0):
        sym = canonical_symbol(symbol)
        mass, en = element_properties(sym)
        return cls(sym, tuple(float(c) for c in position), float(weight), mass, en)


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("a molecule needs at least one atom")

    def __len__(self):
        return len(self.atoms)

    @classmethod
    def from_arrays(cls, elements, positions, weights=None, name=""):
        positions = np.asarray(positions, dtype=float)
        if weights is None:
            weights = np.ones(len(positions))
        atoms = [Atom.from_symbol(el, pos, w) for el, pos, w in zip(elements, positions, weights)]
        return cls(tuple(atoms), name)

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.atoms], dtype=float)

    @property
    def electronegativities(self) -> np.ndarray:
        return np.array([a.electronegativity for a in self.atoms], dtype=float)

    @property
    def elements(self) -> list[str]:
        return [a.element for a in self.atoms]

    def with_positions(self, positions) -> Molecule:
        positions = np.asarray(positions, dtype=float)
        if positions.shape != (len(self.atoms), 3):
            raise ValueError("positions shape does not match atom count")
        atoms = [replace(a, position=tuple(p)) for a, p in zip(self.atoms, positions.tolist())]
        return Molecule(tuple(atoms), self.name)

    def with_mass_weights(self) -> Molecule:
        """Weights := atomic masses, so the centroid becomes the barycenter."""
        return Molecule(tuple(replace(a, weight=a.mass) for a in self.atoms), self.name)

    def without_hydrogens(self) -> Molecule:
        heavy = tuple(a for a in self.atoms if a.element != "H")
        if not heavy:
            raise ValueError(f"molecule {self.name!r} has no heavy atoms")
        return Molecule(heavy, self.name)


def parse_xyz(text: str) -> Molecule:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise MoleculeParseError("empty XYZ input")
    try:
        count = int(lines[0].split()[0])
    except ValueError:
        raise MoleculeParseError(f"bad atom count line {lines[0]!r}") from None
    name = lines[1].strip() if len(lines) > 1 else ""
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != count:
        raise MoleculeParseError(f"declared {count} atoms, found {len(body)}")
    atoms = []
    for lineno, ln in enumerate(body, start=3):
        parts = ln.split()
        if len(parts) < 4:
            raise MoleculeParseError(f"line {lineno}: expected 'El x y z', got {ln!r}")
        try:
            pos = tuple(float(v) for v in parts[1:4])
        except ValueError:
            raise MoleculeParseError(f"line {lineno}: unparseable coordinate in {ln!r}") from None
        atoms.append(Atom.from_symbol(parts[0], pos))
    return Molecule(tuple(atoms), name)


def split_xyz_frames(text: str) -> list[str]:
    """Split a concatenated multi-frame XYZ file into single frames."""
    lines = text.splitlines()
    frames = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            count = int(lines[i].split()[0])
        except ValueError:
            raise MoleculeParseError(f"line {i + 1}: expected an atom count, got {lines[i]!r}") from None
        frames.append("\n".join(lines[i : i + count + 2]))
        i += count + 2
    return frames


def write_xyz(mol: Molecule) -> str:
    out = [str(len(mol.atoms)), mol.name]
    for a in mol.atoms:
        x, y, z = a.position
        out.append(f"{a.element:<2s} {x:.10f} {y:.10f} {z:.10f}")
    return "\n".join(out) + "\n"


def _sdf_atom_line(line: str, lineno: int):
    try:
        # V2000 fixed columns: x 0-9, y 10-19, z 20-29, symbol 31-33
        pos = (float(line[0:10]), float(line[10:20]), float(line[20:30]))
        sym = line[31:34].strip()
        if not sym:
            raise ValueError
        return sym, pos
    except ValueError:
        parts = line.split()
        try:
            return parts[3], (float(parts[0]), float(parts[1]), float(parts[2]))
        except (IndexError, ValueError):
            raise MoleculeParseError(f"line {lineno}: malformed atom line {line!r}") from None


def parse_sdf(text: str) -> Molecule:
    """First record of a MOL/SDF text. Bonds and properties are ignored."""
    lines = text.split("$$$$")[0].splitlines()
    if len(lines) < 4:
        raise MoleculeParseError("SDF record shorter than header + counts line")
    counts = lines[3]
    try:
        natoms = int(counts[0:3])
        int(counts[3:6])
    except ValueError:
        raise MoleculeParseError(f"malformed counts line {counts!r}") from None
    block = lines[4 : 4 + natoms]
    if len(block) < natoms:
        raise MoleculeParseError(f"counts line declares {natoms} atoms, atom block has {len(block)}")
    atoms = []
    for k, ln in enumerate(block):
        sym, pos = _sdf_atom_line(ln, 5 + k)
        atoms.append(Atom.from_symbol(sym, pos))
    if not atoms:
        raise MoleculeParseError("SDF record has no atoms")
    return Molecule(tuple(atoms), lines[0].strip())


def split_sdf_records(text: str) -> list[str]:
    out = []
    for k, rec in enumerate(text.split("$$$$")):
        if k > 0:
            # drop only the terminator of the "$$$$" line; the name line may be blank
            rec = rec[2:] if rec.startswith("\r\n") else rec[1:] if rec.startswith("\n") else rec
        if rec.strip():
            out.append(rec)
    return out


def read_records(path) -> list[str]:
    """Raw per-molecule text records of an .xyz or .sdf/.mol file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".sdf", ".mol", ".sd"):
        return split_sdf_records(text)
    return split_xyz_frames(text)


def parse_record(record: str, path) -> Molecule:
    if Path(path).suffix.lower() in (".sdf", ".mol", ".sd"):
        return parse_sdf(record)
    return parse_xyz(record)
