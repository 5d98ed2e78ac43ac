from pathlib import Path

import numpy as np
import pytest

from molshape.molecule_io import Molecule, parse_xyz
from molshape.normalization import compute_frame, symmetry_report

DATA = Path(__file__).parent / "data"
FIXTURE_NAMES = sorted(p.stem for p in DATA.glob("*.xyz"))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def load_fixture(name) -> Molecule:
    return parse_xyz((DATA / f"{name}.xyz").read_text())


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def fixture_molecules():
    return {name: load_fixture(name) for name in FIXTURE_NAMES}


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_cloud(rng, n=30, scales=(4.0, 2.0, 1.0), name="cloud"):
    pts = rng.normal(size=(n, 3)) * np.asarray(scales)
    elements = rng.choice(["C", "N", "O", "H"], size=n)
    return Molecule.from_arrays(list(elements), pts, name=name)


def is_well_separated(mol, rel=0.1):
    """gap12, gap23 > rel * lambda_1 and the e_1, e_2 sign margins > rel * width."""
    frame = compute_frame(mol.positions, mol.weights)
    rep = symmetry_report(frame, mol.positions)
    lam1 = frame.eigenvalues[0]
    return (
        rep.gap12 > rel * lam1
        and rep.gap23 > rel * lam1
        and min(rep.sign_margins[:2]) > rel * rep.width
    )


def asymmetric_molecule(seed=0):
    """Deterministic lopsided, bent molecule far from every symmetric case."""
    rng = np.random.default_rng(seed)
    while True:
        x = rng.exponential(1.5, size=40) - 1.0
        y = 0.15 * x**2 + rng.exponential(0.8, size=40) * 1.2
        z = 0.4 * rng.normal(size=40) + 0.2 * x
        pts = np.column_stack([3.0 * x, y, z])
        el = rng.choice(["C", "N", "O"], size=40)
        mol = Molecule.from_arrays(list(el), pts, name=f"asym-{seed}")
        if is_well_separated(mol):
            return mol


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def asym_mol():
    return asymmetric_molecule(0)
