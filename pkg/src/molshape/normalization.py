"""Canonical translation and rotation of a point cloud.

The frame is built from the weighted centroid and the sorted eigenvectors of
the (unnormalized) covariance matrix.  Eigenvector signs are fixed so that
each of the first two axes has ``-min < max`` over the projected atoms, and
the third axis is chosen to keep ``det = +1``; a mirror image is therefore
never mapped onto its enantiomer.

Near-symmetric molecules (close eigenvalues, or ``-min ~ max``) make the
frame discontinuous.  :func:`blend_over_symmetries` smooths this by mixing
descriptors computed in the alternative frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .features import FeatureVector

SIGN_TIE_TOL = 1e-12
DIAGONAL_TOL = 1e-13
DEFAULT_EPSILON = 0.05       # blending threshold as a fraction of lambda_1
DEFAULT_SIGN_EPSILON = 0.05  # sign-margin threshold as a fraction of the width


@dataclass(frozen=True, eq=False)
class Frame:
    translation: np.ndarray
    rotation: np.ndarray  # rows are e_1, e_2, e_3
    eigenvalues: np.ndarray

    def apply(self, points) -> np.ndarray:
        """World coordinates -> frame coordinates (v - t) . e_k."""
        return (np.asarray(points, dtype=float) - self.translation) @ self.rotation.T

    def inverse(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.rotation + self.translation

    def to_dict(self) -> dict:
        return {
            "translation": [float(v) for v in self.translation],
            "rotation": [float(v) for v in self.rotation.ravel()],
            "eigenvalues": [float(v) for v in self.eigenvalues],
        }

    @classmethod
    def from_dict(cls, d) -> Frame:
        return cls(
            np.asarray(d["translation"], dtype=float),
            np.asarray(d["rotation"], dtype=float).reshape(3, 3),
            np.asarray(d["eigenvalues"], dtype=float),
        )


class SymmetryReport(NamedTuple):
    gap12: float
    gap23: float
    sign_margins: tuple[float, float, float]
    width: float
    collinear: bool


def centroid(points, weights=None) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise ValueError("centroid of an empty point set")
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("total weight must be positive")
    return (w[:, None] * points).sum(axis=0) / total


def covariance3(points, weights=None) -> np.ndarray:
    """Unnormalized weighted covariance sum_i w_i v_ia v_ib of centred points."""
    points = np.asarray(points, dtype=float)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    return (points * w[:, None]).T @ points


def _jacobi_eigen3(C):
    a = np.array(C, dtype=float)
    v = np.eye(3)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(64):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        if off <= (1e-17 * scale) ** 2:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if a[p, q] == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    lam = np.diag(a).copy()
    order = np.argsort(-lam, kind="stable")
    return lam[order], v[:, order].T.copy()


def _null_vector(M):
    """Unit vector spanning the null space of a rank-2 symmetric 3x3 matrix."""
    cands = [np.cross(M[0], M[1]), np.cross(M[0], M[2]), np.cross(M[1], M[2])]
    best = max(cands, key=lambda c: c @ c)
    norm = math.sqrt(best @ best)
    return best / norm if norm > 0 else None


def _sorted_diagonal(lam, tol):
    """Descending order that leaves near-ties (within ``tol``) in place."""
    order = [0, 1, 2]
    for i in range(1, 3):
        j = i
        while j > 0 and lam[order[j]] > lam[order[j - 1]] + tol:
            order[j - 1], order[j] = order[j], order[j - 1]
            j -= 1
    lam = lam[order]
    for i in range(2):
        # restore exact monotonicity across near-ties
        if lam[i + 1] > lam[i]:
            lam[i + 1] = lam[i]
    vecs = np.eye(3)[order]
    if np.linalg.det(vecs) < 0:
        vecs[2] = -vecs[2]
    return lam, vecs


def _residual_ok(C, lam, vecs, tol):
    return all(np.linalg.norm(C @ vecs[k] - lam[k] * vecs[k]) <= tol for k in range(3))


def eigen3(C):
    """Eigen-decomposition of a symmetric 3x3 matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted
    descending and eigenvectors as the rows of a proper rotation matrix.
    Closed-form (trigonometric Cardano) roots with cross-product
    eigenvectors; falls back to cyclic Jacobi rotations when roots are
    (nearly) repeated or the residual check fails.
    """
    C = np.asarray(C, dtype=float)
    C = 0.5 * (C + C.T)
    p1 = C[0, 1] ** 2 + C[0, 2] ** 2 + C[1, 2] ** 2
    scale = np.abs(C).max()
    if p1 <= (DIAGONAL_TOL * scale) ** 2:
        # already diagonal up to rounding: keep the axes, so that a
        # normalized cloud maps to itself even with repeated eigenvalues
        return _sorted_diagonal(np.diag(C).copy(), DIAGONAL_TOL * scale)
    # solve at unit scale so squares neither underflow nor overflow
    lam, vecs = _eigen3_unit(C / scale)
    return lam * scale, vecs


def _eigen3_unit(C):
    p1 = C[0, 1] ** 2 + C[0, 2] ** 2 + C[1, 2] ** 2
    q = np.trace(C) / 3.0
    p2 = ((np.diag(C) - q) ** 2).sum() + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    B = (C - q * np.eye(3)) / p
    r = min(max(np.linalg.det(B) / 2.0, -1.0), 1.0)
    phi = math.acos(r) / 3.0
    l1 = q + 2.0 * p * math.cos(phi)
    l3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    l2 = 3.0 * q - l1 - l3
    lam = np.array([l1, l2, l3])

    scale = max(abs(l1), abs(l3), 1e-300)
    tol = 1e-9 * (1.0 + abs(l1))
    if min(l1 - l2, l2 - l3) > 1e-12 * scale:
        e1 = _null_vector(C - l1 * np.eye(3))
        e3 = _null_vector(C - l3 * np.eye(3))
        if e1 is not None and e3 is not None:
            e3 = e3 - (e3 @ e1) * e1
            e3 /= np.linalg.norm(e3)
            e2 = np.cross(e3, e1)
            vecs = np.array([e1, e2, e3])
            if _residual_ok(C, lam, vecs, tol):
                return lam, vecs
    lam, vecs = _jacobi_eigen3(C)
    if np.linalg.det(vecs) < 0:
        vecs[2] = -vecs[2]
    return lam, vecs


def fix_signs(eigvecs, points, tie_tol=SIGN_TIE_TOL) -> np.ndarray:
    """Flip e_1, e_2 so that -min < max of the projections; then fix e_3
    for orientation.  Exact ties keep the current sign."""
    e = np.array(eigvecs, dtype=float)
    points = np.asarray(points, dtype=float)
    scale = max(1.0, float(np.abs(points).max())) if len(points) else 1.0
    for k in range(2):
        proj = points @ e[k]
        if -proj.min() - proj.max() > tie_tol * scale:
            e[k] = -e[k]
    if np.linalg.det(e) < 0:
        e[2] = -e[2]
    return e


def _complete_axis(e1):
    """Deterministic e_2, e_3 for collinear clouds: Gram-Schmidt of the
    world axis least aligned with e_1."""
    axis = np.eye(3)[int(np.argmin(np.abs(e1)))]
    e2 = axis - (axis @ e1) * e1
    e2 /= np.linalg.norm(e2)
    return e2, np.cross(e1, e2)


def compute_frame(points, weights=None) -> Frame:
    points = np.asarray(points, dtype=float)
    if len(points) < 1:
        raise ValueError("need at least one atom")
    t = centroid(points, weights)
    centred = points - t
    lam, vecs = eigen3(covariance3(centred, weights))
    lam = np.maximum(lam, 0.0)
    if lam[0] <= 0.0:
        vecs = np.eye(3)
    elif lam[1] <= 1e-12 * lam[0]:
        e2, e3 = _complete_axis(vecs[0])
        vecs = np.array([vecs[0], e2, e3])
    vecs = fix_signs(vecs, centred)
    return Frame(t, vecs, lam)


def normalize(mol):
    """Return ``(normalized molecule, frame)``."""
    frame = compute_frame(mol.positions, mol.weights)
    return mol.with_positions(frame.apply(mol.positions)), frame


def symmetry_report(frame: Frame, points) -> SymmetryReport:
    """Distances to the nearest symmetric configuration for a frame.

    ``points`` are world coordinates (the ones the frame was computed from).
    """
    coords = frame.apply(points)
    lam = frame.eigenvalues
    margins = tuple(float(coords[:, k].max() + coords[:, k].min()) for k in range(3))
    width = float(coords[:, 0].max() - coords[:, 0].min())
    collinear = bool(lam[0] <= 0.0 or lam[1] <= 1e-12 * lam[0])
    return SymmetryReport(float(lam[0] - lam[1]), float(lam[1] - lam[2]), margins, width, collinear)


def blend_descriptors(d, d_alt, lam1, lam2, epsilon):
    """(d + d')/2 + (lam1 - lam2)/eps * (d - d')/2, componentwise."""
    gap = lam1 - lam2
    if epsilon < gap <= epsilon * (1 + 1e-12):
        gap = epsilon  # rounding in lam1 - lam2
    if not 0.0 <= gap <= epsilon or epsilon <= 0:
        raise ValueError(f"gap {gap} outside [0, {epsilon}]")
    if isinstance(d, FeatureVector):
        d.check_schema(d_alt)
        a, b = d.values, d_alt.values
    else:
        a, b = np.asarray(d, dtype=float), np.asarray(d_alt, dtype=float)
        if a.shape != b.shape:
            raise ValueError("descriptor shapes differ")
    out = 0.5 * (a + b) + (gap / epsilon) * 0.5 * (a - b)
    return d.with_values(out) if isinstance(d, FeatureVector) else out


class NearSymmetry(NamedTuple):
    kind: str  # swap12 | swap23 | flip1 | flip2
    gap: float
    epsilon: float


def _alternative(frame: Frame, kind: str) -> Frame:
    e = frame.rotation
    lam = frame.eigenvalues
    if kind == "swap12":
        rot, lam = np.array([e[1], e[0], -e[2]]), lam[[1, 0, 2]]
    elif kind == "swap23":
        rot, lam = np.array([e[0], e[2], -e[1]]), lam[[0, 2, 1]]
    elif kind == "flip1":
        rot = np.array([-e[0], e[1], -e[2]])
    elif kind == "flip2":
        rot = np.array([e[0], -e[1], -e[2]])
    else:
        raise ValueError(kind)
    return Frame(frame.translation, rot, lam)


def near_symmetries(frame: Frame, points, epsilon=DEFAULT_EPSILON, sign_epsilon=DEFAULT_SIGN_EPSILON):
    """Near-symmetries below threshold, in the fixed composition order
    gap12, gap23, sign 1, sign 2.  Thresholds are relative: ``epsilon``
    times lambda_1 and ``sign_epsilon`` times the width."""
    rep = symmetry_report(frame, points)
    lam1 = float(frame.eigenvalues[0])
    out = []
    if epsilon > 0 and lam1 > 0:
        eps = epsilon * lam1
        if rep.gap12 < eps:
            out.append(NearSymmetry("swap12", max(rep.gap12, 0.0), eps))
        if rep.gap23 < eps:
            out.append(NearSymmetry("swap23", max(rep.gap23, 0.0), eps))
    if sign_epsilon > 0 and rep.width > 0:
        eps_s = sign_epsilon * rep.width
        for k in range(2):
            if rep.sign_margins[k] < eps_s:
                out.append(NearSymmetry(f"flip{k + 1}", max(rep.sign_margins[k], 0.0), eps_s))
    return out


def blend_over_symmetries(
    points,
    frame: Frame,
    encode: Callable[[Frame], FeatureVector],
    epsilon=DEFAULT_EPSILON,
    sign_epsilon=DEFAULT_SIGN_EPSILON,
):
    """Encode in ``frame`` and blend with encodings in every nearby
    alternative frame.  Returns ``(vector, list of NearSymmetry)``.

    Each near-symmetry s contributes one pairwise blend
    ``blend(D(frame), D(alt_s(frame)), gap_s, eps_s)`` where D already
    blends over the remaining symmetries, so k symmetries cost 2**k encodings.
    """
    syms = near_symmetries(frame, points, epsilon, sign_epsilon)

    def rec(fr, remaining):
        if not remaining:
            return encode(fr)
        s, rest = remaining[0], remaining[1:]
        d = rec(fr, rest)
        d_alt = rec(_alternative(fr, s.kind), rest)
        return blend_descriptors(d, d_alt, s.gap, 0.0, s.epsilon)

    return rec(frame, syms), syms
