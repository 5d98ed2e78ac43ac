"""Main-axis rescaling, Legendre spine fit, roll normalization, unbending.

Works on PCA-normalized coordinates (x along the dominant axis).  The
spine is expanded in P_2..P_ds only; P_0 and P_1 would just shift or tilt
the PCA axis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import legendre_matrix

MAX_SPINE_DEGREE = 5
FIT_MODES = ("projection", "least_squares")


@dataclass(frozen=True, eq=False)
class SpineModel:
    """Width plus c^y_k, c^z_k for k = 2..d_s.

    ``cy``/``cz`` are stored with length d_s + 1 so that ``cy[k]`` is the
    coefficient of P_k; entries 0 and 1 are always zero.
    """

    width: float
    d_s: int
    cy: np.ndarray
    cz: np.ndarray
    roll_degenerate: bool = False

    def __post_init__(self):
        if self.d_s < 2:
            raise ValueError("spine degree d_s must be >= 2")
        cy = np.zeros(self.d_s + 1)
        cz = np.zeros(self.d_s + 1)
        cy[2:] = np.asarray(self.cy, dtype=float)[-(self.d_s - 1):]
        cz[2:] = np.asarray(self.cz, dtype=float)[-(self.d_s - 1):]
        object.__setattr__(self, "cy", cy)
        object.__setattr__(self, "cz", cz)
        if not self.width > 0:
            raise ValueError("spine width must be positive")

    def to_dict(self) -> dict:
        return {
            "width": float(self.width),
            "d_s": self.d_s,
            "cy": [float(v) for v in self.cy[2:]],
            "cz": [float(v) for v in self.cz[3:]],  # cz[2] is 0 by construction
        }

    @classmethod
    def from_dict(cls, d) -> SpineModel:
        d_s = int(d["d_s"])
        cz = np.concatenate([[0.0], np.asarray(d["cz"], dtype=float)])
        return cls(float(d["width"]), d_s, np.asarray(d["cy"], dtype=float), cz)

    def feature_items(self):
        items = [("spine.cy2", self.cy[2])]
        for k in range(3, self.d_s + 1):
            items += [(f"spine.cy{k}", self.cy[k]), (f"spine.cz{k}", self.cz[k])]
        return items


def legendre(k, x):
    """Legendre polynomial P_k by the three-term recurrence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    xa = np.asarray(x, dtype=float)
    out = legendre_matrix(xa.reshape(-1), k)[:, k].reshape(xa.shape)
    return out[()] if out.ndim == 0 else out


def rescale_x(points):
    """Affine map of x onto [-1, 1]: x -> a x + b.

    Returns ``(points', width, a, b)`` with width = max - min.
    """
    points = np.array(points, dtype=float)
    xmin, xmax = points[:, 0].min(), points[:, 0].max()
    if not xmax > xmin:
        raise ValueError("points have no extent along x")
    width = xmax - xmin
    a = 2.0 / width
    b = 1.0 - a * xmax
    x = points[:, 0]
    # endpoints exact, interior clipped against rounding
    points[:, 0] = np.where(x == xmax, 1.0, np.where(x == xmin, -1.0, np.clip(a * x + b, -1.0, 1.0)))
    return points, float(width), float(a), float(b)


def fit_spine(points, d_s, mode="projection", weights=None):
    """Coefficients (cy, cz) of P_2..P_ds, each an array of length d_s + 1.

    ``projection`` divides each point-sum inner product by the basis norm
    independently; ``least_squares`` solves the joint problem on the
    P_2..P_ds design matrix.
    """
    if d_s < 2:
        raise ValueError("spine degree d_s must be >= 2")
    if mode not in FIT_MODES:
        raise ValueError(f"unknown fit mode {mode!r}")
    points = np.asarray(points, dtype=float)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    P = legendre_matrix(points[:, 0], d_s)[:, 2:]
    yz = points[:, 1:3]
    coef = np.zeros((d_s - 1, 2))
    if mode == "projection":
        den = w @ (P * P)
        num = (P * w[:, None]).T @ yz
        ok = den > 1e-12 * len(points)
        if not ok.all():
            warnings.warn("spine basis norm underflow; coefficient(s) set to 0", stacklevel=2)
        coef[ok] = num[ok] / den[ok, None]
    else:
        sw = np.sqrt(w)
        coef, _, rank, _ = np.linalg.lstsq(P * sw[:, None], yz * sw[:, None], rcond=None)
        if rank < P.shape[1]:
            warnings.warn("rank-deficient spine fit", stacklevel=2)
    cy = np.concatenate([[0.0, 0.0], coef[:, 0]])
    cz = np.concatenate([[0.0, 0.0], coef[:, 1]])
    return cy, cz


def roll_matrix(c2y, c2z):
    """2x2 map of (y, z) onto the new axes (0,c2y,c2z)/c and (0,-c2z,c2y)/c,
    or None when c vanishes."""
    c = math.hypot(c2y, c2z)
    if c <= 1e-12:
        return None
    return np.array([[c2y, c2z], [-c2z, c2y]]) / c


def normalize_roll(points, c2y, c2z):
    """Rotate about x so the P_2 bending is all in +y.

    Returns ``(points'', c, degenerate)``; with c ~ 0 the points are
    returned unchanged and ``degenerate`` is True.
    """
    points = np.array(points, dtype=float)
    R = roll_matrix(c2y, c2z)
    if R is None:
        return points, math.hypot(c2y, c2z), True
    points[:, 1:3] = points[:, 1:3] @ R.T
    return points, math.hypot(c2y, c2z), False


def spine_offsets(spine: SpineModel, x):
    P = legendre_matrix(np.asarray(x, dtype=float).reshape(-1), spine.d_s)
    return P @ spine.cy, P @ spine.cz


def decode_spine(spine: SpineModel, x):
    """(y, z) of the spine curve at x in [-1, 1]."""
    xa = np.asarray(x, dtype=float)
    y, z = spine_offsets(spine, xa)
    if xa.ndim == 0:
        return float(y[0]), float(z[0])
    return y.reshape(xa.shape), z.reshape(xa.shape)


def unbend(points, spine: SpineModel):
    """Y = y - sum c^y_k P_k(x), Z likewise; x unchanged."""
    points = np.array(points, dtype=float)
    y, z = spine_offsets(spine, points[:, 0])
    points[:, 1] -= y
    points[:, 2] -= z
    return points


def rebend(points, spine: SpineModel):
    points = np.array(points, dtype=float)
    y, z = spine_offsets(spine, points[:, 0])
    points[:, 1] += y
    points[:, 2] += z
    return points


def fit_spine_model(normalized_points, d_s=2, mode="projection", weights=None):
    """Full spine stage on PCA-normalized coordinates.

    Rescale x, fit the P_2 pair, roll so c^z_2 = 0 and c^y_2 >= 0, then fit
    P_2..P_ds on the rolled points.  Returns ``(spine, rolled points, roll)``
    where ``roll`` is the 2x2 (y, z) rotation applied (identity when
    degenerate).
    """
    if not 2 <= d_s <= MAX_SPINE_DEGREE:
        raise ValueError(f"spine degree must be in [2, {MAX_SPINE_DEGREE}]")
    pts, width, _, _ = rescale_x(normalized_points)
    # projection coefficients do not depend on d_s; the joint fit does, so
    # the roll uses the P_2 pair of the fit that is kept
    pre_degree = 2 if mode == "projection" else d_s
    cy, cz = fit_spine(pts, pre_degree, mode, weights)
    R = roll_matrix(cy[2], cz[2])
    degenerate = R is None
    if degenerate:
        R = np.eye(2)
    else:
        pts, _, _ = normalize_roll(pts, cy[2], cz[2])
    cy, cz = fit_spine(pts, d_s, mode, weights)
    cz[2] = 0.0
    if degenerate:
        cy[2] = 0.0  # below the roll threshold the P_2 pair is noise
    return SpineModel(width, d_s, cy, cz, degenerate), pts, R
