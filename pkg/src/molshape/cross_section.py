"""Cross-sections of an unbent molecule along x in [-1, 1].

BDC: the yz second moments <Y^2>, <Z^2>, <YZ> evolve as monomial
polynomials in x; each slice decodes to an ellipse from the eigen-pairs of
the 2x2 moment matrix.

BCH: radius r(x, phi) = sum_k sum_l b[k, l] P_k(x) trig_l(phi) with
trig_l = cos(l phi) for l >= 0 and sin(-l phi) for l < 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kernels import legendre_matrix
from .spine import SpineModel, spine_offsets

MAX_BDC_DEGREE = 5
MAX_BCH_AXIAL = 5
MAX_BCH_ANGULAR = 4
AXIS_TOL = 1e-9


class Ellipse(NamedTuple):
    radii: tuple[float, float]
    angle: float
    valid: bool


@dataclass(frozen=True, eq=False)
class BdcDescriptor:
    spine: SpineModel
    degree: int
    pyy: np.ndarray
    pzz: np.ndarray
    pyz: np.ndarray

    def __post_init__(self):
        for name in ("pyy", "pzz", "pyz"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            if len(arr) != self.degree + 1 or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must hold {self.degree + 1} finite coefficients")
            object.__setattr__(self, name, arr)

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([self.pyy, self.pzz, self.pyz])

    def feature_items(self):
        items = []
        for name in ("pyy", "pzz", "pyz"):
            items += [(f"bdc.{name}{j}", v) for j, v in enumerate(getattr(self, name))]
        return items

    def to_dict(self) -> dict:
        return {
            "type": "bdc",
            "spine": self.spine.to_dict(),
            "degrees": {"d": self.degree},
            "coeffs": [float(v) for v in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d) -> BdcDescriptor:
        deg = int(d["degrees"]["d"])
        c = np.asarray(d["coeffs"], dtype=float)
        n = deg + 1
        return cls(SpineModel.from_dict(d["spine"]), deg, c[:n], c[n : 2 * n], c[2 * n : 3 * n])


@dataclass(frozen=True, eq=False)
class BchDescriptor:
    spine: SpineModel
    d_a: int
    d_c: int
    b: np.ndarray  # shape (d_a + 1, 2 d_c + 1); column l + d_c

    def __post_init__(self):
        b = np.array(self.b, dtype=float).reshape(self.d_a + 1, 2 * self.d_c + 1)
        if not np.all(np.isfinite(b)):
            raise ValueError("non-finite BCH coefficient")
        object.__setattr__(self, "b", b)

    def coefficient(self, k, l):
        return self.b[k, l + self.d_c]

    def feature_items(self):
        return [
            (f"bch.b[{k},{l}]", self.b[k, l + self.d_c])
            for k in range(self.d_a + 1)
            for l in range(-self.d_c, self.d_c + 1)
        ]

    def to_dict(self) -> dict:
        return {
            "type": "bch",
            "spine": self.spine.to_dict(),
            "degrees": {"d_a": self.d_a, "d_c": self.d_c},
            "coeffs": [float(v) for v in self.b.ravel()],
        }

    @classmethod
    def from_dict(cls, d) -> BchDescriptor:
        deg = d["degrees"]
        return cls(SpineModel.from_dict(d["spine"]), int(deg["d_a"]), int(deg["d_c"]), np.asarray(d["coeffs"], dtype=float))


def _vander(x, d):
    return np.vander(np.asarray(x, dtype=float), d + 1, increasing=True)


def polyval(coeffs, x):
    """Monomial polynomial sum_j c_j x^j (Horner)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c in coeffs[::-1]:
        out = out * x + c
    return out


def fit_polynomial(x, values, degree, weights=None, what="polynomial"):
    """Weighted least-squares monomial fit; drops the degree (with a
    warning) while the design matrix is rank deficient."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    w = np.ones(len(x)) if weights is None else np.asarray(weights, dtype=float)
    sw = np.sqrt(w)
    d = degree
    while d >= 0:
        A = _vander(x, d) * sw[:, None]
        if len(x) >= d + 1 and np.linalg.matrix_rank(A) == d + 1:
            break
        d -= 1
    if d < 0:
        raise ValueError(f"cannot fit a {what}: no usable points")
    if d < degree:
        warnings.warn(f"{what}: degree reduced from {degree} to {d} (too few distinct x)", stacklevel=3)
    coef, *_ = np.linalg.lstsq(A, values * sw, rcond=None)
    return coef, d


def fit_bdc(points, d, spine: SpineModel, weights=None) -> BdcDescriptor:
    """Fit <Y^2>, <Z^2>, <YZ> as degree-d polynomials of x (unbent points)."""
    if not 0 <= d <= MAX_BDC_DEGREE:
        raise ValueError(f"BDC degree must be in [0, {MAX_BDC_DEGREE}]")
    points = np.asarray(points, dtype=float)
    x, Y, Z = points[:, 0], points[:, 1], points[:, 2]
    pyy, deg = fit_polynomial(x, Y * Y, d, weights, "BDC cross-section")
    pzz, _ = fit_polynomial(x, Z * Z, deg, weights, "BDC cross-section")
    pyz, _ = fit_polynomial(x, Y * Z, deg, weights, "BDC cross-section")
    if deg < d:
        pad = np.zeros(d - deg)
        pyy, pzz, pyz = (np.concatenate([p, pad]) for p in (pyy, pzz, pyz))
    return BdcDescriptor(spine, d, pyy, pzz, pyz)


def _eig2(a, b, c):
    """Eigenvalues mu1 >= mu2 and major-axis angle of [[a, c], [c, b]]."""
    half_tr = 0.5 * (a + b)
    rad = np.hypot(0.5 * (a - b), c)
    return half_tr + rad, half_tr - rad, 0.5 * np.arctan2(2.0 * c, a - b)


def _radius(mu, raw):
    mu = np.maximum(mu, 0.0)
    return np.sqrt(mu) if raw else np.sqrt(2.0 * mu)


def bdc_cross_section(bdc: BdcDescriptor, x, raw_radii=False) -> Ellipse:
    """Ellipse at one x.  Radii are sqrt(2 mu) so that a circular shell of
    radius R decodes to R; ``raw_radii`` gives sqrt(mu).  The slice is
    invalid once the larger eigenvalue is not positive."""
    a, b, c = (float(polyval(p, x)) for p in (bdc.pyy, bdc.pzz, bdc.pyz))
    mu1, mu2, angle = _eig2(a, b, c)
    return Ellipse((float(_radius(mu1, raw_radii)), float(_radius(mu2, raw_radii))), float(angle), bool(mu1 > 0))


def bdc_sweep(bdc: BdcDescriptor, xs, raw_radii=False) -> list[Ellipse]:
    """Ellipses along ``xs`` with the major-axis angle continued from the
    previous slice (angles are defined modulo pi)."""
    xs = np.asarray(xs, dtype=float)
    a, b, c = (polyval(p, xs) for p in (bdc.pyy, bdc.pzz, bdc.pyz))
    mu1, mu2, ang = _eig2(a, b, c)
    r1, r2 = _radius(mu1, raw_radii), _radius(mu2, raw_radii)
    out = []
    prev = None
    for j in range(len(xs)):
        t = float(ang[j])
        if prev is not None:
            t += math.pi * round((prev - t) / math.pi)
        if mu1[j] - mu2[j] > 1e-14 * max(abs(mu1[j]), 1e-300):
            prev = t
        out.append(Ellipse((float(r1[j]), float(r2[j])), t, bool(mu1[j] > 0)))
    return out


def cyl_harmonic(l, phi):
    """cos(l phi) for l >= 0, sin(-l phi) for l < 0."""
    phi = np.asarray(phi, dtype=float)
    out = np.cos(l * phi) if l >= 0 else np.sin(-l * phi)
    return out[()] if out.ndim == 0 else out


def _trig_matrix(phi, d_c):
    phi = np.asarray(phi, dtype=float).reshape(-1)
    return np.stack([cyl_harmonic(l, phi) for l in range(-d_c, d_c + 1)], axis=1)


def bch_design(x, phi, d_a, d_c):
    """Rows P_k(x) trig_l(phi), columns ordered k-major, l from -d_c."""
    P = legendre_matrix(np.asarray(x, dtype=float).reshape(-1), d_a)
    T = _trig_matrix(phi, d_c)
    return (P[:, :, None] * T[:, None, :]).reshape(len(P), -1)


def cylindrical(points):
    points = np.asarray(points, dtype=float)
    r = np.hypot(points[:, 1], points[:, 2])
    phi = np.arctan2(points[:, 2], points[:, 1])
    return points[:, 0], r, phi


def fit_bch(points, d_a, d_c, spine: SpineModel, mode="least_squares", weights=None) -> BchDescriptor:
    """Fit r over the product basis from the cylindrical coordinates of
    unbent points; points on the axis (r < 1e-9) are skipped."""
    if not (0 <= d_a <= MAX_BCH_AXIAL and 0 <= d_c <= MAX_BCH_ANGULAR):
        raise ValueError("BCH degrees out of range")
    x, r, phi = cylindrical(points)
    w = np.ones(len(x)) if weights is None else np.asarray(weights, dtype=float)
    keep = r >= AXIS_TOL
    if not keep.any():
        raise ValueError("all points lie on the x axis; BCH is undefined")
    x, r, phi, w = x[keep], r[keep], phi[keep], w[keep]
    A = bch_design(x, phi, d_a, d_c)
    ncoef = A.shape[1]
    if mode == "projection":
        den = w @ (A * A)
        num = (w * r) @ A
        coef = np.where(den > 1e-12 * len(x), num / np.where(den > 0, den, 1.0), 0.0)
    elif mode == "least_squares":
        if len(x) < ncoef:
            raise ValueError(f"BCH least squares needs >= {ncoef} off-axis points, got {len(x)}")
        sw = np.sqrt(w)
        coef, _, rank, _ = np.linalg.lstsq(A * sw[:, None], r * sw, rcond=None)
        if rank < ncoef:
            raise ValueError(f"rank-deficient BCH design ({rank} < {ncoef})")
    else:
        raise ValueError(f"unknown fit mode {mode!r}")
    return BchDescriptor(spine, d_a, d_c, coef)


def decode_bch(bch: BchDescriptor, x, phi):
    """r(x, phi); may be negative."""
    x_arr, phi_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(phi, dtype=float))
    A = bch_design(x_arr.reshape(-1), phi_arr.reshape(-1), bch.d_a, bch.d_c)
    out = (A @ bch.b.ravel()).reshape(x_arr.shape)
    return out[()] if out.ndim == 0 else out


def surface_points(desc, nx, nphi, raw_radii=False):
    """Surface grid of a BDC or BCH descriptor in canonical-frame angstrom.

    Returns ``(grid, xs)``: ``grid`` has shape (m, nphi, 3) for the m kept
    slices and ``xs`` holds their normalized x in [-1, 1].  The spine is
    added in normalized coordinates, then x is scaled by width / 2.  BCH
    radii are clamped at 0; invalid BDC slices are dropped.
    """
    if nx < 3 or nphi < 3:
        raise ValueError("surface resolution must be at least 3 x 3")
    xs = np.linspace(-1.0, 1.0, nx)
    phis = np.linspace(0.0, 2.0 * math.pi, nphi, endpoint=False)
    cos_t, sin_t = np.cos(phis), np.sin(phis)
    spine = desc.spine
    if isinstance(desc, BdcDescriptor):
        ells = bdc_sweep(desc, xs, raw_radii)
        keep = np.array([e.valid for e in ells], dtype=bool)
        ly = np.empty((nx, nphi))
        lz = np.empty((nx, nphi))
        for j, e in enumerate(ells):
            ca, sa = math.cos(e.angle), math.sin(e.angle)
            u = e.radii[0] * cos_t
            v = e.radii[1] * sin_t
            ly[j] = u * ca - v * sa
            lz[j] = u * sa + v * ca
    elif isinstance(desc, BchDescriptor):
        keep = np.ones(nx, dtype=bool)
        X, PH = np.meshgrid(xs, phis, indexing="ij")
        r = np.maximum(decode_bch(desc, X, PH), 0.0)
        ly, lz = r * cos_t, r * sin_t
    else:
        raise TypeError(f"unsupported descriptor {type(desc).__name__}")
    sy, sz = spine_offsets(spine, xs)
    grid = np.empty((nx, nphi, 3))
    grid[:, :, 0] = (xs * spine.width / 2.0)[:, None]
    grid[:, :, 1] = ly + sy[:, None]
    grid[:, :, 2] = lz + sz[:, None]
    return grid[keep], xs[keep]
