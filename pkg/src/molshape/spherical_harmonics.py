"""Real spherical-harmonic envelopes r(theta, phi) = sum_lm a_lm y_lm.

Coefficients are stored flat in (l, m) row order, index ``l*l + l + m``.
The basis is orthonormal on the sphere without the Condon-Shortley phase,
so y_{1,-1}, y_10, y_11 are positive multiples of y/r, z/r, x/r.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector, Field
from .kernels import real_sh_matrix
from .normalization import Frame

ORIGIN_TOL = 1e-12
# (l, m) pairs that PCA normalization drives to (near) zero
DROPPED = ((1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 1))


class SingularFitError(ValueError):
    pass


def sh_index(l, m):
    return l * l + l + m


def sh_pairs(L):
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True, eq=False)
class ShDescriptor:
    order: int
    coeffs: np.ndarray
    frame: Frame | None = None

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        object.__setattr__(self, "coeffs", coeffs)
        if self.order < 0 or len(coeffs) != (self.order + 1) ** 2:
            raise ValueError(f"order {self.order} needs {(self.order + 1) ** 2} coefficients, got {len(coeffs)}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite SH coefficient")

    def __getitem__(self, lm):
        l, m = lm
        if not (0 <= l <= self.order and -l <= m <= l):
            raise IndexError(lm)
        return self.coeffs[sh_index(l, m)]

    def to_dict(self) -> dict:
        d = {"type": "sh", "order": self.order, "coeffs": [float(c) for c in self.coeffs]}
        if self.frame is not None:
            d["frame"] = self.frame.to_dict()
        return d

    @classmethod
    def from_dict(cls, d) -> ShDescriptor:
        frame = Frame.from_dict(d["frame"]) if "frame" in d else None
        return cls(int(d["order"]), np.asarray(d["coeffs"], dtype=float), frame)


def _check_lm(l, m):
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid spherical harmonic index (l={l}, m={m})")


def directions(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def real_sh(l, m, theta, phi):
    """Orthonormal real harmonic y_lm at polar angle theta, azimuth phi."""
    _check_lm(l, m)
    th = np.asarray(theta, dtype=float)
    dirs = directions(th, phi).reshape(-1, 3)
    vals = real_sh_matrix(dirs, l)[:, sh_index(l, m)]
    return vals.reshape(np.broadcast(th, np.asarray(phi)).shape)[()]


def basis_matrix(dirs, L):
    return real_sh_matrix(np.asarray(dirs, dtype=float).reshape(-1, 3), L)


def _radial(points, weights):
    points = np.asarray(getattr(points, "positions", points), dtype=float)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    r = np.linalg.norm(points, axis=1)
    keep = r > ORIGIN_TOL
    if not keep.any():
        raise ValueError("all atoms sit at the origin; directions are undefined")
    if not keep.all():
        warnings.warn(f"{int((~keep).sum())} atom(s) at the origin excluded from the SH fit", stacklevel=3)
    return r[keep], points[keep] / r[keep, None], w[keep]


def _weights_of(mol, weights):
    if weights is None and hasattr(mol, "weights"):
        return mol.weights
    return weights


def fit_projection(mol, L, weights=None, frame=None) -> ShDescriptor:
    """a_lm = sum w r y_lm / sum w y_lm^2 over atom directions.

    ``mol`` is a normalized Molecule or an (n, 3) array of coordinates
    about the centre.  Coefficients whose denominator falls below
    1e-12 * n are set to zero.
    """
    r, dirs, w = _radial(mol, _weights_of(mol, weights))
    Y = basis_matrix(dirs, L)
    num = (w * r) @ Y
    den = w @ (Y * Y)
    coeffs = np.zeros_like(num)
    ok = den >= 1e-12 * len(r)
    coeffs[ok] = num[ok] / den[ok]
    return ShDescriptor(L, coeffs, frame)


def fit_mse(mol, L, ridge=0.0, weights=None, frame=None) -> ShDescriptor:
    """Minimize sum_i w_i (r_i - sum a_lm y_lm)^2 + ridge * sum a_lm^2."""
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    r, dirs, w = _radial(mol, _weights_of(mol, weights))
    Y = basis_matrix(dirs, L)
    normal = (Y * w[:, None]).T @ Y
    rhs = Y.T @ (w * r)
    K = normal.shape[0]
    if ridge == 0.0:
        ev = np.linalg.eigvalsh(normal)
        if ev[0] <= 1e-12 * max(ev[-1], 1e-300):
            raise SingularFitError(
                f"normal equations are singular ({len(r)} directions for {K} coefficients); use ridge > 0"
            )
    normal = normal + ridge * np.eye(K)
    try:
        chol = np.linalg.cholesky(normal)
    except np.linalg.LinAlgError:
        raise SingularFitError("normal equations are not positive definite; use ridge > 0") from None
    coeffs = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return ShDescriptor(L, coeffs, frame)


def rif(desc: ShDescriptor) -> np.ndarray:
    """Rotation invariant per-order norms A_l = sqrt(sum_m a_lm^2)."""
    c = desc.coeffs
    return np.array([math.sqrt(float(c[l * l : (l + 1) ** 2] @ c[l * l : (l + 1) ** 2])) for l in range(desc.order + 1)])


def decode_directions(desc: ShDescriptor, dirs) -> np.ndarray:
    dirs = np.asarray(dirs, dtype=float)
    shape = dirs.shape[:-1]
    return (basis_matrix(dirs, desc.order) @ desc.coeffs).reshape(shape)


def decode_radius(desc: ShDescriptor, theta, phi):
    """Envelope radius; may be negative, returned as is."""
    th = np.asarray(theta, dtype=float)
    out = decode_directions(desc, directions(th, phi))
    return out[()] if out.ndim == 0 else out


def sh_features(desc: ShDescriptor) -> FeatureVector:
    names = [f"a[{l},{m}]" for l, m in sh_pairs(desc.order)]
    return FeatureVector.from_names(desc.coeffs, names, "sh")


def drop_small(desc: ShDescriptor) -> FeatureVector:
    """Feature vector without the three l=1 and the (2,-2), (2,-1), (2,1)
    coefficients."""
    if desc.order < 2:
        raise ValueError("drop_small needs order L >= 2")
    drop = {sh_index(l, m) for l, m in DROPPED}
    keep = [i for i in range(len(desc.coeffs)) if i not in drop]
    names = [f"a[{l},{m}]" for (l, m) in sh_pairs(desc.order)]
    return FeatureVector(desc.coeffs[keep], tuple(Field(names[i], "sh") for i in keep))


def restore_dropped(fv: FeatureVector, L, frame=None) -> ShDescriptor:
    """Inverse of :func:`drop_small`: zeros in the dropped slots."""
    coeffs = np.zeros((L + 1) ** 2)
    lookup = {f"a[{l},{m}]": sh_index(l, m) for l, m in sh_pairs(L)}
    for name, v in zip(fv.names, fv.values):
        coeffs[lookup[name]] = v
    return ShDescriptor(L, coeffs, frame)


def sphere_grid(ntheta, nphi):
    """Polar/azimuth grid, poles included (theta in [0, pi])."""
    theta = np.linspace(0.0, math.pi, ntheta)
    phi = np.linspace(0.0, 2.0 * math.pi, nphi, endpoint=False)
    return np.meshgrid(theta, phi, indexing="ij")
