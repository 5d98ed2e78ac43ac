"""Polynomial profiles of atomic properties along the main axis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cross_section import fit_polynomial, polyval

KINDS = ("electronegativity", "mass_density", "custom")


@dataclass(frozen=True, eq=False)
class Profile:
    kind: str
    coeffs: np.ndarray  # monomial, lowest order first, x in [-1, 1]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if len(c) == 0 or not np.all(np.isfinite(c)):
            raise ValueError("profile needs finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        return polyval(self.coeffs, x)

    def integral(self, lo=-1.0, hi=1.0):
        anti = np.concatenate([[0.0], self.coeffs / np.arange(1, len(self.coeffs) + 1)])
        return float(polyval(anti, hi) - polyval(anti, lo))

    def to_dict(self):
        return {"kind": self.kind, "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["coeffs"])


def fit_property_profile(x, values, degree=1, weights=None, kind="custom") -> Profile:
    """Weighted least-squares polynomial of a per-atom property vs x."""
    coef, d = fit_polynomial(x, values, degree, weights, f"{kind} profile")
    return Profile(kind, np.concatenate([coef, np.zeros(degree - d)]))


def cumulative_mass(x, masses):
    """M(x_i) = sum of masses with x_j <= x_i (ties share one value)."""
    x = np.asarray(x, dtype=float)
    masses = np.asarray(masses, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    csum = np.cumsum(masses[order])
    # right-continuous: every tied x takes the sum through its last tie
    last = np.searchsorted(xs, xs, side="right") - 1
    out = np.empty_like(csum)
    out[order] = csum[last]
    return out


def fit_mass_density(x, masses, degree=2) -> Profile:
    """Density as the derivative of a degree+1 fit to the cumulative mass."""
    x = np.asarray(x, dtype=float)
    M = cumulative_mass(x, masses)
    coef, d = fit_polynomial(x, M, degree + 1, None, "mass-density profile")
    deriv = coef[1:] * np.arange(1, len(coef))
    if len(deriv) == 0:
        deriv = np.zeros(1)
    return Profile("mass_density", np.concatenate([deriv, np.zeros(degree + 1 - len(deriv))]))
