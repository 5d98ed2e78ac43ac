"""Molecule -> descriptor record pipeline shared by the library and the CLI.

A record is a JSON-ready dict holding the decodable descriptor (frame,
coefficients) and the comparable feature vector.  When the molecule sits
near a symmetric configuration the feature vector is blended over the
alternative frames; the stored coefficients always come from the primary
frame so they still decode to a shape.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field


from . import cross_section as xs
from . import spherical_harmonics as sh
from .descriptor import assemble, usr_fingerprint
from .features import FeatureVector, Field
from .normalization import (
    DEFAULT_EPSILON,
    DEFAULT_SIGN_EPSILON,
    Frame,
    blend_over_symmetries,
    compute_frame,
)
from .profiles import Profile, fit_mass_density, fit_property_profile
from .spine import MAX_SPINE_DEGREE, SpineModel, fit_spine_model, unbend

TYPES = ("sh", "bdc", "bch", "usr")
MAX_SH_ORDER = 8


@dataclass
class Config:
    type: str = "sh"
    order_L: int = 4
    spine_degree: int = 2
    bdc_degree: int = 1
    bch_degrees: tuple = (2, 1)
    fit: str = "projection"          # SH fit and spine fit: projection | mse
    ridge: float | str = 0.0         # "auto" -> 1e-6 * n
    bch_fit: str = "least_squares"
    epsilon: float = DEFAULT_EPSILON
    sign_epsilon: float = DEFAULT_SIGN_EPSILON
    weights: str = "uniform"
    drop_hydrogens: bool = False
    drop_small: bool = False
    profiles: bool = True
    en_degree: int = 1
    mass_degree: int = 2
    raw_radii: bool = False
    bits: int = 8
    resolution: tuple = (24, 32)
    group_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bch_degrees = tuple(int(v) for v in self.bch_degrees)
        self.resolution = tuple(int(v) for v in self.resolution)
        self.validate()

    def validate(self):
        if self.type not in TYPES:
            raise ValueError(f"unknown descriptor type {self.type!r}")
        if not 0 <= self.order_L <= MAX_SH_ORDER:
            raise ValueError(f"order L must be in [0, {MAX_SH_ORDER}]")
        if not 2 <= self.spine_degree <= MAX_SPINE_DEGREE:
            raise ValueError(f"spine degree must be in [2, {MAX_SPINE_DEGREE}]")
        if not 0 <= self.bdc_degree <= xs.MAX_BDC_DEGREE:
            raise ValueError(f"BDC degree must be in [0, {xs.MAX_BDC_DEGREE}]")
        d_a, d_c = self.bch_degrees
        if not (0 <= d_a <= xs.MAX_BCH_AXIAL and 0 <= d_c <= xs.MAX_BCH_ANGULAR):
            raise ValueError(f"BCH degrees must satisfy d_a <= {xs.MAX_BCH_AXIAL}, d_c <= {xs.MAX_BCH_ANGULAR}")
        if self.fit not in ("projection", "mse"):
            raise ValueError("fit must be 'projection' or 'mse'")
        if self.bch_fit not in ("projection", "least_squares"):
            raise ValueError("bch fit must be 'projection' or 'least_squares'")
        if self.weights not in ("uniform", "mass"):
            raise ValueError("weights must be 'uniform' or 'mass'")
        if not (self.ridge == "auto" or float(self.ridge) >= 0):
            raise ValueError("ridge must be >= 0 or 'auto'")
        if self.epsilon < 0 or self.sign_epsilon < 0:
            raise ValueError("blending thresholds must be >= 0")
        if not 1 <= self.bits <= 31:
            raise ValueError("bits must be in [1, 31]")
        if min(self.resolution) < 3:
            raise ValueError("resolution must be at least 3x3")

    def to_dict(self):
        d = asdict(self)
        d["bch_degrees"] = list(self.bch_degrees)
        d["resolution"] = list(self.resolution)
        return d


def prepare(mol, config: Config):
    if config.drop_hydrogens:
        mol = mol.without_hydrogens()
    if config.weights == "mass":
        mol = mol.with_mass_weights()
    return mol


def _ridge(config, n):
    return 1e-6 * n if config.ridge == "auto" else float(config.ridge)


def _sh_stage(coords, w, frame, config):
    if config.fit == "projection":
        desc = sh.fit_projection(coords, config.order_L, weights=w, frame=frame)
    else:
        desc = sh.fit_mse(coords, config.order_L, _ridge(config, len(coords)), weights=w, frame=frame)
    fv = sh.drop_small(desc) if config.drop_small else sh.sh_features(desc)
    return desc.to_dict(), fv


def _profile_stage(x, mol, w, config):
    en = fit_property_profile(x, mol.electronegativities, config.en_degree, w, kind="electronegativity")
    mass = fit_mass_density(x, mol.masses, config.mass_degree)
    # constant electronegativity term stays in the record but not in the features
    items = [(f"profile.en{j}", v) for j, v in enumerate(en.coeffs) if j > 0]
    items += [(f"profile.mass{j}", v) for j, v in enumerate(mass.coeffs)]
    return {"electronegativity": en.to_dict(), "mass_density": mass.to_dict()}, items


def _cylinder_stage(coords, mol, w, frame, config):
    spine_mode = "projection" if config.fit == "projection" else "least_squares"
    spine, rolled, roll = fit_spine_model(coords, config.spine_degree, spine_mode, w)
    flat = unbend(rolled, spine)
    if config.type == "bdc":
        desc = xs.fit_bdc(flat, config.bdc_degree, spine, w)
        group = "bdc"
    else:
        d_a, d_c = config.bch_degrees
        desc = xs.fit_bch(flat, d_a, d_c, spine, config.bch_fit, w)
        group = "bch"
    record = desc.to_dict()
    record["roll"] = [float(v) for v in roll.ravel()]
    parts = [
        FeatureVector([spine.width], (Field("width", "width"),)),
        _items_fv(spine.feature_items(), "spine"),
        _items_fv(desc.feature_items(), group),
    ]
    if config.profiles:
        record["profiles"], items = _profile_stage(rolled[:, 0], mol, w, config)
        parts.append(_items_fv(items, "profile"))
    return record, assemble(parts)


def _items_fv(items, group):
    return FeatureVector([v for _, v in items], tuple(Field(n, group) for n, _ in items))


def encode_in_frame(mol, frame: Frame, config: Config):
    """Descriptor record (without features) and feature vector of ``mol``
    expressed in a given frame."""
    coords = frame.apply(mol.positions)
    w = mol.weights
    if config.type == "sh":
        record, fv = _sh_stage(coords, w, frame, config)
    else:
        record, fv = _cylinder_stage(coords, mol, w, frame, config)
    record["frame"] = frame.to_dict()
    return record, fv


def encode_molecule(mol, config: Config | None = None) -> dict:
    """Full pipeline; returns a JSON-ready record with a ``features`` entry."""
    config = config or Config()
    mol = prepare(mol, config)
    if config.type == "usr":
        if len(mol) < 2:
            raise ValueError("USR needs at least 2 atoms")
        fv = usr_fingerprint(mol)
        return {"name": mol.name, "type": "usr", "features": _weighted(fv, config).to_dict()}
    if config.type == "sh" and len(mol) < 1:
        raise ValueError("empty molecule")
    frame = compute_frame(mol.positions, mol.weights)
    record, fv = encode_in_frame(mol, frame, config)
    fv, syms = blend_over_symmetries(
        mol.positions,
        frame,
        lambda fr: encode_in_frame(mol, fr, config)[1],
        config.epsilon,
        config.sign_epsilon,
    )
    out = {"name": mol.name}
    out.update(record)
    out["blended"] = [s.kind for s in syms]
    out["features"] = _weighted(fv, config).to_dict()
    return out


def _weighted(fv, config):
    return fv.with_group_weights(config.group_weights) if config.group_weights else fv


def features_of(record) -> FeatureVector:
    return FeatureVector.from_dict(record["features"])


def descriptor_of(record):
    """Decodable descriptor object stored in a record."""
    kind = record.get("type")
    if kind == "sh":
        return sh.ShDescriptor.from_dict(record)
    if kind == "bdc":
        return xs.BdcDescriptor.from_dict(record)
    if kind == "bch":
        return xs.BchDescriptor.from_dict(record)
    raise ValueError(f"record of type {kind!r} is not decodable")


def profiles_of(record) -> dict:
    return {k: Profile.from_dict(v) for k, v in record.get("profiles", {}).items()}


__all__ = [
    "Config",
    "SpineModel",
    "descriptor_of",
    "encode_in_frame",
    "encode_molecule",
    "features_of",
    "prepare",
    "profiles_of",
]
