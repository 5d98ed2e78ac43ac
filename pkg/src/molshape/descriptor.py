"""Feature-vector level operations: USR fingerprint, assembly, metric,
corpus PCA, conformer ensembles and the uniform quantization codec."""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector, Field, SchemaMismatchError, schema_hash
from .kernels import usr_moments

USR_ANCHORS = ("ctd", "cst", "fct", "ftf")
USR_MOMENTS = ("mean", "std", "skew")


def usr_anchors(points) -> np.ndarray:
    """Centroid, atom closest to it, atom farthest from that, atom farthest
    from the latter.  Ties go to the lowest atom index."""
    points = np.asarray(points, dtype=float)
    ctd = points.mean(axis=0)
    cst = points[np.argmin(np.linalg.norm(points - ctd, axis=1))]
    fct = points[np.argmax(np.linalg.norm(points - cst, axis=1))]
    ftf = points[np.argmax(np.linalg.norm(points - fct, axis=1))]
    return np.array([ctd, cst, fct, ftf])


def usr_fingerprint(mol) -> FeatureVector:
    """12 USR values: per anchor the mean, standard deviation and signed
    cube root of the third central moment of the atom distances."""
    points = np.asarray(getattr(mol, "positions", mol), dtype=float)
    if len(points) < 1:
        raise ValueError("USR needs at least one atom")
    values = usr_moments(points, usr_anchors(points))
    names = [f"usr.{a}.{m}" for a in USR_ANCHORS for m in USR_MOMENTS]
    return FeatureVector.from_names(values, names, "usr")


def assemble(parts) -> FeatureVector:
    """Concatenate feature vectors, keeping their group tags."""
    parts = list(parts.values()) if isinstance(parts, dict) else list(parts)
    if not parts:
        raise ValueError("nothing to assemble")
    schema = tuple(f for p in parts for f in p.schema)
    names = [f.name for f in schema]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ValueError(f"feature name collision: {', '.join(dup)}")
    return FeatureVector(np.concatenate([p.values for p in parts]), schema)


def distance(f: FeatureVector, g: FeatureVector) -> float:
    """Weighted Euclidean distance sqrt(sum w_j (f_j - g_j)^2), weights from f."""
    f.check_schema(g)
    diff = f.values - g.values
    return float(np.sqrt(np.sum(f.weights * diff * diff)))


def distance_report(f: FeatureVector, g: FeatureVector) -> dict:
    """Per-group weighted squared contributions and the total distance."""
    f.check_schema(g)
    contrib = f.weights * (f.values - g.values) ** 2
    groups = {}
    for fld, c in zip(f.schema, contrib):
        groups[fld.group] = groups.get(fld.group, 0.0) + float(c)
    return {"groups": groups, "distance": float(np.sqrt(contrib.sum()))}


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # rows, sorted by decreasing variance
    variances: np.ndarray
    schema: tuple

    def transform(self, x):
        x = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=float)
        return (x - self.mean) @ self.components.T

    def inverse(self, z):
        return np.asarray(z, dtype=float) @ self.components + self.mean


def _matrix(corpus):
    corpus = list(corpus)
    first = corpus[0]
    for v in corpus[1:]:
        first.check_schema(v)
    return np.array([v.values for v in corpus]), first.schema


def dataset_pca(corpus) -> PcaModel:
    """Mean-centred PCA over a corpus of same-schema feature vectors."""
    corpus = list(corpus)
    if len(corpus) < 2:
        raise ValueError("dataset PCA needs at least 2 vectors")
    X, schema = _matrix(corpus)
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=True)
    var = np.zeros(vt.shape[0])
    var[: len(s)] = s * s / (len(X) - 1)
    # deterministic component signs: largest |entry| positive
    idx = np.argmax(np.abs(vt), axis=1)
    vt = vt * np.sign(vt[np.arange(len(vt)), idx])[:, None]
    return PcaModel(mean, vt, var, schema)


@dataclass(frozen=True, eq=False)
class EnsembleDescriptor:
    mean: FeatureVector
    variance: FeatureVector

    def as_feature_vector(self) -> FeatureVector:
        var_schema = tuple(Field(f"var({f.name})", f"var.{f.group}", f.weight) for f in self.variance.schema)
        return assemble([self.mean, FeatureVector(self.variance.values, var_schema)])


def ensemble_descriptor(conformers) -> EnsembleDescriptor:
    """Componentwise mean and population variance over conformer vectors."""
    conformers = list(conformers)
    if not conformers:
        raise ValueError("empty conformer ensemble")
    X, schema = _matrix(conformers)
    # shifted by the first conformer so identical inputs give exactly 0
    D = X - X[0]
    shift = D.mean(axis=0)
    var = ((D - shift) ** 2).mean(axis=0)
    mean = X[0] + shift
    return EnsembleDescriptor(FeatureVector(mean, schema), FeatureVector(var, schema))


@dataclass(frozen=True, eq=False)
class QuantSpec:
    steps: np.ndarray
    offsets: np.ndarray
    bits: int | None = None

    def __post_init__(self):
        steps = np.array(self.steps, dtype=float).reshape(-1)
        offsets = np.array(self.offsets, dtype=float).reshape(-1)
        if steps.shape != offsets.shape:
            raise ValueError("steps and offsets differ in length")
        if not np.all(steps > 0):
            raise ValueError("quantizer steps must be positive")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "offsets", offsets)

    def __len__(self):
        return len(self.steps)

    def to_dict(self):
        return {"bits": self.bits, "steps": self.steps.tolist(), "offsets": self.offsets.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["steps"], d["offsets"], d.get("bits"))


def quant_spec_from_corpus(corpus, bits=8) -> QuantSpec:
    """Per-coefficient step = range / (2**bits - 1), offset = corpus minimum."""
    if not 1 <= bits <= 31:
        raise ValueError("bits must be in [1, 31]")
    X = np.array([v.values if isinstance(v, FeatureVector) else v for v in corpus], dtype=float)
    lo, hi = X.min(axis=0), X.max(axis=0)
    steps = (hi - lo) / (2**bits - 1)
    steps[steps <= 0] = 1.0  # constant coefficient: any step reproduces it
    return QuantSpec(steps, lo, bits)


def _vals(f):
    return f.values if isinstance(f, FeatureVector) else np.asarray(f, dtype=float)


def quantize(f, spec: QuantSpec) -> np.ndarray:
    v = _vals(f)
    if len(v) != len(spec):
        raise SchemaMismatchError(f"quantizer covers {len(spec)} coefficients, vector has {len(v)}")
    k = np.rint((v - spec.offsets) / spec.steps)
    # the division and the reconstruction both round; pick the neighbouring
    # code whose decoded value is actually nearest
    cand = k[None, :] + np.array([-1.0, 0.0, 1.0])[:, None]
    err = np.abs(v - (spec.offsets + cand * spec.steps))
    return cand[np.argmin(err, axis=0), np.arange(len(v))].astype(np.int64)


def dequantize(codes, spec: QuantSpec, schema=None):
    values = spec.offsets + np.asarray(codes, dtype=np.int64) * spec.steps
    return FeatureVector(values, schema) if schema is not None else values


MAGIC = b"MSQZ"
VERSION = 1


def write_archive(vectors, spec: QuantSpec, names=None) -> bytes:
    """Header (magic, version, JSON with schema hash and quantizer) followed
    by little-endian int32 codes, one row per vector."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("empty corpus")
    X, schema = _matrix(vectors)
    codes = np.array([quantize(v, spec) for v in vectors])
    if codes.size and (codes.min() < -(2**31) or codes.max() >= 2**31):
        raise OverflowError("quantization code outside int32 range")
    header = {
        "schema": [[f.name, f.group, f.weight] for f in schema],
        "schema_hash": schema_hash(schema),
        "quant": spec.to_dict(),
        "count": len(vectors),
        "names": list(names) if names is not None else [""] * len(vectors),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<BI", VERSION, len(blob)))
    buf.write(blob)
    buf.write(codes.astype("<i4").tobytes())
    return buf.getvalue()


def read_archive(data: bytes):
    """Returns ``(vectors, spec, names)``."""
    if data[:4] != MAGIC:
        raise ValueError("not a molshape archive")
    version, hlen = struct.unpack_from("<BI", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported archive version {version}")
    start = 4 + struct.calcsize("<BI")
    header = json.loads(data[start : start + hlen])
    schema = tuple(Field(n, g, float(w)) for n, g, w in header["schema"])
    if schema_hash(schema) != header["schema_hash"]:
        raise ValueError("archive schema hash mismatch")
    spec = QuantSpec.from_dict(header["quant"])
    n = header["count"]
    codes = np.frombuffer(data, dtype="<i4", offset=start + hlen, count=n * len(schema)).reshape(n, len(schema))
    vectors = [dequantize(row, spec, schema) for row in codes]
    return vectors, spec, header["names"]
