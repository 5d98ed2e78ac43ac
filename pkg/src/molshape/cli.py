"""molshape command line: encode, decode, compare, compress, decompress, usr."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import descriptor as dsc
from .encoding import Config, descriptor_of, encode_molecule, features_of
from .features import SchemaMismatchError, schema_summary
from .mesh import descriptor_mesh, write_obj
from .molecule_io import parse_record, read_records

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class CliError(Exception):
    pass


def _pair(text, what):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must look like 3x2, got {text!r}") from None


def _dumps(obj):
    return json.dumps(obj, separators=(",", ":"))


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_records(path):
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    try:
        return [json.loads(ln) for ln in lines if ln.strip()]
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed descriptor JSON ({exc})") from None


# ---- configuration ---------------------------------------------------------

_FLAG_KEYS = {
    "type": "type",
    "order_L": "order_L",
    "spine_degree": "spine_degree",
    "bdc_degree": "bdc_degree",
    "bch_degrees": "bch_degrees",
    "fit": "fit",
    "ridge": "ridge",
    "bch_fit": "bch_fit",
    "epsilon": "epsilon",
    "sign_epsilon": "sign_epsilon",
    "weights": "weights",
    "drop_hydrogens": "drop_hydrogens",
    "drop_small": "drop_small",
    "profiles": "profiles",
    "raw_radii": "raw_radii",
    "bits": "bits",
    "resolution": "resolution",
}


def build_config(args) -> Config:
    """Defaults < config file < command-line flags."""
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        for key, val in data.items():
            key = key.replace("-", "_")
            if key in ("group_weights", "weights") and isinstance(val, dict):
                values["group_weights"] = {str(k): float(v) for k, v in val.items()}
            elif key in ("bch_degrees", "resolution") and isinstance(val, str):
                values[key] = _pair(val, key)
            elif key in _FLAG_KEYS:
                values[key] = val
            else:
                raise CliError(f"unknown config key {key!r}")
    for key in _FLAG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    try:
        return Config(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from None


def _add_encoding_flags(p, with_type=True):
    if with_type:
        p.add_argument("--type", choices=["sh", "bdc", "bch", "usr"])
    p.add_argument("--order-L", dest="order_L", type=int, help="SH order L (<= 8)")
    p.add_argument("--spine-degree", type=int, help="Legendre spine degree d_s (2..5)")
    p.add_argument("--bdc-degree", type=int, help="BDC cross-section polynomial degree d (<= 5)")
    p.add_argument("--bch-degrees", type=lambda s: _pair(s, "--bch-degrees"), help="BCH degrees d_a x d_c, e.g. 2x1")
    p.add_argument("--fit", choices=["projection", "mse"])
    p.add_argument("--ridge", nargs="?", const="auto", type=_ridge_arg, help="ridge for --fit mse (bare flag: 1e-6 n)")
    p.add_argument("--bch-fit", choices=["projection", "least_squares"])
    p.add_argument("--epsilon", type=float, help="blending threshold as a fraction of lambda_1 (0 disables)")
    p.add_argument("--sign-epsilon", type=float, help="sign-margin threshold as a fraction of the width")
    p.add_argument("--weights", choices=["uniform", "mass"])
    p.add_argument("--drop-hydrogens", action="store_true", default=None)
    p.add_argument("--drop-small", action="store_true", default=None, help="omit the six near-zero SH coefficients")
    p.add_argument("--no-profiles", dest="profiles", action="store_false", default=None)
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch encoding")
    p.add_argument("--out", help="output file (default stdout)")


def _ridge_arg(text):
    return "auto" if text == "auto" else float(text)


# ---- commands --------------------------------------------------------------


def _encode_one(job):
    index, record, path, config = job
    try:
        mol = parse_record(record, path)
        return index, encode_molecule(mol, config), None
    except Exception as exc:  # per-record failures are reported, not fatal
        return index, None, f"{type(exc).__name__}: {exc}"


def cmd_encode(args, force_type=None):
    if force_type:
        args.type = force_type
    config = build_config(args)
    jobs = []
    for path in args.inputs:
        try:
            records = read_records(path)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read {path}: {exc}") from None
        jobs += [(len(jobs) + i, rec, path, config) for i, rec in enumerate(records)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_encode_one, jobs, chunksize=8))
    else:
        results = [_encode_one(j) for j in jobs]
    lines, failed = [], 0
    for index, rec, err in results:
        if err is None:
            lines.append(_dumps(rec))
        else:
            failed += 1
            print(f"record {index}: {err}", file=sys.stderr)
    _emit("".join(ln + "\n" for ln in lines), args.out)
    print(f"parsed {len(results)} written {len(lines)} failed {failed}", file=sys.stderr)
    return 0


def cmd_decode(args):
    records = _load_records(args.descriptor)
    if not 0 <= args.index < len(records):
        raise CliError(f"record index {args.index} out of range ({len(records)} records)")
    record = records[args.index]
    try:
        desc = descriptor_of(record)
    except (KeyError, ValueError, TypeError) as exc:
        raise CliError(f"malformed descriptor: {exc}") from None
    res = args.resolution or (24, 32)
    verts, faces = descriptor_mesh(desc, res, raw_radii=args.raw_radii)
    comment = f"molshape {record['type']} envelope {record.get('name', '')}".rstrip()
    _emit(write_obj(verts, faces, comment), args.out)
    return 0


def _group_weights(args):
    weights = {}
    if args.group_weights:
        for item in args.group_weights.split(","):
            key, _, val = item.partition("=")
            weights[key.strip()] = float(val)
    return weights


def cmd_compare(args):
    a = _load_records(args.a)[args.index_a]
    b = _load_records(args.b)[args.index_b]
    fa, fb = features_of(a), features_of(b)
    gw = _group_weights(args)
    if gw:
        fa, fb = fa.with_group_weights(gw), fb.with_group_weights(gw)
    try:
        rep = dsc.distance_report(fa, fb)
    except SchemaMismatchError:
        raise CliError(
            f"cannot compare {a.get('type')} {schema_summary(fa.schema)} with {b.get('type')} {schema_summary(fb.schema)}"
        ) from None
    out = {"a": a.get("name", ""), "b": b.get("name", ""), "groups": rep["groups"], "distance": rep["distance"]}
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    return 0


def cmd_compress(args):
    records = _load_records(args.corpus)
    if not records:
        raise CliError("empty corpus")
    vectors = [features_of(r) for r in records]
    first = vectors[0]
    for i, v in enumerate(vectors[1:], start=1):
        try:
            first.check_schema(v)
        except SchemaMismatchError as exc:
            raise CliError(f"heterogeneous corpus at record {i}: {exc}") from None
    bits = args.bits if args.bits is not None else 8
    spec = dsc.quant_spec_from_corpus(vectors, bits)
    blob = dsc.write_archive(vectors, spec, [r.get("name", "") for r in records])
    Path(args.out).write_bytes(blob)
    X = np.array([v.values for v in vectors])
    R = np.array([dsc.dequantize(dsc.quantize(v, spec), spec) for v in vectors])
    err = np.abs(X - R)
    report = {
        "count": len(vectors),
        "schema_length": len(first),
        "bits": bits,
        "rate_bits_per_molecule": bits * len(first),
        "archive_bytes": len(blob),
        "max_error": float(err.max()),
        "mean_error": float(err.mean()),
    }
    text = json.dumps(report, indent=1) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_decompress(args):
    try:
        data = Path(args.archive).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {args.archive}: {exc}") from None
    try:
        vectors, _, names = dsc.read_archive(data)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    lines = [_dumps({"name": n, "type": "features", "features": v.to_dict()}) for n, v in zip(names, vectors)]
    _emit("".join(ln + "\n" for ln in lines), args.out)
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="molshape", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="molecule file(s) -> descriptor JSON lines")
    p.add_argument("inputs", nargs="+")
    _add_encoding_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("usr", help="molecule file(s) -> USR fingerprint JSON lines")
    p.add_argument("inputs", nargs="+")
    _add_encoding_flags(p, with_type=False)
    p.set_defaults(func=lambda a: cmd_encode(a, force_type="usr"))

    p = sub.add_parser("decode", help="descriptor -> OBJ mesh")
    p.add_argument("descriptor")
    p.add_argument("--index", type=int, default=0, help="record in a multi-record file")
    p.add_argument("--resolution", type=lambda s: _pair(s, "--resolution"), help="NXxNPHI (SH: NTHETAxNPHI)")
    p.add_argument("--raw-radii", action="store_true", help="BDC radii sqrt(mu) instead of sqrt(2 mu)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("compare", help="distance between two descriptors")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--index-a", type=int, default=0)
    p.add_argument("--index-b", type=int, default=0)
    p.add_argument("--group-weights", help="e.g. width=2,spine=1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("compress", help="quantize a descriptor corpus")
    p.add_argument("corpus")
    p.add_argument("--bits", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="archive -> feature JSON lines")
    p.add_argument("archive")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompress)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"molshape: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
