"""Compare the compiled and numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--atoms 2000]

Checks that both backends agree before timing them. The end-to-end row
encodes one molecule with each backend selected through the environment
in a fresh process.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from molshape import _pykernels

try:
    from molshape import _ckernels
except ImportError:
    _ckernels = None


def cases(n, rng):
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    x = rng.uniform(-1, 1, n)
    pts = rng.normal(size=(n, 3)) * [4, 2, 1]
    anchors = pts[:4].copy()
    return {
        "real_sh_matrix L=8": lambda k: k.real_sh_matrix(dirs, 8),
        "legendre_matrix k=5": lambda k: k.legendre_matrix(x, 5),
        "usr_moments": lambda k: k.usr_moments(pts, anchors),
    }


def best(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


ENCODE_SNIPPET = """
import time, numpy as np
from molshape.kernels import BACKEND
from molshape.encoding import Config, encode_molecule
from molshape.molecule_io import Molecule
rng = np.random.default_rng(0)
mol = Molecule.from_arrays(["C"] * 300, rng.normal(size=(300, 3)) * [5, 2, 1])
cfg = Config(type="sh", order_L=8, fit="mse")
encode_molecule(mol, cfg)
t = time.perf_counter()
for _ in range(20):
    encode_molecule(mol, cfg)
print(BACKEND, (time.perf_counter() - t) / 20)
"""


def end_to_end(pure):
    env = dict(os.environ)
    env.pop("MOLSHAPE_PURE_PYTHON", None)
    if pure:
        env["MOLSHAPE_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", ENCODE_SNIPPET], env=env, capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--atoms", type=int, default=2000)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    rng = np.random.default_rng(1)
    print(f"{'kernel':<22}{'numpy (us)':>12}{'cython (us)':>13}{'speedup':>9}")
    for name, call in cases(args.atoms, rng).items():
        a, b = np.asarray(call(_pykernels)), np.asarray(call(_ckernels))
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree by {np.abs(a - b).max():.3g}")
        tp = best(lambda: call(_pykernels), args.repeat)
        tc = best(lambda: call(_ckernels), args.repeat)
        print(f"{name:<22}{tp * 1e6:>12.1f}{tc * 1e6:>13.1f}{tp / tc:>8.2f}x")
    (bp, tp), (bc, tc) = end_to_end(True), end_to_end(False)
    print(f"{'encode sh L=8 (300)':<22}{tp * 1e6:>12.1f}{tc * 1e6:>13.1f}{tp / tc:>8.2f}x   [{bp} vs {bc}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
