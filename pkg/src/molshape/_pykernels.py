"""Pure numpy implementations of the hot kernels.

These are the reference for the compiled versions in ``_ckernels.pyx``;
both must agree to rounding.
"""
import math

import numpy as np


def real_sh_matrix(dirs, L):
    """Real orthonormal spherical harmonics for unit vectors.

    Parameters
    ----------
    dirs : (n, 3) array
        Unit direction vectors (x, y, z).
    L : int
        Maximum order.

    Returns
    -------
    (n, (L+1)**2) array with column ``l*l + l + m`` holding y_lm.
    No Condon-Shortley phase: y_11 is proportional to +x/r.
    """
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    n = dirs.shape[0]
    out = np.empty((n, (L + 1) ** 2))

    # cos(m phi) sin^m(theta) and sin(m phi) sin^m(theta) via (x + iy)^m
    cm = [np.ones(n)]
    sm = [np.zeros(n)]
    for m in range(1, L + 1):
        c_prev, s_prev = cm[-1], sm[-1]
        cm.append(x * c_prev - y * s_prev)
        sm.append(x * s_prev + y * c_prev)
    qmm = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(L + 1):
        if m > 0:
            qmm *= math.sqrt((2 * m + 1) / (2.0 * m))
        q_prev2 = None
        q_prev = np.full(n, qmm)
        for l in range(m, L + 1):
            if l == m:
                q = q_prev
            elif l == m + 1:
                q = math.sqrt(2 * m + 3) * z * q_prev
            else:
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                q = a * (z * q_prev - b * q_prev2)
            if l > m:
                q_prev2, q_prev = q_prev, q
            base = l * l + l
            if m == 0:
                out[:, base] = q
            else:
                out[:, base + m] = math.sqrt(2.0) * q * cm[m]
                out[:, base - m] = math.sqrt(2.0) * q * sm[m]
    return out


def legendre_matrix(x, kmax):
    """Legendre polynomials P_0..P_kmax at ``x``, shape (n, kmax+1)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], kmax + 1))
    out[:, 0] = 1.0
    if kmax >= 1:
        out[:, 1] = x
    for k in range(2, kmax + 1):
        out[:, k] = ((2 * k - 1) * x * out[:, k - 1] - (k - 1) * out[:, k - 2]) / k
    return out


SKEW_FLOOR = 1e-13


def usr_moments(points, anchors):
    """Mean, std and signed cube root of the third central moment of the
    distances from each anchor to all points; returns 3 * len(anchors) values."""
    points = np.asarray(points, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    d = np.linalg.norm(points[None, :, :] - anchors[:, None, :], axis=2)
    mean = d.mean(axis=1)
    dev = d - mean[:, None]
    sd = np.sqrt((dev**2).mean(axis=1))
    m3 = (dev**3).mean(axis=1)
    # cbrt is not Lipschitz at 0: treat rounding-level third moments as 0
    m3[np.abs(m3) <= SKEW_FLOOR * d.max(axis=1) ** 3] = 0.0
    skew = np.cbrt(m3)
    return np.column_stack([mean, sd, skew]).ravel()
