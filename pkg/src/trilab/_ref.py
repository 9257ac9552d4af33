"""Pure-numpy reference implementations of the hot kernels.

Same contracts as the compiled module `trilab._core`; used as the import-time
fallback and as the comparison baseline in benchmarks/tests.
"""

import numpy as np

BACKEND = "python"

TWO_PI = 2.0 * np.pi


def expsum(points, weights, freqs):
    """sum_i w_i exp(-2 pi i x_i . xi_j) for each row xi_j of freqs."""
    phase = points @ freqs.T  # (n, m)
    re = weights @ np.cos(TWO_PI * phase)
    im = weights @ np.sin(TWO_PI * phase)
    return re - 1j * im


def triangle_geom(x, y, z):
    """Side lengths and included angle at z for row-aligned triples.

    Returns (t, r, alpha, degenerate) where degenerate flags coincident
    vertices or angles within 1e-12 of 0 or pi.  The angle uses the
    two-norm atan2 form, symmetric in (u, v) so swapping x and y gives
    bit-identical alpha.
    """
    u = x - z
    v = y - z
    t = np.linalg.norm(u, axis=-1)
    r = np.linalg.norm(v, axis=-1)
    a = np.linalg.norm(r[..., None] * u - t[..., None] * v, axis=-1)
    b = np.linalg.norm(r[..., None] * u + t[..., None] * v, axis=-1)
    alpha = 2.0 * np.arctan2(a, b)
    deg = (t == 0.0) | (r == 0.0) | (alpha < 1e-12) | (alpha > np.pi - 1e-12)
    return t, r, alpha, deg


def pairwise_geom(p1, p2, z):
    """Geometry of all (i, j) triples sharing the vertex z.

    Returns (t (n1,), r (n2,), alpha (n1, n2), degenerate (n1, n2)).
    """
    u = p1 - z
    v = p2 - z
    t = np.linalg.norm(u, axis=1)
    r = np.linalg.norm(v, axis=1)
    ru = r[None, :, None] * u[:, None, :]
    tv = t[:, None, None] * v[None, :, :]
    a = np.linalg.norm(ru - tv, axis=2)
    b = np.linalg.norm(ru + tv, axis=2)
    alpha = 2.0 * np.arctan2(a, b)
    deg = ((t == 0.0)[:, None] | (r == 0.0)[None, :]
           | (alpha < 1e-12) | (alpha > np.pi - 1e-12))
    return t, r, alpha, deg


def sigma_pair_phase(x, y, xis, etas):
    """Phase statistics of exp(-2 pi i (x.xi + y.eta)) over sample rows.

    Returns (sum cos, sum sin, sum cos^2, sum sin^2), each shaped (m,).
    """
    phase = TWO_PI * (x @ xis.T + y @ etas.T)
    c = np.cos(phase)
    s = np.sin(phase)
    return c.sum(0), s.sum(0), (c * c).sum(0), (s * s).sum(0)


def disk_envelope(rho, d):
    """Fourier transform of the uniform measure on S^(d-2) at radius rho."""
    z = TWO_PI * rho
    if d == 2:
        return np.cos(z)
    if d == 3:
        from scipy.special import j0
        return j0(z)
    if d == 4:
        return np.where(z < 1e-12, 1.0, np.sin(z) / np.where(z == 0, 1.0, z))
    if d == 5:
        from scipy.special import j1
        small = z < 1e-12
        zs = np.where(small, 1.0, z)
        return np.where(small, 1.0, 2.0 * j1(zs) / zs)
    from scipy.special import gamma, jv
    m = d - 1  # complement sphere S^(m-1) lives in m dims
    nu = (m - 2) / 2.0
    small = z < 1e-12
    zs = np.where(small, 1.0, z)
    val = gamma(m / 2.0) * (zs / 2.0) ** (-nu) * jv(nu, zs)
    return np.where(small, 1.0, val)


def disk_strat_eval(pts, etap, kap, eta_sq, sin_alpha, d):
    """sum and sum-of-squares of envelope(rho) * cos(2 pi p.kappa) terms."""
    s = pts @ etap
    rho = sin_alpha * np.sqrt(np.maximum(eta_sq - s * s, 0.0))
    h = disk_envelope(rho, d) * np.cos(TWO_PI * (pts @ kap))
    return float(h.sum()), float((h * h).sum())
