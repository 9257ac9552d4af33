"""Discrete approximations of compactly supported probability measures.

A measure is a weighted point cloud in [0,1]^d (or a declared box).  The
module provides Cantor-product and uniform-cube generators, mass-scaling
(Frostman) exponent fits, smooth-bump mollification, and Fourier evaluation
of the discrete measure.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.spatial.distance import cdist
from scipy.special import gamma

from . import kernels
from .util import rng_for

WEIGHT_TOL = 1e-12


class MeasureError(ValueError):
    pass


class InvalidSpec(MeasureError):
    pass


class InsufficientData(MeasureError):
    pass


@dataclass
class DiscreteMeasure:
    """Weighted point cloud; weights sum to 1 within 1e-12."""

    dim: int
    points: np.ndarray          # (n, dim) float64
    weights: np.ndarray         # (n,) float64, nonnegative
    box_lo: np.ndarray = None   # declared bounding box, default [0,1]^d
    box_hi: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.box_lo is None:
            self.box_lo = np.zeros(self.dim)
        if self.box_hi is None:
            self.box_hi = np.ones(self.dim)
        self.box_lo = np.asarray(self.box_lo, dtype=np.float64)
        self.box_hi = np.asarray(self.box_hi, dtype=np.float64)
        if self.dim < 1:
            raise InvalidSpec("dim must be >= 1")
        if self.points.ndim != 2 or self.points.shape[1] != self.dim:
            raise InvalidSpec("points must be (n, dim)")
        n = self.points.shape[0]
        if n < 1 or self.weights.shape != (n,):
            raise InvalidSpec("need n >= 1 points with matching weights")
        if np.any(self.weights < 0):
            raise InvalidSpec("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidSpec("weights must sum to 1 within 1e-12")
        eps = 1e-12
        if (np.any(self.points < self.box_lo - eps)
                or np.any(self.points > self.box_hi + eps)):
            raise InvalidSpec("points outside the declared bounding box")

    @property
    def n_points(self):
        return self.points.shape[0]

    def total_mass(self):
        return float(self.weights.sum())

    def to_dict(self):
        return {"dim": self.dim,
                "points": self.points.tolist(),
                "weights": self.weights.tolist(),
                "box": [self.box_lo.tolist(), self.box_hi.tolist()],
                "meta": self.meta}

    @classmethod
    def from_dict(cls, doc):
        box = doc.get("box")
        return cls(dim=int(doc["dim"]),
                   points=np.asarray(doc["points"], dtype=np.float64),
                   weights=np.asarray(doc["weights"], dtype=np.float64),
                   box_lo=None if box is None else np.asarray(box[0]),
                   box_hi=None if box is None else np.asarray(box[1]),
                   meta=doc.get("meta", {}))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class CantorSpec:
    """Axis-aligned Cantor product: ratio a in (0, 1/2), depth n levels.

    Nominal similarity dimension is d ln2 / ln(1/a).  Seed only drives the
    optional jitter, never the exact construction; jitter is the uniform
    displacement half-width in units of the final cell side a^n, at most 0.1.
    """

    dim: int
    ratio: float
    depth: int
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.ratio < 0.5:
            raise InvalidSpec("ratio must lie in (0, 1/2)")
        if self.depth < 1:
            raise InvalidSpec("depth must be >= 1")
        if self.dim < 1:
            raise InvalidSpec("dim must be >= 1")
        if not 0.0 <= self.jitter <= 0.1:
            raise InvalidSpec("jitter must lie in [0, 0.1] cell sides")

    @property
    def nominal_dimension(self):
        s = self.dim * np.log(2.0) / np.log(1.0 / self.ratio)
        assert 0.0 < s <= self.dim
        return s


@dataclass
class FrostmanEstimate:
    """Fitted mass-scaling exponent: max ball mass ~ c_hat * r^s_hat."""

    s_hat: float
    c_hat: float
    residual: float   # max positive log deviation of the data above the fit
    radii: np.ndarray = None
    max_mass: np.ndarray = None

    def to_dict(self):
        return {"s_hat": self.s_hat, "c_hat": self.c_hat,
                "residual": self.residual,
                "radii": None if self.radii is None else self.radii.tolist(),
                "max_mass": (None if self.max_mass is None
                             else self.max_mass.tolist())}


_PROFILES = {}


def _bump(r):
    # standard smooth bump, radial part, support strictly inside |x| < 1
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def profile_norm_constant(profile, dim):
    """Normalizer making the bump integrate to 1 over the unit ball.

    Computed once per (profile, dim) through radial quadrature and cached.
    """
    key = (profile, dim)
    if key in _PROFILES:
        return _PROFILES[key]
    if profile != "bump":
        raise InvalidSpec(f"unknown mollifier profile {profile!r}")
    area = 2.0 * np.pi ** (dim / 2.0) / gamma(dim / 2.0)  # |S^(d-1)|
    radial, err = quad(lambda r: np.exp(-1.0 / (1.0 - r * r)) * r ** (dim - 1),
                       0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    if err > 1e-9:
        raise MeasureError("profile normalization quadrature failed")
    c = 1.0 / (area * radial)
    _PROFILES[key] = c
    return c


def profile_density(profile, dim, r):
    """Radial probability density of the displacement length |x| / epsilon."""
    c = profile_norm_constant(profile, dim)
    area = 2.0 * np.pi ** (dim / 2.0) / gamma(dim / 2.0)
    return c * area * _bump(np.asarray(r, float)) * np.asarray(r, float) ** (dim - 1)


@dataclass
class MollifierSpec:
    """Smooth bump scaled to support radius epsilon."""

    epsilon: float
    profile: str = "bump"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidSpec("epsilon must be positive")
        # one-time numerical check that the profile normalizes to 1
        c = profile_norm_constant(self.profile, 1)
        val, _ = quad(lambda r: 2 * c * np.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0)
        if abs(val - 1.0) > 1e-9:
            raise InvalidSpec("profile does not integrate to 1")


def gen_cantor_product(spec):
    """Centers of the 2^(d n) surviving depth-n cells, equal weights."""
    a, n, d = spec.ratio, spec.depth, spec.dim
    ends = np.array([0.0])
    for k in range(n):
        ends = np.concatenate([ends, ends + (1.0 - a) * a ** k])
    centers = np.sort(ends) + a ** n / 2.0
    grids = np.meshgrid(*([centers] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    if spec.jitter > 0:
        rng = rng_for(spec.seed, "cantor_jitter")
        pts = pts + rng.uniform(-spec.jitter, spec.jitter, pts.shape) * a ** n
        pts = np.clip(pts, 0.0, 1.0)
    w = np.full(len(pts), 1.0 / len(pts))
    return DiscreteMeasure(dim=d, points=pts, weights=w,
                           meta={"generator": "cantor", "ratio": a,
                                 "depth": n, "seed": spec.seed,
                                 "jitter": spec.jitter})


def gen_uniform_cube(d, n_points, seed):
    """i.i.d. uniform samples in [0,1]^d with equal weights."""
    if d < 1:
        raise InvalidSpec("d must be >= 1")
    if n_points < 1:
        raise InvalidSpec("n_points must be >= 1")
    rng = rng_for(seed, "uniform_cube")
    pts = rng.random((n_points, d))
    w = np.full(n_points, 1.0 / n_points)
    return DiscreteMeasure(dim=d, points=pts, weights=w,
                           meta={"generator": "uniform", "seed": int(seed)})


def point_mass(x, dim=None):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    d = x.shape[1] if dim is None else dim
    lo = np.minimum(np.zeros(d), x.min(0))
    hi = np.maximum(np.ones(d), x.max(0))
    return DiscreteMeasure(dim=d, points=x, weights=np.array([1.0]),
                           box_lo=lo, box_hi=hi)


def _ball_masses(mu, centers, radii):
    """max over centers of mu(B(x, r)) for each radius."""
    out = np.zeros(len(radii))
    block = max(1, int(2**22 / max(mu.n_points, 1)))
    for start in range(0, len(centers), block):
        D = cdist(centers[start:start + block], mu.points)
        for i, r in enumerate(radii):
            masses = (D <= r) @ mu.weights
            m = masses.max()
            if m > out[i]:
                out[i] = m
    return out


def estimate_frostman(mu, radii, n_centers=512, seed=0):
    """Fit max ball mass against radius on a log-log scale.

    Centers are a subsample of the support (at most n_centers points); the
    scaling condition is a sup bound so maxima over sampled centers are used.
    c_hat is the smallest constant making mass <= c_hat * r^s_hat hold on the
    evaluated grid; residual is the max log excess over the least-squares fit.
    """
    radii = np.asarray(radii, dtype=np.float64)
    if len(radii) < 4:
        raise InsufficientData("need at least 4 radii")
    if np.any(np.diff(radii) >= 0):
        raise InvalidSpec("radii must be strictly decreasing")
    if radii[0] > 1.0 or radii[-1] <= 0.0:
        raise InvalidSpec("radii must lie in (0, 1]")
    rng = rng_for(seed, "frostman_centers")
    k = min(mu.n_points, n_centers)
    idx = rng.choice(mu.n_points, size=k, replace=False)
    mm = _ball_masses(mu, mu.points[idx], radii)
    if np.any(mm <= 0):
        raise InsufficientData("zero ball mass encountered")
    lr, lm = np.log(radii), np.log(mm)
    s_hat, intercept = np.polyfit(lr, lm, 1)
    s_hat = float(np.clip(s_hat, 0.0, mu.dim))
    residual = float(np.max(lm - (s_hat * lr + intercept)))
    c_hat = float(np.exp(np.max(lm - s_hat * lr)))
    return FrostmanEstimate(s_hat=s_hat, c_hat=c_hat, residual=residual,
                            radii=radii, max_mass=mm)


def frostman_violation(mu, s, c_mu, radii=None, n_centers=512, seed=0):
    """Largest log violation of mu(B(x,r)) <= c_mu r^s on the sampled grid.

    Positive means the declared profile provably fails at some scale.
    """
    if radii is None:
        radii = np.array([2.0 ** -k for k in range(1, 9)])
    radii = np.asarray(radii, dtype=np.float64)
    rng = rng_for(seed, "frostman_centers", 1)
    k = min(mu.n_points, n_centers)
    idx = rng.choice(mu.n_points, size=k, replace=False)
    mm = _ball_masses(mu, mu.points[idx], radii)
    good = mm > 0
    if not np.any(good):
        return 0.0
    return float(np.max(np.log(mm[good]) - (np.log(c_mu) + s * np.log(radii[good]))))


def estimate_boxcount(points, sizes):
    """Box-counting exponent of a point set (independent dimension oracle)."""
    sizes = np.asarray(sizes, dtype=np.float64)
    counts = []
    for b in sizes:
        cells = np.floor(points / b).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))
    slope = -np.polyfit(np.log(sizes), np.log(counts), 1)[0]
    return float(slope), np.asarray(counts)


def sample_bump_displacements(dim, n, rng, profile="bump"):
    """Unit-ball displacements with density c * exp(-1/(1-|x|^2)).

    Rejection sampling against the flat ball proposal; the bump peaks at the
    origin with value exp(-1).
    """
    out = np.empty((n, dim))
    filled = 0
    while filled < n:
        m = max(1024, 2 * (n - filled))
        cand = rng.uniform(-1.0, 1.0, (m, dim))
        r2 = (cand ** 2).sum(1)
        u = rng.random(m)
        inside = r2 < 1.0
        accept = inside & (u < np.exp(1.0 - 1.0 / np.maximum(1.0 - r2, 1e-300)))
        take = cand[accept][:n - filled]
        out[filled:filled + len(take)] = take
        filled += len(take)
    return out


def mollify_sample(mu, moll, seed):
    """One sample path of the mollified measure mu * phi_eps.

    Each point moves by an i.i.d. draw from the bump density scaled to
    radius epsilon; weights are untouched so total mass is preserved
    bit-exactly.
    """
    rng = rng_for(seed, "mollify")
    disp = sample_bump_displacements(mu.dim, mu.n_points, rng, moll.profile)
    pts = mu.points + moll.epsilon * disp
    meta = dict(mu.meta)
    meta.update({"mollified_eps": moll.epsilon, "mollify_seed": int(seed)})
    return DiscreteMeasure(dim=mu.dim, points=pts, weights=mu.weights.copy(),
                           box_lo=mu.box_lo - moll.epsilon,
                           box_hi=mu.box_hi + moll.epsilon, meta=meta)


def measure_fourier(mu, xi):
    """Fourier transform sum_i w_i exp(-2 pi i x_i . xi) at one frequency."""
    xi = np.asarray(xi, dtype=np.float64)
    if not np.all(np.isfinite(xi)):
        raise InvalidSpec("frequency must be finite")
    return complex(kernels.expsum(mu.points, mu.weights,
                                  np.ascontiguousarray(xi[None, :]))[0])


def measure_fourier_batch(mu, freqs):
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    return kernels.expsum(mu.points, mu.weights, freqs)
