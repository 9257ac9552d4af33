"""Stopping-time cube subdivision extracting three separated mass carriers.

The unit cube is recursively split into 4^d quarter-side cells; cells are
grouped into 2^d parity collections whose members never touch, and a
pigeonhole argument walks down the tree until one collection holds three
cells of positive mass.  The result is certified: lower mass bound c1,
coordinate-gap constant c2, and conservative angle bounds c3 <= alpha <= c4
(angle at a vertex in the third cube) strictly inside (0, pi/2).
"""

import itertools
from dataclasses import dataclass, field, replace
from math import ceil, log2

import numpy as np

from .kernels import triangle_geom
from .util import rng_for

DEFAULT_ANGLE_TOL = 1e-3


class SeparatorError(ValueError):
    pass


class ExhaustedIterations(SeparatorError):
    """Subdivision hit the scaling-bound iteration cap without three cells.

    Signals that the input does not behave like its declared mass profile.
    """


class RefinementFailed(SeparatorError):
    """No subdivision/role choice produced angle bounds inside (0, pi/2)."""


class InvalidSeparation(SeparatorError):
    pass


@dataclass(frozen=True)
class CubeAddress:
    """Dyadic-squared cell: side 4^-level, integer coords in {0..4^level-1}^d."""

    level: int
    coords: tuple

    def __post_init__(self):
        if self.level < 0:
            raise SeparatorError("level must be >= 0")
        n = 4 ** self.level
        if not all(0 <= k < n for k in self.coords):
            raise SeparatorError("coordinates out of range for level")

    @property
    def dim(self):
        return len(self.coords)

    @property
    def side(self):
        return 4.0 ** -self.level

    def bounds(self):
        lo = np.asarray(self.coords, dtype=np.float64) * self.side
        return lo, lo + self.side

    def children(self):
        base = tuple(4 * k for k in self.coords)
        out = []
        for off in itertools.product(range(4), repeat=self.dim):
            out.append(CubeAddress(self.level + 1,
                                   tuple(b + o for b, o in zip(base, off))))
        return out

    def contains(self, pts):
        """Half-open membership consistent with cell_of (top face closed at 1)."""
        idx = cell_of(np.atleast_2d(pts), self.level)
        return np.all(idx == np.asarray(self.coords), axis=1)

    def to_dict(self):
        return {"level": self.level, "coords": list(self.coords)}

    @classmethod
    def from_dict(cls, doc):
        return cls(level=int(doc["level"]), coords=tuple(doc["coords"]))


def cell_of(pts, level):
    """Cell coordinates of points in [0,1]^d at the given level (half-open)."""
    n = 4 ** level
    return np.minimum((np.asarray(pts) * n).astype(np.int64), n - 1)


def collections_of(cube):
    """Partition the 4^d children into 2^d non-touching parity collections.

    A collection fixes each axis child-index to parity p: indices {p, p+2}.
    Two distinct members differ by 2 in some axis, so they are separated by
    at least one child side in that coordinate.
    """
    d = cube.dim
    base = tuple(4 * k for k in cube.coords)
    out = []
    for parity in itertools.product(range(2), repeat=d):
        cubes = []
        for off in itertools.product(range(2), repeat=d):
            child = tuple(b + p + 2 * o for b, p, o in zip(base, parity, off))
            cubes.append(CubeAddress(cube.level + 1, child))
        out.append(cubes)
    return out


@dataclass
class Separation:
    """Three disjoint cells with positive mass and certified constants."""

    cubes: tuple                 # three CubeAddress, angle vertex in cubes[2]
    members: tuple               # three index arrays into the source points
    c1: float = 0.0              # min subset mass
    c2: float = 0.0              # coordinate-gap constant
    c3: float = 0.0              # certified angle lower bound
    c4: float = np.pi            # certified angle upper bound
    iterations: int = 0          # stopping-time subdivision level
    refine_rounds: int = 0
    tracked_bound: float = 1.0   # running pigeonhole mass bound at stop time

    def angle_ok(self, tol=DEFAULT_ANGLE_TOL):
        return self.c3 > tol and self.c4 < np.pi / 2 - tol

    def validate(self, mu):
        if not (self.c1 > 0 and self.c2 > 0):
            raise InvalidSeparation("c1, c2 must be positive")
        if not (0 < self.c3 <= self.c4 < np.pi / 2):
            raise InvalidSeparation("need 0 < c3 <= c4 < pi/2")
        sets = [set(map(int, m)) for m in self.members]
        for i in range(3):
            for j in range(i + 1, 3):
                if sets[i] & sets[j]:
                    raise InvalidSeparation("member sets overlap")
        for cube, mem in zip(self.cubes, self.members):
            if len(mem) == 0:
                raise InvalidSeparation("empty member set")
            if not np.all(cube.contains(mu.points[np.asarray(mem)])):
                raise InvalidSeparation("member point outside its cube")
        return True

    def to_dict(self):
        return {"cubes": [c.to_dict() for c in self.cubes],
                "members": [list(map(int, m)) for m in self.members],
                "c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4,
                "iterations": self.iterations,
                "refine_rounds": self.refine_rounds}

    @classmethod
    def from_dict(cls, doc):
        return cls(cubes=tuple(CubeAddress.from_dict(c) for c in doc["cubes"]),
                   members=tuple(np.asarray(m, dtype=np.int64)
                                 for m in doc["members"]),
                   c1=doc["c1"], c2=doc["c2"], c3=doc["c3"], c4=doc["c4"],
                   iterations=int(doc["iterations"]),
                   refine_rounds=int(doc.get("refine_rounds", 0)))


# ---------------------------------------------------------------------------
# certified angle bounds over box triples


def _interval_angle(bx, by, bz):
    """Interval-arithmetic outer bounds on angle(x-z, y-z) over boxes."""
    ulo, uhi = bx[0] - bz[1], bx[1] - bz[0]
    vlo, vhi = by[0] - bz[1], by[1] - bz[0]
    prods = np.stack([ulo * vlo, ulo * vhi, uhi * vlo, uhi * vhi])
    dlo = prods.min(axis=0).sum()
    dhi = prods.max(axis=0).sum()

    def norm2(lo, hi):
        lo2 = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(lo ** 2, hi ** 2))
        return lo2.sum(), np.maximum(lo ** 2, hi ** 2).sum()

    un_lo, un_hi = norm2(ulo, uhi)
    vn_lo, vn_hi = norm2(vlo, vhi)
    if un_lo <= 0 or vn_lo <= 0:
        return 0.0, np.pi
    den_lo = np.sqrt(un_lo * vn_lo)
    den_hi = np.sqrt(un_hi * vn_hi)
    cos_hi = dhi / den_lo if dhi >= 0 else dhi / den_hi
    cos_lo = dlo / den_hi if dlo >= 0 else dlo / den_lo
    return (float(np.arccos(np.clip(cos_hi, -1, 1))),
            float(np.arccos(np.clip(cos_lo, -1, 1))))


def _box_distance(a, b):
    gap = np.maximum(np.maximum(b[0] - a[1], a[0] - b[1]), 0.0)
    return float(np.linalg.norm(gap))


def _grid(box, m):
    axes = [np.linspace(lo, hi, m) for lo, hi in zip(box[0], box[1])]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _grid_points_per_axis(d):
    return {1: 6, 2: 5, 3: 3}.get(d, 2)


def angle_bounds_boxes(bx, by, bz, n_interior=1000):
    """Certified outer bounds on the vertex angle over a box triple.

    Combines crude interval arithmetic with a grid sweep widened by the
    certified slack of the angle map: the angle is 1/|u|-smooth in x,
    1/|v|-smooth in y and the sum of both in the vertex, so a grid of
    covering radius rho cannot miss extremes by more than L.rho per box.
    Random interior triples sharpen the empirical range used by callers
    (they must land inside the certified interval).
    """
    lo1, hi1 = _interval_angle(bx, by, bz)
    umin = _box_distance(bx, bz)
    vmin = _box_distance(by, bz)
    if umin <= 0.0 or vmin <= 0.0:
        return max(lo1, 0.0), min(hi1, np.pi), (np.nan, np.nan)
    d = len(bx[0])
    m = _grid_points_per_axis(d)
    lx, ly = 1.0 / umin, 1.0 / vmin
    lips = (lx, ly, lx + ly)
    rad = []
    for box in (bx, by, bz):
        span = (box[1] - box[0])
        spacing = span / (m - 1) if m > 1 else span
        rad.append(float(np.linalg.norm(spacing / 2.0)))
    widen = sum(L * r for L, r in zip(lips, rad))

    gx, gy, gz = _grid(bx, m), _grid(by, m), _grid(bz, m)
    amin, amax = np.inf, -np.inf
    for z in gz:
        u = gx[:, None, :] - z
        v = gy[None, :, :] - z
        nu = np.linalg.norm(u, axis=2)
        nv = np.linalg.norm(v, axis=2)
        aa = np.linalg.norm(nv[..., None] * u - nu[..., None] * v, axis=2)
        bb = np.linalg.norm(nv[..., None] * u + nu[..., None] * v, axis=2)
        ang = 2.0 * np.arctan2(aa, bb)
        amin = min(amin, float(ang.min()))
        amax = max(amax, float(ang.max()))

    emp = (amin, amax)
    if n_interior > 0:
        rng = rng_for(0, "certify_interior")
        u01 = rng.random((n_interior, 3, d))
        px = bx[0] + u01[:, 0] * (bx[1] - bx[0])
        py = by[0] + u01[:, 1] * (by[1] - by[0])
        pz = bz[0] + u01[:, 2] * (bz[1] - bz[0])
        _, _, ang, _ = triangle_geom(px, py, pz)
        emp = (min(amin, float(ang.min())), max(amax, float(ang.max())))

    lo = max(lo1, amin - widen, 0.0)
    hi = min(hi1, amax + widen, np.pi)
    return lo, hi, emp


# ---------------------------------------------------------------------------
# certification and the stopping-time walk


def _subset_mass(mu, members):
    return float(mu.weights[np.asarray(members, dtype=np.int64)].sum())


def _members_in(mu, cube):
    inside = cube.contains(mu.points) & (mu.weights > 0)
    return np.nonzero(inside)[0]


def certify(sep, mu):
    """Fill c1..c4 from the cubes and member sets; deterministic."""
    members = tuple(np.asarray(m, dtype=np.int64) for m in sep.members)
    if any(len(m) == 0 for m in members):
        raise InvalidSeparation("empty member set")
    c1 = min(_subset_mass(mu, m) for m in members)
    bounds = [c.bounds() for c in sep.cubes]
    gaps = []
    for i in range(3):
        for j in range(i + 1, 3):
            per_coord = np.maximum(
                np.maximum(bounds[j][0] - bounds[i][1],
                           bounds[i][0] - bounds[j][1]), 0.0)
            gaps.append(per_coord.max())
    c2 = float(min(gaps))
    lo, hi, emp = angle_bounds_boxes(bounds[0], bounds[1], bounds[2])
    if np.isfinite(emp[0]) and not (lo - 1e-12 <= emp[0] and emp[1] <= hi + 1e-12):
        raise InvalidSeparation("sampled angle escaped the certified interval")
    return replace(sep, members=members, c1=c1, c2=c2, c3=lo, c4=hi)


def _positive_children(mu, cube, idx):
    """Children of cube with positive mass, ranked by (mass desc, address)."""
    pts = mu.points[idx]
    cells = cell_of(pts, cube.level + 1)
    out = []
    seen = {}
    for row, cell in enumerate(map(tuple, cells)):
        seen.setdefault(cell, []).append(row)
    for cell, rows in seen.items():
        sub = idx[rows]
        m = float(mu.weights[sub].sum())
        if m > 0:
            out.append((m, CubeAddress(cube.level + 1, cell), sub))
    out.sort(key=lambda t: (-t[0], t[1].coords))
    return out


def refine_for_angles(sep, mu, max_rounds=8, tol=DEFAULT_ANGLE_TOL):
    """Shrink the three cells (and possibly permute the vertex role) until
    the certified angle interval sits strictly inside (0, pi/2).

    Each round subdivides every cell, keeps positive-mass children, and
    scores candidate triples over all three vertex-role assignments; valid
    candidates win by largest min subset mass, otherwise the interval
    closest to validity is kept for the next round.  Collinear atoms can
    never produce a valid interval, which surfaces as RefinementFailed.
    """
    if sep.angle_ok(tol):
        return sep
    current = sep
    for round_no in range(1, max_rounds + 1):
        cand_children = []
        for cube, mem in zip(current.cubes, current.members):
            kids = _positive_children(mu, cube, np.asarray(mem, dtype=np.int64))
            if not kids:
                raise RefinementFailed("a cell lost all mass under subdivision")
            cand_children.append(kids[:4])
        best_valid = None
        best_fallback = None
        for ka in cand_children[0]:
            for kb in cand_children[1]:
                for kc in cand_children[2]:
                    triple = (ka, kb, kc)
                    for roles in ((0, 1, 2), (2, 1, 0), (0, 2, 1)):
                        picked = [triple[r] for r in roles]
                        boxes = [p[1].bounds() for p in picked]
                        lo, hi, _ = angle_bounds_boxes(*boxes, n_interior=0)
                        mass_min = min(p[0] for p in picked)
                        if lo > tol and hi < np.pi / 2 - tol:
                            key = (mass_min, -(hi - lo))
                            if best_valid is None or key > best_valid[0]:
                                best_valid = (key, picked)
                        else:
                            badness = (max(0.0, hi - (np.pi / 2 - tol))
                                       + max(0.0, tol - lo))
                            key = (-badness, mass_min)
                            if best_fallback is None or key > best_fallback[0]:
                                best_fallback = (key, picked)
        chosen = best_valid or best_fallback
        picked = chosen[1]
        current = replace(current,
                          cubes=tuple(p[1] for p in picked),
                          members=tuple(p[2] for p in picked),
                          refine_rounds=round_no)
        current = certify(current, mu)
        if best_valid is not None and current.angle_ok(tol):
            return current
    raise RefinementFailed(
        f"angle interval still touches (0, pi/2) after {max_rounds} rounds "
        "(degenerate, e.g. collinear, mass?)")


def iteration_bound(c_mu, s, d):
    """Scaling-bound cap on subdivision depth: (log2 C + 1) / (2s - (d+1))."""
    denom = 2.0 * s - (d + 1)
    if denom <= 0:
        raise SeparatorError("need s > (d+1)/2")
    return int(ceil((log2(c_mu) + 1.0) / denom))


def separate_three(mu, c_mu, s, max_iter_override=None, auto_refine=True,
                   tol=DEFAULT_ANGLE_TOL):
    """Run the stopping-time subdivision on a measure over [0,1]^d.

    Walks the quarter-side subdivision picking the heaviest parity
    collection each level.  With tau = (current mass) * 4^-d as the
    qualification threshold: three qualifying cells stop the walk; three
    merely positive cells also stop it (the pigeonhole fallback); two
    positive cells recurse into the heavier one (mass at least half the
    collection); a single positive cell carries the whole collection.
    Raises ExhaustedIterations past the scaling-bound depth, which certifies
    that the input violates its declared mass profile.
    """
    d = mu.dim
    if 2.0 * s <= d + 1:
        raise SeparatorError("need s > (d+1)/2 for the iteration bound")
    if c_mu < 1.0:
        raise SeparatorError("c_mu must be >= 1 (rescale the profile)")
    if np.count_nonzero(mu.weights > 0) < 3:
        raise SeparatorError("need at least 3 points with positive weight")
    if np.any(mu.points < -1e-12) or np.any(mu.points > 1 + 1e-12):
        raise SeparatorError("separate_three expects support in [0,1]^d")
    max_iter = (iteration_bound(c_mu, s, d) if max_iter_override is None
                else int(max_iter_override))

    cur = CubeAddress(0, (0,) * d)
    cur_idx = np.nonzero(mu.weights > 0)[0]
    cur_mass = _subset_mass(mu, cur_idx)
    tracked = 1.0

    for level in range(1, max_iter + 1):
        cells = _positive_children(mu, cur, cur_idx)
        by_parity = {}
        for m, cube, sub in cells:
            parity = tuple(c % 2 for c in cube.coords)
            by_parity.setdefault(parity, []).append((m, cube, sub))
        best_parity, best_mass = None, -1.0
        for parity in sorted(by_parity):
            mass = sum(m for m, _, _ in by_parity[parity])
            if mass > best_mass + 1e-15:
                best_parity, best_mass = parity, mass
        coll = sorted(by_parity[best_parity], key=lambda t: (-t[0], t[1].coords))
        tau = cur_mass * 4.0 ** -d
        n_qual = sum(1 for m, _, _ in coll if m >= tau)
        n_pos = len(coll)

        if n_qual >= 3 or n_pos >= 3:
            picked = coll[:3]
            sep = Separation(cubes=tuple(c for _, c, _ in picked),
                             members=tuple(sub for _, _, sub in picked),
                             iterations=level, tracked_bound=tracked)
            sep = certify(sep, mu)
            if auto_refine and not sep.angle_ok(tol):
                sep = refine_for_angles(sep, mu, tol=tol)
            sep.validate(mu)
            return sep
        if n_pos == 0:
            raise SeparatorError("positive-mass cube vanished (inconsistent weights)")
        # one or two positive cells: recurse into the heaviest
        m1, cube1, sub1 = coll[0]
        if n_pos == 1:
            tracked *= 2.0 ** -d          # cell carries the whole collection
        elif m1 >= cur_mass * 2.0 ** -d:
            tracked *= 2.0 ** -d          # case (2a)
        else:
            tracked *= 2.0 ** -(d + 1)    # case (2b)
        cur, cur_idx, cur_mass = cube1, sub1, m1

    raise ExhaustedIterations(
        f"no three-cell collection within {max_iter} levels; the input "
        "violates its declared scaling profile (s={}, c_mu={})".format(s, c_mu))
