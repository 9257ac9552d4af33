"""Shared plumbing: seeded RNG streams, canonical JSON, config hashing."""

import hashlib
import json

import numpy as np

# stream ids so that independent components never share an RNG stream
STREAM = {
    "uniform_cube": 1,
    "cantor_jitter": 2,
    "mollify": 3,
    "frostman_centers": 4,
    "pushforward_mc": 5,
    "slab_mc": 6,
    "sigma_pair": 7,
    "sigma_radial": 8,
    "sigma_strat": 9,
    "lemma23": 10,
    "tail_freq": 11,
    "certify_interior": 12,
    "delta_stability": 13,
}


def rng_for(seed, stream, index=0):
    """Deterministic generator for (root seed, named stream, index)."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(STREAM[stream], int(index)))
    return np.random.default_rng(ss)


def canonical_json(obj):
    """Stable text form used for hashing and bit-identical output files."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)!r}")


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:16]


def dump_json(path, obj):
    with open(path, "w") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=1, default=_jsonable))
        fh.write("\n")


def fit_loglog(x, y):
    """Least-squares slope/intercept of log y vs log x, plus r^2."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)
