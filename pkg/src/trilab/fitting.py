"""Shared log-log power-law fit record."""

from dataclasses import dataclass

from .util import fit_loglog


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    range: tuple  # (min, max) of the fitted abscissa

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared outside [0, 1]")

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared,
                "range": [self.range[0], self.range[1]]}


def fit_powerlaw(x, y):
    slope, intercept, r2 = fit_loglog(x, y)
    return ScalingFit(slope=slope, intercept=intercept, r_squared=r2,
                      range=(float(min(x)), float(max(x))))
