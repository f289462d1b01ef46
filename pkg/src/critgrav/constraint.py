"""Prospective exclusion curve |alpha|(lambda) from the splitting resolution.

Chain: splitting resolution -> minimum detectable shift (critical-tracking
inversion) -> shift floor on the 58Ni/64Ni difference -> |alpha| per lambda.

Differentiating the plate force gives dF/da = exp(-a/lam) G m rho alpha 2 pi
(no leftover lambda), so the bound is

    |alpha| = omega_b * floor * exp(a / lam) / (G pi (rho_64 - rho_58)).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import measurement
from .errors import AssumptionViolation, ConfigError, OutOfRange
from .yukawa import G_NEWTON, PLATE_LAMBDA_MAX, IsotopePair

log = logging.getLogger(__name__)

DEFAULT_LAMBDA_MIN = 3e-10
DEFAULT_LAMBDA_MAX = 1e-6
DEFAULT_LAMBDA_NUM = 200
# ours must undercut a prior by more than interpolation rounding to count
STRINGENT_RTOL = 1e-9


def log_grid(lo: float, hi: float, num: int) -> List[float]:
    """Log-spaced grid whose endpoints are exactly ``lo`` and ``hi``."""
    if num < 2 or not 0 < lo < hi:
        raise ValueError("log_grid needs num >= 2 and 0 < lo < hi")
    grid = [float(x) for x in np.logspace(math.log10(lo), math.log10(hi), num)]
    grid[0], grid[-1] = float(lo), float(hi)
    return grid


@dataclass(frozen=True)
class ConstraintInput:
    omega_b: float
    delta_c: float
    delta_d_min: float
    pair: IsotopePair = field(default_factory=IsotopePair)
    separation_a: float = 5e-9
    lambda_grid: Tuple[float, ...] = tuple(log_grid(DEFAULT_LAMBDA_MIN, DEFAULT_LAMBDA_MAX, DEFAULT_LAMBDA_NUM))
    g_newton: float = G_NEWTON
    bracket: Optional[Tuple[float, float]] = None
    rtol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        lg = self.lambda_grid
        if not lg:
            raise ValueError("lambda_grid must be nonempty")
        if lg[0] <= 0 or any(b <= a for a, b in zip(lg, lg[1:])):
            raise ValueError("lambda_grid must be positive and strictly increasing")
        if lg[-1] > PLATE_LAMBDA_MAX:
            raise AssumptionViolation(f"lambda_grid extends past {PLATE_LAMBDA_MAX:g} m")
        if not self.delta_d_min > 0:
            raise ValueError("delta_d_min must be > 0")
        if self.bracket is not None:
            object.__setattr__(self, "bracket", (float(self.bracket[0]), float(self.bracket[1])))

    def as_dict(self) -> Dict:
        d = asdict(self)
        d["lambda_grid"] = list(self.lambda_grid)
        d["bracket"] = None if self.bracket is None else list(self.bracket)
        return d

    @classmethod
    def from_dict(cls, d: Dict) -> "ConstraintInput":
        d = dict(d)
        d["pair"] = IsotopePair(**d["pair"])
        d["lambda_grid"] = tuple(d["lambda_grid"])
        if d.get("bracket") is not None:
            d["bracket"] = tuple(d["bracket"])
        return cls(**d)


@dataclass(frozen=True)
class ExclusionCurve:
    points: Tuple[Tuple[float, float], ...]
    meta: Dict

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class PriorBound:
    label: str
    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError(f"prior {self.label!r} needs at least two points")
        if any(l <= 0 or a <= 0 for l, a in pts):
            raise ValueError(f"prior {self.label!r} has non-positive values")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError(f"prior {self.label!r} must be strictly increasing in lambda")

    @property
    def span(self) -> Tuple[float, float]:
        return self.points[0][0], self.points[-1][0]

    def covers(self, lam: float) -> bool:
        lo, hi = self.span
        return lo <= lam <= hi

    def __call__(self, lam: float) -> float:
        """Log-log linear interpolation; raises OutOfRange outside the span."""
        if not self.covers(lam):
            raise OutOfRange(f"lambda={lam!r} outside {self.label!r} span {self.span}")
        for l, a in self.points:
            if l == lam:
                return a
        x = np.log([p[0] for p in self.points])
        y = np.log([p[1] for p in self.points])
        return float(np.exp(np.interp(math.log(lam), x, y)))


def read_prior_csv(path, label: Optional[str] = None) -> PriorBound:
    """Read a digitized bound with header ``lambda_m,abs_alpha``; rows are sorted on load."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["lambda_m", "abs_alpha"]:
            raise ConfigError(f"{path}: expected header 'lambda_m,abs_alpha', got {reader.fieldnames}")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                rows.append((float(row["lambda_m"]), float(row["abs_alpha"])))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}:{i}: bad row {row}") from exc
    if label is None:
        label = Path(path).stem
    try:
        return PriorBound(label, tuple(sorted(rows)))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def min_detectable_difference(inp: ConstraintInput) -> measurement.InversionResult:
    """Shift floor on the differential shift, taken equal to the minimum detectable |shift|."""
    return measurement.invert_min_shift(
        inp.omega_b, inp.delta_c, inp.delta_d_min, bracket=inp.bracket, rtol=inp.rtol
    )


def alpha_bound(lam: float, shift_floor: float, inp: ConstraintInput) -> float:
    if lam > PLATE_LAMBDA_MAX:
        raise AssumptionViolation(f"lambda={lam!r} exceeds {PLATE_LAMBDA_MAX:g} m")
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    return (
        inp.omega_b * abs(shift_floor) * math.exp(inp.separation_a / lam)
        / (inp.g_newton * math.pi * inp.pair.gap)
    )


def exclusion_curve(inp: ConstraintInput, shift_floor: Optional[float] = None) -> ExclusionCurve:
    """Bound over ``inp.lambda_grid``. ``shift_floor`` skips the inversion when given."""
    meta = {"input": inp.as_dict()}
    if shift_floor is None:
        inv = min_detectable_difference(inp)
        shift_floor = inv.min_detectable_shift
        meta["inversion"] = inv.as_dict()
        meta["shift_floor_source"] = "inversion"
    else:
        meta["shift_floor_source"] = "override"
    meta["shift_floor"] = shift_floor
    points = tuple((lam, alpha_bound(lam, shift_floor, inp)) for lam in inp.lambda_grid)
    return ExclusionCurve(points, meta)


def exclusion_curve_from_meta(meta: Dict) -> ExclusionCurve:
    inp = ConstraintInput.from_dict(meta["input"])
    floor = meta["shift_floor"] if meta.get("shift_floor_source") == "override" else None
    return exclusion_curve(inp, floor)


@dataclass(frozen=True)
class ComparisonReport:
    lambda_query: float
    ours_at_query: float
    ratios: Dict[str, float]
    skipped: Tuple[str, ...]
    stringent_regions: Tuple[Tuple[float, float], ...]

    def as_dict(self):
        return {
            "lambda_query": self.lambda_query,
            "ours_at_query": self.ours_at_query,
            "ratios": dict(self.ratios),
            "skipped": list(self.skipped),
            "stringent_regions": [list(r) for r in self.stringent_regions],
        }


def _curve_at(curve: ExclusionCurve, lam: float) -> float:
    ours = PriorBound("ours", curve.points)
    return ours(lam)


def compare_bounds(ours: ExclusionCurve, priors: Sequence[PriorBound], lambda_query: float) -> ComparisonReport:
    """Ratios prior/ours at ``lambda_query`` and where ours beats every covering prior.

    A ratio above 1 means our bound is tighter by that factor. Priors that
    do not span ``lambda_query`` are skipped with a warning. A grid point
    counts as stringent when at least one prior covers it and ours is below
    all covering priors by more than ``STRINGENT_RTOL``.
    """
    ours_q = _curve_at(ours, lambda_query)
    ratios, skipped = {}, []
    for p in priors:
        if not p.covers(lambda_query):
            log.warning("prior %r does not span lambda=%g; skipped", p.label, lambda_query)
            skipped.append(p.label)
            continue
        ratios[p.label] = p(lambda_query) / ours_q
    flags = []
    for lam, a in ours.points:
        covering = [p(lam) for p in priors if p.covers(lam)]
        flags.append(bool(covering) and a < min(covering) * (1 - STRINGENT_RTOL))
    regions, start = [], None
    lams = [p[0] for p in ours.points]
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(flags) - 1):
            end = i if flag else i - 1
            regions.append((lams[start], lams[end]))
            start = None
    return ComparisonReport(lambda_query, ours_q, ratios, tuple(skipped), tuple(regions))
