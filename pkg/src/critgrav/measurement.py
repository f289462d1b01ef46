"""Response of the normal-mode splitting to a mechanical frequency shift.

Two coupling policies are supported:

* ``fixed_g``: the coupling is held at the working point's ``g_lin`` while
  omega_b moves to omega_b + shift.
* ``critical_tracking``: the coupling is set to the critical coupling of the
  *shifted* oscillator, sqrt(Delta (omega_b + shift)) / 2, in both the
  shifted and unshifted splittings. The shifted lower mode is then exactly
  zero and drops out, leaving three terms.

Differences of branch frequencies are formed from differences of their
squares (numerator identities, no subtraction of nearly equal roots), so the
response stays accurate both for tiny shifts and far from criticality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import BracketInvalid, GridExceedsCritical, InversionError, UnstableWorkingPoint
from .modes import (
    ModeSpectrum,
    Regime,
    WorkingPoint,
    _spectrum_from_squares,
    _squared_modes,
    critical_coupling,
    default_eps_crit,
)


class CouplingPolicy(str, enum.Enum):
    FIXED_G = "fixed_g"
    CRITICAL_TRACKING = "critical_tracking"


class Independent(str, enum.Enum):
    COUPLING = "coupling"
    FREQUENCY_SHIFT = "frequency_shift"


@dataclass(frozen=True)
class ShiftScenario:
    base: WorkingPoint
    delta_omega_b: float
    coupling_policy: CouplingPolicy = CouplingPolicy.FIXED_G

    def __post_init__(self):
        object.__setattr__(self, "coupling_policy", CouplingPolicy(self.coupling_policy))
        if not self.base.omega_b + self.delta_omega_b > 0:
            raise ValueError("omega_b + delta_omega_b must be > 0")


@dataclass(frozen=True)
class ResponseCurve:
    samples: Tuple[Tuple[float, float], ...]
    independent: Independent

    def to_rows(self):
        return [(x, dd) for x, dd in self.samples]


@dataclass(frozen=True)
class InversionResult:
    delta_d_min: float
    min_detectable_shift: float
    iterations: int
    residual: float

    def as_dict(self):
        return {
            "delta_d_min": self.delta_d_min,
            "min_detectable_shift": self.min_detectable_shift,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def tracked_coupling(omega_b: float, delta_c: float, delta_omega_b: float) -> float:
    """Critical coupling of the shifted oscillator."""
    return critical_coupling(omega_b + delta_omega_b, delta_c)


def _branch_differences(omega_b, delta_c, shift, four_g_sq, gap0, gap1):
    """Shifted-minus-unshifted differences of the squared branches.

    Returns ``(d_plus_sq, d_minus_sq, sq0, sq1)`` where ``sq0``/``sq1`` are the
    (minus_sq, plus_sq) pairs of the unshifted and shifted oscillators.
    """
    w0, w1 = omega_b, omega_b + shift
    sq0 = _squared_modes(w0, delta_c, four_g_sq, gap0)
    sq1 = _squared_modes(w1, delta_c, four_g_sq, gap1)
    du = shift * (2.0 * w0 + shift)
    diff0 = (w0 - delta_c) * (w0 + delta_c)
    diff1 = (w1 - delta_c) * (w1 + delta_c)
    v0 = diff0 * diff0 + 4.0 * four_g_sq * (delta_c * w0)
    v1 = diff1 * diff1 + 4.0 * four_g_sq * (delta_c * w1)
    dp = delta_c * shift
    dv = du * (diff1 + diff0) + 4.0 * four_g_sq * dp
    d_plus_sq = 0.5 * (du + dv / (math.sqrt(v1) + math.sqrt(v0)))
    # product of roots P = (Delta w) * gap; P1 - P0 = dp * (Delta w0 + gap1)
    p0 = (delta_c * w0) * gap0
    d_prod = dp * (delta_c * w0 + gap1)
    plus0, plus1 = sq0[1], sq1[1]
    d_minus_sq = (d_prod * plus0 - p0 * d_plus_sq) / (plus1 * plus0)
    return d_plus_sq, d_minus_sq, sq0, sq1


def _fixed_g_shift(base: WorkingPoint, shift: float, eps_crit):
    w, dc = base.omega_b, base.delta_c
    four_g_sq = 4.0 * base.g_lin * base.g_lin
    gap0 = dc * w - four_g_sq
    gap1 = dc * (w + shift) - four_g_sq
    d_plus_sq, d_minus_sq, sq0, sq1 = _branch_differences(w, dc, shift, four_g_sq, gap0, gap1)
    e0 = default_eps_crit(w, dc) if eps_crit is None else eps_crit
    e1 = default_eps_crit(w + shift, dc) if eps_crit is None else eps_crit
    s0 = _spectrum_from_squares(*sq0, e0)
    s1 = _spectrum_from_squares(*sq1, e1)
    for s, label in ((s0, "unshifted"), (s1, "shifted")):
        if s.regime is Regime.UNSTABLE:
            raise UnstableWorkingPoint(f"{label} spectrum is unstable at G={base.g_lin!r}")
    d_plus = d_plus_sq / (s1.omega_plus + s0.omega_plus)
    if s0.regime is Regime.STABLE and s1.regime is Regime.STABLE:
        d_minus = d_minus_sq / (s1.omega_minus + s0.omega_minus)
    else:
        d_minus = s1.omega_minus - s0.omega_minus
    return d_plus - d_minus


def critical_tracking_spectra(
    omega_b: float, delta_c: float, shift: float
) -> Tuple[ModeSpectrum, ModeSpectrum]:
    """(unshifted, shifted) spectra with G set to the shifted critical coupling.

    4 G**2 is taken as Delta (omega_b + shift) exactly, so the shifted gap is
    zero and the unshifted gap is -Delta shift without rounding.
    """
    four_g_sq = delta_c * (omega_b + shift)
    sq0 = _squared_modes(omega_b, delta_c, four_g_sq, -delta_c * shift)
    sq1 = _squared_modes(omega_b + shift, delta_c, four_g_sq, 0.0)
    s0 = _spectrum_from_squares(*sq0, default_eps_crit(omega_b, delta_c))
    s1 = _spectrum_from_squares(*sq1, default_eps_crit(omega_b + shift, delta_c))
    return s0, s1


def _critical_tracking_shift(omega_b, delta_c, shift):
    if shift > 0:
        raise UnstableWorkingPoint(
            "critical tracking needs shift <= 0: the unshifted mode is unstable above its own critical point"
        )
    four_g_sq = delta_c * (omega_b + shift)
    gap0 = -delta_c * shift
    d_plus_sq, _, sq0, sq1 = _branch_differences(omega_b, delta_c, shift, four_g_sq, gap0, 0.0)
    d_plus = d_plus_sq / (math.sqrt(sq1[1]) + math.sqrt(sq0[1]))
    # the unshifted lower mode sits just below criticality; taken literally, no snapping
    minus0 = math.sqrt(max(sq0[0], 0.0))
    return d_plus + minus0


def splitting_shift(s: ShiftScenario, eps_crit: Optional[float] = None) -> float:
    """Change of the splitting d when omega_b moves by ``s.delta_omega_b``."""
    if s.delta_omega_b == 0.0:
        return 0.0
    if s.coupling_policy is CouplingPolicy.FIXED_G:
        return _fixed_g_shift(s.base, s.delta_omega_b, eps_crit)
    return _critical_tracking_shift(s.base.omega_b, s.base.delta_c, s.delta_omega_b)


def response_vs_coupling(
    omega_b: float, delta_c: float, delta_omega_b: float, grid: Sequence[float]
) -> ResponseCurve:
    """Fixed-coupling response over a coupling grid ending at or below G^cp_delta."""
    grid = [float(g) for g in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    limit = min(tracked_coupling(omega_b, delta_c, delta_omega_b), critical_coupling(omega_b, delta_c))
    if grid and grid[-1] > limit:
        raise GridExceedsCritical(f"grid reaches G={grid[-1]!r} beyond critical coupling {limit!r}")
    samples = []
    for g in grid:
        base = WorkingPoint(omega_b, delta_c, g)
        samples.append((g, splitting_shift(ShiftScenario(base, delta_omega_b, CouplingPolicy.FIXED_G))))
    return ResponseCurve(tuple(samples), Independent.COUPLING)


def critical_response(omega_b: float, delta_c: float, delta_omega_b: float) -> float:
    """Splitting change under critical tracking (the three-term form)."""
    if not omega_b + delta_omega_b > 0:
        raise ValueError("omega_b + delta_omega_b must be > 0")
    if delta_omega_b == 0.0:
        return 0.0
    return _critical_tracking_shift(omega_b, delta_c, delta_omega_b)


def response_vs_shift(omega_b: float, delta_c: float, grid: Sequence[float]) -> ResponseCurve:
    grid = [float(x) for x in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    samples = tuple((x, critical_response(omega_b, delta_c, x)) for x in grid)
    return ResponseCurve(samples, Independent.FREQUENCY_SHIFT)


def default_bracket(omega_b: float) -> Tuple[float, float]:
    return (1e-9 * omega_b, 1e-2 * omega_b)


def invert_min_shift(
    omega_b: float,
    delta_c: float,
    delta_d_min: float,
    bracket: Optional[Tuple[float, float]] = None,
    rtol: float = 1e-10,
    max_iter: int = 500,
) -> InversionResult:
    """Smallest |shift| whose critical-tracking response equals ``delta_d_min``.

    Bisection on the monotone forward map inside ``bracket`` (a range of
    |shift|), finished with one secant step between the final endpoints.
    """
    if not delta_d_min > 0:
        raise ValueError("delta_d_min must be > 0")
    lo, hi = default_bracket(omega_b) if bracket is None else (float(bracket[0]), float(bracket[1]))
    if not 0 < lo < hi:
        raise BracketInvalid(f"bracket must satisfy 0 < lo < hi, got ({lo!r}, {hi!r})")
    if not hi < omega_b:
        raise BracketInvalid("bracket upper end must stay below omega_b")

    def f(s):
        return critical_response(omega_b, delta_c, -s) - delta_d_min

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return InversionResult(delta_d_min, lo, 0, 0.0)
    if f_hi == 0.0:
        return InversionResult(delta_d_min, hi, 0, 0.0)
    if (f_lo < 0) == (f_hi < 0):
        raise BracketInvalid(
            f"no sign change: response at |shift|={lo!r} and {hi!r} does not straddle {delta_d_min!r}"
        )
    it = 0
    while hi - lo > rtol * hi:
        if it >= max_iter:
            raise InversionError(f"bisection exceeded {max_iter} iterations")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        it += 1
        if f_mid == 0.0:
            return InversionResult(delta_d_min, mid, it, 0.0)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    best, f_best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
    if lo <= x <= hi:
        fx = f(x)
        it += 1
        if abs(fx) <= abs(f_best):
            best, f_best = x, fx
    return InversionResult(delta_d_min, best, it, abs(f_best))
