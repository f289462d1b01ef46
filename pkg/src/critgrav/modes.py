"""Normal modes of the linearized electromechanical subsystem.

The squared normal-mode frequencies are the two roots of

    x**2 - (Delta**2 + omega**2) x + Delta omega (Delta omega - 4 G**2) = 0.

The upper root is taken from the usual half-sum formula; the lower one is
recovered as (product of roots) / (upper root) so that it stays accurate
(and vanishes to rounding) at the critical point Delta omega = 4 G**2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

CRIT_REL_TOL = 1e-9


class Regime(str, enum.Enum):
    STABLE = "stable"
    CRITICAL = "critical"
    UNSTABLE = "unstable"


class Axis(str, enum.Enum):
    COUPLING = "coupling"
    DETUNING = "detuning"


@dataclass(frozen=True)
class WorkingPoint:
    omega_b: float
    delta_c: float
    g_lin: float

    def __post_init__(self):
        if not self.omega_b > 0:
            raise ValueError("omega_b must be > 0")
        if not self.delta_c > 0:
            raise ValueError("delta_c must be > 0")
        if not self.g_lin >= 0:
            raise ValueError("g_lin must be >= 0")


@dataclass(frozen=True)
class ModeSpectrum:
    omega_minus_sq: float
    omega_plus_sq: float
    regime: Regime
    splitting: Optional[float]

    @property
    def omega_plus(self) -> float:
        return math.sqrt(self.omega_plus_sq)

    @property
    def omega_minus(self) -> Optional[float]:
        if self.regime is Regime.UNSTABLE:
            return None
        if self.regime is Regime.CRITICAL:
            return 0.0
        return math.sqrt(self.omega_minus_sq)


def default_eps_crit(omega_b: float, delta_c: float) -> float:
    return CRIT_REL_TOL * (delta_c**2 + omega_b**2)


def _squared_modes(omega_b, delta_c, four_g_sq, gap=None):
    """(omega_minus_sq, omega_plus_sq) from 4 G**2.

    ``gap`` is Delta omega - 4 G**2 when the caller knows it exactly (at a
    tracked critical point it is an exact algebraic expression).
    """
    u = delta_c**2 + omega_b**2
    prod_dw = delta_c * omega_b
    diff = (omega_b - delta_c) * (omega_b + delta_c)
    v = diff * diff + 4.0 * four_g_sq * prod_dw
    plus_sq = 0.5 * (u + math.sqrt(v))
    if gap is None:
        gap = prod_dw - four_g_sq
    # degenerate branches may round one ulp out of order
    minus_sq = min(prod_dw * gap / plus_sq, plus_sq)
    return minus_sq, plus_sq


def classify(omega_minus_sq: float, eps_crit: float) -> Regime:
    if omega_minus_sq > eps_crit:
        return Regime.STABLE
    if omega_minus_sq < -eps_crit:
        return Regime.UNSTABLE
    return Regime.CRITICAL


def _spectrum_from_squares(minus_sq, plus_sq, eps_crit):
    regime = classify(minus_sq, eps_crit)
    if regime is Regime.UNSTABLE:
        splitting = None
    elif regime is Regime.CRITICAL:
        splitting = math.sqrt(plus_sq)
    else:
        splitting = math.sqrt(plus_sq) - math.sqrt(minus_sq)
    return ModeSpectrum(minus_sq, plus_sq, regime, splitting)


def mode_spectrum(w: WorkingPoint, eps_crit: Optional[float] = None) -> ModeSpectrum:
    """Normal-mode spectrum and splitting at a working point.

    ``eps_crit`` is the absolute band around zero inside which the lower
    mode counts as critical; it defaults to 1e-9 (Delta**2 + omega_b**2).
    """
    if eps_crit is None:
        eps_crit = default_eps_crit(w.omega_b, w.delta_c)
    if eps_crit < 0:
        raise ValueError("eps_crit must be >= 0")
    minus_sq, plus_sq = _squared_modes(w.omega_b, w.delta_c, 4.0 * w.g_lin * w.g_lin)
    return _spectrum_from_squares(minus_sq, plus_sq, eps_crit)


def critical_coupling(omega_b: float, delta_c: float) -> float:
    """Coupling at which the lower normal mode frequency vanishes."""
    if not (omega_b > 0 and delta_c > 0):
        raise ValueError("omega_b and delta_c must be > 0")
    return math.sqrt(delta_c * omega_b) / 2.0


def critical_detuning(omega_b: float, g_lin: float) -> float:
    """Detuning at which the lower normal mode frequency vanishes."""
    if not (omega_b > 0 and g_lin > 0):
        raise ValueError("omega_b and g_lin must be > 0")
    return 4.0 * g_lin**2 / omega_b


def sweep_modes(
    axis, fixed: Tuple[float, float], grid: Sequence[float], eps_crit: Optional[float] = None
) -> List[Tuple[float, ModeSpectrum]]:
    """Evaluate the spectrum along one axis.

    ``fixed`` is ``(omega_b, delta_c)`` for a coupling sweep and
    ``(omega_b, g_lin)`` for a detuning sweep. When ``eps_crit`` is None the
    default tolerance is recomputed at every grid point.
    """
    axis = Axis(axis)
    grid = [float(x) for x in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    omega_b, other = fixed
    out = []
    for x in grid:
        if axis is Axis.COUPLING:
            w = WorkingPoint(omega_b, other, x)
        else:
            w = WorkingPoint(omega_b, x, other)
        out.append((x, mode_spectrum(w, eps_crit)))
    return out


def critical_grid(end: float, num: int, overshoot: float = 0.0) -> List[float]:
    """Grid ``end * i/(num-1)`` that hits ``end`` exactly, optionally continuing past it.

    ``overshoot`` extends the grid with the same step to ``end * (1 + overshoot)``.
    """
    if num < 2:
        raise ValueError("num must be >= 2")
    n = num - 1
    extra = int(round(overshoot * n))
    return [end * (i / n) for i in range(0, n + extra + 1)]
