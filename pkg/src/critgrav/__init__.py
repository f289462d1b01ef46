"""Criticality-enhanced normal-mode-splitting sensing and Yukawa-gravity bounds."""

__version__ = "0.1.0"

from .constraint import (
    ConstraintInput,
    ExclusionCurve,
    PriorBound,
    alpha_bound,
    compare_bounds,
    exclusion_curve,
    min_detectable_difference,
)
from .measurement import (
    CouplingPolicy,
    ShiftScenario,
    critical_response,
    invert_min_shift,
    response_vs_coupling,
    response_vs_shift,
    splitting_shift,
)
from .modes import Regime, WorkingPoint, critical_coupling, critical_detuning, mode_spectrum, sweep_modes
from .system import DriveParams, linearize, solve_effective_detuning
from .yukawa import (
    CylinderSource,
    IsotopePair,
    Oscillator,
    YukawaParams,
    cylinder_yukawa_energy_closed,
    cylinder_yukawa_energy_quadrature,
    differential_shift,
    frequency_shift,
    yukawa_pair_potential,
    yukawa_plate_force,
)
