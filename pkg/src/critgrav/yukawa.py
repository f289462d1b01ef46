"""Yukawa corrections to gravity for an on-axis test mass above a cylinder.

Closed forms assume a wide, thin source (R >> D, R >> h); the cubature
routine integrates the point-pair potential over the cylinder volume
directly and serves as their check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import AssumptionViolation, QuadratureNonConvergence, RegimeViolation
from .quadrature import adaptive_cubature, graded_breaks

log = logging.getLogger(__name__)

G_NEWTON = 6.67430e-11
PLATE_LAMBDA_MAX = 1e-6

NI_NATURAL_DENSITY = 8908.0
NI_NATURAL_MASS = 58.6934
NI58_MASS = 57.9353
NI64_MASS = 63.9280

MEMBRANE_AREA = 1e-10  # 10 um x 10 um
MEMBRANE_THICKNESS = 1e-9
MEMBRANE_DENSITY = 3100.0  # silicon nitride
DEFAULT_SEPARATION = 5e-9


@dataclass(frozen=True)
class YukawaParams:
    alpha: float
    lam: float
    g_newton: float = G_NEWTON

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if not self.g_newton > 0:
            raise ValueError("g_newton must be > 0")

    @property
    def plate_certified(self) -> bool:
        return self.lam <= PLATE_LAMBDA_MAX


@dataclass(frozen=True)
class CylinderSource:
    radius: float
    thickness: float
    density: float
    separation: float

    def __post_init__(self):
        for name in ("radius", "thickness", "density", "separation"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    def in_regime(self, ratio: float = 10.0) -> bool:
        return self.radius >= ratio * self.thickness and self.radius >= ratio * self.separation


def _isotope_density(mass):
    return NI_NATURAL_DENSITY * mass / NI_NATURAL_MASS


@dataclass(frozen=True)
class IsotopePair:
    rho_58: float = _isotope_density(NI58_MASS)
    rho_64: float = _isotope_density(NI64_MASS)

    def __post_init__(self):
        if not self.rho_64 > self.rho_58 > 0:
            raise ValueError("need rho_64 > rho_58 > 0")

    @property
    def gap(self) -> float:
        return self.rho_64 - self.rho_58


def membrane_mass(area=MEMBRANE_AREA, thickness=MEMBRANE_THICKNESS, density=MEMBRANE_DENSITY):
    return area * thickness * density


@dataclass(frozen=True)
class Oscillator:
    mass: float
    omega_b: float
    separation_a: float = DEFAULT_SEPARATION

    def __post_init__(self):
        for name in ("mass", "omega_b", "separation_a"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class CylinderEnergy:
    """Newtonian and alpha-dependent parts of the on-axis energy, in J."""

    newtonian: float
    yukawa: float
    validated: bool = True
    yukawa_error: Optional[float] = None
    cells: Optional[int] = None

    @property
    def total(self) -> float:
        return self.newtonian + self.yukawa


def yukawa_pair_potential(m1: float, m2: float, r: float, yp: YukawaParams) -> float:
    if not r > 0:
        raise ValueError("r must be > 0")
    return -yp.g_newton * m1 * m2 / r * (1.0 + yp.alpha * math.exp(-r / yp.lam))


def cylinder_yukawa_energy_closed(
    c: CylinderSource, m: float, yp: YukawaParams, ratio: float = 10.0, force: bool = False
) -> CylinderEnergy:
    """Wide-slab closed form of the energy; raises outside R >> D, R >> h unless ``force``."""
    ok = c.in_regime(ratio)
    if not ok and not force:
        raise RegimeViolation(
            f"closed form needs R >= {ratio:g} max(D, h); got R={c.radius!r}, D={c.thickness!r}, h={c.separation!r}"
        )
    g, rho, lam = yp.g_newton, c.density, yp.lam
    newtonian = -g * m * rho * 2.0 * math.pi * c.radius * c.thickness
    bracket = math.exp(-c.radius / lam) * c.thickness + lam * math.exp(-c.separation / lam) * math.expm1(
        -c.thickness / lam
    )
    yukawa = g * m * rho * yp.alpha * 2.0 * math.pi * lam * bracket
    return CylinderEnergy(newtonian, yukawa, validated=ok)


def newtonian_cylinder_energy(c: CylinderSource, m: float, g_newton: float = G_NEWTON) -> float:
    """Exact on-axis Newtonian energy of a uniform cylinder."""
    R = c.radius

    def antiderivative(z):
        return 0.5 * (z * math.hypot(z, R) + R * R * math.asinh(z / R)) - 0.5 * z * z

    h = c.separation
    return -g_newton * m * c.density * 2.0 * math.pi * (antiderivative(h + c.thickness) - antiderivative(h))


def cylinder_volume_integral(kernel, c: CylinderSource, scale: float, rtol: float, max_cells: int = 200_000):
    """Cubature of ``2 pi s kernel(r)`` over the cylinder in units of ``scale``.

    ``kernel`` takes the scaled distance r/scale. The result must be
    multiplied by ``scale**3`` (times whatever scale the kernel hides).
    """
    xb = graded_breaks(0.0, c.radius / scale, 1.0)
    yb = graded_breaks(c.separation / scale, (c.separation + c.thickness) / scale, 1.0)

    def f(s, z):
        return 2.0 * np.pi * s * kernel(np.hypot(s, z))

    return adaptive_cubature(f, xb, yb, rtol=rtol, max_cells=max_cells)


def cylinder_yukawa_energy_quadrature(
    c: CylinderSource, m: float, yp: YukawaParams, tol: float = 1e-6, max_cells: int = 200_000
) -> CylinderEnergy:
    """Energy from direct volume integration of the pair potential.

    The alpha term is integrated numerically in units of lambda; the
    Newtonian term uses the exact on-axis formula.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    lam = yp.lam
    res = cylinder_volume_integral(lambda r: np.exp(-r) / r, c, lam, tol, max_cells)
    log.debug(
        "yukawa cubature: value=%r error=%r cells=%d evaluations=%d converged=%s",
        res.value, res.error, res.cells, res.evaluations, res.converged,
    )
    if not res.converged:
        raise QuadratureNonConvergence(
            f"error estimate {res.error:.3e} above tol after {res.cells} cells"
        )
    pref = -yp.g_newton * m * c.density * yp.alpha
    yukawa = pref * lam * lam * res.value
    newtonian = newtonian_cylinder_energy(c, m, yp.g_newton)
    return CylinderEnergy(
        newtonian, yukawa, validated=True, yukawa_error=abs(pref) * lam * lam * res.error, cells=res.cells
    )


def _check_plate(yp):
    if not yp.plate_certified:
        raise AssumptionViolation(f"plate-limit force needs lambda <= {PLATE_LAMBDA_MAX:g} m, got {yp.lam!r}")


def yukawa_plate_force(rho: float, osc: Oscillator, yp: YukawaParams) -> float:
    """Yukawa force on the membrane from a thick, wide plate (negative = attractive)."""
    _check_plate(yp)
    lam = yp.lam
    return -math.exp(-osc.separation_a / lam) * yp.g_newton * osc.mass * rho * yp.alpha * 2.0 * math.pi * lam


def yukawa_plate_force_gradient(rho: float, osc: Oscillator, yp: YukawaParams) -> float:
    """d/da of :func:`yukawa_plate_force`."""
    _check_plate(yp)
    return math.exp(-osc.separation_a / yp.lam) * yp.g_newton * osc.mass * rho * yp.alpha * 2.0 * math.pi


def frequency_shift(force_gradient: float, osc: Oscillator) -> float:
    """Resonance shift produced by a force gradient dF/da acting on the oscillator."""
    return -force_gradient / (2.0 * osc.mass * osc.omega_b)


def differential_shift(pair: IsotopePair, osc: Oscillator, yp: YukawaParams) -> Tuple[float, float]:
    """Yukawa frequency shifts (near 58Ni block, near 64Ni block).

    Density-independent forces (Casimir, Newtonian plate term) are identical
    for the two blocks and cancel in the difference; they are not modeled.
    The membrane mass divides out, so each shift is
    -exp(-a/lambda) G rho alpha pi / omega_b.
    """
    _check_plate(yp)
    common = -math.exp(-osc.separation_a / yp.lam) * yp.g_newton * yp.alpha * math.pi / osc.omega_b
    return common * pair.rho_58, common * pair.rho_64
