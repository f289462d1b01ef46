"""Raw drive parameters and their linearization.

The effective microwave detuning is defined implicitly,

    Delta = delta - K / (kappa**2 + Delta**2),
    K     = 4 g_c**2 P kappa / (hbar omega_b (omega_c - delta)),

which rearranges to the real cubic
``Delta**3 - delta Delta**2 + kappa**2 Delta + (K - delta kappa**2) = 0``.
All real branches are enumerated rather than found by fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .cubic import real_cubic_roots
from .errors import ConfigError, InvalidRoot, NoRealRoot

HBAR = 1.054571817e-34

ROOT_POLICIES = ("nearest", "lowest", "highest")


@dataclass(frozen=True)
class DriveParams:
    """System parameters before linearization. Frequencies in rad/s, power in W."""

    omega_b: float
    omega_c: float
    delta_c_bare: float
    kappa_c: float
    g_c: float
    g_a: float
    omega_a: float
    power: float
    hbar: float = HBAR

    def __post_init__(self):
        if not self.omega_b > 0:
            raise ConfigError("omega_b must be > 0")
        if not self.omega_c > 0:
            raise ConfigError("omega_c must be > 0")
        if not self.kappa_c > 0:
            raise ConfigError("kappa_c must be > 0")
        if not self.power >= 0:
            raise ConfigError("power must be >= 0")
        if not self.hbar > 0:
            raise ConfigError("hbar must be > 0")
        if self.omega_c == self.delta_c_bare:
            raise ConfigError("omega_c - delta_c_bare must be nonzero")
        if self.power > 0 and self.omega_c - self.delta_c_bare < 0:
            raise ConfigError("omega_c - delta_c_bare must be positive for a driven system")

    @property
    def drive_frequency(self) -> float:
        return self.omega_c - self.delta_c_bare

    @property
    def drive_term(self) -> float:
        """K, the numerator of the drive correction to the detuning."""
        return (
            4.0 * self.g_c**2 * self.power * self.kappa_c
            / (self.hbar * self.omega_b * self.drive_frequency)
        )

    def residual_scale(self, delta_c: float) -> float:
        """Largest term magnitude of the cubic at ``delta_c``.

        Equals |delta| kappa**2 while the root stays within ~kappa of the
        bare detuning scale; for far branches it grows with |Delta|**3 so
        the residual remains reachable in double precision.
        """
        d, k2, x = abs(self.delta_c_bare), self.kappa_c**2, abs(delta_c)
        return max(d * k2, x**3, d * x * x, k2 * x, abs(self.drive_term))


@dataclass(frozen=True)
class LinearizedParams:
    g_lin: float
    delta_c: float
    omega_a_tilde: float
    omega_b: float


@dataclass(frozen=True)
class DetuningRoots:
    roots: Tuple[float, ...]
    selected_index: int
    residuals: Tuple[float, ...]
    tol: float
    policy: str = "nearest"

    @property
    def selected(self) -> float:
        return self.roots[self.selected_index]


def detuning_residual(p: DriveParams, delta_c: float) -> float:
    """Normalized residual of the implicit detuning equation at ``delta_c``."""
    r = (delta_c - p.delta_c_bare) * (p.kappa_c**2 + delta_c**2) + p.drive_term
    return abs(r) / p.residual_scale(delta_c)


def solve_effective_detuning(
    p: DriveParams, tol: float = 1e-10, policy: str = "nearest", max_iter: int = 100
) -> DetuningRoots:
    """All real effective detunings, sorted, with one selected by ``policy``.

    ``nearest`` picks the root closest to the bare detuning, i.e. the branch
    continuously connected to the undriven system. ``lowest``/``highest``
    pick the extreme roots.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if policy not in ROOT_POLICIES:
        raise ConfigError(f"unknown root policy {policy!r}; choose from {ROOT_POLICIES}")
    delta, kappa = p.delta_c_bare, p.kappa_c
    k = p.drive_term
    if k == 0.0:
        roots = [delta]
    else:
        roots = real_cubic_roots(1.0, -delta, kappa**2, k - delta * kappa**2, max_iter=max_iter)
    # collapse coincident seeds at a double root
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= 1e-12 * max(abs(r), kappa):
            continue
        merged.append(r)
    if not merged:
        raise NoRealRoot("no real detuning root")
    residuals = tuple(detuning_residual(p, r) for r in merged)
    if policy == "nearest":
        idx = min(range(len(merged)), key=lambda i: abs(merged[i] - delta))
    elif policy == "lowest":
        idx = 0
    else:
        idx = len(merged) - 1
    return DetuningRoots(tuple(merged), idx, residuals, tol, policy)


def linearize(p: DriveParams, roots: DetuningRoots) -> LinearizedParams:
    """Linearized coupling, effective detuning and shifted optical frequency."""
    delta_c = roots.selected
    res = detuning_residual(p, delta_c)
    if not res < roots.tol:
        raise InvalidRoot(f"selected root {delta_c!r} has residual {res:.3e} >= tol {roots.tol:.3e}")
    if p.power == 0.0:
        return LinearizedParams(0.0, delta_c, p.omega_a, p.omega_b)
    lorentz = p.hbar * p.drive_frequency * (p.kappa_c**2 + delta_c**2)
    g_lin = abs(p.g_c) * math.sqrt(2.0 * p.power * p.kappa_c / lorentz)
    optical_shift = 4.0 * p.g_a * p.g_c * p.power * p.kappa_c / (p.omega_b * lorentz)
    return LinearizedParams(g_lin, delta_c, p.omega_a - optical_shift, p.omega_b)
