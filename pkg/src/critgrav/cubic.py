"""Real roots of real cubics: closed-form seeding plus Newton polishing."""

import math

from .errors import NoRealRoot, NonConvergence

_EPS = 2.220446049250313e-16


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _seed_roots(b, c, d):
    """Closed-form real roots of x**3 + b x**2 + c x + d."""
    shift = b / 3.0
    p = c - b * shift
    q = d - c * shift + 2.0 * shift**3
    # discriminant of the depressed cubic t**3 + p t + q
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max(abs(q / 2.0) ** 2, abs(p / 3.0) ** 3, 1e-300)
    if disc > 8 * _EPS * scale:
        sq = math.sqrt(disc)
        # pick the non-cancelling combination, then recover the other term
        a = _cbrt(-q / 2.0 - math.copysign(sq, q))
        t = a - p / (3.0 * a) if a != 0.0 else 0.0
        return [t - shift]
    if p >= 0.0:
        # disc ~ 0 and p >= 0 forces p ~ 0, q ~ 0: triple root
        return [-shift]
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    return [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]


def _polish(x, b, c, d, max_iter):
    for it in range(max_iter):
        f = ((x + b) * x + c) * x + d
        df = (3.0 * x + 2.0 * b) * x + c
        if f == 0.0 or df == 0.0:
            return x, it
        step = f / df
        x_new = x - step
        if abs(step) <= 4 * _EPS * max(abs(x_new), 1.0):
            return x_new, it + 1
        # Newton oscillating at the rounding floor means we are done
        f_new = ((x_new + b) * x_new + c) * x_new + d
        if abs(f_new) >= abs(f):
            return x, it + 1
        x = x_new
    raise NonConvergence(f"Newton polishing did not settle within {max_iter} iterations")


def real_cubic_roots(a, b, c, d, max_iter=100):
    """Sorted real roots of ``a x**3 + b x**2 + c x + d = 0`` (``a != 0``).

    Coefficients are rescaled so the roots are O(1) before the closed-form
    seed, which keeps the trigonometric branch away from overflow when the
    roots are large (detunings are ~1e5 and the constant term ~1e15).
    """
    if a == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    b, c, d = b / a, c / a, d / a
    s = max(abs(b), math.sqrt(abs(c)), _cbrt(abs(d)))
    if s == 0.0:
        return [0.0]
    # sequential division so s**3 cannot underflow for tiny coefficients
    bs, cs, ds = b / s, c / s / s, d / s / s / s
    seeds = _seed_roots(bs, cs, ds)
    if not seeds:  # a real cubic always has one; kept as an internal guard
        raise NoRealRoot("cubic reported no real root")
    roots = sorted(_polish(x, bs, cs, ds, max_iter)[0] * s for x in seeds)
    return roots
