"""Command-line front end.

All frequencies are angular frequencies in one consistent unit (the
figures' "Hz" values are used as-is); lengths in m, densities in kg/m^3.

Exit codes: 0 ok, 2 config error, 3 detuning solver error, 4 fig7 without
prior files, 5 inversion failure, 6 formula used outside its regime,
7 quadrature did not converge, 8 comparison out of range, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from . import constraint as cons
from . import measurement as meas
from . import modes
from . import yukawa as yk
from .config import apply_overrides, load_raw, number, resolve
from .errors import CritGravError, ConfigError, MissingPriors, PhysicsViolation
from .output import csv_text, emit, emit_in_dir, json_text
from .system import DriveParams, linearize, solve_effective_detuning

log = logging.getLogger("critgrav")

FIGURES = ("fig2a", "fig2b", "fig2c", "fig2d", "fig4", "fig5a", "fig5b", "fig5c", "fig7")
SWEEP_HEADER = ("axis_value", "omega_minus_sq", "omega_plus_sq", "omega_minus", "omega_plus", "splitting", "regime")
TOL_TARGET = {
    "linearize": ("solver", "tol"),
    "modes": ("solver", "tol"),
    "sweep": ("solver", "tol"),
    "shift": ("inversion", "rtol"),
    "invert": ("inversion", "rtol"),
    "constrain": ("inversion", "rtol"),
    "figure": ("inversion", "rtol"),
    "yukawa": ("quadrature", "tol"),
}


class Context:
    def __init__(self, args):
        raw = load_raw(args.config)
        raw = apply_overrides(raw, args.set or [])
        self.cfg, self.user_sections = resolve(raw)
        if args.tol is not None:
            section, key = TOL_TARGET.get(args.command, ("solver", "tol"))
            self.cfg[section][key] = args.tol
        self.args = args
        self._working = None

    # -- system / working point -------------------------------------------------

    def drive(self) -> DriveParams:
        if "drive" not in self.cfg:
            raise ConfigError("this command needs a [drive] section")
        d = self.cfg["drive"]
        try:
            return DriveParams(**{k: float(v) for k, v in d.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[drive] {exc}") from exc

    def detuning(self):
        p = self.drive()
        s = self.cfg["solver"]
        roots = solve_effective_detuning(
            p, tol=number(self.cfg, "solver", "tol"), policy=s["root_policy"], max_iter=int(s["max_iter"])
        )
        return p, roots, linearize(p, roots)

    def working(self):
        """(omega_b, delta_c, g_lin). Derived from [drive] unless [working] was set."""
        if self._working is None:
            if "drive" in self.cfg and "working" not in self.user_sections:
                _, _, lin = self.detuning()
                if not lin.delta_c > 0:
                    raise PhysicsViolation(f"linearized detuning {lin.delta_c!r} is not positive")
                self.cfg["working"] = {"omega_b": lin.omega_b, "delta_c": lin.delta_c, "g_lin": lin.g_lin}
            w = (
                number(self.cfg, "working", "omega_b"),
                number(self.cfg, "working", "delta_c"),
                number(self.cfg, "working", "g_lin"),
            )
            if not (w[0] > 0 and w[1] > 0 and w[2] >= 0):
                raise ConfigError("[working] needs omega_b > 0, delta_c > 0, g_lin >= 0")
            self._working = w
        return self._working

    def eps_crit(self):
        return number(self.cfg, "modes", "eps_crit", allow_none=True)

    # -- measurement --------------------------------------------------------------

    def delta_d_min(self):
        v = number(self.cfg, "inversion", "delta_d_min", allow_none=True)
        return 0.01 * self.working()[0] if v is None else v

    def bracket(self):
        lo = number(self.cfg, "inversion", "bracket_lo", allow_none=True)
        hi = number(self.cfg, "inversion", "bracket_hi", allow_none=True)
        d_lo, d_hi = meas.default_bracket(self.working()[0])
        return (d_lo if lo is None else lo, d_hi if hi is None else hi)

    # -- yukawa -------------------------------------------------------------------

    def yukawa(self):
        return yk.YukawaParams(
            number(self.cfg, "yukawa", "alpha"), number(self.cfg, "yukawa", "lambda"), number(self.cfg, "yukawa", "g_newton")
        )

    def pair(self):
        try:
            return yk.IsotopePair(number(self.cfg, "isotopes", "rho_58"), number(self.cfg, "isotopes", "rho_64"))
        except ValueError as exc:
            raise ConfigError(f"[isotopes] {exc}") from exc

    def oscillator(self):
        mass = number(self.cfg, "oscillator", "mass", allow_none=True)
        if mass is None:
            mass = yk.membrane_mass(
                number(self.cfg, "oscillator", "membrane_area"),
                number(self.cfg, "oscillator", "membrane_thickness"),
                number(self.cfg, "oscillator", "membrane_density"),
            )
        omega_b = number(self.cfg, "oscillator", "omega_b", allow_none=True)
        if omega_b is None:
            omega_b = self.working()[0]
        return yk.Oscillator(mass, omega_b, number(self.cfg, "oscillator", "separation_a"))

    def cylinder(self):
        return yk.CylinderSource(
            number(self.cfg, "cylinder", "radius"),
            number(self.cfg, "cylinder", "thickness"),
            number(self.cfg, "cylinder", "density"),
            number(self.cfg, "cylinder", "separation"),
        )

    def constraint_input(self):
        omega_b, delta_c, _ = self.working()
        c = self.cfg["constraint"]
        grid = cons.log_grid(
            number(self.cfg, "constraint", "lambda_min"),
            number(self.cfg, "constraint", "lambda_max"),
            int(c["lambda_num"]),
        )
        return cons.ConstraintInput(
            omega_b=omega_b,
            delta_c=delta_c,
            delta_d_min=self.delta_d_min(),
            pair=self.pair(),
            separation_a=number(self.cfg, "oscillator", "separation_a"),
            lambda_grid=tuple(grid),
            g_newton=number(self.cfg, "yukawa", "g_newton"),
            bracket=self.bracket(),
            rtol=number(self.cfg, "inversion", "rtol"),
        )

    def meta(self, **results):
        return {"config": self.cfg, "results": results}


def _spectrum_row(x, s: modes.ModeSpectrum):
    return (x, s.omega_minus_sq, s.omega_plus_sq, s.omega_minus, s.omega_plus, s.splitting, s.regime)


def _spectrum_dict(s: modes.ModeSpectrum):
    return {
        "omega_minus_sq": s.omega_minus_sq,
        "omega_plus_sq": s.omega_plus_sq,
        "omega_minus": s.omega_minus,
        "omega_plus": s.omega_plus,
        "splitting": s.splitting,
        "regime": s.regime,
    }


def _require_out(args):
    if args.out is None:
        raise ConfigError(f"'{args.command}' writes several files; pass --out DIR")
    return args.out


# -- subcommands ------------------------------------------------------------------


def cmd_linearize(ctx: Context) -> int:
    p, roots, lin = ctx.detuning()
    report = {
        "roots": list(roots.roots),
        "residuals": list(roots.residuals),
        "selected_index": roots.selected_index,
        "selected_root": roots.selected,
        "root_policy": roots.policy,
        "linearized": {
            "g_lin": lin.g_lin,
            "delta_c": lin.delta_c,
            "omega_a_tilde": lin.omega_a_tilde,
            "omega_b": lin.omega_b,
        },
    }
    emit(json_text(report), ctx.args.out)
    return 0


def cmd_modes(ctx: Context) -> int:
    omega_b, delta_c, g = ctx.working()
    w = modes.WorkingPoint(omega_b, delta_c, g)
    eps = ctx.eps_crit()
    s = modes.mode_spectrum(w, eps)
    report = {
        "omega_b": omega_b,
        "delta_c": delta_c,
        "g_lin": g,
        "eps_crit": modes.default_eps_crit(omega_b, delta_c) if eps is None else eps,
        "critical_coupling": modes.critical_coupling(omega_b, delta_c),
        "critical_detuning": modes.critical_detuning(omega_b, g) if g > 0 else None,
        **_spectrum_dict(s),
    }
    emit(json_text(report), ctx.args.out)
    return 0


def _sweep_grid(ctx: Context, axis: modes.Axis):
    omega_b, delta_c, g = ctx.working()
    sw = ctx.cfg["sweep"]
    num = int(sw["num"])
    stop = number(ctx.cfg, "sweep", "stop", allow_none=True)
    start = number(ctx.cfg, "sweep", "start", allow_none=True)
    if axis is modes.Axis.COUPLING:
        stop = modes.critical_coupling(omega_b, delta_c) if stop is None else stop
        start = 0.0 if start is None else start
        fixed = (omega_b, delta_c)
    else:
        if g <= 0:
            raise ConfigError("a detuning sweep needs working.g_lin > 0")
        stop = 2.0 * modes.critical_detuning(omega_b, g) if stop is None else stop
        start = stop / num if start is None else start
        fixed = (omega_b, g)
    if num < 1 or not stop > start:
        raise ConfigError("[sweep] needs num >= 1 and stop > start")
    return fixed, [float(x) for x in np.linspace(start, stop, num)]


def cmd_sweep(ctx: Context) -> int:
    axis = modes.Axis(ctx.args.axis or ctx.cfg["sweep"]["axis"])
    fixed, grid = _sweep_grid(ctx, axis)
    try:
        data = modes.sweep_modes(axis, fixed, grid, ctx.eps_crit())
    except ValueError as exc:
        raise ConfigError(f"[sweep] {exc}") from exc
    emit(csv_text(SWEEP_HEADER, (_spectrum_row(x, s) for x, s in data)), ctx.args.out)
    return 0


def _response_csv(curve: meas.ResponseCurve, label=None):
    if label is None:
        return csv_text(("independent_value", "delta_d"), curve.to_rows())
    return csv_text(("delta_omega_b", "independent_value", "delta_d"), ((label, x, dd) for x, dd in curve.to_rows()))


def cmd_shift(ctx: Context) -> int:
    omega_b, delta_c, g = ctx.working()
    sh = ctx.cfg["shift"]
    shift = number(ctx.cfg, "shift", "delta_omega_b")
    num = int(sh["num"])
    if ctx.args.curve == "coupling":
        g_end = meas.tracked_coupling(omega_b, delta_c, shift)
        grid = np.linspace(number(ctx.cfg, "shift", "g_min"), g_end, num)
        emit(_response_csv(meas.response_vs_coupling(omega_b, delta_c, shift, grid)), ctx.args.out)
        return 0
    if ctx.args.curve == "shift":
        grid = np.linspace(number(ctx.cfg, "shift", "shift_min"), 0.0, num)
        emit(_response_csv(meas.response_vs_shift(omega_b, delta_c, grid)), ctx.args.out)
        return 0
    policy = meas.CouplingPolicy(sh["coupling_policy"])
    scenario = meas.ShiftScenario(modes.WorkingPoint(omega_b, delta_c, g), shift, policy)
    dd = meas.splitting_shift(scenario, ctx.eps_crit())
    g_used = g if policy is meas.CouplingPolicy.FIXED_G else meas.tracked_coupling(omega_b, delta_c, shift)
    report = {
        "omega_b": omega_b,
        "delta_c": delta_c,
        "delta_omega_b": shift,
        "coupling_policy": policy,
        "g_lin": g_used,
        "delta_d": dd,
    }
    emit(json_text(report), ctx.args.out)
    return 0


def cmd_invert(ctx: Context) -> int:
    omega_b, delta_c, _ = ctx.working()
    res = meas.invert_min_shift(
        omega_b, delta_c, ctx.delta_d_min(), bracket=ctx.bracket(), rtol=number(ctx.cfg, "inversion", "rtol")
    )
    emit(json_text(res.as_dict()), ctx.args.out)
    return 0


def cmd_yukawa(ctx: Context) -> int:
    yp = ctx.yukawa()
    osc = ctx.oscillator()
    pair = ctx.pair()
    cyl = ctx.cylinder()
    c = ctx.cfg["cylinder"]
    closed = yk.cylinder_yukawa_energy_closed(
        cyl, osc.mass, yp, ratio=number(ctx.cfg, "cylinder", "regime_ratio"), force=bool(c["force"])
    )
    report = {
        "membrane_mass": osc.mass,
        "cylinder_energy_closed": {"newtonian": closed.newtonian, "yukawa": closed.yukawa, "validated": closed.validated},
    }
    if ctx.args.quadrature:
        q = yk.cylinder_yukawa_energy_quadrature(
            cyl, osc.mass, yp, tol=number(ctx.cfg, "quadrature", "tol"), max_cells=int(ctx.cfg["quadrature"]["max_cells"])
        )
        report["cylinder_energy_quadrature"] = {
            "newtonian": q.newtonian,
            "yukawa": q.yukawa,
            "yukawa_error": q.yukawa_error,
            "relative_difference": (closed.yukawa - q.yukawa) / q.yukawa if q.yukawa != 0 else None,
        }
        if ctx.args.verbose:
            print(f"quadrature: cells={q.cells} error_estimate={q.yukawa_error!r}", file=sys.stderr)
    if yp.plate_certified:
        d_r, d_b = yk.differential_shift(pair, osc, yp)
        report["plate"] = {
            "force_58": yk.yukawa_plate_force(pair.rho_58, osc, yp),
            "force_64": yk.yukawa_plate_force(pair.rho_64, osc, yp),
            "force_gradient_58": yk.yukawa_plate_force_gradient(pair.rho_58, osc, yp),
            "force_gradient_64": yk.yukawa_plate_force_gradient(pair.rho_64, osc, yp),
            "delta_r": d_r,
            "delta_b": d_b,
            "delta_r_minus_delta_b": d_r - d_b,
        }
    else:
        report["plate"] = None
        log.warning("lambda=%g m exceeds the plate-limit range; plate force not reported", yp.lam)
    emit(json_text(report), ctx.args.out)
    return 0


def _exclusion(ctx: Context):
    inp = ctx.constraint_input()
    floor = number(ctx.cfg, "constraint", "shift_floor", allow_none=True)
    return cons.exclusion_curve(inp, floor)


def _curve_csv(curve: cons.ExclusionCurve):
    return csv_text(("lambda_m", "abs_alpha"), curve.points)


def _read_priors(paths) -> List[cons.PriorBound]:
    return [cons.read_prior_csv(p) for p in paths or []]


def cmd_constrain(ctx: Context) -> int:
    out = _require_out(ctx.args)
    curve = _exclusion(ctx)
    emit_in_dir(out, "exclusion.csv", _curve_csv(curve))
    emit_in_dir(out, "meta.json", json_text(ctx.meta(**curve.meta)))
    priors = _read_priors(ctx.args.prior)
    if priors:
        report = cons.compare_bounds(curve, priors, ctx.args.lambda_query)
        rows = []
        for lam, ours in curve.points:
            rows.append([lam, ours] + [(p(lam) / ours) if p.covers(lam) else None for p in priors])
        header = ["lambda_m", "abs_alpha"] + [f"ratio_{p.label}" for p in priors]
        emit_in_dir(out, "comparison.csv", csv_text(header, rows))
        emit_in_dir(out, "comparison.json", json_text(report.as_dict()))
    return 0


def cmd_compare(ctx: Context) -> int:
    if not ctx.args.curve:
        raise ConfigError("compare needs --curve PATH (an exclusion.csv)")
    ours_bound = cons.read_prior_csv(ctx.args.curve, label="ours")
    ours = cons.ExclusionCurve(ours_bound.points, {"source": ctx.args.curve})
    priors = _read_priors(ctx.args.prior)
    if not priors:
        raise MissingPriors("compare needs at least one --prior PATH")
    report = cons.compare_bounds(ours, priors, ctx.args.lambda_query)
    emit(json_text(report.as_dict()), ctx.args.out)
    return 0


# -- figures ----------------------------------------------------------------------


def _figure_data(ctx: Context, which: str):
    """(csv text, results dict) for one figure."""
    omega_b, delta_c, g = ctx.working()
    f = ctx.cfg["figure"]
    num = int(f["num"])
    overshoot = number(ctx.cfg, "figure", "overshoot")
    shifts = [float(s) for s in f["shifts"]]
    eps = ctx.eps_crit()
    if which in ("fig2a", "fig2c"):
        g_cp = modes.critical_coupling(omega_b, delta_c)
        grid = modes.critical_grid(g_cp, num, overshoot)
        data = modes.sweep_modes(modes.Axis.COUPLING, (omega_b, delta_c), grid, eps)
        return csv_text(SWEEP_HEADER, (_spectrum_row(x, s) for x, s in data)), {"critical_coupling": g_cp}
    if which in ("fig2b", "fig2d"):
        g_fig = number(ctx.cfg, "figure", "g_over_omega_b") * omega_b
        d_cp = modes.critical_detuning(omega_b, g_fig)
        grid = modes.critical_grid(d_cp, num, overshoot)[1:]
        data = modes.sweep_modes(modes.Axis.DETUNING, (omega_b, g_fig), grid, eps)
        return csv_text(SWEEP_HEADER, (_spectrum_row(x, s) for x, s in data)), {
            "g_lin": g_fig,
            "critical_detuning": d_cp,
        }
    if which == "fig4":
        rows, ends = [], []
        for i, shift in enumerate([0.0] + shifts):
            w = omega_b + shift
            g_cp = modes.critical_coupling(w, delta_c)
            ends.append(g_cp)
            for x, s in modes.sweep_modes(modes.Axis.COUPLING, (w, delta_c), modes.critical_grid(g_cp, num), eps):
                rows.append((i, w, x, s.omega_minus, s.omega_plus, s.splitting, s.regime))
        header = ("curve", "omega_b", "g_lin", "omega_minus", "omega_plus", "splitting", "regime")
        return csv_text(header, rows), {"critical_couplings": ends}
    if which in ("fig5a", "fig5b"):
        chunks, ends = [], []
        for shift in shifts:
            g_end = meas.tracked_coupling(omega_b, delta_c, shift)
            ends.append(g_end)
            if which == "fig5a":
                g_lo = number(ctx.cfg, "shift", "g_min")
            else:
                g_lo = g_end - number(ctx.cfg, "figure", "fig5b_window")
            curve = meas.response_vs_coupling(omega_b, delta_c, shift, np.linspace(g_lo, g_end, num))
            chunks += [(shift, x, dd) for x, dd in curve.to_rows()]
        return csv_text(("delta_omega_b", "independent_value", "delta_d"), chunks), {"critical_couplings": ends}
    if which == "fig5c":
        # the configured shifts are merged in so the curve passes through them exactly
        lo = number(ctx.cfg, "shift", "shift_min")
        grid = sorted(set(np.linspace(lo, 0.0, num).tolist()) | {s for s in shifts if lo <= s <= 0.0})
        return _response_csv(meas.response_vs_shift(omega_b, delta_c, grid)), {}
    raise ConfigError(f"unknown figure {which!r}")


def cmd_figure(ctx: Context) -> int:
    out = _require_out(ctx.args)
    which = ctx.args.which
    if which == "fig7":
        curve = _exclusion(ctx)
        priors = _read_priors(ctx.args.prior)
        rows = [("ours", lam, a) for lam, a in curve.points]
        for p in priors:
            rows += [(p.label, lam, a) for lam, a in p.points]
        emit_in_dir(out, "fig7.csv", csv_text(("curve", "lambda_m", "abs_alpha"), rows))
        results = dict(curve.meta, priors=[p.label for p in priors], priors_missing=not priors)
        if priors:
            results["comparison"] = cons.compare_bounds(curve, priors, ctx.args.lambda_query).as_dict()
        emit_in_dir(out, "fig7.json", json_text(ctx.meta(figure=which, **results)))
        if not priors:
            raise MissingPriors("fig7 needs --prior CSV files; wrote our curve only")
        return 0
    text, results = _figure_data(ctx, which)
    emit_in_dir(out, f"{which}.csv", text)
    emit_in_dir(out, f"{which}.json", json_text(ctx.meta(figure=which, **results)))
    return 0


COMMANDS = {
    "linearize": cmd_linearize,
    "modes": cmd_modes,
    "sweep": cmd_sweep,
    "shift": cmd_shift,
    "invert": cmd_invert,
    "yukawa": cmd_yukawa,
    "constrain": cmd_constrain,
    "figure": cmd_figure,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config (or a meta.json written by this tool)")
    common.add_argument("--out", metavar="PATH", help="output file (directory for figure/constrain)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", help="override section.key (repeatable)")
    common.add_argument("--tol", type=float, help="tolerance of the command's solver / inversion / quadrature")
    common.add_argument("--verbose", action="store_true", help="diagnostics to stderr")

    parser = argparse.ArgumentParser(
        prog="critgrav",
        description=(
            "Criticality-enhanced normal-mode-splitting model and prospective Yukawa bounds. "
            "Frequencies are angular frequencies in one consistent unit."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linearize", parents=[common], help="solve the effective detuning and linearize")
    p.add_argument("--root-policy", choices=("nearest", "lowest", "highest"))
    sub.add_parser("modes", parents=[common], help="normal-mode spectrum at the working point")
    p = sub.add_parser("sweep", parents=[common], help="spectrum along the coupling or detuning axis (CSV)")
    p.add_argument("--axis", choices=("coupling", "detuning"))
    p = sub.add_parser("shift", parents=[common], help="splitting change for a frequency shift")
    p.add_argument("--curve", choices=("coupling", "shift"), help="emit a response curve CSV instead")
    sub.add_parser("invert", parents=[common], help="minimum detectable shift for a splitting resolution")
    p = sub.add_parser("yukawa", parents=[common], help="cylinder energy, plate force and isotope shifts")
    p.add_argument("--quadrature", action="store_true", help="also run the volume-integration check")
    for name, helptext in (("constrain", "exclusion curve |alpha|(lambda)"), ("compare", "compare a curve with prior bounds")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--prior", action="append", metavar="CSV", help="prior bound, header lambda_m,abs_alpha")
        p.add_argument("--lambda-query", type=float, default=1e-9)
        if name == "compare":
            p.add_argument("--curve", metavar="CSV", help="our exclusion.csv")
    p = sub.add_parser("figure", parents=[common], help="curve data for one figure")
    p.add_argument("which", choices=FIGURES)
    p.add_argument("--prior", action="append", metavar="CSV", help="prior bound for fig7")
    p.add_argument("--lambda-query", type=float, default=1e-9)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        ctx = Context(args)
        if getattr(args, "root_policy", None):
            ctx.cfg["solver"]["root_policy"] = args.root_policy
        return COMMANDS[args.command](ctx)
    except CritGravError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
