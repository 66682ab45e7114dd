"""Configuration ingestion, subcommand dispatch, and deterministic CSV output.

Every run writes a manifest (the fully resolved SI configuration, tool
version, and frame policy) next to its outputs.  Numeric CSV formatting is
fixed at 12 significant digits, so identical inputs produce byte-identical
files.  There is no randomness anywhere in the pipeline.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .components import load_from_power
from .core import (
    ConfigError,
    ControlParams,
    DroopsimError,
    FilterParams,
    GridParams,
    Mode,
    Nominals,
    ParameterError,
    ReferenceFrame,
    VsiParams,
    parse_quantity,
)
from .scenario import (
    CANONICAL_T_END,
    EventKind,
    ScenarioEvent,
    canonical_events,
    run_scenario,
    run_transition_study,
)
from .smallsignal import (
    STRUCTURAL_ZERO_TOL,
    apply_parameter,
    eigen_spectrum,
    find_critical,
    linearize,
    match_slow_eigenvalues,
    parameter_sweep,
    reduce,
)
from .solver import IntegratorSettings, Method, NewtonSettings, solve_equilibrium
from .system import SystemModel, outputs

FLOAT_FMT = "%.12g"

#: Engineering display units used by the sweep CLI, matching how the droop
#: gains are conventionally quoted (per kW / per kVAr / ms).
SWEEP_DISPLAY_UNITS = {
    "n": ("rad/s/kW", 1e-3),
    "m": ("V/kVAr", 1e-3),
    "m_int": ("V/s/kVAr", 1e-3),
    "tau_s": ("ms", 1e-3),
    "x_over_r": ("", 1.0),
}


def bundled_config_path(name: str = "fairview.json") -> Path:
    """Path of a configuration file shipped with the package."""
    return Path(resources.files("droopsim").joinpath("data", name))


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    newton: NewtonSettings
    method: Method
    h: float
    output_decimation: int


@dataclass(frozen=True)
class RunConfig:
    nominals: Nominals
    vsis: tuple[VsiParams, VsiParams]
    grid: GridParams
    load_p: float
    load_q: float
    solver: SolverConfig

    def load_params(self, p: float | None = None, q: float | None = None):
        return load_from_power(p if p is not None else self.load_p,
                               q if q is not None else self.load_q,
                               self.nominals.v_ll_rms, self.nominals.omega_nom)

    def model(self, mode: Mode, load=None) -> SystemModel:
        frame = (ReferenceFrame.fixed_nominal(self.nominals)
                 if mode is Mode.ON_GRID
                 else ReferenceFrame.vsi1_anchored(self.nominals))
        return SystemModel(vsis=self.vsis, grid=self.grid,
                           load=load if load is not None else self.load_params(),
                           nominals=self.nominals, frame=frame, mode=mode)

    def manifest_dict(self) -> dict:
        return {
            "nominals": {"v_nom_peak_phase": self.nominals.v_nom,
                         "v_ll_rms": self.nominals.v_ll_rms,
                         "omega_nom": self.nominals.omega_nom,
                         "f_nom": self.nominals.f_nom},
            "vsis": [asdict(v) for v in self.vsis],
            "grid": asdict(self.grid),
            "load": {"p": self.load_p, "q": self.load_q},
            "solver": {"newton_tol": self.solver.newton.tol,
                       "newton_max_iter": self.solver.newton.max_iter,
                       "fd_step": self.solver.newton.fd_step,
                       "method": self.solver.method.value,
                       "h": self.solver.h,
                       "output_decimation": self.solver.output_decimation},
            "frame_policy": {
                "on_grid": "fixed_nominal",
                "off_grid_equilibrium": "vsi1_anchored",
                "integration": "vsi1_anchored",
                "linearization": "fixed_nominal (on) / vsi1_anchored (off)",
            },
            "units": "SI throughout (W, VAr, V peak phase, rad/s, H, Ohm, s)",
        }


class _Walker:
    """Strict mapping reader that records the key path for error messages."""

    def __init__(self, mapping: dict, path: str):
        if not isinstance(mapping, dict):
            raise ConfigError(f"{path}: expected an object")
        self.mapping = mapping
        self.path = path
        self.seen: set[str] = set()

    def quantity(self, key: str, default=None) -> float:
        self.seen.add(key)
        if key not in self.mapping:
            if default is not None:
                return default
            raise ConfigError(f"{self.path}.{key}: missing required field")
        try:
            return parse_quantity(self.mapping[key])
        except ConfigError as exc:
            raise ConfigError(f"{self.path}.{key}: {exc}") from None

    def raw(self, key: str, default=None):
        self.seen.add(key)
        return self.mapping.get(key, default)

    def section(self, key: str, required: bool = True) -> "_Walker | None":
        self.seen.add(key)
        if key not in self.mapping:
            if required:
                raise ConfigError(f"{self.path}.{key}: missing required section")
            return None
        return _Walker(self.mapping[key], f"{self.path}.{key}")

    def finish(self):
        unknown = set(self.mapping) - self.seen
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"{self.path}.{name}: unknown key")


def _parse_vsi(w: _Walker) -> VsiParams:
    try:
        ctrl = ControlParams(
            n=w.quantity("n"), m=w.quantity("m"), m_int=w.quantity("m_int"),
            tau_s=w.quantity("tau_s"), p_ref=w.quantity("p_ref"),
            q_ref=w.quantity("q_ref"), p_rated=w.quantity("p_rated"),
            q_rated=w.quantity("q_rated"))
    except ParameterError as exc:
        raise ConfigError(f"{w.path}: {exc}") from None
    fw = w.section("filter", required=False)
    filt = None
    if fw is not None:
        filt = FilterParams(l_f=fw.quantity("l_f"),
                            r_f=fw.quantity("r_f", default=0.0),
                            c_f=fw.quantity("c_f"))
        fw.finish()
    try:
        vsi = VsiParams(control=ctrl, l_l=w.quantity("l_l"),
                        r_l=w.quantity("r_l", default=0.0), filter=filt)
    except ParameterError as exc:
        raise ConfigError(f"{w.path}: {exc}") from None
    w.finish()
    return vsi


def parse_config(path: str | Path) -> RunConfig:
    """Load and validate a JSON run configuration (strict keys, unit suffixes)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None

    root = _Walker(doc, "config")
    nw = root.section("nominals")
    nominals = Nominals.from_ratings(nw.quantity("voltage_ll_rms"),
                                     nw.quantity("frequency"))
    nw.finish()
    vsi1 = _parse_vsi(root.section("vsi1"))
    vsi2 = _parse_vsi(root.section("vsi2"))
    gw = root.section("grid")
    try:
        grid = GridParams(l_lg=gw.quantity("l_lg"),
                          r_lg=gw.quantity("r_lg", default=0.0))
    except ParameterError as exc:
        raise ConfigError(f"{gw.path}: {exc}") from None
    gw.finish()
    lw = root.section("load")
    load_p = lw.quantity("p")
    load_q = lw.quantity("q")
    lw.finish()
    if load_p <= 0.0:
        raise ConfigError("config.load.p: must be positive")

    sw = root.section("solver", required=False)
    if sw is None:
        solver = SolverConfig(newton=NewtonSettings(), method=Method.FORWARD_EULER,
                              h=1e-5, output_decimation=100)
    else:
        method_raw = sw.raw("method", "euler")
        try:
            method = Method(method_raw)
        except ValueError:
            raise ConfigError(
                f"{sw.path}.method: unknown method {method_raw!r}") from None
        try:
            newton = NewtonSettings(
                tol=sw.quantity("newton_tol", default=1e-9),
                max_iter=int(sw.raw("newton_max_iter", 50)),
                fd_step=sw.quantity("fd_step", default=1e-6))
        except ParameterError as exc:
            raise ConfigError(f"{sw.path}: {exc}") from None
        solver = SolverConfig(newton=newton, method=method,
                              h=sw.quantity("h", default=1e-5),
                              output_decimation=int(sw.raw("output_decimation", 100)))
        sw.finish()
    root.finish()
    return RunConfig(nominals=nominals, vsis=(vsi1, vsi2), grid=grid,
                     load_p=load_p, load_q=load_q, solver=solver)


# ---------------------------------------------------------------------------
# Deterministic output helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(path: Path, config: RunConfig, command: str,
                   extra: dict | None = None) -> None:
    doc = {"tool": "droopsim", "version": __version__, "command": command,
           "config": config.manifest_dict()}
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("DROOPSIM_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _mode(args) -> Mode:
    return Mode.ON_GRID if args.grid_mode == "on" else Mode.OFF_GRID


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_equilibrium(args) -> int:
    cfg = parse_config(args.config)
    mode = _mode(args)
    out = _out_dir(args)
    model = cfg.model(mode)
    x_eq, report = solve_equilibrium(model, settings=cfg.solver.newton)
    o = outputs(model, x_eq)
    rows = [(name, x_eq.get(name)) for name in x_eq.labels]
    rows += [("p_1", o.p[0]), ("p_2", o.p[1]), ("q_1", o.q[0]), ("q_2", o.q[1]),
             ("p_grid", o.p_grid), ("q_grid", o.q_grid),
             ("p_load", o.p_load), ("q_load", o.q_load),
             ("v_pcc_rms_ll", o.v_pcc_rms_ll), ("frequency", o.frequency)]
    csv_path = out / f"equilibrium_{mode.value}.csv"
    lines = ["name,value"] + [f"{n},{_fmt(v)}" for n, v in rows]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(out / f"equilibrium_{mode.value}_manifest.json", cfg,
                   "equilibrium",
                   {"iterations": report.iterations, "residual": report.residual})
    print(f"equilibrium ({mode.value}-grid): converged in {report.iterations} "
          f"iterations, scaled residual {report.residual:.3e}")
    print(f"  P = ({o.p[0]:.3f}, {o.p[1]:.3f}) W, Q = ({o.q[0]:.3f}, {o.q[1]:.3f}) VAr")
    print(f"  V_pcc = {o.v_pcc_rms_ll:.2f} V (L-L RMS), f = {o.frequency:.4f} Hz")
    print(f"  wrote {csv_path}")
    return 0


def cmd_eigen(args) -> int:
    cfg = parse_config(args.config)
    mode = _mode(args)
    out = _out_dir(args)
    model = cfg.model(mode)
    x_eq, _ = solve_equilibrium(model, settings=cfg.solver.newton)
    lin = linearize(model, x_eq, fd_step=cfg.solver.newton.fd_step)
    if not args.full:
        lin = reduce(lin)
    spec = eigen_spectrum(lin)
    kind = "full" if args.full else "reduced"
    csv_path = out / f"eigen_{mode.value}_{kind}.csv"
    rows = [(lam.real, lam.imag, 1 if i in spec.structural_zero_idx else 0)
            for i, lam in enumerate(spec.eigenvalues)]
    write_csv(csv_path, ["re", "im", "structural_zero"], rows)
    write_manifest(out / f"eigen_{mode.value}_{kind}_manifest.json", cfg, "eigen",
                   {"order": lin.order, "abscissa": spec.abscissa})
    verdict = "stable" if spec.abscissa < 0 else "UNSTABLE"
    print(f"eigen ({mode.value}-grid, {kind} order {lin.order}): "
          f"abscissa {spec.abscissa:.4f} ({verdict}), "
          f"{len(spec.structural_zero_idx)} structural zero(s)")
    print(f"  wrote {csv_path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    mode = _mode(args)
    out = _out_dir(args)
    if args.param not in SWEEP_DISPLAY_UNITS:
        raise ConfigError(f"unknown sweep parameter {args.param!r}")
    unit, scale = SWEEP_DISPLAY_UNITS[args.param]
    values_si = np.linspace(args.start * scale, args.stop * scale, args.points)
    model = cfg.model(mode)
    if args.x_over_r is not None and args.param != "x_over_r":
        model = apply_parameter(model, "x_over_r", args.x_over_r)
    sweep = parameter_sweep(model, args.param, values_si,
                            settings=cfg.solver.newton)
    header = ["value"]
    for k in range(sweep.order):
        header += [f"re_{k + 1}", f"im_{k + 1}"]
    header.append("abscissa")
    rows = []
    for i, v in enumerate(sweep.values):
        row = [v / scale]
        spectrum = sweep.spectra[i]
        if spectrum is None:
            row += [float("nan")] * (2 * sweep.order + 1)
        else:
            for lam in spectrum:
                row += [lam.real, lam.imag]
            row.append(sweep.abscissa[i])
        rows.append(row)
    csv_path = out / f"sweep_{mode.value}_{args.param}.csv"
    write_csv(csv_path, header, rows)
    write_manifest(out / f"sweep_{mode.value}_{args.param}_manifest.json", cfg,
                   "sweep",
                   {"parameter": args.param, "display_unit": unit,
                    "x_over_r": args.x_over_r,
                    "points": args.points, "start": args.start, "stop": args.stop})
    n_failed = sum(1 for s in sweep.spectra if s is None)
    print(f"sweep {args.param} ({mode.value}-grid): {args.points} points, "
          f"{n_failed} failed, abscissa range "
          f"[{np.nanmin(sweep.abscissa):.4f}, {np.nanmax(sweep.abscissa):.4f}]")
    print(f"  wrote {csv_path}")
    return 0


def cmd_transition(args) -> int:
    cfg = parse_config(args.config)
    out = _out_dir(args)
    taus = [float(x) * 1e-3 for x in args.tau_values.split(",")]
    load = cfg.load_params(args.load_p, args.load_q)
    model = cfg.model(Mode.ON_GRID, load=load)
    settings = IntegratorSettings(method=cfg.solver.method, h=cfg.solver.h,
                                  t_end=args.t_end)
    runs = run_transition_study(model, taus, args.t_switch, args.t_end, settings,
                                store_every=cfg.solver.output_decimation,
                                newton=cfg.solver.newton)
    paths = []
    for run in runs:
        label = _fmt(run.tau_s * 1e3).replace(".", "p")
        csv_path = out / f"transition_tau_{label}ms.csv"
        write_csv(csv_path, list(run.timeseries.columns), run.timeseries.data)
        paths.append(str(csv_path))
        st = run.settling_p1.settling_time
        print(f"tau_s = {run.tau_s * 1e3:6.1f} ms: p_1 settling "
              f"{st if st is None else round(st, 4)} s, terminal p_eq = "
              f"({run.p_eq[0]:.1f}, {run.p_eq[1]:.1f}) W")
    write_manifest(out / "transition_manifest.json", cfg, "transition",
                   {"tau_values_s": taus, "t_switch": args.t_switch,
                    "t_end": args.t_end, "files": paths})
    return 0


def _load_events(args) -> tuple[list[ScenarioEvent], float]:
    if args.events == "canonical":
        return canonical_events(), (args.t_end or CANONICAL_T_END)
    with open(args.events, encoding="utf-8") as fh:
        doc = json.load(fh)
    events = []
    for i, item in enumerate(doc.get("events", [])):
        w = _Walker(item, f"events[{i}]")
        kind_raw = w.raw("kind")
        try:
            kind = EventKind(kind_raw)
        except ValueError:
            raise ConfigError(f"events[{i}].kind: unknown kind {kind_raw!r}") from None
        t = w.quantity("t")
        if kind is EventKind.SET_LOAD:
            events.append(ScenarioEvent(t, kind, p=w.quantity("p"),
                                        q=w.quantity("q")))
        else:
            events.append(ScenarioEvent(t, kind))
        w.finish()
    t_end = args.t_end or parse_quantity(doc.get("t_end", CANONICAL_T_END))
    return events, t_end


def cmd_scenario(args) -> int:
    cfg = parse_config(args.config)
    out = _out_dir(args)
    events, t_end = _load_events(args)
    model = cfg.model(Mode.ON_GRID)
    settings = IntegratorSettings(method=cfg.solver.method, h=cfg.solver.h,
                                  t_end=t_end)
    result = run_scenario(model, events, settings,
                          store_every=cfg.solver.output_decimation,
                          newton=cfg.solver.newton)
    csv_path = out / "scenario.csv"
    write_csv(csv_path, list(result.timeseries.columns), result.timeseries.data)
    report_path = out / "scenario_settling.csv"
    write_csv(report_path,
              ["event_t", "signal_index", "settling_time", "band",
               "steady_value", "settled"],
              [(m.event_t, i, math.nan if m.settling_time is None else m.settling_time,
                m.band, m.steady_value, 1 if m.settled else 0)
               for i, m in enumerate(result.metrics)])
    write_manifest(out / "scenario_manifest.json", cfg, "scenario", {
        "t_end": t_end,
        "events": [{"t": ev.t, "kind": ev.kind.value,
                    **({"p": ev.p, "q": ev.q} if ev.p is not None else {})}
                   for ev in result.events],
        "note": ("grid reconnection assumes an externally synchronized close; "
                 "the grid angle is seeded at the PCC voltage angle"),
    })
    print(f"scenario: {result.timeseries.data.shape[0]} samples over {t_end} s")
    for m in result.metrics:
        st = "unsettled" if not m.settled else f"{m.settling_time:.3f} s"
        print(f"  event t={m.event_t:6.3f}  {m.signal:13s} settling {st}")
    print(f"  wrote {csv_path}")
    return 0


def cmd_verify(args) -> int:
    cfg = parse_config(args.config)
    checks: list[tuple[str, bool, str]] = []
    s_rating = math.hypot(cfg.vsis[0].control.p_rated, cfg.vsis[0].control.q_rated)

    # Zero on-grid injection: at the on-grid equilibrium both inverters are
    # idle and the grid carries the whole load.
    model_on = cfg.model(Mode.ON_GRID)
    x_on, _ = solve_equilibrium(model_on, settings=cfg.solver.newton)
    o = outputs(model_on, x_on)
    worst = max(abs(v) for v in (*o.p, *o.q))
    grid_err = abs(o.p_grid - o.p_load) / abs(o.p_load)
    ok = worst <= 1e-6 * s_rating and grid_err <= 1e-6
    checks.append(("zero-ongrid-injection", ok,
                   f"max |P_i|,|Q_i| = {worst:.3e} VA, grid-vs-load rel err "
                   f"= {grid_err:.2e}"))

    # Active-sharing identity off-grid: n_1 P_1 = n_2 P_2 when the weighted
    # references match (exactly n_1 p_ref_1 = n_2 p_ref_2).
    model_off = cfg.model(Mode.OFF_GRID)
    x_off, _ = solve_equilibrium(model_off, settings=cfg.solver.newton)
    o_off = outputs(model_off, x_off)
    sym_err = abs(o_off.p[0] - o_off.p[1]) / max(abs(o_off.p[0]), 1e-9)
    vsi2 = cfg.vsis[1]
    ctrl2 = replace(vsi2.control, n=2.0 * vsi2.control.n,
                    p_ref=0.5 * vsi2.control.p_ref)
    model_asym = replace(model_off, vsis=(cfg.vsis[0], replace(vsi2, control=ctrl2)))
    x_asym, _ = solve_equilibrium(model_asym, settings=cfg.solver.newton)
    o_asym = outputs(model_asym, x_asym)
    lhs = cfg.vsis[0].control.n * o_asym.p[0]
    rhs = ctrl2.n * o_asym.p[1]
    asym_err = abs(lhs - rhs) / max(abs(lhs), 1e-9)
    ok = sym_err <= 1e-3 and asym_err <= 5e-3
    checks.append(("active-sharing-identity", ok,
                   f"symmetric split err {sym_err:.2e}, weighted err {asym_err:.2e}"))

    # Reactive sharing approaches m_1 Q_1 = m_2 Q_2 as coupling impedances
    # shrink (here scaled to 1% of nominal).
    weak_vsis = []
    for i, vsi in enumerate(cfg.vsis):
        ctrl = vsi.control
        if i == 1:
            ctrl = replace(ctrl, m=2.0 * ctrl.m, q_ref=0.5 * ctrl.q_ref)
        weak_vsis.append(replace(vsi, control=ctrl, l_l=0.01 * vsi.l_l,
                                 r_l=0.01 * vsi.r_l))
    model_weak = replace(model_off, vsis=tuple(weak_vsis))
    x_weak, _ = solve_equilibrium(model_weak, settings=cfg.solver.newton)
    o_weak = outputs(model_weak, x_weak)
    lhs = weak_vsis[0].control.m * o_weak.q[0]
    rhs = weak_vsis[1].control.m * o_weak.q[1]
    q_err = abs(lhs - rhs) / max(abs(lhs), 1e-9)
    checks.append(("reactive-sharing-weak-coupling", q_err <= 1e-2,
                   f"weighted reactive err {q_err:.2e}"))

    # Slow/fast reduction consistency in both modes.
    worst_rel = 0.0
    for model, x_eq in ((model_on, x_on), (model_off, x_off)):
        lin = linearize(model, x_eq, fd_step=cfg.solver.newton.fd_step)
        red = reduce(lin)
        pairs = match_slow_eigenvalues(eigen_spectrum(lin).eigenvalues,
                                       eigen_spectrum(red).eigenvalues)
        worst_rel = max(worst_rel, max(p[2] for p in pairs))
    checks.append(("reduction-consistency", worst_rel <= 0.10,
                   f"worst slow-eigenvalue mismatch {worst_rel:.2%}"))

    # Stability of both reduced models at the configured gains, with exactly
    # one structural zero each.
    ok = True
    detail = []
    for model, x_eq in ((model_on, x_on), (model_off, x_off)):
        red = reduce(linearize(model, x_eq, fd_step=cfg.solver.newton.fd_step))
        spec = eigen_spectrum(red)
        ok &= spec.abscissa < 0.0 and len(spec.structural_zero_idx) == 1
        detail.append(f"{model.mode.value}: abscissa {spec.abscissa:.4f}, "
                      f"{len(spec.structural_zero_idx)} zero(s)")
    checks.append(("stability-at-selected-gains", ok, "; ".join(detail)))

    failed = False
    for name, ok, detail in checks:
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
        failed |= not ok
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="path to a JSON run config")
    p.add_argument("--out", default=None,
                   help="output directory (default $DROOPSIM_OUT or ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="droopsim",
        description="Two-inverter droop-controlled microgrid simulation "
                    "and small-signal analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", help="solve a steady state")
    _add_common(p)
    p.add_argument("--grid-mode", choices=("on", "off"), default="on")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("eigen", help="eigenvalue spectrum at the equilibrium")
    _add_common(p)
    p.add_argument("--grid-mode", choices=("on", "off"), default="on")
    p.add_argument("--full", action="store_true",
                   help="full-order model instead of the slow reduced model")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("sweep", help="eigenvalue sweep over a control parameter")
    _add_common(p)
    p.add_argument("--grid-mode", choices=("on", "off"), default="on")
    p.add_argument("--param", required=True,
                   choices=("n", "m", "m_int", "tau_s", "x_over_r"))
    p.add_argument("--from", dest="start", type=float, required=True,
                   help="start value in display units (rad/s/kW, V/kVAr, "
                        "V/s/kVAr, ms, or unitless X/R)")
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--x-over-r", type=float, default=None,
                   help="hold the coupling-line X/R at this value during "
                        "gain sweeps (impedance magnitude preserved)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transition",
                       help="islanding transition study over filter time constants")
    _add_common(p)
    p.add_argument("--tau-values", default="24.7,33,41.2",
                   help="comma-separated power-filter time constants in ms")
    p.add_argument("--t-switch", type=float, default=0.05)
    p.add_argument("--t-end", type=float, default=1.1)
    p.add_argument("--load-p", type=float, default=250e3,
                   help="active load during the study, W")
    p.add_argument("--load-q", type=float, default=100e3,
                   help="reactive load during the study, VAr")
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("scenario", help="timed multi-event simulation")
    _add_common(p)
    p.add_argument("--events", default="canonical",
                   help="'canonical' or a JSON events file")
    p.add_argument("--t-end", type=float, default=None)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("verify", help="run the built-in model checks")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DroopsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
