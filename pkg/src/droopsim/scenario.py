"""Timed multi-event simulation: load steps, islanding, grid return.

The whole run is integrated in the VSI1-anchored frame so angle states stay
bounded across islanded intervals and the grid-return remap (grid angle
seeded at zero) reconnects nearly in phase.  The on-grid equilibrium used as
the initial condition is also an exact fixed point of the anchored field.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .components import load_from_power
from .core import (
    Mode,
    ReferenceFrame,
    SystemState,
    UsageError,
)
from .solver import (
    IntegratorSettings,
    NewtonSettings,
    Trajectory,
    grid_return_state,
    integrate,
    islanding_state,
    solve_equilibrium,
)
from .system import SystemModel, make_field, make_output_row


class EventKind(enum.Enum):
    SET_LOAD = "set_load"
    ISLAND = "island"
    GRID_RETURN = "grid_return"


@dataclass(frozen=True)
class ScenarioEvent:
    t: float
    kind: EventKind
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.t < 0.0:
            raise UsageError(f"event time must be non-negative, got {self.t}")
        if self.kind is EventKind.SET_LOAD:
            if self.p is None or self.q is None:
                raise UsageError("SET_LOAD events need p and q")
        elif self.p is not None or self.q is not None:
            raise UsageError(f"{self.kind.value} events carry no load values")


def validate_events(events: list[ScenarioEvent], initial_mode: Mode,
                    t_end: float) -> None:
    """Reject bad orderings before any simulation starts: events must be
    sorted, unique per (time, kind), inside the horizon, and mode-legal."""
    mode = initial_mode
    seen = set()
    last_t = -1.0
    for ev in events:
        if ev.t < last_t:
            raise UsageError("events must be sorted by time")
        last_t = ev.t
        if ev.t >= t_end:
            raise UsageError(f"event at t={ev.t} is beyond t_end={t_end}")
        key = (ev.t, ev.kind)
        if key in seen:
            raise UsageError(f"duplicate event {ev.kind.value} at t={ev.t}")
        seen.add(key)
        if ev.kind is EventKind.ISLAND:
            if mode is not Mode.ON_GRID:
                raise UsageError(f"island event at t={ev.t} while already off-grid")
            mode = Mode.OFF_GRID
        elif ev.kind is EventKind.GRID_RETURN:
            if mode is not Mode.OFF_GRID:
                raise UsageError(f"grid-return event at t={ev.t} while already on-grid")
            mode = Mode.ON_GRID


def canonical_events() -> list[ScenarioEvent]:
    """Desk-scale default sequence: load drop, shed + islanding, load jump,
    grid return with the shed load restored.

    The 500 kW / 220 kVAr starting point and the 250 kW / 100 kVAr islanded
    peak are the studied operating points; the intermediate levels are
    documented defaults.  On-grid intervals are kept several integral-mode
    time constants long (the Q-V integral re-zeroes the reactive power with
    a m/m_int timescale, about 0.3 s here, and its slowest closed-loop mode
    is slower still), so steady-state claims can be checked at their ends;
    islanded intervals only need the faster droop-filter timescale.
    """
    return [
        ScenarioEvent(0.80, EventKind.SET_LOAD, p=400e3, q=180e3),
        ScenarioEvent(5.30, EventKind.SET_LOAD, p=200e3, q=80e3),
        ScenarioEvent(5.30, EventKind.ISLAND),
        ScenarioEvent(6.35, EventKind.SET_LOAD, p=250e3, q=100e3),
        ScenarioEvent(7.40, EventKind.GRID_RETURN),
        ScenarioEvent(7.40, EventKind.SET_LOAD, p=400e3, q=180e3),
    ]


CANONICAL_T_END = 12.6


# ---------------------------------------------------------------------------
# Sampled signals
# ---------------------------------------------------------------------------

TIMESERIES_COLUMNS = ("t", "p_1", "p_2", "q_1", "q_2", "p_grid", "q_grid",
                      "p_load", "q_load", "v_pcc_rms_ll", "frequency", "i_gs",
                      "p_f_1", "p_f_2", "q_f_1", "q_f_2")


@dataclass
class TimeSeries:
    """Uniformly decimated samples of the scenario signal set."""

    data: np.ndarray  # shape (n_samples, len(TIMESERIES_COLUMNS))

    columns = TIMESERIES_COLUMNS

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, TIMESERIES_COLUMNS.index(name)]
        except ValueError:
            raise UsageError(f"unknown time-series column {name!r}") from None

    def window(self, t0: float, t1: float) -> "TimeSeries":
        mask = (self.t >= t0) & (self.t < t1)
        return TimeSeries(self.data[mask])


@dataclass(frozen=True)
class SettlingMetric:
    signal: str
    event_t: float
    settling_time: float | None
    band: float
    steady_value: float
    settled: bool


def settling_time(t: np.ndarray, y: np.ndarray, event_t: float,
                  band: float = 0.02, tail_fraction: float = 0.2,
                  scale_floor: float = 0.0) -> SettlingMetric:
    """First time after which the signal stays inside +-band of its final
    windowed mean.

    The band is a fraction of a reference scale: the largest of the final
    mean's magnitude, the step the event induced, and ``scale_floor`` (so
    signals settling to zero, or barely perturbed by an event, still get a
    meaningful band).  A signal still leaving the band in the trailing
    window is reported unsettled.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    post = t >= event_t
    if not np.any(post):
        raise UsageError("no samples at or after the event time")
    tp = t[post]
    yp = y[post]
    if tp[-1] - event_t < 1.0:
        raise UsageError(
            f"series must extend at least 1 s past the event, got {tp[-1] - event_t:.3f} s")

    n_tail = max(2, int(math.ceil(tail_fraction * yp.size)))
    steady = float(np.mean(yp[-n_tail:]))

    pre = t < event_t
    value_before = float(y[pre][-1]) if np.any(pre) else float(yp[0])
    scale = max(abs(steady), abs(steady - value_before), scale_floor)
    band_abs = band * scale

    outside = np.abs(yp - steady) > band_abs
    if not np.any(outside):
        return SettlingMetric(signal="", event_t=event_t, settling_time=0.0,
                              band=band, steady_value=steady, settled=True)
    last_out = int(np.flatnonzero(outside)[-1])
    if last_out >= yp.size - n_tail:
        # Still excursing inside the averaging window: not settled.
        return SettlingMetric(signal="", event_t=event_t, settling_time=None,
                              band=band, steady_value=steady, settled=False)
    return SettlingMetric(signal="", event_t=event_t,
                          settling_time=float(tp[last_out + 1] - event_t),
                          band=band, steady_value=steady, settled=True)


# ---------------------------------------------------------------------------
# Scenario engine
# ---------------------------------------------------------------------------

def _observer(model: SystemModel):
    sample = make_output_row(model)
    i_gs = float(model.mode.i_gs)

    def row(x: np.ndarray) -> tuple:
        full = sample(x)
        return full[:10] + (i_gs,) + full[12:16]

    return row


def _apply_event(ev: ScenarioEvent, model: SystemModel,
                 x: SystemState) -> tuple[SystemModel, SystemState]:
    if ev.kind is EventKind.SET_LOAD:
        load = load_from_power(ev.p, ev.q, model.nominals.v_ll_rms,
                               model.nominals.omega_nom)
        return model.with_load(load), x
    if ev.kind is EventKind.ISLAND:
        return model.with_mode(Mode.OFF_GRID), islanding_state(x)
    model_on = model.with_mode(Mode.ON_GRID)
    return model_on, grid_return_state(x, model_on)


@dataclass
class ScenarioResult:
    timeseries: TimeSeries
    metrics: list[SettlingMetric]
    events: list[ScenarioEvent]
    t_end: float


#: Signals given per-event settling metrics: the filtered powers (what the
#: controller regulates) plus PCC voltage and system frequency.
_SETTLING_SIGNALS = ("p_f_1", "p_f_2", "q_f_1", "q_f_2",
                     "v_pcc_rms_ll", "frequency")


def _settling_floors(model: SystemModel) -> dict[str, float]:
    """Reference-scale floors: 1% of the combined inverter rating for powers,
    1% of nominal for voltage and frequency."""
    s_rated = sum(math.hypot(v.control.p_rated, v.control.q_rated)
                  for v in model.vsis)
    return {
        "p_f_1": 0.01 * s_rated, "p_f_2": 0.01 * s_rated,
        "q_f_1": 0.01 * s_rated, "q_f_2": 0.01 * s_rated,
        "p_1": 0.01 * s_rated, "p_2": 0.01 * s_rated,
        "q_1": 0.01 * s_rated, "q_2": 0.01 * s_rated,
        "v_pcc_rms_ll": 0.01 * model.nominals.v_ll_rms,
        "frequency": 0.01 * model.nominals.f_nom,
    }


def run_scenario(model: SystemModel, events: list[ScenarioEvent],
                 settings: IntegratorSettings, *, store_every: int = 100,
                 band: float = 0.02,
                 newton: NewtonSettings = NewtonSettings()) -> ScenarioResult:
    """Simulate the event sequence from the on-grid equilibrium.

    Samples at an event time reflect the post-event regime; settling metrics
    for each event are evaluated on the window up to the next event.
    """
    if model.mode is not Mode.ON_GRID:
        raise UsageError("scenarios start on-grid; pass an on-grid model")
    validate_events(events, model.mode, settings.t_end)

    # Equilibrate in the fixed nominal frame, then integrate anchored; the
    # on-grid fixed point is shared by both frames.
    fixed = ReferenceFrame.fixed_nominal(model.nominals)
    anchored = ReferenceFrame.vsi1_anchored(model.nominals)
    x_eq, _ = solve_equilibrium(model.with_frame(fixed), settings=newton)
    model = model.with_frame(anchored)
    x = x_eq

    h = settings.h
    # Event times snap to the integration grid; events sharing a (snapped)
    # time are applied in list order at that boundary.
    snapped = [round(ev.t / h) * h for ev in events]
    times = sorted(set(snapped))
    groups = {ts: [ev for ev, s in zip(events, snapped) if s == ts]
              for ts in times}
    boundaries = times + [settings.t_end]

    chunks = []
    t_cursor = 0.0
    for t_next in boundaries:
        if t_next > t_cursor:
            seg = IntegratorSettings(method=settings.method, h=h,
                                     t_end=t_next - t_cursor)
            traj = integrate(make_field(model), np.asarray(x.values, dtype=float),
                             seg, t0=t_cursor, store_every=store_every,
                             observer=_observer(model))
            if traj.aborted:
                raise UsageError(
                    f"trajectory diverged in segment starting at t={t_cursor}")
            block = np.column_stack([traj.t, traj.rows])
            if chunks:
                # The sample at a boundary belongs to the post-event regime.
                chunks[-1] = chunks[-1][:-1]
            chunks.append(block)
            x = SystemState(model.mode, traj.x_final)
            t_cursor = t_next
        for ev in groups.get(t_next, ()):
            model, x = _apply_event(ev, model, x)

    series = TimeSeries(np.vstack(chunks))

    metrics = []
    floors = _settling_floors(model)
    for k, t_ev in enumerate(times):
        t_stop = boundaries[k + 1]
        window = series.window(0.0, t_stop)
        for name in _SETTLING_SIGNALS:
            metric = settling_time(window.t, window.column(name), t_ev,
                                   band=band, scale_floor=floors[name])
            metrics.append(replace(metric, signal=name))
    return ScenarioResult(timeseries=series, metrics=metrics,
                          events=list(events), t_end=settings.t_end)


# ---------------------------------------------------------------------------
# On-grid to off-grid transition study
# ---------------------------------------------------------------------------

@dataclass
class TransitionRun:
    tau_s: float
    timeseries: TimeSeries
    settling_p1: SettlingMetric
    x_off_eq: SystemState
    p_eq: tuple[float, float]
    q_eq: tuple[float, float]


def run_transition_study(model: SystemModel, tau_values: list[float],
                         t_switch: float, t_end: float,
                         settings: IntegratorSettings, *,
                         store_every: int = 100,
                         newton: NewtonSettings = NewtonSettings(),
                         ) -> list[TransitionRun]:
    """Island the system at ``t_switch`` for each power-filter time constant
    and record the power recovery; the load is held fixed throughout."""
    if model.mode is not Mode.ON_GRID:
        raise UsageError("the transition study starts from the on-grid equilibrium")
    if not (0.0 < t_switch < t_end):
        raise UsageError("need 0 < t_switch < t_end")
    from .smallsignal import apply_parameter  # local import, avoids a cycle

    runs = []
    for tau in tau_values:
        m_on = apply_parameter(model, "tau_s", float(tau))
        events = [ScenarioEvent(t_switch, EventKind.ISLAND)]
        result = run_scenario(m_on, events,
                              IntegratorSettings(method=settings.method,
                                                 h=settings.h, t_end=t_end),
                              store_every=store_every, newton=newton)
        # Independent Newton equilibrium for the islanded configuration.
        m_off = m_on.with_mode(Mode.OFF_GRID,
                               ReferenceFrame.vsi1_anchored(model.nominals))
        x_off, _ = solve_equilibrium(m_off, settings=newton)
        from .system import outputs as _outputs
        out = _outputs(m_off, x_off)
        ts = result.timeseries
        # Recovery time is paced by the power filter, so it is measured on
        # the filtered power (the raw electromagnetic power re-settles within
        # a few line time constants regardless of tau_s).
        metric = settling_time(ts.t, ts.column("p_f_1"), t_switch,
                               scale_floor=_settling_floors(m_on)["p_1"])
        runs.append(TransitionRun(tau_s=float(tau), timeseries=result.timeseries,
                                  settling_p1=replace(metric, signal="p_f_1"),
                                  x_off_eq=x_off, p_eq=out.p, q_eq=out.q))
    return runs
