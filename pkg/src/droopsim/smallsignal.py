"""Linearization, slow/fast order reduction, eigen-spectra, parameter sweeps,
and critical-gain search.

On-grid the analysis frame rotates at the nominal grid rate, freezing the
grid angle; off-grid it is anchored to the first inverter, freezing that
inverter's angle.  Either way exactly one state row of the Jacobian is
identically zero, which yields one exact structural zero eigenvalue (the
rotational gauge freedom of absolute angles); it is flagged and excluded
from stability verdicts.  The anchored off-grid Jacobian has the same
characteristic polynomial as the one taken in a frame rotating at the
synchronized frequency, so the spectrum is frame-policy independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    FrameAnchor,
    Mode,
    NumericalError,
    ParameterError,
    ReferenceFrame,
    SystemState,
    UsageError,
    state_index,
)
from .solver import (
    ConvergenceError,
    NewtonSettings,
    jacobian,
    residual_scale,
    solve_equilibrium,
)
from .system import SystemModel, make_field

#: Absolute threshold below which an eigenvalue is treated as the structural
#: zero mode of angle-translation invariance.
STRUCTURAL_ZERO_TOL = 1e-9

#: Scaled-residual gate for accepting a point as a linearization equilibrium.
EQUILIBRIUM_GATE = 1e-6


@dataclass(frozen=True)
class LinearModel:
    """State matrix with labels and the equilibrium it was built around."""

    a: np.ndarray
    labels: tuple[str, ...]
    x_eq: SystemState
    mode: Mode

    @property
    def order(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class SlowFastPartition:
    slow_idx: tuple[int, ...]
    fast_idx: tuple[int, ...]

    def __post_init__(self):
        overlap = set(self.slow_idx) & set(self.fast_idx)
        if overlap:
            raise UsageError(f"slow/fast index sets overlap: {sorted(overlap)}")

    @classmethod
    def for_mode(cls, mode: Mode) -> "SlowFastPartition":
        """Droop-scale states are slow; branch currents are fast."""
        labels = mode.labels
        fast = tuple(i for i, name in enumerate(labels) if name.startswith(("id", "iq")))
        slow = tuple(i for i in range(len(labels)) if i not in fast)
        return cls(slow_idx=slow, fast_idx=fast)


def analysis_frame(model: SystemModel, x_eq: SystemState) -> ReferenceFrame:
    """Frame in which ``x_eq`` is an exact equilibrium and one angle row of
    the Jacobian is identically zero."""
    if model.mode is Mode.ON_GRID:
        return ReferenceFrame.fixed_nominal(model.nominals)
    return ReferenceFrame.vsi1_anchored(model.nominals)


def linearize(model: SystemModel, x_eq: SystemState,
              fd_step: float = 1e-6) -> LinearModel:
    """Jacobian of the vector field at an equilibrium, with state labels.

    Rejects points whose scaled residual exceeds the equilibrium gate.
    """
    if x_eq.mode is not model.mode:
        raise UsageError("equilibrium mode does not match the model")
    frame = analysis_frame(model, x_eq)
    lin_model = model.with_frame(frame)
    f = make_field(lin_model)
    residual = np.max(np.abs(f(x_eq.values) / residual_scale(lin_model)))
    if residual > EQUILIBRIUM_GATE:
        raise UsageError(
            f"not an equilibrium: scaled residual {residual:.3e} exceeds "
            f"{EQUILIBRIUM_GATE:.1e}")
    a = jacobian(f, x_eq.values, fd_step)
    return LinearModel(a=a, labels=model.mode.labels, x_eq=x_eq, mode=model.mode)


def reduce(lin: LinearModel, part: SlowFastPartition | None = None) -> LinearModel:
    """Quasi-steady-state elimination of the fast block.

    With x the slow and z the fast states, substituting the fast stationary
    response z = -Azz^-1 Azx x yields the slow matrix Axx - Axz Azz^-1 Azx.
    """
    if part is None:
        part = SlowFastPartition.for_mode(lin.mode)
    slow = np.asarray(part.slow_idx, dtype=int)
    fast = np.asarray(part.fast_idx, dtype=int)
    if sorted((*part.slow_idx, *part.fast_idx)) != list(range(lin.order)):
        raise UsageError("partition must cover every state exactly once")
    a_xx = lin.a[np.ix_(slow, slow)]
    a_xz = lin.a[np.ix_(slow, fast)]
    a_zx = lin.a[np.ix_(fast, slow)]
    a_zz = lin.a[np.ix_(fast, fast)]
    cond = np.linalg.cond(a_zz)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(
            f"fast block is numerically singular (condition number {cond:.3e}); "
            "quasi-steady-state reduction is not defined")
    reduced = a_xx - a_xz @ np.linalg.solve(a_zz, a_zx)
    labels = tuple(lin.labels[i] for i in part.slow_idx)
    return LinearModel(a=reduced, labels=labels, x_eq=lin.x_eq, mode=lin.mode)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by (real, imag) with structural zeros flagged."""

    eigenvalues: np.ndarray
    structural_zero_idx: tuple[int, ...]
    abscissa: float

    @property
    def stable(self) -> bool:
        return self.abscissa < 0.0


def eigen_spectrum(lin: LinearModel | np.ndarray,
                   zero_tol: float = STRUCTURAL_ZERO_TOL) -> Spectrum:
    """All eigenvalues of the state matrix plus the spectral abscissa over the
    non-structural part."""
    a = lin.a if isinstance(lin, LinearModel) else np.asarray(lin, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("state matrix contains non-finite entries")
    try:
        lam = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}; matrix:\n{a!r}") from exc
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    structural = tuple(int(i) for i in np.flatnonzero(np.abs(lam) < zero_tol))
    keep = [i for i in range(lam.size) if i not in structural]
    abscissa = float(np.max(lam.real[keep])) if keep else float("-inf")
    return Spectrum(eigenvalues=lam, structural_zero_idx=structural,
                    abscissa=abscissa)


# ---------------------------------------------------------------------------
# Parameter application and sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("n", "m", "m_int", "tau_s", "x_over_r")


def apply_parameter(model: SystemModel, parameter: str, value: float) -> SystemModel:
    """Homogeneous parameter override across both inverters.

    ``x_over_r`` rotates each coupling impedance: the magnitude at nominal
    frequency is preserved while the X/R angle is set to atan(value).
    """
    if parameter not in SWEEP_PARAMETERS:
        raise UsageError(
            f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    if not (value > 0.0):
        raise ParameterError(f"sweep value must be positive, got {value}")
    new_vsis = []
    for vsi in model.vsis:
        if parameter == "x_over_r":
            omega = model.nominals.omega_nom
            z_mag = math.hypot(vsi.r_l, omega * vsi.l_l)
            phi = math.atan(value)
            new_vsis.append(replace(vsi, r_l=z_mag * math.cos(phi),
                                    l_l=z_mag * math.sin(phi) / omega))
        else:
            new_vsis.append(replace(vsi, control=replace(vsi.control,
                                                         **{parameter: value})))
    return replace(model, vsis=tuple(new_vsis))


@dataclass
class EigenSweep:
    """Spectra over a strictly increasing parameter grid.

    ``spectra[i]`` is None where the equilibrium solve failed; the matching
    abscissa entry is NaN.
    """

    parameter: str
    values: np.ndarray
    spectra: list[np.ndarray | None]
    abscissa: np.ndarray
    mode: Mode
    order: int


def _point_spectrum(model: SystemModel, reduced: bool,
                    settings: NewtonSettings) -> Spectrum:
    x_eq, _ = solve_equilibrium(model, settings=settings)
    lin = linearize(model, x_eq, fd_step=settings.fd_step)
    if reduced:
        lin = reduce(lin)
    return eigen_spectrum(lin)


def _sweep_model(model: SystemModel) -> SystemModel:
    """Equilibria are solved per grid point; off-grid needs the anchored frame."""
    if model.mode is Mode.OFF_GRID and model.frame.anchor is not FrameAnchor.VSI1:
        return model.with_frame(ReferenceFrame.vsi1_anchored(model.nominals))
    return model


def parameter_sweep(model: SystemModel, parameter: str, values,
                    *, reduced: bool = True,
                    settings: NewtonSettings = NewtonSettings()) -> EigenSweep:
    """Re-solve, linearize, (optionally) reduce, and decompose the system at
    every grid value.  Failed equilibrium solves mark their point and the
    sweep continues."""
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise UsageError("sweep needs a one-dimensional grid of values")
    if np.any(np.diff(grid) <= 0.0):
        raise UsageError("sweep grid must be strictly increasing")
    base = _sweep_model(model)
    spectra: list[np.ndarray | None] = []
    abscissa = np.full(grid.size, np.nan)
    order = 0
    for i, value in enumerate(grid):
        try:
            spec = _point_spectrum(apply_parameter(base, parameter, float(value)),
                                   reduced, settings)
        except (ConvergenceError, NumericalError):
            spectra.append(None)
            continue
        spectra.append(spec.eigenvalues)
        abscissa[i] = spec.abscissa
        order = spec.eigenvalues.size
    return EigenSweep(parameter=parameter, values=grid, spectra=spectra,
                      abscissa=abscissa, mode=model.mode, order=order)


@dataclass(frozen=True)
class CriticalResult:
    parameter: str
    value: float
    abscissa_lo: float
    abscissa_hi: float
    spectrum_lo: np.ndarray
    spectrum_hi: np.ndarray


def find_critical(model: SystemModel, parameter: str, lo: float, hi: float,
                  *, rel_tol: float = 1e-3, reduced: bool = True,
                  settings: NewtonSettings = NewtonSettings()) -> CriticalResult:
    """Bisect the spectral abscissa's sign change in [lo, hi]."""
    if not (0.0 < lo < hi):
        raise UsageError(f"bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    base = _sweep_model(model)

    def abscissa_at(value: float) -> Spectrum:
        return _point_spectrum(apply_parameter(base, parameter, value),
                               reduced, settings)

    spec_lo = abscissa_at(lo)
    spec_hi = abscissa_at(hi)
    if not (spec_lo.abscissa < 0.0 < spec_hi.abscissa):
        raise NumericalError(
            f"no abscissa sign change in bracket: a({lo}) = {spec_lo.abscissa:.4e}, "
            f"a({hi}) = {spec_hi.abscissa:.4e}")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        spec_mid = abscissa_at(mid)
        if spec_mid.abscissa < 0.0:
            lo, spec_lo = mid, spec_mid
        else:
            hi, spec_hi = mid, spec_mid
    return CriticalResult(parameter=parameter, value=0.5 * (lo + hi),
                          abscissa_lo=spec_lo.abscissa, abscissa_hi=spec_hi.abscissa,
                          spectrum_lo=spec_lo.eigenvalues,
                          spectrum_hi=spec_hi.eigenvalues)


# ---------------------------------------------------------------------------
# Full-vs-reduced consistency
# ---------------------------------------------------------------------------

def match_slow_eigenvalues(full: np.ndarray, reduced: np.ndarray,
                           zero_tol: float = STRUCTURAL_ZERO_TOL,
                           ) -> list[tuple[complex, complex, float]]:
    """Pair every non-structural reduced eigenvalue with its nearest distinct
    full-model eigenvalue (optimal assignment); returns (full, reduced,
    relative difference) triples."""
    red = np.asarray([z for z in reduced if abs(z) >= zero_tol])
    cand = np.asarray([z for z in full if abs(z) >= zero_tol])
    if red.size == 0:
        return []
    if cand.size < red.size:
        raise NumericalError("full spectrum has fewer usable eigenvalues than reduced")
    cost = np.abs(cand[None, :] - red[:, None])
    rows, cols = linear_sum_assignment(cost)
    out = []
    for r, c in zip(rows, cols):
        rel = abs(cand[c] - red[r]) / max(abs(red[r]), 1e-12)
        out.append((complex(cand[c]), complex(red[r]), float(rel)))
    return out
