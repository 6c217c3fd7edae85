"""Scalar diagnostics, decay-law fitting, and self-convergence checks.

The recorded energy is the standard quadratic functional of the system,

    E = (1/2) integral( rho1 phi_t^2 + rho2 psi_t^2 + b psi_x^2
                        + k (phi_x + psi)^2 + rho3 theta^2 + tau q^2 ) dx,

discretized with nodal sums for the rate/temperature/flux terms and
midpoint (forward-difference) sums for the strain terms, all after
boundary extension.  Time rates use the centered difference across levels
n-1 and n+1; the t=0 record falls back to the prescribed initial rates.

The long-time tail is fitted against both candidate laws,
E ~ E0 * exp(lambda t) and E ~ C * t^p, by least squares in log space;
the smaller log-space residual selects the decay model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ConfigError,
    DegenerateOrderError,
    InsufficientPointsError,
    NonPositiveEnergyError,
)
from .grid import GridConfig, Mesh
from .params import PhysicalParameters
from .stepper import (
    Fields,
    InitialData,
    Observer,
    StepRecord,
    apply_boundary_extension,
    run,
)

#: Fewest points a log-space line fit will accept.
MIN_FIT_POINTS = 10


def energy_from_rates(
    curr: Fields, phi_rate: np.ndarray, psi_rate: np.ndarray,
    p: PhysicalParameters, mesh: Mesh,
) -> float:
    """Discrete energy of interior fields ``curr`` with given interior rates."""
    h = mesh.h
    full = apply_boundary_extension(curr)
    phi_t = np.concatenate(([phi_rate[0]], phi_rate, [phi_rate[-1]]))
    psi_t = np.concatenate(([0.0], psi_rate, [0.0]))

    nodal = float(
        np.sum(p.rho1 * phi_t**2 + p.rho2 * psi_t**2 + p.rho3 * full.theta**2
               + p.tau * full.q**2)
    )
    psi_x = np.diff(full.psi) / h
    phi_x = np.diff(full.phi) / h
    psi_mid = 0.5 * (full.psi[1:] + full.psi[:-1])
    strain = float(np.sum(p.b * psi_x**2 + p.k * (phi_x + psi_mid) ** 2))
    return 0.5 * h * (nodal + strain)


def discrete_energy(
    prev: Fields, curr: Fields, nxt: Fields, p: PhysicalParameters, mesh: Mesh
) -> float:
    """Energy at the middle of three consecutive levels (centered rates)."""
    two_kappa = 2.0 * mesh.kappa
    phi_rate = (nxt.phi - prev.phi) / two_kappa
    psi_rate = (nxt.psi - prev.psi) / two_kappa
    return energy_from_rates(curr, phi_rate, psi_rate, p, mesh)


def max_displacement(curr: Fields) -> float:
    """max |phi| over all full nodes after boundary extension."""
    return float(np.max(np.abs(apply_boundary_extension(curr).phi)))


@dataclass(frozen=True)
class TimeSeries:
    """Sampled per-step diagnostics; all arrays share one length."""

    n: np.ndarray
    t: np.ndarray
    energy: np.ndarray
    max_abs_phi: np.ndarray
    max_abs_psi: np.ndarray
    max_abs_theta: np.ndarray
    max_abs_q: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        for name in ("energy", "max_abs_phi", "max_abs_psi", "max_abs_theta", "max_abs_q"):
            values = getattr(self, name)
            if not np.all(np.isfinite(values)) or np.any(values < 0.0):
                raise ValueError(f"{name} must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.t)


class TimeSeriesRecorder:
    """Observer callback accumulating the diagnostics series during a run."""

    def __init__(self, p: PhysicalParameters, mesh: Mesh):
        self.p = p
        self.mesh = mesh
        self._rows: list[tuple[int, float, float, float, float, float, float]] = []

    def __call__(self, rec: StepRecord) -> None:
        if rec.n == 0:
            if rec.rates is None:
                raise ValueError("n=0 record carries no prescribed rates")
            energy = energy_from_rates(
                rec.curr, rec.rates.phi, rec.rates.psi, self.p, self.mesh
            )
        else:
            energy = discrete_energy(rec.prev, rec.curr, rec.nxt, self.p, self.mesh)
        full = apply_boundary_extension(rec.curr)
        self._rows.append(
            (
                rec.n,
                rec.t,
                energy,
                float(np.max(np.abs(full.phi))),
                float(np.max(np.abs(full.psi))),
                float(np.max(np.abs(full.theta))),
                float(np.max(np.abs(full.q))),
            )
        )

    @property
    def series(self) -> TimeSeries:
        if not self._rows:
            raise ValueError("no samples recorded")
        cols = list(zip(*self._rows))
        return TimeSeries(
            n=np.array(cols[0], dtype=np.int64),
            t=np.array(cols[1]),
            energy=np.array(cols[2]),
            max_abs_phi=np.array(cols[3]),
            max_abs_psi=np.array(cols[4]),
            max_abs_theta=np.array(cols[5]),
            max_abs_q=np.array(cols[6]),
        )


class DecayModel(Enum):
    EXPONENTIAL = "Exponential"  # E ~ E0 * exp(slope * t)
    POLYNOMIAL = "Polynomial"  # E ~ C * t^slope


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line in log space; slope is lambda or the exponent p."""

    model: DecayModel
    slope: float
    intercept: float  # ln E0 (exponential) or ln C (polynomial)
    residual: float  # root-mean-square residual of ln E
    window: tuple[float, float]


def _fit_window(series: TimeSeries, window: tuple[float, float]):
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ConfigError(f"fit window must satisfy t_lo < t_hi, got {window}")
    mask = (series.t >= t_lo) & (series.t <= t_hi)
    count = int(np.count_nonzero(mask))
    if count < MIN_FIT_POINTS:
        raise InsufficientPointsError(
            f"fit window {window} holds {count} samples; need >= {MIN_FIT_POINTS}"
        )
    t = series.t[mask]
    energy = series.energy[mask]
    if np.any(energy <= 0.0):
        raise NonPositiveEnergyError(
            "energy must be strictly positive throughout the fit window"
        )
    return t, energy


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), residual


def fit_exponential(series: TimeSeries, window: tuple[float, float]) -> DecayFit:
    """Fit ln E = lambda * t + ln E0 over the window."""
    t, energy = _fit_window(series, window)
    slope, intercept, residual = _line_fit(t, np.log(energy))
    return DecayFit(DecayModel.EXPONENTIAL, slope, intercept, residual, tuple(window))


def fit_polynomial(series: TimeSeries, window: tuple[float, float]) -> DecayFit:
    """Fit ln E = p * ln t + ln C over the window (t must stay positive)."""
    if window[0] <= 0.0:
        raise ConfigError(f"power-law window must exclude t <= 0, got {window}")
    t, energy = _fit_window(series, window)
    slope, intercept, residual = _line_fit(np.log(t), np.log(energy))
    return DecayFit(DecayModel.POLYNOMIAL, slope, intercept, residual, tuple(window))


@dataclass(frozen=True)
class ModelSelection:
    model: DecayModel
    margin: float  # |residual difference| between the two fits


def select_decay_model(exp_fit: DecayFit, poly_fit: DecayFit) -> ModelSelection:
    """The fit with the smaller log-space residual wins; ties go exponential."""
    if exp_fit.window != poly_fit.window:
        raise ValueError(
            f"fits cover different windows: {exp_fit.window} vs {poly_fit.window}"
        )
    margin = abs(exp_fit.residual - poly_fit.residual)
    if poly_fit.residual < exp_fit.residual:
        return ModelSelection(DecayModel.POLYNOMIAL, margin)
    return ModelSelection(DecayModel.EXPONENTIAL, margin)


def default_fit_window(T: float) -> tuple[float, float]:
    """[T/2, T]: the asymptotic laws apply past the transient."""
    return (T / 2.0, T)


@dataclass(frozen=True)
class ConvergenceReport:
    """Temporal self-convergence: solution differences under kappa halving."""

    step_counts: list[int]
    kappas: list[float]
    diffs: list[float]  # max-norm Phi difference between successive levels
    orders: list[float]  # log2 ratios of successive diffs


def convergence_report(
    p: PhysicalParameters,
    d: InitialData,
    base_cfg: GridConfig,
    levels: int,
) -> ConvergenceReport:
    """Richardson-style temporal order at fixed I by halving kappa.

    Each refinement halves c (hence kappa) and doubles the step count, so
    every level lands on the same physical time; the displacement at that
    time drives the differences.
    """
    if levels < 2:
        raise ConfigError(f"need at least 2 refinement levels, got {levels}")
    base_steps = base_cfg.num_steps

    solutions = []
    step_counts = []
    kappas = []
    for j in range(levels):
        cfg = GridConfig(I=base_cfg.I, T=base_cfg.T, c=base_cfg.c / 2**j)
        n_steps = base_steps * 2**j
        final = run(p, cfg, d, n_steps=n_steps)
        solutions.append(final.curr.phi)
        step_counts.append(n_steps)
        kappas.append(cfg.kappa)

    diffs = [
        float(np.max(np.abs(a - b))) for a, b in zip(solutions, solutions[1:])
    ]
    if any(diff < 1e-15 for diff in diffs):
        raise DegenerateOrderError(
            f"solution differences {diffs} are at round-off level; order undefined"
        )
    orders = [math.log2(d0 / d1) for d0, d1 in zip(diffs, diffs[1:])]
    return ConvergenceReport(
        step_counts=step_counts, kappas=kappas, diffs=diffs, orders=orders
    )


def make_series_observer(
    p: PhysicalParameters, mesh: Mesh, stride: int
) -> tuple[Observer, TimeSeriesRecorder]:
    """Convenience pairing of a recorder with its strided observer."""
    recorder = TimeSeriesRecorder(p, mesh)
    return Observer(recorder, stride=stride), recorder
