"""Time integration of the four-field scheme.

A three-level recursion advances the interior unknowns; levels 0 and 1
come from the initial data via a Taylor start.  The default start is
second order, w^1 = w^0 + kappa w_t(0) + (kappa^2/2) w_tt(0), with the
rates of the first-order fields (theta, q) and all second derivatives
evaluated through the scheme's own spatial operators: a plain first-order
start (or analytic rates) perturbs the effective leapfrog velocity at
O(kappa) and drags the observed temporal convergence down to first
order.

Update order within a step is Phi, Psi, Theta, Q: the temperature update
consumes the freshly computed Psi^{n+1}; the remaining order follows the
printed system for reproducibility.

The heat-flux damping term beta*q admits two treatments.  The plain
three-level form (beta q at level n, ``damping="centered"``) carries a
weakly unstable computational mode that grows like exp((beta/tau) t) and
eventually swamps the physics on long runs.  The default
``damping="averaged"`` evaluates the term as beta (q^{n+1} + q^{n-1})/2,
which is the same to second order in kappa but leaves no growing mode;
all matrices are identical between the two treatments.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .assembly import SchemeCoefficients, SchemeMatrices, assemble, build_matrices
from .errors import BlowUpError, ConfigError
from .grid import GridConfig, Mesh, build_mesh
from .linalg import SolveWorkspace, band_matvec, tridiagonal_solve
from .params import PhysicalParameters

#: Magnitude beyond which a field value is treated as numerical blow-up.
BLOWUP_LIMIT = 1e12

#: Largest boundary value tolerated for fields pinned to zero at x=0, 1.
BOUNDARY_TOL = 1e-12


class Fields(NamedTuple):
    """The four field arrays at one time level (interior or full nodes)."""

    phi: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    q: np.ndarray

    @classmethod
    def zeros(cls, size: int) -> "Fields":
        return cls(np.zeros(size), np.zeros(size), np.zeros(size), np.zeros(size))

    def interior(self) -> "Fields":
        return Fields(*(np.asarray(a[1:-1], dtype=np.float64) for a in self))


def _freeze(f: Fields) -> Fields:
    for a in f:
        a.flags.writeable = False
    return f


def _extend_even(v: np.ndarray) -> np.ndarray:
    """Full-node array under the zero-Neumann ghost rule v_0=v_1, v_I=v_{I-1}."""
    return np.concatenate(([v[0]], v, [v[-1]]))


def _extend_zero(v: np.ndarray) -> np.ndarray:
    """Full-node array under the Dirichlet rule v_0 = v_I = 0."""
    return np.concatenate(([0.0], v, [0.0]))


def apply_boundary_extension(f: Fields) -> Fields:
    """Reconstruct full-node fields from the interior unknowns.

    phi and theta copy their first/last interior values to the boundary
    (zero-flux ghost rule); psi and q are pinned to zero there.
    """
    return Fields(
        phi=_extend_even(f.phi),
        psi=_extend_zero(f.psi),
        theta=_extend_even(f.theta),
        q=_extend_zero(f.q),
    )


@dataclass(frozen=True)
class InitialData:
    """Initial positions and rates as full-node arrays (length I+1)."""

    position: Fields
    velocity: Fields

    def __post_init__(self):
        sizes = {len(a) for f in (self.position, self.velocity) for a in f}
        if len(sizes) != 1:
            raise ConfigError(f"initial data arrays disagree in length: {sorted(sizes)}")
        for label, f in (("position", self.position), ("velocity", self.velocity)):
            for name, a in zip(Fields._fields, f):
                if not np.all(np.isfinite(a)):
                    raise ConfigError(f"initial {label} of {name} has non-finite entries")
            for name in ("psi", "q"):
                a = getattr(f, name)
                worst = max(abs(float(a[0])), abs(float(a[-1])))
                if worst > BOUNDARY_TOL:
                    raise ConfigError(
                        f"initial {label} of {name} must vanish at x=0 and x=1;"
                        f" boundary magnitude {worst:.3e} exceeds {BOUNDARY_TOL:g}"
                    )

    @property
    def num_nodes(self) -> int:
        return len(self.position.phi)


def zero_initial_data(mesh: Mesh) -> InitialData:
    size = mesh.I + 1
    return InitialData(position=Fields.zeros(size), velocity=Fields.zeros(size))


def reference_initial_data(p: PhysicalParameters, mesh: Mesh) -> InitialData:
    """The benchmark scenario: zero fields set moving by one-mode impulses.

    phi_t = cos(pi x), psi_t = sin(2 pi x), q_t = 0, and the temperature
    rate theta_t = -(2 pi delta / rho3) cos(2 pi x) forced by the heat
    equation at t=0 (with q identically zero, rho3 theta_t = -delta psi_xt).
    """
    x = mesh.nodes
    velocity = Fields(
        phi=np.cos(np.pi * x),
        psi=np.sin(2.0 * np.pi * x),
        theta=(-2.0 * np.pi * p.delta / p.rho3) * np.cos(2.0 * np.pi * x),
        q=np.zeros(len(x)),
    )
    return InitialData(position=Fields.zeros(len(x)), velocity=velocity)


#: Fourier basis respecting the boundary conditions: even (cosine) modes
#: for the zero-flux fields, odd (sine) modes for the pinned fields.
_FIELD_BASIS = {"phi": np.cos, "psi": np.sin, "theta": np.cos, "q": np.sin}

ModeList = Sequence[tuple[int, float]]


def fourier_initial_data(
    mesh: Mesh,
    position_modes: dict[str, ModeList] | None = None,
    velocity_modes: dict[str, ModeList] | None = None,
) -> InitialData:
    """Build initial data from per-field lists of (mode, amplitude).

    Mode k of phi or theta is cos(k pi x); of psi or q, sin(k pi x).  The
    basis satisfies the boundary conditions by construction, so any mode
    combination is admissible.
    """
    x = mesh.nodes

    def expand(modes: dict[str, ModeList] | None) -> Fields:
        arrays = {name: np.zeros(len(x)) for name in Fields._fields}
        for name, pairs in (modes or {}).items():
            if name not in _FIELD_BASIS:
                raise ConfigError(f"unknown field {name!r}; expected one of phi/psi/theta/q")
            basis = _FIELD_BASIS[name]
            for k, amplitude in pairs:
                if k < 1:
                    raise ConfigError(f"mode numbers must be >= 1, got {k} for {name}")
                arrays[name] = arrays[name] + amplitude * basis(k * np.pi * x)
        return Fields(**arrays)

    return InitialData(position=expand(position_modes), velocity=expand(velocity_modes))


@dataclass(frozen=True)
class SimulationState:
    """Two consecutive interior levels; ``curr`` is level ``n``."""

    prev: Fields
    curr: Fields
    n: int
    kappa: float

    @property
    def t(self) -> float:
        return self.n * self.kappa


def _scheme_rates_and_accelerations(
    pos: Fields, vel: Fields, p: PhysicalParameters, m: SchemeMatrices, kappa: float
) -> tuple[Fields, Fields]:
    """Initial time derivatives consistent with the discrete operators.

    phi and psi keep their prescribed rates (genuine initial data); the
    rates of the first-order fields theta and q follow from their own
    discrete equations, and all second derivatives are recovered from the
    assembled matrices (the kappa^2-scaled blocks divide back out).
    """
    c = m.coeffs
    kappa2 = kappa**2

    theta_rate = -(
        band_matvec(m.C3, pos.q) + 2.0 * kappa * band_matvec(m.L3, vel.psi)
    ) / p.rho3
    q_rate = -(p.beta * pos.q + band_matvec(m.D4, pos.theta)) / p.tau

    # rho1 Mt phi_tt = [(B1 - 2 A1) phi + C1 psi] / kappa^2,  Mt = A1/rho1
    rhs_phi = (
        band_matvec(m.B1, pos.phi)
        - 2.0 * band_matvec(m.A1, pos.phi)
        + band_matvec(m.C1, pos.psi)
    ) / kappa2
    phi_acc = tridiagonal_solve(m.A1, p.rho1 * rhs_phi) / p.rho1

    # rho2 M psi_tt = [(B2 - 2 rho2 M) psi + C2 phi + F2 theta]/kappa^2 - M psi_t,
    # with M = A2/(rho2 + b3)
    mass_scale = p.rho2 + c.b3
    rhs_psi = (
        band_matvec(m.B2, pos.psi)
        - (2.0 * p.rho2 / mass_scale) * band_matvec(m.A2, pos.psi)
        + band_matvec(m.C2, pos.phi)
        + band_matvec(m.F2, pos.theta)
    ) / kappa2
    psi_acc = (mass_scale / p.rho2) * tridiagonal_solve(m.A2, rhs_psi) - vel.psi / p.rho2

    theta_acc = -(
        band_matvec(m.C3, q_rate) + 2.0 * kappa * band_matvec(m.L3, psi_acc)
    ) / p.rho3
    q_acc = -(p.beta * q_rate + band_matvec(m.D4, theta_rate)) / p.tau

    rates = Fields(vel.phi, vel.psi, theta_rate, q_rate)
    accelerations = Fields(phi_acc, psi_acc, theta_acc, q_acc)
    return rates, accelerations


def build_initial_levels(
    d: InitialData,
    p: PhysicalParameters,
    mesh: Mesh,
    matrices: SchemeMatrices | None = None,
    order: int = 2,
) -> SimulationState:
    """Levels 0 and 1 from the initial data, as a state at n=1.

    ``order=2`` (default) applies the scheme-consistent Taylor start;
    ``order=1`` is the plain w^1 = w^0 + kappa w_t(0) start with the
    prescribed rates, which costs one order of temporal accuracy.
    """
    if d.num_nodes != mesh.I + 1:
        raise ConfigError(
            f"initial data has {d.num_nodes} nodes but the mesh has {mesh.I + 1}"
        )
    if order not in (1, 2):
        raise ConfigError(f"startup order must be 1 or 2, got {order}")
    kappa = mesh.kappa
    pos = d.position.interior()
    vel = d.velocity.interior()
    level0 = _freeze(Fields(*(a.copy() for a in pos)))
    if order == 1:
        level1 = Fields(*(a + kappa * v for a, v in zip(pos, vel)))
    else:
        if matrices is None:
            coeffs = SchemeCoefficients.from_spacings(p, mesh.h, kappa)
            matrices = build_matrices(p, coeffs, mesh.I - 1)
        rates, accs = _scheme_rates_and_accelerations(pos, vel, p, matrices, kappa)
        half_k2 = 0.5 * kappa**2
        level1 = Fields(
            *(a + kappa * r + half_k2 * w for a, r, w in zip(pos, rates, accs))
        )
    return SimulationState(prev=level0, curr=_freeze(level1), n=1, kappa=kappa)


def _check_blowup(f: Fields, n: int, t: float) -> None:
    for name, a in zip(Fields._fields, f):
        peak = float(np.max(np.abs(a)))
        if not math.isfinite(peak) or peak > BLOWUP_LIMIT:
            raise BlowUpError(
                f"blow-up in {name} at step {n} (t={t:.6g}): max |{name}| = {peak:.6g}",
                step=n,
                field=name,
            )


#: Stable default treatment of the heat-flux damping term.
DAMPING_TREATMENTS = ("averaged", "centered")


def step(
    state: SimulationState,
    m: SchemeMatrices,
    ws: SolveWorkspace | None = None,
    damping: str = "averaged",
) -> SimulationState:
    """Advance one time level; raises BlowUpError on non-finite output."""
    if damping not in DAMPING_TREATMENTS:
        raise ConfigError(
            f"damping must be one of {DAMPING_TREATMENTS}, got {damping!r}"
        )
    c = m.coeffs
    cur, prv = state.curr, state.prev

    rhs_phi = (
        band_matvec(m.B1, cur.phi)
        + band_matvec(m.C1, cur.psi)
        + band_matvec(m.D1, prv.phi)
    )
    phi_next = tridiagonal_solve(m.A1, rhs_phi, ws)

    rhs_psi = (
        band_matvec(m.B2, cur.psi)
        + band_matvec(m.C2, cur.phi)
        + band_matvec(m.D2, prv.psi)
        + band_matvec(m.F2, cur.theta)
    )
    psi_next = tridiagonal_solve(m.A2, rhs_psi, ws)

    # A3 and B3 are tau1 * identity, A4/B4 are r1 * identity: their solves
    # and products reduce to scalar operations.
    theta_next = (
        c.tau1 * prv.theta
        - band_matvec(m.C3, cur.q)
        + band_matvec(m.D3, prv.psi)
        - band_matvec(m.L3, psi_next)
    ) / c.tau1
    flux_gradient = band_matvec(m.D4, cur.theta)
    if damping == "centered":
        q_next = (c.r1 * prv.q - c.r2 * cur.q - flux_gradient) / c.r1
    else:
        half_damp = 0.5 * c.r2
        q_next = ((c.r1 - half_damp) * prv.q - flux_gradient) / (c.r1 + half_damp)

    n_next = state.n + 1
    t_next = n_next * state.kappa
    nxt = Fields(phi_next, psi_next, theta_next, q_next)
    _check_blowup(nxt, n_next, t_next)
    return SimulationState(prev=cur, curr=_freeze(nxt), n=n_next, kappa=state.kappa)


@dataclass(frozen=True)
class StepRecord:
    """Snapshot handed to observers: level n plus its neighbors.

    ``rates`` carries the prescribed initial rates (interior) and is set
    only on the n=0 record, where no centered time difference exists yet.
    """

    n: int
    t: float
    curr: Fields
    prev: Fields | None = None
    nxt: Fields | None = None
    rates: Fields | None = None


@dataclass
class Observer:
    """A callback invoked at n=0 and then every ``stride`` steps from n=1."""

    callback: Callable[[StepRecord], None]
    stride: int = 1

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigError(f"observer stride must be >= 1, got {self.stride}")

    def wants(self, n: int) -> bool:
        return n == 0 or (n - 1) % self.stride == 0


def run(
    p: PhysicalParameters,
    cfg: GridConfig,
    d: InitialData | None = None,
    observers: Iterable[Observer] = (),
    n_steps: int | None = None,
    matrices: SchemeMatrices | None = None,
    damping: str = "averaged",
) -> SimulationState:
    """Integrate from the initial data through N-1 steps (levels 0..N).

    Observers see the n=0 record (prescribed rates, no previous level) and
    then records at n = 1, 1+stride, ... with all three levels attached.
    Returns the final state; observers accumulate their own outputs.
    """
    observers = list(observers)
    mesh = build_mesh(cfg)
    if d is None:
        d = reference_initial_data(p, mesh)
    if matrices is None:
        matrices = assemble(p, cfg)
    ws = SolveWorkspace(matrices.n)
    state = build_initial_levels(d, p, mesh, matrices=matrices)

    N = cfg.num_steps if n_steps is None else int(n_steps)
    if N < 1:
        raise ConfigError(f"need at least one step, got {N}")

    record0 = StepRecord(
        n=0, t=0.0, curr=state.prev, nxt=state.curr, rates=d.velocity.interior()
    )
    for obs in observers:
        if obs.wants(0):
            obs.callback(record0)

    for n in range(1, N):
        advanced = step(state, matrices, ws, damping=damping)
        wanted = [obs for obs in observers if obs.wants(n)]
        if wanted:
            record = StepRecord(
                n=n, t=state.t, curr=state.curr, prev=state.prev, nxt=advanced.curr
            )
            for obs in wanted:
                obs.callback(record)
        state = advanced
    return state
