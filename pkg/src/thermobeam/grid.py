"""Uniform space-time mesh on the unit interval.

Space: x_i = i*h, i = 0..I, h = 1/I.  Time: t_n = n*kappa, n = 0..N, with
kappa = c*h and N = floor(T/kappa).  Nodes 1..I-1 are the interior
unknowns; nodes 0 and I carry boundary values, and the scheme's ghost
nodes (-1, I+1) are eliminated analytically during assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .params import PhysicalParameters

#: Smallest spatial resolution for which the pentadiagonal stencil has at
#: least one full interior row.
MIN_SUBINTERVALS = 4


@dataclass(frozen=True)
class GridConfig:
    """Discretization knobs: I subintervals, final time T, step ratio c = kappa/h."""

    I: int
    T: float
    c: float

    def __post_init__(self):
        if self.I < MIN_SUBINTERVALS:
            raise ConfigError(f"I must be >= {MIN_SUBINTERVALS}, got {self.I}")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigError(f"T must be a positive finite real, got {self.T!r}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ConfigError(f"c must be a positive finite real, got {self.c!r}")
        if self.num_steps < 1:
            raise ConfigError(
                f"T={self.T} is shorter than one time step kappa={self.kappa}"
            )

    @property
    def h(self) -> float:
        return 1.0 / self.I

    @property
    def kappa(self) -> float:
        return self.c * self.h

    @property
    def num_steps(self) -> int:
        """N = floor(T/kappa); the run may stop up to one kappa short of T."""
        return int(math.floor(self.T / self.kappa))


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray  # x_0..x_I
    times: np.ndarray  # t_0..t_N
    h: float
    kappa: float

    @property
    def I(self) -> int:
        return len(self.nodes) - 1

    @property
    def N(self) -> int:
        return len(self.times) - 1

    @property
    def interior(self) -> np.ndarray:
        """Coordinates of the interior unknowns x_1..x_{I-1}."""
        return self.nodes[1:-1]


def build_mesh(cfg: GridConfig) -> Mesh:
    """Construct the uniform mesh for a validated configuration."""
    I, N = cfg.I, cfg.num_steps
    nodes = np.linspace(0.0, 1.0, I + 1)
    times = np.arange(N + 1, dtype=np.float64) * cfg.kappa
    nodes.flags.writeable = False
    times.flags.writeable = False
    return Mesh(nodes=nodes, times=times, h=cfg.h, kappa=cfg.kappa)


@dataclass(frozen=True)
class CourantAdvisory:
    """Informational CFL-style report; the solver never refuses a grid."""

    max_wave_speed: float
    speed_ratio: float  # c * max_wave_speed
    warn: bool


def courant_advisory(p: PhysicalParameters, cfg: GridConfig) -> CourantAdvisory:
    """Report the fastest characteristic speed against the step ratio c.

    The three wave families travel at sqrt(k/rho1), sqrt(b/rho2) and
    sqrt(1/(tau*rho3)).  A ratio c*max_speed above 1 flags a warning; the
    scheme has no proven stability bound, so this is advisory only.
    """
    speeds = (
        math.sqrt(p.k / p.rho1),
        math.sqrt(p.b / p.rho2),
        math.sqrt(1.0 / (p.tau * p.rho3)),
    )
    max_speed = max(speeds)
    ratio = cfg.c * max_speed
    return CourantAdvisory(max_wave_speed=max_speed, speed_ratio=ratio, warn=ratio > 1.0)
