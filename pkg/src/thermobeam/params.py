"""Physical constants of the beam system and the stability number mu.

The model couples transverse displacement phi, rotation angle psi,
temperature theta, and heat flux q on the unit interval:

    rho1 phi_tt - k (phi_x + psi)_x                          = 0
    rho2 psi_tt - b psi_xx + k (phi_x + psi) + delta theta_x + psi_t = 0
    rho3 theta_t + q_x + delta psi_xt                        = 0
    tau  q_t + beta q + theta_x                              = 0

The combination

    mu = (tau - rho1/(k rho3)) (rho2/b - rho1/k) - tau delta^2 rho1 / (b k rho3)

separates the two long-time regimes: the energy decays exponentially when
mu = 0 and only polynomially when mu != 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

from .errors import ConfigError, UnknownPresetError

#: Default tolerance below which a computed mu counts as zero.  The two
#: bundled scenarios sit at 0.0 and -0.5, nine-plus orders apart.
REGIME_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PhysicalParameters:
    """The positive constants of the coupled system.

    rho1, rho2, rho3 are densities / heat capacity, k the shear stiffness,
    b the bending stiffness, delta the thermo-mechanical coupling, beta the
    heat-flux damping, and tau the heat-flux relaxation time.
    """

    rho1: float
    rho2: float
    rho3: float
    k: float
    b: float
    delta: float
    beta: float
    tau: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigError(
                    f"parameter {f.name} must be a positive finite real, got {value!r}"
                )


class Regime(enum.Enum):
    """Decay regime selected by the stability number."""

    ZERO = "Zero"
    NONZERO = "NonZero"


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    parameters: PhysicalParameters
    description: str


def stability_number(p: PhysicalParameters) -> float:
    """Evaluate mu = (tau - rho1/(k rho3))(rho2/b - rho1/k) - tau delta^2 rho1/(b k rho3)."""
    first = p.tau - p.rho1 / (p.k * p.rho3)
    second = p.rho2 / p.b - p.rho1 / p.k
    coupling = p.tau * p.delta**2 * p.rho1 / (p.b * p.k * p.rho3)
    return first * second - coupling


def classify_regime(mu: float, tol: float = REGIME_TOLERANCE) -> Regime:
    """Zero iff |mu| <= tol."""
    if tol <= 0.0:
        raise ConfigError(f"regime tolerance must be positive, got {tol!r}")
    return Regime.ZERO if abs(mu) <= tol else Regime.NONZERO


def _make_presets() -> dict[str, ScenarioPreset]:
    # delta = sqrt(2/3) is computed at runtime rather than stored as a
    # truncated decimal, so mu evaluates to zero at full precision.
    mu_zero = ScenarioPreset(
        name="mu_zero",
        parameters=PhysicalParameters(
            rho1=2.0,
            rho2=2.0,
            rho3=1.0,
            k=2.0,
            b=1.0,
            delta=math.sqrt(2.0 / 3.0),
            beta=1.0,
            tau=3.0,
        ),
        description="stability number mu = 0: exponential energy decay",
    )
    mu_nonzero = ScenarioPreset(
        name="mu_nonzero",
        parameters=PhysicalParameters(
            rho1=2.0,
            rho2=2.0,
            rho3=1.0,
            k=2.0,
            b=2.0,
            delta=1.0,
            beta=1.0,
            tau=1.0,
        ),
        description="stability number mu = -1/2: polynomial energy decay",
    )
    return {preset.name: preset for preset in (mu_zero, mu_nonzero)}


PRESETS = _make_presets()


def lookup_preset(name: str) -> ScenarioPreset:
    """Return a bundled scenario preset by name.

    Raises UnknownPresetError listing the valid identifiers.
    """
    try:
        return PRESETS[name]
    except KeyError:
        valid = ", ".join(sorted(PRESETS))
        raise UnknownPresetError(f"unknown preset {name!r}; valid presets: {valid}") from None
