"""Coefficients and matrices of the linear algebraic update system.

Each time step advances four interior vectors (Phi, Psi, Theta, Q) of
length n = I-1 through

    A1 Phi^{n+1}   = B1 Phi^n + C1 Psi^n + D1 Phi^{n-1}
    A2 Psi^{n+1}   = B2 Psi^n + C2 Phi^n + D2 Psi^{n-1} + F2 Theta^n
    A3 Theta^{n+1} = B3 Theta^{n-1} - C3 Q^n + D3 Psi^{n-1} - L3 Psi^{n+1}
    A4 Q^{n+1}     = B4 Q^{n-1} - C4 Q^n - D4 Theta^n

The displacement and temperature satisfy zero-Neumann conditions, handled
by folding the ghost values (phi_{-1} = phi_0 = phi_1, same for theta and
at the right end) into the corner rows of A1, B1, D1, C2, F2 and D4.  The
rotation and heat flux are zero at the boundary, so their out-of-range
stencil references simply drop.  Every matrix fits within bandwidth 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import GridConfig
from .linalg import BandedMatrix, MAX_BANDWIDTH
from .params import PhysicalParameters

MIN_SYSTEM_SIZE = 3  # below this the corner rows would overlap


@dataclass(frozen=True)
class SchemeCoefficients:
    """Grid-scaled constants entering the matrices.

    a1 = k kappa^2 / h^2        b1 = b kappa^2 / h^2     tau1 = rho3 / (2 kappa)
    a2 = b2 = k kappa^2 / (2h)  b3 = kappa / 2           tau2 = 1 / (2h)
    b0 = k kappa^2              b4 = delta kappa^2/(2h)  tau3 = delta / (4 kappa h)
    r1 = tau / (2 kappa)        r2 = beta                r3 = 1 / (2h)
    """

    a1: float
    a2: float
    b0: float
    b1: float
    b2: float
    b3: float
    b4: float
    tau1: float
    tau2: float
    tau3: float
    r1: float
    r2: float
    r3: float

    @classmethod
    def from_spacings(
        cls, p: PhysicalParameters, h: float, kappa: float
    ) -> "SchemeCoefficients":
        if h <= 0.0 or kappa <= 0.0:
            raise ConfigError(f"spacings must be positive, got h={h!r}, kappa={kappa!r}")
        a2 = p.k * kappa**2 / (2.0 * h)
        return cls(
            a1=p.k * kappa**2 / h**2,
            a2=a2,
            b0=p.k * kappa**2,
            b1=p.b * kappa**2 / h**2,
            b2=a2,
            b3=kappa / 2.0,
            b4=p.delta * kappa**2 / (2.0 * h),
            tau1=p.rho3 / (2.0 * kappa),
            tau2=1.0 / (2.0 * h),
            tau3=p.delta / (4.0 * kappa * h),
            r1=p.tau / (2.0 * kappa),
            r2=p.beta,
            r3=1.0 / (2.0 * h),
        )


def compute_coefficients(p: PhysicalParameters, cfg: GridConfig) -> SchemeCoefficients:
    return SchemeCoefficients.from_spacings(p, cfg.h, cfg.kappa)


@dataclass(frozen=True)
class SchemeMatrices:
    """All matrices of the update system, in banded storage."""

    n: int
    coeffs: SchemeCoefficients
    A1: BandedMatrix
    B1: BandedMatrix
    C1: BandedMatrix
    D1: BandedMatrix
    A2: BandedMatrix
    B2: BandedMatrix
    C2: BandedMatrix
    D2: BandedMatrix
    F2: BandedMatrix
    A3: BandedMatrix
    B3: BandedMatrix
    C3: BandedMatrix
    D3: BandedMatrix
    L3: BandedMatrix
    A4: BandedMatrix
    B4: BandedMatrix
    C4: BandedMatrix
    D4: BandedMatrix


def _mass_tridiagonal(n: int, scale: float, corner: float | None = None) -> BandedMatrix:
    """scale * (1/12, 5/6, 1/12) tridiagonal; optional corner diagonal value."""
    diag = np.full(n, scale * 5.0 / 6.0)
    if corner is not None:
        diag[0] = corner
        diag[-1] = corner
    return BandedMatrix.tridiagonal(n, scale / 12.0, diag, scale / 12.0)


def _antisymmetric_tridiagonal(n: int, value: float) -> BandedMatrix:
    """tridiag(-value, 0, value)."""
    return BandedMatrix.tridiagonal(n, -value, 0.0, value)


def _antisymmetric_pentadiagonal(n: int, s: float) -> BandedMatrix:
    """pentadiag(-s/12, -5s/6, 0, 5s/6, s/12) with out-of-range terms dropped."""
    m = BandedMatrix(n)
    m.set_band(-2, -s / 12.0)
    m.set_band(-1, -5.0 * s / 6.0)
    m.set_band(0, 0.0)
    m.set_band(+1, 5.0 * s / 6.0)
    m.set_band(+2, s / 12.0)
    return m


def _ghost_folded_pentadiagonal(n: int, s: float) -> BandedMatrix:
    """pentadiag(s/12, 5s/6, 0, -5s/6, -s/12) with Neumann ghosts folded in.

    Folding the ghost rule (value_0 = value_1, value_I = value_{I-1}) into
    the first and last two rows produces the corner entries 11s/12 printed
    for C2 and F2; everything stays within the band.
    """
    m = BandedMatrix(n)
    m.set_band(-2, s / 12.0)
    lower = np.full(n - 1, 5.0 * s / 6.0)
    lower[0] = 11.0 * s / 12.0  # row 2: s/12 ghost fold onto column 1
    m.set_band(-1, lower)
    diag = np.zeros(n)
    diag[0] = 11.0 * s / 12.0  # row 1: s/12 + 5s/6 fold onto column 1
    diag[-1] = -11.0 * s / 12.0  # row n: -5s/6 - s/12 fold onto column n
    m.set_band(0, diag)
    upper = np.full(n - 1, -5.0 * s / 6.0)
    upper[-1] = -11.0 * s / 12.0  # row n-1: -s/12 ghost fold onto column n
    m.set_band(+1, upper)
    m.set_band(+2, -s / 12.0)
    return m


def _flux_gradient_matrix(n: int, r3: float) -> BandedMatrix:
    """tridiag(-r3, 0, r3) with the Neumann fold on the corner diagonal."""
    m = _antisymmetric_tridiagonal(n, r3)
    m[0, 0] = -r3
    m[n - 1, n - 1] = r3
    return m


def build_matrices(
    p: PhysicalParameters, coeffs: SchemeCoefficients, n: int
) -> SchemeMatrices:
    """Assemble all matrices for n = I-1 interior unknowns."""
    if n < MIN_SYSTEM_SIZE:
        raise ConfigError(
            f"system size n={n} is too small; corner rows overlap below n={MIN_SYSTEM_SIZE}"
        )
    c = coeffs

    A1 = _mass_tridiagonal(n, p.rho1, corner=11.0 * p.rho1 / 12.0)
    beta1 = (p.rho1 + 6.0 * c.a1) / 6.0
    beta2 = (5.0 * p.rho1 - 6.0 * c.a1) / 3.0
    beta3 = (11.0 * p.rho1 - 6.0 * c.a1) / 6.0
    b1_diag = np.full(n, beta2)
    b1_diag[0] = beta3
    b1_diag[-1] = beta3
    B1 = BandedMatrix.tridiagonal(n, beta1, b1_diag, beta1)
    C1 = _antisymmetric_pentadiagonal(n, c.a2)
    D1 = A1.scaled(-1.0)

    A2 = _mass_tridiagonal(n, p.rho2 + c.b3)
    B2 = BandedMatrix.tridiagonal(
        n,
        (2.0 * p.rho2 + 12.0 * c.b1 - c.b0) / 12.0,
        (10.0 * p.rho2 - 12.0 * c.b1 - 5.0 * c.b0) / 6.0,
        (2.0 * p.rho2 + 12.0 * c.b1 - c.b0) / 12.0,
    )
    C2 = _ghost_folded_pentadiagonal(n, c.b2)
    D2 = _mass_tridiagonal(n, -p.rho2 + c.b3)
    F2 = _ghost_folded_pentadiagonal(n, c.b4)

    A3 = BandedMatrix.identity_scaled(n, c.tau1)
    B3 = BandedMatrix.identity_scaled(n, c.tau1)
    C3 = _antisymmetric_tridiagonal(n, c.tau2)
    D3 = _antisymmetric_tridiagonal(n, c.tau3)
    L3 = _antisymmetric_tridiagonal(n, c.tau3)

    A4 = BandedMatrix.identity_scaled(n, c.r1)
    B4 = BandedMatrix.identity_scaled(n, c.r1)
    C4 = BandedMatrix.identity_scaled(n, c.r2)
    D4 = _flux_gradient_matrix(n, c.r3)

    matrices = SchemeMatrices(
        n=n, coeffs=c,
        A1=A1, B1=B1, C1=C1, D1=D1,
        A2=A2, B2=B2, C2=C2, D2=D2, F2=F2,
        A3=A3, B3=B3, C3=C3, D3=D3, L3=L3,
        A4=A4, B4=B4, C4=C4, D4=D4,
    )
    for name, m in _named_matrices(matrices):
        if m.lower_bandwidth > MAX_BANDWIDTH or m.upper_bandwidth > MAX_BANDWIDTH:
            raise ConfigError(f"matrix {name} exceeds bandwidth {MAX_BANDWIDTH}")
    return matrices


def assemble(p: PhysicalParameters, cfg: GridConfig) -> SchemeMatrices:
    return build_matrices(p, compute_coefficients(p, cfg), cfg.I - 1)


def _named_matrices(m: SchemeMatrices):
    for name in (
        "A1", "B1", "C1", "D1",
        "A2", "B2", "C2", "D2", "F2",
        "A3", "B3", "C3", "D3", "L3",
        "A4", "B4", "C4", "D4",
    ):
        yield name, getattr(m, name)


def _is_identity_scaled(m: BandedMatrix, factor: float, tol: float) -> bool:
    if any(np.any(diag != 0.0) for off, diag in m.bands.items() if off != 0):
        return False
    return bool(np.max(np.abs(m.band(0) - factor)) <= tol)


def _is_antisymmetric_stencil(m: BandedMatrix, tol: float) -> bool:
    """Interior stencil of the form tridiag(-v, 0, v); corner rows exempt."""
    if np.max(np.abs(m.band(0)[1:-1])) > tol:
        return False
    return bool(np.max(np.abs(m.band(+1) + m.band(-1))) <= tol)


@dataclass(frozen=True)
class BandStructureReport:
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_band_structure(m: SchemeMatrices, tol: float = 0.0) -> BandStructureReport:
    """Structural self-checks on an assembled system (pass/fail per property)."""

    def symmetric(mat: BandedMatrix) -> bool:
        lo, up = mat.band(-1), mat.band(+1)
        ok = np.max(np.abs(lo - up), initial=0.0) <= tol
        return bool(ok and np.all(mat.band(-2) == 0.0) and np.all(mat.band(+2) == 0.0))

    def equal(a: BandedMatrix, b: BandedMatrix) -> bool:
        offs = set(a.bands) | set(b.bands)
        return all(
            bool(np.max(np.abs(a.band(o) - b.band(o)), initial=0.0) <= tol) for o in offs
        )

    c = m.coeffs
    checks = {
        "A1_symmetric_tridiagonal": symmetric(m.A1),
        "A2_symmetric_tridiagonal": symmetric(m.A2),
        "D1_is_minus_A1": equal(m.D1, m.A1.scaled(-1.0)),
        "A3_identity_scaled": _is_identity_scaled(m.A3, c.tau1, tol),
        "B3_identity_scaled": _is_identity_scaled(m.B3, c.tau1, tol),
        "A4_identity_scaled": _is_identity_scaled(m.A4, c.r1, tol),
        "B4_identity_scaled": _is_identity_scaled(m.B4, c.r1, tol),
        "C4_identity_scaled": _is_identity_scaled(m.C4, c.r2, tol),
        "L3_equals_D3": equal(m.L3, m.D3),
        "C3_antisymmetric": _is_antisymmetric_stencil(m.C3, tol),
        "D3_antisymmetric": _is_antisymmetric_stencil(m.D3, tol),
        "bandwidth_within_2": all(
            mat.lower_bandwidth <= MAX_BANDWIDTH and mat.upper_bandwidth <= MAX_BANDWIDTH
            for _, mat in _named_matrices(m)
        ),
    }
    return BandStructureReport(checks=checks)


def dump_dense(m: BandedMatrix) -> str:
    """Dense plain-text dump (row-major, 17 significant digits) for goldens."""
    dense = m.to_dense()
    lines = [" ".join(f"{value:.17g}" for value in row) for row in dense]
    return "\n".join(lines) + "\n"
