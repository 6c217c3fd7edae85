"""Banded-matrix storage and the linear-algebra kernels the scheme needs.

Every matrix of the scheme fits within bandwidth 2 (pentadiagonal), so
matrices are stored diagonal-by-diagonal keyed by offset.  The only
left-hand sides are tridiagonal (or scalar multiples of the identity), so
a Thomas solve plus a small dense-elimination oracle for testing covers
all solving needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrixError

MAX_BANDWIDTH = 2

#: Relative pivot threshold below which the Thomas sweep reports breakdown.
PIVOT_RTOL = 1e-14


class BandedMatrix:
    """Square matrix with nonzeros only on diagonals at offsets -2..+2.

    Band ``offset`` holds the entries M[i, i+offset]; its array is indexed
    by ``min(i, i+offset)`` and has length ``n - |offset|``.  Off-band
    entries are implicitly zero.
    """

    __slots__ = ("n", "bands")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"matrix size must be >= 1, got {n}")
        self.n = n
        self.bands: dict[int, np.ndarray] = {}

    def set_band(self, offset: int, values) -> "BandedMatrix":
        if abs(offset) > MAX_BANDWIDTH:
            raise ValueError(f"offset {offset} outside bandwidth {MAX_BANDWIDTH}")
        values = np.asarray(values, dtype=np.float64)
        expected = self.n - abs(offset)
        if values.shape == ():  # scalar fill
            values = np.full(expected, float(values))
        if values.shape != (expected,):
            raise ValueError(
                f"band {offset} of a {self.n}x{self.n} matrix needs {expected} entries,"
                f" got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"band {offset} contains non-finite entries")
        self.bands[offset] = values.copy()
        return self

    def band(self, offset: int) -> np.ndarray:
        """The diagonal at ``offset`` (zeros if never set)."""
        if offset in self.bands:
            return self.bands[offset]
        return np.zeros(self.n - abs(offset))

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"index {ij} out of range for size {self.n}")
        offset = j - i
        if offset not in self.bands:
            return 0.0
        return float(self.bands[offset][min(i, j)])

    def __setitem__(self, ij: tuple[int, int], value: float) -> None:
        i, j = ij
        offset = j - i
        if offset not in self.bands:
            self.set_band(offset, np.zeros(self.n - abs(offset)))
        self.bands[offset][min(i, j)] = value

    @property
    def lower_bandwidth(self) -> int:
        return max((-o for o in self.bands if o < 0), default=0)

    @property
    def upper_bandwidth(self) -> int:
        return max((o for o in self.bands if o > 0), default=0)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for offset, diag in self.bands.items():
            idx = np.arange(len(diag))
            if offset >= 0:
                dense[idx, idx + offset] = diag
            else:
                dense[idx - offset, idx] = diag
        return dense

    def scaled(self, factor: float) -> "BandedMatrix":
        out = BandedMatrix(self.n)
        for offset, diag in self.bands.items():
            out.set_band(offset, factor * diag)
        return out

    @classmethod
    def identity_scaled(cls, n: int, factor: float) -> "BandedMatrix":
        return cls(n).set_band(0, np.full(n, factor))

    @classmethod
    def tridiagonal(cls, n: int, lower, diag, upper) -> "BandedMatrix":
        m = cls(n)
        m.set_band(-1, np.full(n - 1, lower) if np.isscalar(lower) else lower)
        m.set_band(0, np.full(n, diag) if np.isscalar(diag) else diag)
        m.set_band(+1, np.full(n - 1, upper) if np.isscalar(upper) else upper)
        return m


def band_matvec(m: BandedMatrix, v: np.ndarray) -> np.ndarray:
    """Exact banded product M @ v."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (m.n,):
        raise ValueError(f"vector of length {v.shape} does not match matrix size {m.n}")
    out = np.zeros(m.n)
    for offset in sorted(m.bands):
        diag = m.bands[offset]
        if offset >= 0:
            out[: m.n - offset] += diag * v[offset:]
        else:
            out[-offset:] += diag * v[: m.n + offset]
    return out


@dataclass
class SolveWorkspace:
    """Reusable scratch for the Thomas sweep: no reallocation across steps."""

    n: int
    upper: np.ndarray = field(init=False)  # forward-sweep upper coefficients
    rhs: np.ndarray = field(init=False)  # forward-sweep right-hand side

    def __post_init__(self):
        self.upper = np.zeros(self.n)
        self.rhs = np.zeros(self.n)


def tridiagonal_solve(
    m: BandedMatrix, rhs: np.ndarray, ws: SolveWorkspace | None = None
) -> np.ndarray:
    """Solve M x = rhs for tridiagonal M by Thomas forward elimination.

    No pivoting: the scheme's left-hand matrices are strictly diagonally
    dominant.  A pivot below PIVOT_RTOL * ||M||_inf raises
    SingularMatrixError with the offending index.
    """
    if m.lower_bandwidth > 1 or m.upper_bandwidth > 1:
        raise ValueError("tridiagonal_solve requires bandwidth <= 1")
    rhs = np.asarray(rhs, dtype=np.float64)
    n = m.n
    if rhs.shape != (n,):
        raise ValueError(f"rhs of shape {rhs.shape} does not match matrix size {n}")
    if ws is None:
        ws = SolveWorkspace(n)
    elif ws.n != n:
        raise ValueError(f"workspace size {ws.n} does not match matrix size {n}")

    diag = m.band(0)
    lower = m.band(-1) if n > 1 else np.zeros(0)
    upper = m.band(+1) if n > 1 else np.zeros(0)
    norm = float(np.max(np.abs(diag)))
    if n > 1:
        norm = max(norm, float(np.max(np.abs(lower))), float(np.max(np.abs(upper))))
    threshold = PIVOT_RTOL * norm

    cp, dp = ws.upper, ws.rhs
    pivot = diag[0]
    if abs(pivot) <= threshold:
        raise SingularMatrixError(
            f"zero pivot at row 0 (|{pivot!r}| <= {threshold!r})", pivot_index=0
        )
    if n > 1:
        cp[0] = upper[0] / pivot
    dp[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(pivot) <= threshold:
            raise SingularMatrixError(
                f"zero pivot at row {i} (|{pivot!r}| <= {threshold!r})", pivot_index=i
            )
        if i < n - 1:
            cp[i] = upper[i] / pivot
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / pivot

    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def dense_solve_oracle(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Brute-force Gaussian elimination with full pivoting, for tests.

    Deliberately independent of the banded machinery.  Guarded to small
    systems; this is an oracle, not a production solver.
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > 64:
        raise ValueError(f"oracle is limited to n <= 64, got {n}")
    b = np.array(rhs, dtype=np.float64)
    if b.shape != (n,):
        raise ValueError(f"rhs of shape {b.shape} does not match matrix size {n}")

    norm = float(np.max(np.abs(a))) if n else 0.0
    col_of = np.arange(n)  # column permutation from full pivoting
    for step in range(n):
        sub = np.abs(a[step:, step:])
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        r += step
        c += step
        if abs(a[r, c]) <= PIVOT_RTOL * norm:
            raise SingularMatrixError(
                f"singular matrix detected at elimination step {step}", pivot_index=step
            )
        if r != step:
            a[[step, r], :] = a[[r, step], :]
            b[[step, r]] = b[[r, step]]
        if c != step:
            a[:, [step, c]] = a[:, [c, step]]
            col_of[[step, c]] = col_of[[c, step]]
        factors = a[step + 1 :, step] / a[step, step]
        a[step + 1 :, step:] -= np.outer(factors, a[step, step:])
        b[step + 1 :] -= factors * b[step]

    y = np.zeros(n)
    for i in range(n - 1, -1, -1):
        y[i] = (b[i] - a[i, i + 1 :] @ y[i + 1 :]) / a[i, i]
    x = np.zeros(n)
    x[col_of] = y
    return x
