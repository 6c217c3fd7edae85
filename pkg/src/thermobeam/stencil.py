"""Discrete spatial derivative operators.

Arrays come in two lengths: "full" arrays carry node values v_0..v_I
(length I+1), "interior" arrays carry the unknowns v_1..v_{I-1}
(length I-1).  All operators here map full arrays to interior arrays.

The second derivative uses the compact rational stencil

    w = (1/h^2) * delta_x^2 / (1 + delta_x^2 / 12) applied to v,

realized by solving the tridiagonal system
(1/12, 5/6, 1/12) w = delta_x^2 v / h^2, which is fourth-order accurate
on smooth data.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np

from .errors import DegenerateOrderError
from .linalg import BandedMatrix, tridiagonal_solve

#: Below this max-norm error a convergence order is noise, not signal.
ORDER_FLOOR = 1e-15


def _check_full(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or len(v) < 3:
        raise ValueError(
            f"expected a full node array of length >= 3, got shape {v.shape}"
        )
    return v


def central_first_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """(v_{i+1} - v_{i-1}) / (2h) on the interior nodes."""
    v = _check_full(v)
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h!r}")
    return (v[2:] - v[:-2]) / (2.0 * h)


def delta_x2(v: np.ndarray) -> np.ndarray:
    """Plain second difference v_{i+1} - 2 v_i + v_{i-1} on the interior."""
    v = _check_full(v)
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def mass_operator(n: int) -> BandedMatrix:
    """The tridiagonal operator 1 + delta_x^2/12 on n interior unknowns."""
    return BandedMatrix.tridiagonal(n, 1.0 / 12.0, 5.0 / 6.0, 1.0 / 12.0)


def compact_second_derivative(
    v: np.ndarray, h: float, boundary: tuple[float, float] | None = None
) -> np.ndarray:
    """Fourth-order approximation of v'' on the interior nodes.

    ``boundary`` optionally supplies exact second-derivative values
    (w_0, w_I) for the closure at the first and last interior rows;
    without it the out-of-range neighbor is dropped, matching how the
    assembled scheme matrices treat interior unknowns.
    """
    v = _check_full(v)
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h!r}")
    rhs = delta_x2(v) / h**2
    if boundary is not None:
        w0, wI = boundary
        rhs = rhs.copy()
        rhs[0] -= w0 / 12.0
        rhs[-1] -= wI / 12.0
    return tridiagonal_solve(mass_operator(len(rhs)), rhs)


def operator_error(
    f: Callable[[np.ndarray], np.ndarray],
    exact_second_derivative: Callable[[np.ndarray], np.ndarray],
    I: int,
) -> float:
    """Max-norm error of the operator on I subintervals, nodes i in [2, I-2].

    Uses exact boundary closure; the first/last interior nodes are
    excluded so the measurement reflects the interior stencil's accuracy
    rather than the closure's.
    """
    if I < 8:
        raise ValueError(f"grid sizes must be >= 8, got {I}")
    x = np.linspace(0.0, 1.0, I + 1)
    exact = exact_second_derivative(x)
    w = compact_second_derivative(f(x), 1.0 / I, boundary=(exact[0], exact[-1]))
    # interior array index j holds node j+1; nodes [2, I-2] -> j in [1, I-3]
    return float(np.max(np.abs(w[1 : I - 2] - exact[2 : I - 1])))


def estimate_operator_order(
    f: Callable[[np.ndarray], np.ndarray],
    exact_second_derivative: Callable[[np.ndarray], np.ndarray],
    I_list: Sequence[int],
) -> list[float]:
    """Observed convergence orders of the compact second derivative.

    Samples ``f`` on each grid and returns log2(err(I) / err(2I)) for each
    successive pair of grid sizes, which must double between levels.
    """
    I_list = list(I_list)
    if len(I_list) < 2:
        raise ValueError("need at least two grid sizes to estimate an order")
    for a, b in zip(I_list, I_list[1:]):
        if b != 2 * a:
            raise ValueError(f"grid sizes must double between levels, got {a} -> {b}")

    errors = []
    for I in I_list:
        err = operator_error(f, exact_second_derivative, I)
        if err < ORDER_FLOOR:
            raise DegenerateOrderError(
                f"error {err:.3e} on I={I} is at round-off level; order undefined"
            )
        errors.append(err)
    return [math.log2(e_coarse / e_fine) for e_coarse, e_fine in zip(errors, errors[1:])]
