import numpy as np
import pytest

from thermobeam.errors import DegenerateOrderError
from thermobeam.linalg import band_matvec
from thermobeam.stencil import (
    central_first_derivative,
    compact_second_derivative,
    delta_x2,
    estimate_operator_order,
    mass_operator,
    operator_error,
)


def grid(I):
    return np.linspace(0.0, 1.0, I + 1)


class TestCentralFirstDerivative:
    def test_constant(self):
        assert np.allclose(central_first_derivative(np.full(9, 3.7), 1 / 8), 0.0)

    def test_linear_exact(self):
        x = grid(8)
        assert np.allclose(central_first_derivative(x, 1 / 8), 1.0, atol=1e-14)

    def test_quadratic_exact(self):
        # central difference of x^2 equals 2x exactly
        x = grid(4)
        out = central_first_derivative(x**2, 0.25)
        assert out == pytest.approx([0.5, 1.0, 1.5], abs=1e-14)

    def test_rejects_short_arrays(self):
        with pytest.raises(ValueError):
            central_first_derivative(np.array([1.0, 2.0]), 0.5)

    def test_rejects_nonpositive_h(self):
        with pytest.raises(ValueError):
            central_first_derivative(np.zeros(5), 0.0)


class TestDeltaX2:
    def test_constant_and_linear_vanish(self):
        x = grid(8)
        assert np.allclose(delta_x2(np.full(9, 2.5)), 0.0)
        assert np.allclose(delta_x2(3.0 * x + 1.0), 0.0, atol=1e-15)

    def test_quadratic_gives_2h2(self):
        x = grid(4)
        assert delta_x2(x**2) == pytest.approx([2 * 0.25**2] * 3, abs=1e-15)


class TestCompactSecondDerivative:
    def test_constant(self):
        out = compact_second_derivative(np.full(9, 4.2), 1 / 8)
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_quadratic_with_exact_closure(self):
        x = grid(8)
        out = compact_second_derivative(x**2, 1 / 8, boundary=(2.0, 2.0))
        assert np.allclose(out, 2.0, atol=1e-12)

    def test_exact_on_cubics(self):
        rng = np.random.default_rng(7)
        x = grid(16)
        for _ in range(5):
            coef = rng.normal(size=4)
            v = coef[0] + coef[1] * x + coef[2] * x**2 + coef[3] * x**3
            exact = 2 * coef[2] + 6 * coef[3] * x
            out = compact_second_derivative(v, 1 / 16, boundary=(exact[0], exact[-1]))
            assert np.max(np.abs(out - exact[1:-1])) < 1e-11

    def test_linearity(self):
        rng = np.random.default_rng(11)
        u, v = rng.normal(size=17), rng.normal(size=17)
        a, b = rng.normal(), rng.normal()
        h = 1 / 16
        combined = compact_second_derivative(a * u + b * v, h)
        separate = a * compact_second_derivative(u, h) + b * compact_second_derivative(v, h)
        scale = max(1.0, np.max(np.abs(separate)))
        assert np.max(np.abs(combined - separate)) < 1e-12 * scale

    def test_consistent_with_mass_operator(self):
        # applying (1 + delta_x^2/12) to the output returns delta_x^2 v / h^2
        rng = np.random.default_rng(3)
        v = rng.normal(size=13)
        h = 1 / 12
        w = compact_second_derivative(v, h)
        assert np.allclose(
            band_matvec(mass_operator(len(w)), w), delta_x2(v) / h**2, atol=1e-10
        )

    def test_fourth_order_error_ratios(self):
        f = lambda x: np.cos(np.pi * x)
        fxx = lambda x: -np.pi**2 * np.cos(np.pi * x)
        errors = [operator_error(f, fxx, I) for I in (8, 16, 32, 64)]
        ratios = [a / b for a, b in zip(errors, errors[1:])]
        for ratio in ratios:
            assert 2**3.8 <= ratio <= 2**4.2


class TestEstimateOperatorOrder:
    def test_cosine_orders_near_four(self):
        orders = estimate_operator_order(
            lambda x: np.cos(np.pi * x),
            lambda x: -np.pi**2 * np.cos(np.pi * x),
            [8, 16, 32, 64],
        )
        assert len(orders) == 3
        assert all(3.8 <= order <= 4.2 for order in orders)

    def test_two_mode_sine(self):
        orders = estimate_operator_order(
            lambda x: np.sin(2 * np.pi * x),
            lambda x: -4 * np.pi**2 * np.sin(2 * np.pi * x),
            [16, 32],
        )
        assert len(orders) == 1
        assert 3.8 <= orders[0] <= 4.2

    def test_quadratic_is_degenerate(self):
        with pytest.raises(DegenerateOrderError):
            estimate_operator_order(lambda x: x**2, lambda x: np.full_like(x, 2.0),
                                    [8, 16])

    def test_precondition_failures(self):
        f = lambda x: np.cos(np.pi * x)
        fxx = lambda x: -np.pi**2 * np.cos(np.pi * x)
        with pytest.raises(ValueError):
            estimate_operator_order(f, fxx, [8])
        with pytest.raises(ValueError):
            estimate_operator_order(f, fxx, [8, 24])
        with pytest.raises(ValueError):
            estimate_operator_order(f, fxx, [4, 8])
