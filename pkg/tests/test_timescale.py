import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlplap.errors import DomainError, InvalidProblem
from nlplap.timescale import (
    GridFunction,
    TimeScale,
    delta_antiderivative,
    delta_derivative,
    delta_gradient,
    delta_integral,
    max_norm,
    nabla_antiderivative,
    nabla_derivative,
    nabla_gradient,
    nabla_integral,
    rho,
    sigma,
)


@pytest.fixture
def hybrid():
    return TimeScale([{"interval": [0.0, 1.0]}, {"point": 1.5}, {"interval": [2.0, 3.0]}], 1e-2)


class TestJumps:
    def test_sigma(self, hybrid):
        assert sigma(hybrid, 1.0) == 1.5
        assert sigma(hybrid, 0.5) == 0.5
        assert sigma(hybrid, 3.0) == 3.0
        assert sigma(hybrid, 1.5) == 2.0

    def test_rho(self, hybrid):
        assert rho(hybrid, 2.0) == 1.5
        assert rho(hybrid, 1.5) == 1.0
        assert rho(hybrid, 0.0) == 0.0
        assert rho(hybrid, 2.5) == 2.5

    @pytest.mark.parametrize("t", [1.2, -0.1, 3.1, 1.9999])
    def test_outside_raises(self, hybrid, t):
        with pytest.raises(DomainError):
            sigma(hybrid, t)
        with pytest.raises(DomainError):
            rho(hybrid, t)

    def test_membership_tolerance(self, hybrid):
        assert sigma(hybrid, 1.0 + 1e-13) == 1.5
        assert not hybrid.contains(1.0 + 1e-9)

    def test_jump_consistency(self, hybrid):
        g = hybrid.grid
        for t in g.points[1:-1]:
            assert rho(hybrid, sigma(hybrid, t)) <= t <= sigma(hybrid, rho(hybrid, t))
            if hybrid.mu(t) > 0:
                assert rho(hybrid, sigma(hybrid, t)) == t
            if hybrid.nu(t) > 0:
                assert sigma(hybrid, rho(hybrid, t)) == t
        assert np.all(g.mu >= 0) and np.all(g.nu >= 0)

    def test_grid_graininess(self, hybrid):
        g = hybrid.grid
        i1, ip, i2 = g.index_of(1.0), g.index_of(1.5), g.index_of(2.0)
        assert g.mu[i1] == 0.5 and g.mu[ip] == 0.5
        assert g.nu[ip] == 0.5 and g.nu[i2] == 0.5
        interior = g.index_of(0.5)
        assert g.mu[interior] == 0 and g.nu[interior] == 0
        assert g.mu[-1] == 0 and g.nu[0] == 0
        assert np.max(np.diff(g.points)[g.mu[:-1] == 0]) <= 1e-2 + 1e-15

    def test_grid_matches_structure(self, hybrid):
        g = hybrid.grid
        for t, m, n in zip(g.points, g.mu, g.nu):
            assert math.isclose(hybrid.mu(t), m, abs_tol=1e-12)
            assert math.isclose(hybrid.nu(t), n, abs_tol=1e-12)

    def test_knots_become_grid_points(self):
        ts = TimeScale.interval(0.0, 2.0, 0.3, knots=[1.0])
        assert ts.grid.has_point(1.0)
        assert np.max(np.diff(ts.grid.points)) <= 0.3


class TestValidation:
    def test_unsorted(self):
        with pytest.raises(InvalidProblem) as exc:
            TimeScale([{"interval": [0, 2]}, {"point": 1.0}])
        assert exc.value.pointer == "/components/1"

    def test_touching_intervals_rejected(self):
        with pytest.raises(InvalidProblem, match="disjoint"):
            TimeScale([{"interval": [0, 1]}, {"interval": [1, 2]}])

    def test_degenerate(self):
        with pytest.raises(InvalidProblem):
            TimeScale([{"point": 0.0}])
        with pytest.raises(InvalidProblem):
            TimeScale([{"interval": [1.0, 1.0]}])
        with pytest.raises(InvalidProblem):
            TimeScale([{"segment": [0, 1]}])

    def test_json_round_trip(self):
        d = {"components": [{"interval": [0.0, 2.0]}, {"point": 2.5}], "h_max": 0.001}
        assert TimeScale.from_dict(d).to_dict() == d


class TestDerivatives:
    def test_integer_forward_difference(self):
        ts = TimeScale.integers(0, 5)
        f = ts.function(lambda t: t**2)
        assert delta_derivative(f, 2) == 5.0
        assert nabla_derivative(f, 2) == 3.0

    def test_dense_classical_derivative(self):
        ts = TimeScale.interval(0.0, 1.0, 1e-3)
        f = ts.function(lambda t: t**2)
        i = ts.grid.index_of(0.5)
        assert delta_derivative(f, i) == pytest.approx(1.0, abs=1e-2)
        assert nabla_derivative(f, i) == pytest.approx(1.0, abs=1e-2)

    def test_scattered_quotients(self):
        ts = TimeScale([{"interval": [0.0, 1.0]}, {"point": 1.5}], 1e-2)
        f = ts.function(lambda t: t)
        assert delta_derivative(f, ts.grid.index_of(1.0)) == pytest.approx(1.0, abs=1e-14)
        ts2 = TimeScale([{"point": 1.5}, {"interval": [2.0, 3.0]}], 1e-2)
        f2 = ts2.function(lambda t: t)
        assert nabla_derivative(f2, ts2.grid.index_of(2.0)) == pytest.approx(1.0, abs=1e-14)

    def test_domain_of_derivatives(self):
        ts = TimeScale.integers(0, 3)
        f = ts.function(lambda t: t)
        with pytest.raises(DomainError):
            delta_derivative(f, 3)
        with pytest.raises(DomainError):
            nabla_derivative(f, 0)
        dense = TimeScale.interval(0.0, 1.0, 0.1)
        g = dense.function(lambda t: 2 * t)
        assert delta_derivative(g, -1) == pytest.approx(2.0)
        assert nabla_derivative(g, 0) == pytest.approx(2.0)

    def test_gradient_second_order_on_dense_parts(self):
        errs = []
        for h in (0.02, 0.01):
            ts = TimeScale([{"interval": [0.0, 1.0]}, {"point": 1.5}, {"interval": [2.0, 3.0]}], h)
            f = ts.function(np.sin)
            d = delta_gradient(f)
            n = nabla_gradient(f)
            dense_d = ts.grid.mu == 0
            dense_n = ts.grid.nu == 0
            errs.append(
                max(
                    np.max(np.abs(d - np.cos(f.t))[dense_d]),
                    np.max(np.abs(n - np.cos(f.t))[dense_n]),
                )
            )
        assert math.log2(errs[0] / errs[1]) > 1.8

    def test_gradient_exact_on_integers(self):
        ts = TimeScale.integers(0, 5)
        f = ts.function(lambda t: t**3)
        d = delta_gradient(f)
        assert np.array_equal(d[:-1], np.diff(f.values)) and np.isnan(d[-1])
        n = nabla_gradient(f)
        assert np.array_equal(n[1:], np.diff(f.values)) and np.isnan(n[0])


class TestIntegrals:
    def test_integer_sums(self):
        ts = TimeScale.integers(0, 3)
        f = ts.function(lambda t: t)
        assert delta_integral(f, 0, 3) == 3.0
        assert nabla_integral(f, 0, 3) == 6.0

    def test_dense(self):
        ts = TimeScale.interval(0.0, 1.0, 1e-3)
        f = ts.function(lambda t: t)
        assert delta_integral(f, 0, 1) == pytest.approx(0.5, abs=1e-6)
        assert nabla_integral(f, 0, 1) == pytest.approx(0.5, abs=1e-6)

    def test_hybrid_measure(self, hybrid):
        one = hybrid.function(lambda t: np.ones_like(t))
        # [0,1] gives 1, the gaps 1 -> 1.5 -> 2 give 0.5 each, [2,3] gives 1
        assert delta_integral(one, 0, 3) == pytest.approx(3.0, abs=1e-12)
        assert nabla_integral(one, 0, 3) == pytest.approx(3.0, abs=1e-12)

    def test_hybrid_sampling_side(self, hybrid):
        f = hybrid.function(lambda t: t)
        # gap cells: Δ samples the left end (1 and 1.5), ∇ the right end (1.5 and 2)
        assert delta_integral(f, 1.0, 2.0) == pytest.approx(0.5 * 1.0 + 0.5 * 1.5)
        assert nabla_integral(f, 1.0, 2.0) == pytest.approx(0.5 * 1.5 + 0.5 * 2.0)

    def test_limits(self, hybrid):
        f = hybrid.function(lambda t: t)
        with pytest.raises(DomainError):
            delta_integral(f, 0.0, 1.2)
        with pytest.raises(DomainError):
            nabla_integral(f, 2.0, 1.0)
        assert delta_integral(f, 1.5, 1.5) == 0.0

    def test_off_grid_limits_are_exact_for_affine(self):
        ts = TimeScale.interval(0.0, 1.0, 0.1)
        f = ts.function(lambda t: 3 * t + 1)
        exact = lambda a, b: 1.5 * (b**2 - a**2) + (b - a)
        for a, b in [(0.03, 0.77), (0.0, 0.55), (0.31, 0.34), (0.25, 1.0)]:
            assert delta_integral(f, a, b) == pytest.approx(exact(a, b), abs=1e-14)

    def test_integer_specialisation(self):
        rng = np.random.default_rng(0)
        ts = TimeScale.integers(0, 20)
        f = GridFunction(ts.grid, rng.normal(size=21))
        for a, b in [(0, 20), (3, 11), (7, 8)]:
            assert delta_integral(f, a, b) == pytest.approx(math.fsum(f.values[a:b]), abs=1e-12)
            assert nabla_integral(f, a, b) == pytest.approx(math.fsum(f.values[a + 1 : b + 1]), abs=1e-12)

    def test_telescoping_on_integers(self):
        ts = TimeScale.integers(0, 10)
        f = ts.function(lambda t: np.sin(t) + t**2)
        df = GridFunction(ts.grid, np.append(np.diff(f.values), 0.0))
        assert delta_integral(df, 2, 9) == f(9) - f(2)

    def test_antiderivatives_agree_with_integrals(self, hybrid):
        f = hybrid.function(np.exp)
        F, G = delta_antiderivative(f), nabla_antiderivative(f)
        for t in (0.5, 1.0, 1.5, 2.0, 2.73, 3.0):
            t = float(hybrid.grid.points[hybrid.grid.index_of(round(t, 2))])
            assert F(t) == pytest.approx(delta_integral(f, 0, t), rel=1e-13)
            assert G(t) == pytest.approx(nabla_integral(f, 0, t), rel=1e-13)

    def test_trapezoid_order(self):
        errs = []
        for j in range(5):
            ts = TimeScale.interval(0.0, 1.0, 0.1 / 2**j)
            f = ts.function(np.exp)
            errs.append(abs(delta_integral(f, 0, 1) - (math.e - 1)))
            assert delta_integral(f, 0, 1) == nabla_integral(f, 0, 1)
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(1.8 <= o <= 2.2 for o in orders), orders


_hybrid_scale = TimeScale(
    [{"interval": [0.0, 1.0]}, {"point": 1.25}, {"point": 1.5}, {"interval": [2.0, 3.0]}], 0.05
)
_grid_t = _hybrid_scale.grid.points.tolist()
_coeffs = st.floats(-10, 10, allow_nan=False)


@st.composite
def _funcs(draw):
    vals = draw(st.lists(_coeffs, min_size=len(_grid_t), max_size=len(_grid_t)))
    return GridFunction(_hybrid_scale.grid, vals)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(f=_funcs(), a=st.sampled_from(_grid_t), c=st.sampled_from(_grid_t), b=st.sampled_from(_grid_t))
    def test_additivity(self, f, a, c, b):
        a, c, b = sorted((a, c, b))
        for integral in (delta_integral, nabla_integral):
            assert integral(f, a, b) == pytest.approx(integral(f, a, c) + integral(f, c, b), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(f=_funcs(), g=_funcs(), alpha=_coeffs, beta=_coeffs)
    def test_linearity(self, f, g, alpha, beta):
        comb = GridFunction(f.grid, alpha * f.values + beta * g.values)
        for integral in (delta_integral, nabla_integral):
            lhs = integral(comb, 0.0, 3.0)
            rhs = alpha * integral(f, 0.0, 3.0) + beta * integral(g, 0.0, 3.0)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestNorm:
    def test_values(self):
        assert max_norm(TimeScale.integers(0, 3).function(lambda t: 0 * t)) == 0
        assert max_norm(TimeScale.integers(0, 3).function(lambda t: t)) == 3
        ts = TimeScale.interval(0.0, 2.0, 1e-3)
        assert max_norm(ts.function(lambda t: 3.25 - 0.25 * t**2 - 0.5 * t)) == 3.25

    def test_rejects_bad_values(self):
        ts = TimeScale.integers(0, 3)
        with pytest.raises(ValueError):
            GridFunction(ts.grid, [0, 1, 2])
        with pytest.raises(ValueError):
            GridFunction(ts.grid, [0, 1, np.nan, 2])
