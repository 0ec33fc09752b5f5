import random

import pytest
import sympy as sp

from hdw_forge import BundleChart
from hdw_forge.errors import ChartMismatchError, RegularityError
from hdw_forge.legendre import (LagrangianModel, euler_lagrange,
                                hamiltonian_from_lagrangian,
                                hdw_momentum_elimination, legendre_maps,
                                rank_diagnostics, second_order_symbol)
from hdw_forge.symbolic import simplify


def _oscillator_lagrangian():
    chart = BundleChart(1, 1)
    return LagrangianModel(chart, (chart.v(1, 1) ** 2 - chart.y(1) ** 2) / 2)


def _wave_lagrangian():
    chart = BundleChart(2, 1)
    return LagrangianModel(chart, (chart.v(1, 1) ** 2 - chart.v(1, 2) ** 2) / 2)


def _random_quadratic_lagrangian(m, n, rng):
    """Positive-definite kinetic part plus potential: always hyper-regular."""
    chart = BundleChart(m, n)
    slots = [(a, nu) for a in range(1, n + 1) for nu in range(1, m + 1)]
    lag = sp.Integer(0)
    for i, s1 in enumerate(slots):
        lag += sp.Rational(rng.randint(1, 3), rng.randint(1, 2)) * chart.v(*s1) ** 2
        for s2 in slots[i + 1:]:
            if rng.random() < 0.3:
                lag += sp.Rational(rng.randint(-1, 1), 4) * chart.v(*s1) * chart.v(*s2)
    for a in range(1, n + 1):
        lag -= sp.Rational(rng.randint(0, 3), rng.randint(1, 2)) * chart.y(a) ** 2
        if rng.random() < 0.5:
            lag += chart.x(rng.randint(1, m)) * chart.y(a)
    return LagrangianModel(chart, lag)


class TestLegendreMaps:
    def test_oscillator_momentum(self):
        lag = _oscillator_lagrangian()
        res = legendre_maps(lag)
        chart = lag.chart
        assert res.momenta[(1, 1)] == chart.v(1, 1)
        assert res.classification == "hyper-regular-closed-form"
        assert res.inverse_velocities[(1, 1)] == chart.p(1, 1)

    def test_extended_entry_identity(self):
        rng = random.Random(31)
        for m, n in [(1, 1), (2, 1), (2, 2)]:
            lag = _random_quadratic_lagrangian(m, n, rng)
            res = legendre_maps(lag)
            chart = lag.chart
            direct = lag.lag - sum(
                chart.v(a, nu) * sp.diff(lag.lag, chart.v(a, nu))
                for a in range(1, n + 1) for nu in range(1, m + 1))
            assert simplify(res.extended - direct) == 0

    def test_linear_lagrangian_is_degenerate(self):
        chart = BundleChart(2, 1)
        res = legendre_maps(LagrangianModel(chart, chart.v(1, 1)))
        assert res.classification == "degenerate"
        assert all(h == 0 for h in res.hessian.values())

    def test_cubic_lagrangian_is_regular_local(self):
        chart = BundleChart(1, 1)
        res = legendre_maps(LagrangianModel(chart, chart.v(1, 1) ** 3))
        assert res.classification == "regular-local"

    def test_rejects_momentum_coordinates(self):
        chart = BundleChart(1, 1)
        with pytest.raises(Exception):
            LagrangianModel(chart, chart.p(1, 1) ** 2)


class TestInducedHamiltonian:
    def test_oscillator(self):
        ham = hamiltonian_from_lagrangian(legendre_maps(_oscillator_lagrangian()))
        chart = ham.chart
        expected = (chart.p(1, 1) ** 2 + chart.y(1) ** 2) / 2
        assert simplify(ham.h - expected) == 0
        assert ham.provenance == "from-Legendre"

    def test_wave(self):
        ham = hamiltonian_from_lagrangian(legendre_maps(_wave_lagrangian()))
        chart = ham.chart
        expected = (chart.p(1, 1) ** 2 - chart.p(1, 2) ** 2) / 2
        assert simplify(ham.h - expected) == 0

    def test_degenerate_raises(self):
        chart = BundleChart(1, 1)
        res = legendre_maps(LagrangianModel(chart, chart.v(1, 1)))
        with pytest.raises(RegularityError):
            hamiltonian_from_lagrangian(res)

    def test_regular_local_raises(self):
        chart = BundleChart(1, 1)
        res = legendre_maps(LagrangianModel(chart, chart.v(1, 1) ** 3))
        with pytest.raises(RegularityError):
            hamiltonian_from_lagrangian(res)


class TestEulerLagrangeOracle:
    def test_oscillator(self):
        [res] = euler_lagrange(_oscillator_lagrangian())
        assert simplify(res - (second_order_symbol(1, 1, 1) + sp.Symbol("y1"))) == 0

    def test_wave_operator(self):
        [res] = euler_lagrange(_wave_lagrangian())
        expected = second_order_symbol(1, 1, 1) - second_order_symbol(1, 2, 2)
        assert simplify(res - expected) == 0

    def test_second_order_symbol_is_symmetric(self):
        assert second_order_symbol(1, 2, 1) == second_order_symbol(1, 1, 2)

    def test_round_trip_oscillator(self):
        lag = _oscillator_lagrangian()
        el = euler_lagrange(lag)
        elim = hdw_momentum_elimination(lag)
        assert all(simplify(a - b) == 0 for a, b in zip(el, elim))

    def test_round_trip_random_quadratics(self):
        rng = random.Random(33)
        cases = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]
        for m, n in cases:
            lag = _random_quadratic_lagrangian(m, n, rng)
            el = euler_lagrange(lag)
            elim = hdw_momentum_elimination(lag)
            assert all(simplify(a - b) == 0 for a, b in zip(el, elim))


def _identity_embedding_m1():
    chart = BundleChart(1, 1)
    u1, u2, u3 = sp.symbols("u1 u2 u3")
    embedding = {chart.x(1): u1, chart.y(1): u2, chart.p(1, 1): u3}
    return chart, (u1, u2, u3), embedding


class TestRankDiagnostics:
    def test_regular_m1_has_trivial_vertical_kernel(self):
        chart, params, embedding = _identity_embedding_m1()
        u1, u2, u3 = params
        h_P = (u3 ** 2 + u2 ** 2) / 2
        dims = rank_diagnostics(chart, embedding, h_P,
                                [(0.1, 0.3, 0.7), (1.0, -0.5, 0.2)], params=params)
        assert dims == [0, 0]

    def test_degenerate_image_has_kernel(self):
        # image of the momentum map of a v-linear Lagrangian: p frozen
        chart = BundleChart(2, 1)
        u1, u2, u3 = sp.symbols("u1 u2 u3")
        embedding = {chart.x(1): u1, chart.x(2): u2, chart.y(1): u3,
                     chart.p(1, 1): sp.Integer(1), chart.p(1, 2): sp.Integer(0)}
        dims = rank_diagnostics(chart, embedding, 0,
                                [(0.1, 0.2, 0.3), (1.0, 1.0, 1.0)],
                                params=(u1, u2, u3))
        assert all(d >= 1 for d in dims)

    def test_regular_m2_identity(self):
        chart = BundleChart(2, 1)
        params = sp.symbols("u1 u2 u3 u4 u5")
        embedding = dict(zip(
            (chart.x(1), chart.x(2), chart.y(1), chart.p(1, 1), chart.p(1, 2)),
            params))
        h_P = (params[3] ** 2 - params[4] ** 2) / 2
        dims = rank_diagnostics(chart, embedding, h_P,
                                [(0.3, 0.1, 0.5, 0.7, 0.2)], params=params)
        assert dims == [0]

    def test_rejects_zero_parameters(self):
        chart = BundleChart(1, 1)
        with pytest.raises(ChartMismatchError):
            rank_diagnostics(chart, {chart.x(1): 1, chart.y(1): 0,
                                     chart.p(1, 1): 0}, 0, [()], params=())

    def test_rejects_partial_embedding(self):
        chart, params, embedding = _identity_embedding_m1()
        del embedding[chart.p(1, 1)]
        with pytest.raises(ChartMismatchError):
            rank_diagnostics(chart, embedding, 0, [(0.1, 0.2)], params=params[:2])

    def test_rejects_sample_arity_mismatch(self):
        chart, params, embedding = _identity_embedding_m1()
        with pytest.raises(ChartMismatchError):
            rank_diagnostics(chart, embedding, 0, [(0.1, 0.2)], params=params)
