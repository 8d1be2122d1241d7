import math

import numpy as np
import pytest

from heatchern.cochains import random_cochain
from heatchern.errors import NoConvergence, PairingInputInvalid
from heatchern.expectations import repeated_expectation_series
from heatchern.jlo import (
    PairingInput,
    coboundary_pairing_residual,
    equivariant_index,
    gauss_hermite_transform,
    generating_functional,
    involution_from_idempotent,
    jlo_cochain,
    jlo_component,
    pairing,
    pairing_coefficient,
    pairing_gaussian,
    pairing_series,
)
from heatchern.models import random_involution, random_triple
from heatchern.triples import SpectralTriple, derivative


def even_tuple(t, rng, count):
    out = []
    for _ in range(count):
        raw = rng.normal(size=(t.dim, t.dim)) + 1j * rng.normal(size=(t.dim, t.dim))
        out.append((raw + t.conj_gamma(raw)) / 2)
    return out


class TestComponents:
    def test_level_zero_identity_is_index(self, zero_mode):
        val = jlo_component(zero_mode, 0, [np.eye(3)])
        assert val == pytest.approx(equivariant_index(zero_mode), abs=1e-13)

    def test_zero_mode_index_is_one(self, zero_mode):
        assert jlo_component(zero_mode, 0, [np.eye(3)]) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [1, 3])
    def test_odd_components_vanish(self, rng, n):
        t = random_triple(4, seed=51)
        mats = even_tuple(t, rng, n + 1)
        assert abs(jlo_component(t, n, mats)) < 1e-12

    def test_vanishes_on_identity_slots(self, rng):
        t = random_triple(3, seed=52)
        mats = even_tuple(t, rng, 3)
        mats[2] = np.eye(3, dtype=complex)
        assert jlo_component(t, 2, mats) == 0.0

    def test_alternating_sum_identity(self, rng):
        t = random_triple(3, seed=53)
        n = 2
        mats = even_tuple(t, rng, n + 1)
        tot = 0.0
        for j in range(n + 1):
            args = mats[:j] + [derivative(t, mats[j])] + mats[j + 1 :]
            tot += (-1) ** j * jlo_component(t, n, args, check_even=False)
        assert abs(tot) < 1e-11

    def test_rejects_gamma_odd_argument(self, zero_mode):
        from heatchern.errors import ValidationFailure

        odd = zero_mode.Q.copy()
        with pytest.raises(ValidationFailure):
            jlo_component(zero_mode, 0, [odd])


class TestGeneratingFunctional:
    def test_at_origin_identity(self, zero_mode):
        inp = PairingInput(a=np.eye(3, dtype=complex))
        val = generating_functional(zero_mode, inp, 0.0)
        assert val == pytest.approx(equivariant_index(zero_mode), abs=1e-12)

    @pytest.mark.parametrize("tt", [-1.5, -0.3, 0.0, 0.7, 2.0])
    def test_exchange_closed_form(self, exchange, tt):
        # eigenvalues of the exponent are -1 +- 2t
        inp = PairingInput(a=exchange.gamma.copy())
        val = generating_functional(exchange, inp, tt)
        assert val == pytest.approx(2.0 * math.exp(-1.0) * math.cosh(2 * tt), rel=1e-12)

    @pytest.mark.parametrize("tt", [0.5, 1.0, 2.0])
    def test_series_cross_check(self, tt):
        # J(t) = sum (-t^2)^n tau_2n(a,...,a) with the series from the
        # multiset walk engine
        t = random_triple(3, seed=54)
        a = random_involution(t, np.random.default_rng(55))
        inp = PairingInput(a=a)
        da = derivative(t, a)
        front = t.gamma @ a
        series = repeated_expectation_series(t, a, da, 24)
        total = sum((-(tt**2)) ** k * series[2 * k] for k in range(13))
        direct = generating_functional(t, inp, tt)
        assert abs(total - direct) < 1e-8


class TestPairing:
    def test_coefficients(self):
        assert pairing_coefficient(0) == 1.0
        assert pairing_coefficient(1) == -0.5
        assert pairing_coefficient(2) == 0.75

    def test_identity_input_gives_index(self, zero_mode):
        inp = PairingInput(a=np.eye(3, dtype=complex))
        val, trunc, tail = pairing_series(zero_mode, inp)
        assert val == pytest.approx(equivariant_index(zero_mode), abs=1e-12)
        assert trunc == 2  # first vanishing term stops the series

    def test_exchange_gamma_closed_form(self, exchange):
        inp = PairingInput(a=exchange.gamma.copy())
        series, _, _ = pairing_series(exchange, inp)
        quad = pairing_gaussian(exchange, inp)
        assert series == pytest.approx(2.0, abs=1e-9)
        assert quad == pytest.approx(2.0, abs=1e-10)

    def test_index_values(self, exchange, zero_mode):
        assert equivariant_index(exchange) == pytest.approx(0.0, abs=1e-14)
        assert equivariant_index(zero_mode) == pytest.approx(1.0, abs=1e-14)
        t = SpectralTriple(
            dim=2,
            Q=np.zeros((2, 2)),
            gamma=np.diag([1.0, -1.0]),
            group=[np.eye(2)],
        )
        assert equivariant_index(t) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_series_vs_gaussian(self, seed):
        t = random_triple(3, seed=seed + 60)
        a = random_involution(t, np.random.default_rng(seed))
        res = pairing(t, PairingInput(a=a))
        assert abs(res.series_value - res.quadrature_value) < 1e-8
        # reported errors cover the discrepancy
        assert abs(res.series_value - res.quadrature_value) <= res.tail_bound + 1e-10

    def test_block_m1_is_bitwise_scalar(self, exchange):
        inp1 = PairingInput(a=exchange.gamma.copy(), m=1)
        scalar = pairing_gaussian(exchange, inp1)
        again = pairing_gaussian(exchange, PairingInput(a=exchange.gamma.copy()))
        assert scalar == again

    def test_block_input_m2(self, exchange):
        a2 = np.kron(np.eye(2), exchange.gamma)
        res = pairing(exchange, PairingInput(a=a2, m=2))
        assert res.value == pytest.approx(4.0, abs=1e-9)

    def test_connes_average(self, zero_mode):
        a = np.eye(3, dtype=complex)
        res = pairing(zero_mode, PairingInput(a=a))
        idx = equivariant_index(zero_mode)
        assert res.connes_value == pytest.approx((res.value + idx) / 2, abs=1e-12)

    def test_involution_from_idempotent(self):
        p = np.diag([1.0, 0.0, 1.0])
        a = involution_from_idempotent(p)
        assert np.allclose(a @ a, np.eye(3))

    def test_invalid_input_rejected(self, zero_mode):
        bad = 2.0 * np.eye(3, dtype=complex)
        with pytest.raises(PairingInputInvalid):
            pairing_gaussian(zero_mode, PairingInput(a=bad))

    def test_group_invariance_required(self):
        t = random_triple(4, seed=61, group="z2")
        # gamma is group invariant; a non-invariant involution must fail
        rng = np.random.default_rng(62)
        raw = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (raw + t.conj_gamma(raw)) / 2
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        a = (v * np.sign(w)) @ v.conj().T
        inp = PairingInput(a=a)
        rep = inp.validate(t)
        assert not rep.passed

    def test_no_convergence_on_short_budget(self):
        q = 3.0 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        t = SpectralTriple(dim=2, Q=q, gamma=np.diag([1.0, -1.0]), group=[np.eye(2)])
        inp = PairingInput(a=t.gamma.copy())
        with pytest.raises(NoConvergence):
            pairing_series(t, inp, max_level=6)

    def test_entire_decay_monitor(self, exchange):
        # n^(1/2) |tau_n(a,..,a)|^(1/n) decreasing over the computed range
        a = exchange.gamma.copy()
        da = derivative(exchange, a)
        series = repeated_expectation_series(exchange, a, da, 16)
        seq = [
            math.sqrt(n) * abs(series[n]) ** (1.0 / n)
            for n in range(2, 17, 2)
            if abs(series[n]) > 0
        ]
        assert all(b < a for a, b in zip(seq, seq[1:]))


class TestGaussHermite:
    @pytest.mark.parametrize("n", range(7))
    def test_even_moments(self, n):
        exact = math.factorial(2 * n) / (math.factorial(n) * 4.0**n)
        val = gauss_hermite_transform(lambda tt: tt ** (2 * n))
        assert val == pytest.approx(exact, abs=1e-10)

    def test_no_convergence(self):
        with pytest.raises(NoConvergence):
            gauss_hermite_transform(lambda tt: math.cos(50.0 * tt), node_cap=64)


class TestCoboundaryPairing:
    def test_zero_cochain(self, zero_mode):
        from heatchern.cochains import Cochain

        zero = Cochain(lambda n, mats, g: 0.0j, zero_mode.group, 10, "mixed", "C")
        inp = PairingInput(a=np.eye(3, dtype=complex))
        assert coboundary_pairing_residual(zero_mode, zero, inp) == 0.0

    def test_random_cochain(self, exchange):
        G = random_cochain(exchange, seed=70, max_level=15)
        inp = PairingInput(a=exchange.gamma.copy())
        assert coboundary_pairing_residual(exchange, G, inp, max_level=14) < 1e-8

    def test_character_cochain(self, exchange):
        tau = jlo_cochain(exchange, max_level=13)
        inp = PairingInput(a=exchange.gamma.copy())
        assert coboundary_pairing_residual(exchange, tau, inp, max_level=12) < 1e-8
