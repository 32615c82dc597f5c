import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qkuramoto.algebra import SO
from qkuramoto.dynamics import QKFlow
from qkuramoto.errors import DimensionError, DomainError
from qkuramoto.graphs import alpha_bands, circulant_graph, strict_bandwidth_graph
from qkuramoto.linearization import fd_jacobian_oracle, jacobian_matrix
from qkuramoto.solutions import twist
from qkuramoto.spectra import (alpha_star, double_twist_eigs, g_threshold, higher_twist_kappa,
                               lambda_family, mu_family, nu_family, rho_star, rho_star_argmax,
                               single_twist_eigs, supports_one_twist, twist_integrals)


def numeric_multiset(n, d, gamma, *ls):
    J = jacobian_matrix(twist(n, d, *ls), circulant_graph(n, gamma))
    return np.sort(np.linalg.eigvalsh(0.5 * (J.matrix + J.matrix.T)))


class TestSingleTwist:
    def test_hexagon_values(self):
        lam = lambda_family([1.0], 6, 1)
        mu = mu_family([1.0], 6, 1)
        # circulant blocks with unit off-diagonals: 2 cos(pi/3)(cos(pi/3) - 1)
        assert np.isclose(lam[1], -0.5, atol=1e-15)
        assert np.isclose(mu[1], -1.5, atol=1e-15)

    @pytest.mark.parametrize("ell", [0, 1, 2, -3])
    def test_zero_mode(self, ell):
        gamma = [1.0, 0.4, 0.2]
        assert lambda_family(gamma, 9, ell)[0] == 0.0
        assert abs(mu_family(gamma, 9, ell)[0]) <= 1e-15

    @pytest.mark.parametrize("n", [5, 8, 13])
    def test_two_twist_positive_mode(self, n):
        assert mu_family([1.0], n, 2)[n - 1] > 0

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_per_m_totals(self, d):
        spec = single_twist_eigs([1.0, 0.3], 9, d, 1)
        assert np.all(spec.per_m_totals() == d * (d - 1) // 2)
        if d == 2:
            assert spec.families() == ["lambda"]

    @pytest.mark.parametrize("n", [5, 8, 12])
    @pytest.mark.parametrize("d", [3, 4, 5])
    @pytest.mark.parametrize("K", [1, 2])
    def test_matches_jacobian(self, n, d, K):
        rng = np.random.default_rng(100 * n + 10 * d + K)
        gamma = rng.uniform(0.1, 1.5, K)
        spec = single_twist_eigs(gamma, n, d, 1)
        assert np.allclose(spec.multiset(), numeric_multiset(n, d, gamma, 1), atol=1e-6)

    def test_matches_fd_oracle(self):
        gamma = [0.8, 0.5]
        fd = fd_jacobian_oracle(twist(8, 4, 2), QKFlow(SO(4), circulant_graph(8, gamma))).matrix
        assert np.allclose(single_twist_eigs(gamma, 8, 4, 2).multiset(),
                           np.sort(np.linalg.eigvals(fd).real), atol=1e-6)

    def test_antipodal_band(self):
        gamma = [1.0, 0.5, 0.7]
        assert np.allclose(single_twist_eigs(gamma, 6, 4, 1).multiset(),
                           numeric_multiset(6, 4, gamma, 1), atol=1e-10)

    @settings(max_examples=50)
    @given(st.integers(3, 20), st.integers(-8, 8), st.data())
    def test_symmetries(self, n, ell, data):
        K = data.draw(st.integers(1, n // 2))
        gamma = data.draw(st.lists(st.floats(0.0, 2.0), min_size=K, max_size=K))
        nu = nu_family(gamma, n)
        mu = mu_family(gamma, n, ell)
        mu_neg = mu_family(gamma, n, -ell)
        m = np.arange(n)
        assert np.allclose(nu[m], nu[(-m) % n], atol=1e-12)
        assert np.allclose(mu, mu_neg[(-m) % n], atol=1e-12)
        assert np.allclose(lambda_family(gamma, n, ell), lambda_family(gamma, n, -ell), atol=1e-12)

    def test_bandwidth_checked(self):
        with pytest.raises(DomainError):
            lambda_family([1.0, 1.0, 1.0], 5, 1)
        with pytest.raises(DomainError):
            nu_family([], 5)
        with pytest.raises(DimensionError):
            single_twist_eigs([1.0], 5, 1, 1)


class TestDoubleTwist:
    @pytest.mark.parametrize("d", [4, 5, 6])
    def test_per_m_totals(self, d):
        spec = double_twist_eigs([1.0], 8, d, 1, 2)
        assert np.all(spec.per_m_totals() == d * (d - 1) // 2)

    def test_oracle_multiset(self):
        fd = fd_jacobian_oracle(twist(8, 4, 1, 1), QKFlow(SO(4), circulant_graph(8, [1.0]))).matrix
        assert np.allclose(double_twist_eigs([1.0], 8, 4, 1, 1).multiset(),
                           np.sort(np.linalg.eigvals(fd).real), atol=1e-6)

    @pytest.mark.parametrize("d,ls", [(4, (1, 2)), (5, (2, 1)), (6, (1, -1)), (4, (0, 3))])
    def test_matches_jacobian(self, d, ls):
        gamma = [1.0, 0.35]
        assert np.allclose(double_twist_eigs(gamma, 9, d, *ls).multiset(),
                           numeric_multiset(9, d, gamma, *ls), atol=1e-8)

    def test_zero_windings_degenerate(self):
        spec = double_twist_eigs([1.0, 0.5], 7, 4, 0, 0)
        nu = nu_family([1.0, 0.5], 7)
        for fam in ("lambda", "kappa+", "kappa-"):
            vals = spec.values(fam)
            assert np.allclose(vals, np.tile(nu, vals.size // 7))

    def test_unit_windings_simplify(self):
        n = 11
        c = 2 * np.pi / n
        m = np.arange(n)
        kp = double_twist_eigs([1.0], n, 4, 1, 1).values("kappa+")
        assert np.allclose(kp, 2 * (np.cos(c * (m + 1)) - np.cos(c)), atol=1e-14)
        assert kp[n - 1] > 0

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            double_twist_eigs([1.0], 8, 3, 1, 1)


class TestHigherTwist:
    @settings(max_examples=40)
    @given(st.integers(5, 20), st.integers(-5, 5), st.integers(-5, 5))
    def test_parity(self, n, la, lb):
        if la == 0 or lb == 0:
            return
        gamma = [1.0, 0.3]
        a = higher_twist_kappa(gamma, n, la, lb)
        b = higher_twist_kappa(gamma, n, -la, -lb)
        m = np.arange(n)
        for s in "+-":
            assert np.allclose(a[s], b[s][(-m) % n], atol=1e-12)

    def test_unit_case_reduces(self):
        h = higher_twist_kappa([1.0, 0.2], 9, 1, 1)
        spec = double_twist_eigs([1.0, 0.2], 9, 4, 1, 1)
        assert np.allclose(h["+"], spec.values("kappa+"))
        assert np.allclose(h["-"], spec.values("kappa-"))

    @pytest.mark.parametrize("la,lb", [(2, 1), (1, 3), (-2, 2)])
    def test_large_winding_certifies_instability(self, la, lb):
        h = higher_twist_kappa([1.0], 12, la, lb)
        assert max(h["+"].max(), h["-"].max()) > 0

    def test_zero_winding(self):
        with pytest.raises(DomainError):
            higher_twist_kappa([1.0], 8, 0, 1)


class TestSupport:
    @pytest.mark.parametrize("n", [5, 9, 20, 57])
    def test_nearest_neighbour(self, n):
        ok, _ = supports_one_twist([1.0], n)
        assert ok

    def test_strict_bandwidth(self):
        assert supports_one_twist(strict_bandwidth_graph(12, 3).bands, 12)[0]
        ok, witness = supports_one_twist(strict_bandwidth_graph(13, 3).bands, 13)
        assert not ok and witness.value > 0

    @pytest.mark.parametrize("n", [9, 15, 31])
    def test_below_rho_star(self, n):
        r = rho_star(n)
        assert not supports_one_twist([0.9 * r, 1.0], n)[0]
        assert supports_one_twist([1.1 * r, 1.0], n)[0]

    def test_alpha_sequence(self):
        n = 400
        assert supports_one_twist(alpha_bands(0.30, n), n)[0]
        ok, witness = supports_one_twist(alpha_bands(0.36, n), n)
        assert not ok and witness.family == "lambda"


class TestThresholds:
    @pytest.mark.parametrize("n", [9, 17, 25])
    def test_k2_is_rho_star(self, n):
        assert np.isclose(g_threshold([2.5], n), rho_star(n) * 2.5, rtol=1e-12)

    def test_boundary_has_zero_top_mu(self):
        n = 21
        tail = [0.6, 0.3]
        g1 = g_threshold(tail, n)
        assert abs(mu_family([g1] + tail, n, 1)[1:n - 1].max()) <= 1e-12

    def test_bilateral_flip(self):
        n = 16
        g1 = g_threshold([0.0, 1.0], n)
        assert g1 > 0
        assert supports_one_twist([g1 + 1e-3, 0.0, 1.0], n)[0]
        assert not supports_one_twist([g1 - 1e-3, 0.0, 1.0], n)[0]

    def test_equal_tail_threshold_is_negative(self):
        # the mu family still flips sign across the threshold, but it sits
        # below zero, so every positive gamma_1 supports the 1-twist
        n = 16
        g1 = g_threshold([1.0, 1.0], n)
        assert g1 < 0
        top = [mu_family([g1 + s, 1.0, 1.0], n, 1)[1:n - 1].max() for s in (-1e-3, 1e-3)]
        assert top[0] > 0 > top[1]
        assert all(supports_one_twist([g, 1.0, 1.0], n)[0] for g in (1e-3, 0.5, 2.0))

    def test_empty_tail(self):
        assert g_threshold([], 9) <= 0
        assert g_threshold([0.0, 0.0], 13) <= 0

    def test_domain(self):
        with pytest.raises(DomainError):
            g_threshold([1.0, 1.0], 12)


class TestRhoStar:
    def test_even_is_zero(self):
        assert rho_star(10) == 0.0
        assert rho_star(40) == 0.0

    @pytest.mark.parametrize("n", [51, 101, 201])
    def test_asymptotics(self, n):
        assert abs(rho_star(n) * (n / np.pi) ** 2 - 1) <= 0.05

    def test_odd_positive(self):
        assert all(rho_star(n) > 0 for n in (5, 7, 11, 23))

    @pytest.mark.parametrize("k", [20, 50])
    def test_argmax_at_half(self, k):
        assert rho_star_argmax(2 * k + 1) == k

    def test_matches_support_bisection(self):
        n = 15
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if supports_one_twist([mid, 1.0], n)[0] else (mid, hi)
        assert abs(hi - rho_star(n)) <= 1e-8

    def test_domain(self):
        with pytest.raises(DomainError):
            rho_star(4)


def I_integrand(x, m):
    return np.cos(x) * (np.cos(m * x) - 1)


def J_integrand(x, m):
    return np.cos((m + 1) * x) + np.cos(m * x) - np.cos(x) - 1


class TestIntegrals:
    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.3405, 0.5])
    @pytest.mark.parametrize("m", [1, 2, 3, 7])
    def test_quadrature(self, alpha, m):
        I, J = twist_integrals(alpha, m)
        ub = 2 * np.pi * alpha
        assert np.isclose(I, quad(I_integrand, 0, ub, args=(m,))[0], atol=1e-12)
        assert np.isclose(J, quad(J_integrand, 0, ub, args=(m,))[0], atol=1e-12)

    def test_quarter_values(self):
        for m in (3, 5, 7, 9):
            assert np.isclose(twist_integrals(0.25, m)[0], -1.0, atol=1e-14)
        assert np.isclose(twist_integrals(0.25, 1)[0], np.pi / 4 - 1, atol=1e-14)

    def test_degenerate_j(self):
        assert twist_integrals(0.3, 0)[1] == 0.0
        assert twist_integrals(0.3, -1)[1] == 0.0

    def test_riemann_sum(self):
        alpha, m = 0.3, 1
        I = twist_integrals(alpha, m)[0]
        errs = []
        for n in (200, 400, 800):
            K = int(np.floor(alpha * n))
            x = 2 * np.pi * np.arange(1, K + 1) / n
            errs.append(abs(2 * np.pi / n * np.sum(I_integrand(x, m)) - I))
        assert errs[2] < errs[1] < errs[0] and errs[2] < 1e-2

    def test_lambda_tracks_integral(self):
        # lambda_{1,m} for the alpha graph is n/pi times a Riemann sum of I_m
        alpha, n = 0.3, 600
        lam = lambda_family(alpha_bands(alpha, n), n, 1)
        for m in (1, 2, 3):
            assert np.isclose(lam[m] * np.pi / n, twist_integrals(alpha, m)[0], atol=2e-2)

    def test_domain(self):
        with pytest.raises(DomainError):
            twist_integrals(0.0, 1)
        with pytest.raises(DomainError):
            twist_integrals(0.6, 1)


class TestAlphaStar:
    def test_value(self):
        a = alpha_star()
        assert abs(a - 0.340461) <= 1e-5
        assert abs(twist_integrals(a, 1)[0]) <= 1e-12

    def test_bracket(self):
        assert twist_integrals(0.3, 1)[0] < 0 < twist_integrals(0.4, 1)[0]

    def test_tol_floor(self):
        with pytest.raises(DomainError):
            alpha_star(1e-14)


class TestBlockIdentities:
    @staticmethod
    def band_profile(k, ell, n, x):
        return (np.cos(2 * np.pi * k * (ell + x) / n) + np.cos(2 * np.pi * k * x / n)
                - np.cos(2 * np.pi * k * ell / n) - 1)

    @pytest.mark.parametrize("K,n", [(1, 7), (2, 11), (3, 13), (2, 16)])
    def test_f_sign_pattern(self, K, n):
        # negative then positive on one period while k * ell < n / 2
        for ell in range(1, n):
            for k in range(1, K + 1):
                if not (ell < n / K and k * ell < n / 2):
                    continue
                period = n / k
                x = np.linspace(0, period, 4001)[1:-1]
                f = self.band_profile(k, ell, n, x)
                root = period - ell
                gap = 1e-6 * period
                assert np.all(f[x < root - gap] < 0)
                assert np.all(f[x > root + gap] > 0)

    @pytest.mark.parametrize("k,ell,n", [(1, 4, 7), (2, 3, 11), (1, 5, 6)])
    def test_f_pattern_reverses_past_half(self, k, ell, n):
        period = n / k
        x = np.linspace(0, period, 4001)[1:-1]
        f = self.band_profile(k, ell, n, x)
        h = np.pi * k * ell / n
        factored = 2 * np.cos(h) * (np.cos(2 * np.pi * k * x / n + h) - np.cos(h))
        assert np.allclose(f, factored, atol=1e-13)
        root = period - ell
        assert np.all(f[x < root - 1e-6] > 0) and np.all(f[x > root + 1e-6] < 0)

    @staticmethod
    def random_parts(seed, n=6):
        rng = np.random.default_rng(seed)
        a, b, c = rng.standard_normal((3, n, n))
        return a + a.T, b - b.T, c - c.T

    @pytest.mark.parametrize("seed", range(5))
    def test_a_plus_ib(self, seed):
        A, B, _ = self.random_parts(seed)
        M = np.block([[A, -B], [B, A]])
        herm = np.linalg.eigvalsh(A + 1j * B)
        assert np.allclose(np.linalg.eigvalsh(M), np.sort(np.repeat(herm, 2)), atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_abc(self, seed):
        A, B, C = self.random_parts(seed)
        Z = np.zeros_like(A)
        M = np.block([[A, B, C, Z], [-B, A, Z, C], [-C, Z, A, B], [Z, -C, -B, A]])
        ev = np.linalg.eigvals(M)
        assert np.max(np.abs(ev.imag)) <= 1e-10
        ref = np.concatenate([np.linalg.eigvalsh(A + 1j * (B + C)),
                              np.linalg.eigvalsh(A + 1j * (B - C))])
        assert np.allclose(np.sort(ev.real), np.sort(np.repeat(ref, 2)), atol=1e-10)
