import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkuramoto.algebra import SO, algebra_coords, canonical_twist, so_basis
from qkuramoto.dynamics import (LINEAR, CouplingSeries, FrustrationPair, QKFlow,
                                random_algebra, random_configuration)
from qkuramoto.errors import DimensionError, PreconditionError
from qkuramoto.graphs import circulant_graph, laplacian
from qkuramoto.linearization import (apply_linearization, classify_stability, edge_operator,
                                     fd_jacobian_oracle, frustrated_linearization,
                                     jacobian_matrix, transfer_matrix)
from qkuramoto.solutions import double_flip_example, sync_configuration, twist


def sorted_eigs(M):
    e = np.linalg.eigvals(M)
    return e[np.lexsort((e.imag.round(9), e.real.round(9)))]


class TestApply:
    def test_constant_perturbation_is_null(self):
        rng = np.random.default_rng(0)
        Q = np.repeat(random_algebra(SO(3), 1, rng), 8, axis=0)
        out = apply_linearization(twist(8, 3, 1), Q, circulant_graph(8, [1.0, 0.3]))
        assert np.max(np.abs(out)) <= 1e-14

    def test_sync_gives_laplacian(self):
        rng = np.random.default_rng(1)
        g = circulant_graph(6, [1.0, 0.4])
        Q = random_algebra(SO(3), 6, rng)
        out = apply_linearization(sync_configuration(6, np.eye(3)), Q, g)
        assert np.allclose(out, np.einsum("ij,jab->iab", laplacian(g), Q), atol=1e-14)

    def test_sync_gain_scaling(self):
        rng = np.random.default_rng(2)
        g = circulant_graph(5, [1.0])
        f = CouplingSeries((1.0, 0.5, -0.2))
        Q = random_algebra(SO(3), 5, rng)
        out = apply_linearization(sync_configuration(5, np.eye(3)), Q, g, f)
        lap = np.einsum("ij,jab->iab", laplacian(g), Q)
        assert np.allclose(out, f.sync_gain() * lap, atol=1e-13)

    def test_matches_oracle_action_around_twist(self):
        rng = np.random.default_rng(3)
        n, d = 8, 3
        g = circulant_graph(n, [1.0, 0.35])
        Y = twist(n, d, 1)
        b = so_basis(d)
        Q = random_algebra(SO(d), n, rng)
        out = algebra_coords(apply_linearization(Y, Q, g), b)
        fd = fd_jacobian_oracle(Y, QKFlow(SO(d), g)).matrix
        x = algebra_coords(Q, b).T.reshape(-1)
        assert np.allclose(out.T.reshape(-1), fd @ x, atol=1e-6)

    def test_requires_fixed_point(self):
        X = random_configuration(SO(3), 5, np.random.default_rng(4))
        with pytest.raises(PreconditionError):
            apply_linearization(X, np.zeros_like(X), circulant_graph(5, [1.0]))
        with pytest.raises(PreconditionError):
            jacobian_matrix(X, circulant_graph(5, [1.0]))

    def test_output_in_algebra(self):
        rng = np.random.default_rng(5)
        Q = random_algebra(SO(4), 6, rng)
        out = apply_linearization(twist(6, 4, 1, 2), Q, circulant_graph(6, [1.0, 0.5]),
                                  CouplingSeries((1.0, 0.3)))
        assert SO(4).in_algebra(out, 1e-13)


class TestJacobian:
    def test_sync_block_diagonal(self):
        g = circulant_graph(7, [1.0, 0.2])
        J = jacobian_matrix(sync_configuration(7, np.eye(4)), g)
        B = J.blocks()
        L = laplacian(g)
        for a in range(6):
            for b in range(6):
                assert np.allclose(B[a, b], L if a == b else 0, atol=1e-15)

    def test_one_twist_block_structure(self):
        # K=1, d=3: M12 block is A(cos th), the (M13, M23) pair couples
        # through A(1 + cos th)/2 on the diagonal and A(sin th)/2 off it
        n = 9
        th = 2 * np.pi / n
        g = circulant_graph(n, [1.0])
        B = jacobian_matrix(twist(n, 3, 1), g).blocks()
        adj = g.weights
        fwd = np.roll(np.eye(n), 1, axis=1)

        def A(w):
            M = w * adj
            return M - np.diag(M.sum(axis=1))

        assert np.allclose(B[0, 0], A(np.cos(th)), atol=1e-14)
        assert np.allclose(B[1, 1], A((1 + np.cos(th)) / 2), atol=1e-14)
        assert np.allclose(B[2, 2], B[1, 1], atol=1e-14)
        skew_part = 0.5 * np.sin(th) * (fwd.T - fwd)
        assert np.allclose(B[1, 2], -B[2, 1], atol=1e-14)
        assert np.allclose(np.abs(B[1, 2]), np.abs(skew_part), atol=1e-14)
        assert np.allclose(B[0, 1:], 0) and np.allclose(B[1:, 0], 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            jacobian_matrix(twist(5, 3, 1), circulant_graph(5, [1.0]), basis=so_basis(4))

    @pytest.mark.parametrize("Y,g", [
        (sync_configuration(5, np.eye(3)), circulant_graph(5, [1.0, 0.5])),
        (twist(8, 3, 1), circulant_graph(8, [0.7, 0.2])),
        (twist(8, 4, 2), circulant_graph(8, [1.0, 0.6])),
        (twist(5, 4, 1, 2), circulant_graph(5, [1.0, 0.3])),
        (double_flip_example(8), circulant_graph(8, [1.0])),
    ])
    def test_spectrum_matches_oracle(self, Y, g):
        d = Y.shape[-1]
        J = jacobian_matrix(Y, g)
        fd = fd_jacobian_oracle(Y, QKFlow(SO(d), g))
        assert np.max(np.abs(J.matrix - fd.matrix)) <= 1e-6
        assert np.allclose(np.sort(J.eigenvalues().real), np.sort(np.linalg.eigvals(fd.matrix).real),
                           atol=1e-5)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(3, 4), st.integers(5, 8), st.integers(0, 2))
    def test_twist_spectrum_real(self, seed, d, n, ell):
        rng = np.random.default_rng(seed)
        g = circulant_graph(n, rng.uniform(0, 1, 2))
        J = jacobian_matrix(twist(n, d, ell), g)
        assert J.is_symmetric(1e-13)
        assert np.max(np.abs(np.linalg.eigvals(J.matrix).imag)) <= 1e-8

    def test_nonlinear_coupling_matches_oracle(self):
        f = CouplingSeries((1.0, 0.4, -0.3))
        g = circulant_graph(7, [1.0, 0.5])
        Y = twist(7, 4, 1, 3)
        J = jacobian_matrix(Y, g, f)
        fd = fd_jacobian_oracle(Y, QKFlow(SO(4), g, f))
        assert np.max(np.abs(J.matrix - fd.matrix)) <= 1e-6


class TestFrustration:
    th = 2 * np.pi / 9

    def pair(self):
        return FrustrationPair(canonical_twist([self.th, 0.0], 4),
                               canonical_twist([0.0, self.th], 4))

    def test_transfer_matrix_frozen(self):
        c, s = np.cos(self.th), np.sin(self.th)
        h, cs, s2 = (c * c + 1) / 2, c * s / 2, s * s / 2
        expected = np.array([
            [c, 0, 0, 0, 0, 0],
            [0, h, -cs, -cs, s2, 0],
            [0, cs, h, -s2, -cs, 0],
            [0, cs, -s2, h, -cs, 0],
            [0, s2, cs, cs, h, 0],
            [0, 0, 0, 0, 0, c],
        ])
        C = transfer_matrix(np.eye(4), np.eye(4), so_basis(4), frustration=self.pair())
        assert np.allclose(C, expected, atol=1e-15)

    def test_transfer_matches_direct_formula(self):
        # at sync with f(x) = x the edge map is W -> (B W A^-1 + A W B^-1) / 2
        P = self.pair()
        b = so_basis(4)
        direct = np.stack([0.5 * (P.B @ M @ P.A.T + P.A @ M @ P.B.T) for M in b.matrices])
        assert np.allclose(transfer_matrix(np.eye(4), np.eye(4), b, frustration=P),
                           algebra_coords(direct, b).T, atol=1e-15)

    def test_ring_jacobian_not_symmetric_with_complex_spectrum(self):
        J = frustrated_linearization(sync_configuration(5, np.eye(4)), circulant_graph(5, [1.0]),
                                     LINEAR, self.pair())
        assert np.linalg.norm(J.matrix - J.matrix.T) > 1e-3
        assert np.max(np.abs(np.linalg.eigvals(J.matrix).imag)) > 1e-6
        assert classify_stability(J, 6).has_nonreal

    def test_identity_pair_reduces(self):
        Y = twist(6, 4, 1, 2)
        g = circulant_graph(6, [1.0, 0.5])
        f = CouplingSeries((1.0, 0.2))
        I = FrustrationPair(np.eye(4), np.eye(4))
        assert np.max(np.abs(jacobian_matrix(Y, g, f, frustration=I).matrix
                             - jacobian_matrix(Y, g, f).matrix)) <= 1e-12

    @pytest.mark.parametrize("coeffs", [(1.0,), (1.0, 0.3), (0.7, -0.2, 0.25)])
    def test_general_pair_matches_oracle(self, coeffs):
        rng = np.random.default_rng(6)
        A, B = random_configuration(SO(3), 2, rng)
        fr = FrustrationPair(A, B)
        f = CouplingSeries(coeffs)
        g = circulant_graph(6, [1.0, 0.4])
        Y = sync_configuration(6, random_configuration(SO(3), 1, rng)[0])
        J = jacobian_matrix(Y, g, f, frustration=fr)
        fd = fd_jacobian_oracle(Y, QKFlow(SO(3), g, f, frustration=fr))
        assert np.max(np.abs(J.matrix - fd.matrix)) <= 1e-6

    def test_conjugated_pair_on_twist_matches_oracle(self):
        rng = np.random.default_rng(7)
        A = random_configuration(SO(3), 1, rng)[0]
        fr = FrustrationPair(A, A)
        f = CouplingSeries((1.0, 0.5))
        g = circulant_graph(7, [1.0, 0.4])
        Y = twist(7, 3, 1)
        J = jacobian_matrix(Y, g, f, frustration=fr)
        fd = fd_jacobian_oracle(Y, QKFlow(SO(3), g, f, frustration=fr))
        assert np.max(np.abs(J.matrix - fd.matrix)) <= 1e-6

    def test_edge_operator_stack(self):
        P = self.pair()
        b = so_basis(4)
        stacked = edge_operator(np.eye(4), np.eye(4), b.matrices, LINEAR, P)
        single = np.stack([edge_operator(np.eye(4), np.eye(4), M, LINEAR, P) for M in b.matrices])
        assert np.allclose(stacked, single)


class TestOracle:
    def test_sync_self_check(self):
        g = circulant_graph(6, [1.0, 0.5])
        fd = fd_jacobian_oracle(sync_configuration(6, np.eye(3)), QKFlow(SO(3), g))
        assert np.allclose(fd.matrix, np.kron(np.eye(3), laplacian(g)), atol=1e-8)

    def test_second_order_differences(self):
        rng = np.random.default_rng(8)
        G = SO(3)
        g = circulant_graph(6, [1.0, 0.5])
        # away from a fixed point the coordinate field is still smooth
        Y =sync_configuration(6, np.eye(3)) @ G.exp(0.3 * random_algebra(G, 6, rng))
        flow = QKFlow(G, g, CouplingSeries((1.0, 0.5)))
        ref = fd_jacobian_oracle(Y, flow, eps=1e-4).matrix
        errs = [np.max(np.abs(fd_jacobian_oracle(Y, flow, eps=e).matrix - ref))
                for e in (0.04, 0.02)]
        assert 3.5 <= errs[0] / errs[1] <= 4.5


class TestClassify:
    def test_sync_stable(self):
        v = classify_stability(jacobian_matrix(sync_configuration(8, np.eye(3)),
                                               circulant_graph(8, [1.0])), 3)
        assert v.tag == "stable" and v.n_zero == 3 and v.n_positive == 0
        assert v.n_zero + v.n_positive + v.n_negative == 24

    def test_two_twist_unstable(self):
        v = classify_stability(jacobian_matrix(twist(12, 3, 2), circulant_graph(12, [1.0])), 3)
        assert v.tag == "unstable"

    def test_one_twist_marginal(self):
        J = jacobian_matrix(twist(10, 3, 1), circulant_graph(10, [1.0]))
        v = classify_stability(J, 3)
        # lambda_{1,0} plus mu_{1,0} and mu_{1,n-1} (each twice)
        assert v.tag == "marginal" and v.n_zero == 5 and v.n_positive == 0

    def test_plain_array_and_absolute_tol(self):
        v = classify_stability(np.diag([0.0, -1.0, 1e-9]), 1, zero_tol=1e-8, relative=False)
        assert v.tag == "marginal" and v.zero_tol == 1e-8
