"""Linearisation of the flow around fixed points and stability verdicts.

Perturbations are written ``X_i = Y_i exp(Q_i)`` with ``Q_i`` in the Lie
algebra; to first order ``Q' = L_Y Q`` with

    (L_Y Q)_i = sum_j gamma_ij L_ij (Q_j - Q_i).

For ``f(x) = sum_p a_p x^p`` and a frustration pair ``(A, B)`` the edge
operator is

    L_ij W = 1/2 sum_p a_p S [ sum_{q<p} U^{q+1} W U^{p-q-1} + U^{-q} W U^{q-p} ] S^{-1}

with ``U = Y_i^{-1} A^{-1} B Y_j`` and ``S = Y_i^{-1} A Y_i``. Without
frustration ``S = I`` and ``U = Y_i^{-1} Y_j``.

In a basis ``M_1..M_D`` of the algebra the operator becomes a
``(D n) x (D n)`` matrix made of ``D x D`` blocks, each an ``n x n``
zero-row-sum matrix supported on the edges of the graph. Rows and columns
are indexed ``alpha * n + i`` (basis index major, node index minor).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import SoBasis, algebra_coords, exp_map, so_basis
from .dynamics import LINEAR, CouplingSeries, FrustrationPair, QKFlow
from .errors import DimensionError, PreconditionError
from .graphs import WeightedGraph
from .solutions import fixed_point_residual

FIXED_POINT_TOL = 1e-8


def _powers(U: np.ndarray, P: int) -> dict:
    """``U^k`` for ``-P <= k <= P``; ``U`` is orthogonal or at least invertible."""
    Uinv = np.linalg.inv(U)
    pw = {0: np.eye(U.shape[0])}
    for k in range(1, P + 1):
        pw[k] = pw[k - 1] @ U
        pw[-k] = pw[-(k - 1)] @ Uinv
    return pw


def edge_operator(Yi, Yj, W, f: CouplingSeries = LINEAR,
                  frustration: Optional[FrustrationPair] = None) -> np.ndarray:
    """Apply ``L_ij`` to ``W`` (a matrix or a stack of matrices)."""
    Yi_inv = np.linalg.inv(Yi)
    if frustration is None:
        U = Yi_inv @ Yj
        S = Sinv = None
    else:
        A, B = frustration.A, frustration.B
        U = Yi_inv @ np.linalg.inv(A) @ B @ Yj
        S = Yi_inv @ A @ Yi
        Sinv = np.linalg.inv(S)
    P = f.order
    pw = _powers(U, P)
    out = np.zeros(np.shape(W), dtype=np.result_type(W, U))
    for p, a in enumerate(f.coefficients, start=1):
        if a == 0.0:
            continue
        for q in range(p):
            out = out + a * (pw[q + 1] @ W @ pw[p - q - 1] + pw[-q] @ W @ pw[q - p])
    out = 0.5 * out
    if S is not None:
        out = S @ out @ Sinv
    return out


def _require_fixed_point(Y, graph, f, frustration, tol):
    res = fixed_point_residual(Y, None, graph, f, frustration)
    if res > tol:
        raise PreconditionError(
            f"configuration is not a fixed point (residual {res:.3e} > {tol:.1e})")


def apply_linearization(Y, Q, graph: WeightedGraph, f: CouplingSeries = LINEAR,
                        frustration: Optional[FrustrationPair] = None,
                        fixed_point_tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """``(L_Y Q)_i`` for every node.

    Raises:
        PreconditionError: ``Y`` is not a fixed point of the (frustrated)
            flow with zero forcing.
    """
    Y = np.asarray(Y)
    Q = np.asarray(Q)
    if Q.shape != Y.shape:
        raise DimensionError("perturbation and configuration differ in shape")
    _require_fixed_point(Y, graph, f, frustration, fixed_point_tol)
    out = np.zeros(Q.shape, dtype=np.result_type(Q, Y))
    for i, j, w in graph.edges():
        out[i] += w * edge_operator(Y[i], Y[j], Q[j] - Q[i], f, frustration)
        out[j] += w * edge_operator(Y[j], Y[i], Q[i] - Q[j], f, frustration)
    return out


@dataclass
class JacobianMatrix:
    """Matrix of the linearisation in a chosen algebra basis.

    Attributes:
        matrix: ``(D n, D n)`` array, entry ``[a*n + i, b*n + j]``.
        n: number of nodes.
        basis: the algebra basis used for coordinates.
    """

    matrix: np.ndarray
    n: int
    basis: SoBasis = field(repr=False)

    @property
    def dim_g(self) -> int:
        return len(self.basis)

    def blocks(self) -> np.ndarray:
        """``(D, D, n, n)`` view: ``blocks()[a, b]`` is the n x n block."""
        D, n = self.dim_g, self.n
        return self.matrix.reshape(D, n, D, n).transpose(0, 2, 1, 3)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.T)) <= tol)

    def eigenvalues(self) -> np.ndarray:
        if self.is_symmetric():
            return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T)).astype(complex)
        return np.linalg.eigvals(self.matrix)


def transfer_matrix(Yi, Yj, basis: SoBasis, f: CouplingSeries = LINEAR,
                    frustration: Optional[FrustrationPair] = None) -> np.ndarray:
    """Coefficients ``C[a, b]`` with ``L_ij M_b = sum_a C[a, b] M_a``."""
    images = edge_operator(Yi, Yj, basis.matrices, f, frustration)
    return algebra_coords(images, basis).T


def jacobian_matrix(Y, graph: WeightedGraph, f: CouplingSeries = LINEAR,
                    basis: Optional[SoBasis] = None,
                    frustration: Optional[FrustrationPair] = None,
                    fixed_point_tol: float = FIXED_POINT_TOL) -> JacobianMatrix:
    """Block-Laplacian matrix of the linearisation around ``Y`` (SO(d) only)."""
    Y = np.asarray(Y)
    n, d = Y.shape[0], Y.shape[-1]
    basis = basis or so_basis(d)
    if basis.d != d or n != graph.n:
        raise DimensionError("basis, configuration and graph sizes disagree")
    if np.iscomplexobj(Y):
        raise DimensionError("Jacobian matrices are built for SO(d) only")
    _require_fixed_point(Y, graph, f, frustration, fixed_point_tol)
    D = len(basis)
    J4 = np.zeros((D, n, D, n))
    for i in range(n):
        for j in np.nonzero(graph.weights[i])[0]:
            w = graph.weights[i, j]
            J4[:, i, :, j] = w * transfer_matrix(Y[i], Y[j], basis, f, frustration)
    # diagonal = minus the off-diagonal row sum, formed in one reduction
    ii = np.arange(n)
    J4[:, ii, :, ii] = -J4.sum(axis=3).transpose(1, 0, 2)
    return JacobianMatrix(J4.reshape(D * n, D * n), n, basis)


def frustrated_linearization(Y, graph: WeightedGraph, f: CouplingSeries,
                             frustration: FrustrationPair,
                             basis: Optional[SoBasis] = None,
                             fixed_point_tol: float = FIXED_POINT_TOL) -> JacobianMatrix:
    return jacobian_matrix(Y, graph, f, basis, frustration, fixed_point_tol)


def fd_jacobian_oracle(Y, flow: QKFlow, eps: float = 1e-5,
                       basis: Optional[SoBasis] = None) -> JacobianMatrix:
    """Central-difference Jacobian of the coordinate vector field.

    Perturbs one coordinate at a time, ``X_j = Y_j exp(+-eps M_b)``, and reads
    the body-frame response ``Y_i^{-1} V_i Y_i`` in the same basis. Uses only
    the flow's right-hand side, so it is independent of the analytic route.
    """
    Y = np.asarray(Y, dtype=float)
    n, d = Y.shape[0], Y.shape[-1]
    basis = basis or so_basis(d)
    D = len(basis)
    Yinv = np.linalg.inv(Y)
    steps = exp_map(np.concatenate([eps * basis.matrices, -eps * basis.matrices]))
    J = np.zeros((D * n, D * n))
    for j in range(n):
        for b in range(D):
            Xp = Y.copy()
            Xm = Y.copy()
            Xp[j] = Y[j] @ steps[b]
            Xm[j] = Y[j] @ steps[D + b]
            dV = (flow.velocity(Xp) - flow.velocity(Xm)) / (2 * eps)
            body = Yinv @ dV @ Y
            J[:, b * n + j] = algebra_coords(body, basis).T.reshape(-1)
    return JacobianMatrix(J, n, basis)


@dataclass
class StabilityVerdict:
    """Sign census of a Jacobian spectrum.

    ``tag`` is ``"unstable"`` when some real part exceeds the tolerance,
    ``"stable"`` when exactly ``dim_g`` eigenvalues are (numerically) zero and
    the rest negative, and ``"marginal"`` when extra zero modes remain.
    """

    tag: str
    n_positive: int
    n_zero: int
    n_negative: int
    zero_tol: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def has_nonreal(self) -> bool:
        return bool(np.any(np.abs(self.eigenvalues.imag) > self.zero_tol))


def classify_stability(J, dim_g: int, zero_tol: float = 1e-7,
                       relative: bool = True) -> StabilityVerdict:
    """Classify a fixed point from its Jacobian.

    Args:
        J: a :class:`JacobianMatrix` or a square array.
        dim_g: dimension of the algebra (size of the right-translation nullspace).
        zero_tol: threshold on real parts; scaled by ``max(1, ||J||_1)`` when
            ``relative`` is true.
    """
    if isinstance(J, JacobianMatrix):
        eigs = J.eigenvalues()
        M = J.matrix
    else:
        M = np.asarray(J)
        eigs = np.linalg.eigvals(M)
    tol = zero_tol * max(1.0, np.linalg.norm(M, 1)) if relative else zero_tol
    re = eigs.real
    n_pos = int(np.sum(re > tol))
    n_zero = int(np.sum(np.abs(re) <= tol))
    n_neg = int(np.sum(re < -tol))
    if n_pos:
        tag = "unstable"
    elif n_zero == dim_g:
        tag = "stable"
    else:
        tag = "marginal"
    return StabilityVerdict(tag, n_pos, n_zero, n_neg, tol, eigs)
