"""Right-hand sides of the quantum Kuramoto flow and its time integration.

A configuration is an ``(n, d, d)`` array ``X``; the flow prescribes the
right-trivialised velocity ``X_i' X_i^{-1} = Omega_i + F_i(X)`` with

    F_i(X) = 1/2 sum_j gamma_ij (f(X_j X_i^{-1}) - f(X_i X_j^{-1})),

where ``f(x) = sum_p a_p x^p`` is applied to matrices as a power series.
The frustrated variant replaces the bracket with
``g(B X_j X_i^{-1} A^{-1}) - g(B A^{-1})``, ``g(Z) = f(Z) - f(Z^{-1})``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import CLOSURE_TOL, MatrixGroup, U1
from .errors import BlowUpError, DimensionError, NumericError
from .graphs import WeightedGraph

logger = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e8


@dataclass(frozen=True)
class CouplingSeries:
    """Truncated power series ``f(x) = a_1 x + a_2 x^2 + ... + a_P x^P``."""

    coefficients: tuple = (1.0,)

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coefficients)
        if len(coeffs) == 0:
            raise ValueError("a coupling series needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ValueError("coupling coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def is_linear(self) -> bool:
        return self.coefficients == (1.0,)

    def sync_gain(self) -> float:
        """``sum_p p a_p``: the factor multiplying the Laplacian at sync."""
        return float(sum(p * a for p, a in enumerate(self.coefficients, start=1)))

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        """Evaluate on a matrix or a stack of matrices (Horner scheme)."""
        Z = np.asarray(Z)
        if len(self.coefficients) == 1:
            return self.coefficients[0] * Z
        eye = np.eye(Z.shape[-1], dtype=Z.dtype)
        acc = self.coefficients[-1] * np.broadcast_to(eye, Z.shape)
        for a in reversed(self.coefficients[:-1]):
            acc = a * eye + Z @ acc
        return Z @ acc

    def odd_part(self, Z: np.ndarray, Zinv: np.ndarray) -> np.ndarray:
        """``f(Z) - f(Z^{-1})``."""
        return self(Z) - self(Zinv)


LINEAR = CouplingSeries((1.0,))


@dataclass(frozen=True)
class FrustrationPair:
    """Fixed group elements ``A, B`` inserted into the coupling."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A)
        B = np.array(self.B)
        if A.shape != B.shape or A.ndim != 2:
            raise DimensionError("A and B must be square matrices of equal size")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def is_trivial(self) -> bool:
        eye = np.eye(self.A.shape[0])
        return np.array_equal(self.A, eye) and np.array_equal(self.B, eye)


def _inverse(X, group: Optional[MatrixGroup]):
    if group is not None:
        return group.inv(X)
    try:
        return np.linalg.inv(X)
    except np.linalg.LinAlgError as exc:
        raise NumericError("non-invertible element") from exc


def _check_shapes(X, graph: WeightedGraph):
    X = np.asarray(X)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise DimensionError("configuration must have shape (n, d, d)")
    if X.shape[0] != graph.n:
        raise DimensionError(
            f"configuration has {X.shape[0]} elements, graph has {graph.n} vertices")
    return X


def _edge_lists(graph: WeightedGraph):
    return graph.directed_edges


def _accumulate(graph: WeightedGraph, values, shape):
    S = graph.source_incidence
    flat = values.reshape(values.shape[0], int(np.prod(shape)))
    return (S @ flat).reshape((graph.n,) + shape)


def coupling_drift(X, graph: WeightedGraph, f: CouplingSeries = LINEAR,
                   group: Optional[MatrixGroup] = None) -> np.ndarray:
    """``F_i(X)`` for every node, as an ``(n, d, d)`` array."""
    X = _check_shapes(X, graph)
    i, j, w = _edge_lists(graph)
    Xinv = _inverse(X, group)
    R = X[j] @ Xinv[i]
    Rinv = X[i] @ Xinv[j]
    terms = 0.5 * w[:, None, None] * f.odd_part(R, Rinv)
    return _accumulate(graph, terms, X.shape[1:])


def frustrated_drift(X, graph: WeightedGraph, f: CouplingSeries,
                     frustration: FrustrationPair,
                     group: Optional[MatrixGroup] = None) -> np.ndarray:
    """Coupling part of the frustrated flow."""
    X = _check_shapes(X, graph)
    A, B = frustration.A, frustration.B
    Ainv = _inverse(A, group)
    Binv = _inverse(B, group)
    i, j, w = _edge_lists(graph)
    Xinv = _inverse(X, group)
    Z = B @ (X[j] @ Xinv[i]) @ Ainv
    Zinv = A @ (X[i] @ Xinv[j]) @ Binv
    offset = f.odd_part(B @ Ainv, A @ Binv)
    terms = 0.5 * w[:, None, None] * (f.odd_part(Z, Zinv) - offset)
    return _accumulate(graph, terms, X.shape[1:])


def qk_rhs(X, omega, graph: WeightedGraph, f: CouplingSeries = LINEAR,
           group: Optional[MatrixGroup] = None) -> np.ndarray:
    """Right-trivialised velocity ``Omega_i + F_i(X)``."""
    F = coupling_drift(X, graph, f, group)
    return F if omega is None else F + omega


def frustrated_rhs(X, omega, graph: WeightedGraph, f: CouplingSeries,
                   frustration: FrustrationPair,
                   group: Optional[MatrixGroup] = None) -> np.ndarray:
    F = frustrated_drift(X, graph, f, frustration, group)
    return F if omega is None else F + omega


@dataclass(frozen=True)
class QKFlow:
    """Everything that defines a (possibly frustrated) quantum Kuramoto flow."""

    group: MatrixGroup
    graph: WeightedGraph
    coupling: CouplingSeries = LINEAR
    omega: Optional[np.ndarray] = field(default=None, repr=False)
    frustration: Optional[FrustrationPair] = field(default=None, repr=False)

    def __post_init__(self):
        if self.omega is not None:
            om = np.array(self.omega, dtype=self.group.dtype)
            if om.shape != (self.graph.n, self.group.d, self.group.d):
                raise DimensionError("forcing must have shape (n, d, d)")
            if not self.group.in_algebra(om, 1e-10):
                raise ValueError("forcing entries must lie in the Lie algebra")
            object.__setattr__(self, "omega", om)

    @property
    def n(self) -> int:
        return self.graph.n

    def with_omega(self, omega) -> "QKFlow":
        return QKFlow(self.group, self.graph, self.coupling, omega, self.frustration)

    def velocity(self, X) -> np.ndarray:
        if self.frustration is None:
            return qk_rhs(X, self.omega, self.graph, self.coupling, self.group)
        return frustrated_rhs(X, self.omega, self.graph, self.coupling,
                              self.frustration, self.group)


@dataclass
class Trajectory:
    """Stored states of an integration run.

    Attributes:
        times: ``(T,)`` strictly increasing.
        states: ``(T, n, d, d)``.
        drift: ``(T,)`` group-relation violation after any repair.
        retractions: number of steps where drift repair was applied.
    """

    times: np.ndarray
    states: np.ndarray
    drift: np.ndarray
    retractions: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _lie_euler(flow, X, h):
    return flow.group.exp(h * flow.velocity(X)) @ X


def _exp_midpoint(flow, X, h):
    k1 = flow.velocity(X)
    Xm = flow.group.exp(0.5 * h * k1) @ X
    k2 = flow.velocity(Xm)
    return flow.group.exp(h * k2) @ X


_STEPPERS = {"euler": _lie_euler, "midpoint": _exp_midpoint}


def integrate(X0, flow: QKFlow, t_end: float, h: float = 1e-2,
              method: str = "midpoint", store_every: int = 1,
              closure_tol: float = CLOSURE_TOL) -> Trajectory:
    """Fixed-step exponential integration of the flow on ``G^n``.

    Every step left-multiplies each ``X_i`` by the exponential of an algebra
    element, so iterates stay on the group up to rounding. When the group
    relation drifts beyond ``closure_tol`` the state is projected back.

    Args:
        X0: initial configuration ``(n, d, d)``.
        flow: the vector field.
        t_end: final time, ``>= 0``.
        h: step size, ``> 0``. The last step is shortened to land on ``t_end``.
        method: ``"midpoint"`` (order 2) or ``"euler"`` (order 1).
        store_every: keep every k-th step (the final state is always kept).

    Raises:
        BlowUpError: when the state becomes non-finite or exceeds 1e8.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if store_every < 1:
        raise ValueError("store_every must be >= 1")
    try:
        step = _STEPPERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    X = np.array(X0, dtype=flow.group.dtype)
    _check_shapes(X, flow.graph)

    n_steps = int(np.ceil(t_end / h - 1e-9)) if t_end > 0 else 0
    times, states, drifts = [0.0], [X.copy()], [flow.group.drift(X)]
    retractions = 0
    t = 0.0
    for k in range(1, n_steps + 1):
        hk = h if k < n_steps else t_end - (n_steps - 1) * h
        X = step(flow, X, hk)
        t = (k - 1) * h + hk
        if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > BLOWUP_THRESHOLD:
            raise BlowUpError("state left the bounded region", t)
        dr = flow.group.drift(X)
        if dr > closure_tol:
            X = flow.group.retract(X)
            dr = flow.group.drift(X)
            retractions += 1
        if k % store_every == 0 or k == n_steps:
            times.append(t)
            states.append(X.copy())
            drifts.append(dr)
    if retractions:
        logger.debug("drift repair applied on %d of %d steps", retractions, n_steps)
    return Trajectory(np.array(times), np.array(states), np.array(drifts), retractions)


# --------------------------------------------------------------------------
# Classical phase model and U(1) helpers
# --------------------------------------------------------------------------

def classical_rhs(theta, omega, graph, f: CouplingSeries = LINEAR,
                  alpha: float = 0.0) -> np.ndarray:
    """Phase-model velocity with optional phase lag ``alpha``.

        theta_i' = omega_i + sum_j gamma_ij sum_p a_p
                   (sin(p (theta_j - theta_i - alpha)) + sin(p alpha))

    The constant ``sin(p alpha)`` offset keeps the synchronous state a fixed
    point; ``alpha = 0`` gives the ordinary Kuramoto model with coupling
    function given by the sine series.
    """
    w = graph.weights if isinstance(graph, WeightedGraph) else np.asarray(graph)
    theta = np.asarray(theta, dtype=float)
    omega = np.zeros_like(theta) if omega is None else np.asarray(omega, dtype=float)
    if theta.shape != omega.shape or w.shape != (theta.size, theta.size):
        raise DimensionError("phase, frequency and weight sizes disagree")
    diff = theta[None, :] - theta[:, None] - alpha
    H = np.zeros_like(diff)
    for p, a in enumerate(f.coefficients, start=1):
        H += a * (np.sin(p * diff) + np.sin(p * alpha))
    return omega + np.sum(w * H, axis=1)


def integrate_classical(theta0, omega, graph, t_end: float,
                        f: CouplingSeries = LINEAR, alpha: float = 0.0,
                        t_eval=None, rtol: float = 1e-12, atol: float = 1e-12):
    """High-accuracy adaptive reference solution of the phase model."""
    sol = solve_ivp(lambda t, y: classical_rhs(y, omega, graph, f, alpha),
                    (0.0, t_end), np.asarray(theta0, dtype=float),
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericError(sol.message)
    return sol.t, sol.y.T


def u1_configuration(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * theta).reshape(-1, 1, 1)


def u1_forcing(omega) -> np.ndarray:
    return (1j * np.asarray(omega, dtype=float)).reshape(-1, 1, 1)


def u1_angles(X) -> np.ndarray:
    return np.angle(np.asarray(X)[..., 0, 0])


def u1_phase_lag_pair(alpha: float) -> FrustrationPair:
    """``A = e^{i alpha/2}, B = e^{-i alpha/2}``: the classical phase lag."""
    return FrustrationPair(np.array([[np.exp(0.5j * alpha)]]),
                           np.array([[np.exp(-0.5j * alpha)]]))


def u1_flow(graph, omega=None, f: CouplingSeries = LINEAR,
            alpha: Optional[float] = None) -> QKFlow:
    fr = None if alpha is None else u1_phase_lag_pair(alpha)
    om = None if omega is None else u1_forcing(omega)
    return QKFlow(U1(), graph, f, om, fr)


def random_algebra(group: MatrixGroup, n: int, rng: np.random.Generator,
                   scale: float = 1.0) -> np.ndarray:
    """``n`` random algebra elements with standard-normal coordinates."""
    d = group.d
    if group.tag == "so":
        G = rng.standard_normal((n, d, d)) * scale
        return (G - np.swapaxes(G, -1, -2)) / np.sqrt(2.0)
    if group.tag == "u1":
        return 1j * scale * rng.standard_normal((n, 1, 1))
    raise NotImplementedError("random sampling is only defined for SO(d) and U(1)")


def random_configuration(group: MatrixGroup, n: int, rng: np.random.Generator,
                         scale: float = np.pi) -> np.ndarray:
    return group.exp(random_algebra(group, n, rng, scale))
