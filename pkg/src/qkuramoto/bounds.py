"""Necessary conditions on the forcing for a fixed point to exist.

At a fixed point ``Omega_i = -F_i(X)``, so any bound on the coupling drift
bounds the forcing. With ``||f(Z) - f(Z^{-1})|| <= C`` on the group,

    max_i ||F_i(X)|| <= (C / 2) * max_i sum_j |gamma_ij|.

For SO(3) and ``f(x) = x`` the entrywise l^p norms give one such ``C`` per
``p``, and the forcing must lie in every resulting ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import MatrixGroup
from .errors import DomainError, QKError
from .graphs import WeightedGraph

DEFAULT_P_GRID = (1.0, 1.5, 2.0, 4.0, math.inf)


class UnsupportedGroupError(QKError, ValueError):
    """Raised when a bound is only available for another group."""


def zero_sum_check(omega, tol: float = 1e-10) -> bool:
    """True iff ``||sum_i Omega_i||_F <= tol``."""
    omega = np.asarray(omega)
    if omega.size == 0:
        return True
    return bool(np.linalg.norm(omega.sum(axis=0)) <= tol)


def entrywise_norm(M, p: float) -> np.ndarray:
    """Entrywise l^p norm of a matrix or of each matrix in a stack."""
    if p < 1:
        raise DomainError("p must be at least 1")
    a = np.abs(np.asarray(M))
    if math.isinf(p):
        return np.max(a, axis=(-2, -1))
    return np.sum(a ** p, axis=(-2, -1)) ** (1.0 / p)


def node_max_norm(Q, p: float = 2.0) -> float:
    """``||Q||_{l^p, l^inf} = max_i ||Q_i||_{l^p}``."""
    Q = np.asarray(Q)
    if Q.shape[0] == 0:
        return 0.0
    return float(np.max(entrywise_norm(Q, p)))


def drift_bound(graph: WeightedGraph, C: float) -> float:
    """``(C / 2) * max_i sum_j |gamma_ij|``."""
    if C < 0:
        raise DomainError("C must be nonnegative")
    return 0.5 * C * graph.max_row_sum()


def lp_to_l2_ratio(p: float, dim: int = 3) -> float:
    """``sup_x ||x||_p / ||x||_2`` over ``R^dim``: ``dim^(1/p - 1/2)`` below 2, else 1."""
    if p < 1:
        raise DomainError("p must be at least 1")
    inv = 0.0 if math.isinf(p) else 1.0 / p
    return float(dim ** max(0.0, inv - 0.5))


def so3_lp_constant(p: float) -> float:
    """Bound on ``||Z - Z^{-1}||_{l^p}`` over SO(3): ``2^(1+1/p) * C_p``."""
    inv = 0.0 if math.isinf(p) else 1.0 / p
    return 2.0 ** (1.0 + inv) * lp_to_l2_ratio(p)


@dataclass
class AdmissibilityReport:
    """Outcome of the SO(3) multi-norm test.

    ``margins[p]`` is the ball radius minus ``||Omega||_{l^p, l^inf}``; the
    forcing is inadmissible as soon as one margin is negative.
    ``binding_p`` is the ``p`` with the smallest margin.
    """

    verdict: str
    margins: dict = field(default_factory=dict)
    radii: dict = field(default_factory=dict)
    binding_p: float = math.inf

    def to_json(self) -> dict:
        return {"verdict": self.verdict,
                "margins": {_p_label(p): m for p, m in self.margins.items()},
                "binding_p": _p_label(self.binding_p)}


def _p_label(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return f"{p:g}"


def so3_admissibility(omega, graph: WeightedGraph, p_grid=DEFAULT_P_GRID,
                      group: MatrixGroup | None = None) -> AdmissibilityReport:
    """Test ``Omega`` against every ball ``B_p(2^(1+1/p) C_p ||Gamma||_inf / 2)``.

    Only the necessary direction: "possibly-admissible" does not promise a
    fixed point.

    Raises:
        UnsupportedGroupError: the group is not SO(3).
    """
    if group is not None and (group.tag != "so" or group.d != 3):
        raise UnsupportedGroupError(
            f"the l^p admissibility test is derived for SO(3), got {group.tag}({group.d})")
    omega = np.asarray(omega)
    if omega.shape[1:] != (3, 3):
        raise UnsupportedGroupError("forcing must consist of 3x3 matrices")
    if not p_grid:
        raise DomainError("p_grid must be nonempty")
    margins, radii = {}, {}
    for p in p_grid:
        p = float(p)
        radius = drift_bound(graph, so3_lp_constant(p))
        radii[p] = radius
        margins[p] = radius - node_max_norm(omega, p)
    binding = min(margins, key=margins.get)
    verdict = "inadmissible" if margins[binding] < 0 else "possibly-admissible"
    return AdmissibilityReport(verdict, margins, radii, binding)
