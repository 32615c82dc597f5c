"""Constructors for special configurations and fixed-point diagnostics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import MatrixGroup, SO, canonical_twist, exp_map
from .dynamics import (LINEAR, CouplingSeries, FrustrationPair, frustrated_rhs,
                       qk_rhs)
from .errors import ConsistencyError, ConstructionError, DimensionError, DomainError
from .graphs import WeightedGraph, laplacian_pseudoinverse


def _fro(a):
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def sync_configuration(n: int, Z) -> np.ndarray:
    Z = np.asarray(Z)
    return np.repeat(Z[None], n, axis=0)


def fixed_point_residual(X, omega, graph: WeightedGraph, f: CouplingSeries = LINEAR,
                         frustration: Optional[FrustrationPair] = None,
                         group: Optional[MatrixGroup] = None) -> float:
    """``max_i ||X_i' X_i^{-1}||_F``; zero exactly at stationary solutions."""
    if frustration is None:
        V = qk_rhs(X, omega, graph, f, group)
    else:
        V = frustrated_rhs(X, omega, graph, f, frustration, group)
    return float(np.max(_fro(V))) if len(V) else 0.0


def class_distance(X, Y, group: MatrixGroup) -> float:
    """Distance from ``X`` to the orbit ``{Y Z : Z in G}`` of right translates.

    Minimises ``sum_i ||X_i - Y_i Z||_F^2`` over ``Z``; for orthogonal and
    unitary groups the minimiser is the projection of the mean of
    ``Y_i^{-1} X_i`` onto the group.
    """
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape:
        raise DimensionError("configurations differ in shape")
    rel = group.inv(Y) @ X
    M = rel.mean(axis=0)
    if group.tag == "generic":
        Z = M
    else:
        Z = group.retract(M)
    return float(np.sqrt(np.sum(_fro(X - Y @ Z) ** 2)))


def near_sync(graph: WeightedGraph, omega, eps: float,
              f: CouplingSeries = LINEAR, group: Optional[MatrixGroup] = None,
              tol: float = 1e-10):
    """Approximate stationary solution for weak, balanced forcing ``eps * omega``.

    Solves the linearised balance ``gain * Lap(Gamma) Q + omega = 0`` on the
    mean-zero subspace, with ``gain = sum_p p a_p`` (1 for ``f(x) = x``), and
    returns ``Y_i = exp(eps Q_i)`` together with ``Q``.

    Raises:
        ConsistencyError: the forcing does not sum to zero.
        RankError: the graph is disconnected.
    """
    omega = np.asarray(omega)
    if omega.ndim != 3 or omega.shape[0] != graph.n:
        raise DimensionError("forcing must have shape (n, d, d)")
    if _fro(omega.sum(axis=0)) > tol:
        raise ConsistencyError("forcing must sum to zero over the nodes")
    gain = f.sync_gain()
    if gain <= 0:
        raise DomainError("near-sync solutions need sum_p p a_p > 0")
    Lp = laplacian_pseudoinverse(graph)
    Q = -np.einsum("ij,jab->iab", Lp, omega) / gain
    return exp_map(eps * Q, group), Q


# --------------------------------------------------------------------------
# Twists
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistSpec:
    """Twist generated by ``T = Tw(2 pi l_1/n, ..., 2 pi l_z/n)`` in SO(d)."""

    n: int
    d: int
    windings: tuple

    def __post_init__(self):
        w = tuple(int(v) for v in self.windings)
        z = self.d // 2
        if len(w) > z:
            raise DimensionError(f"at most {z} winding numbers for d={self.d}")
        object.__setattr__(self, "windings", w + (0,) * (z - len(w)))

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.array(self.windings, dtype=float) / self.n

    def generator(self) -> np.ndarray:
        return canonical_twist(self.angles, self.d)


def twist_configuration(spec: TwistSpec) -> np.ndarray:
    """``X_i = T^i`` for ``i = 0..n-1`` (powers formed from angles, not products)."""
    ks = np.arange(spec.n)
    return np.stack([canonical_twist(k * spec.angles, spec.d) for k in ks])


def twist(n: int, d: int, *windings) -> np.ndarray:
    return twist_configuration(TwistSpec(n, d, windings))


# --------------------------------------------------------------------------
# Twist-flips
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistFlipSpec:
    """Per-plane angle increments of a nearest-neighbour twist-flip.

    ``increments[q][e]`` is the rotation angle in plane ``q`` from site ``e``
    to site ``e + 1`` (cyclically). Neighbour pairs solve the balance
    ``A - A^{-1} = B^{-1} - B`` exactly when, in every plane, all increments
    share the same sine; going around the cycle must return to the start.

    Raises:
        ConstructionError: when a plane mixes increments with different sines
            or its increments do not close up modulo ``2 pi``.
    """

    n: int
    d: int
    increments: tuple

    def __post_init__(self):
        z = self.d // 2
        inc = tuple(tuple(float(a) for a in axis) for axis in self.increments)
        if len(inc) > z:
            raise DimensionError(f"at most {z} planes for d={self.d}")
        inc = inc + tuple((0.0,) * self.n for _ in range(z - len(inc)))
        for q, axis in enumerate(inc):
            if len(axis) != self.n:
                raise DimensionError(f"plane {q} needs {self.n} increments")
            s = np.sin(axis)
            if np.max(np.abs(s - s[0])) > 1e-10:
                raise ConstructionError(
                    f"plane {q}: increments must share one sine value")
            total = np.sum(axis) / (2 * np.pi)
            if abs(total - round(total)) > 1e-9:
                raise ConstructionError(
                    f"plane {q}: increments do not close the cycle")
        object.__setattr__(self, "increments", inc)

    @classmethod
    def from_flips(cls, n: int, d: int, windings, flips=()) -> "TwistFlipSpec":
        """Build from a winding number and a set of flipped edges per plane.

        With ``f`` flipped edges and winding ``w`` a plane uses the increment
        ``phi = (2 pi w - f pi) / (n - 2 f)`` on ordinary edges and
        ``pi - phi`` on flipped ones, which closes the cycle by construction.
        """
        z = d // 2
        windings = tuple(windings) + (0,) * (z - len(tuple(windings)))
        flips = tuple(tuple(fl) for fl in flips) + ((),) * (z - len(tuple(flips)))
        axes = []
        for w, fl in zip(windings, flips):
            fl = set(int(e) % n for e in fl)
            if 2 * len(fl) == n:
                raise ConstructionError("half the edges flipped: increment undefined")
            phi = (2 * np.pi * w - len(fl) * np.pi) / (n - 2 * len(fl))
            axes.append(tuple(np.pi - phi if e in fl else phi for e in range(n)))
        return cls(n, d, tuple(axes))


def twist_flip_configuration(spec: TwistFlipSpec) -> np.ndarray:
    inc = np.array(spec.increments).reshape(-1, spec.n)
    angles = np.concatenate([np.zeros((inc.shape[0], 1)),
                             np.cumsum(inc[:, :-1], axis=1)], axis=1)
    return np.stack([canonical_twist(angles[:, k], spec.d) for k in range(spec.n)])


def double_flip_example(n: int) -> np.ndarray:
    """SO(4) configuration ``Tw(k pi/(n-2), 2 pi k/n)``, ``k = 0..n-1``."""
    k = np.arange(n)
    return np.stack([canonical_twist([kk * np.pi / (n - 2), 2 * np.pi * kk / n], 4)
                     for kk in k])


def ab_residuals(X, group: Optional[MatrixGroup] = None) -> np.ndarray:
    """Per-site ``||(A - A^{-1}) + (B - B^{-1})||_F`` on the nearest-neighbour ring.

    ``A = X_{i+1} X_i^{-1}`` and ``B = X_{i-1} X_i^{-1}``.
    """
    X = np.asarray(X)
    group = group or SO(X.shape[-1])
    Xinv = group.inv(X)
    A = np.roll(X, -1, axis=0) @ Xinv
    B = np.roll(X, 1, axis=0) @ Xinv
    return _fro(A - group.inv(A) + B - group.inv(B))
