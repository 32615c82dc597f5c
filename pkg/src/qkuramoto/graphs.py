"""Weighted coupling graphs, circulant families, Laplacians.

Sign convention: the Laplacian carries the minus sign on the diagonal,
``L[i, j] = gamma_ij`` off the diagonal and ``L[i, i] = -sum_k gamma_ik``,
so it is negative semidefinite for nonnegative weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import connected_components as _components

from .errors import DomainError, RankError


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with nonnegative symmetric edge weights.

    Attributes:
        weights: ``(n, n)`` symmetric array with zero diagonal.
        bands: for circulant graphs, the band weights ``(gamma_1, ..., gamma_K)``;
            ``None`` otherwise.
    """

    weights: np.ndarray
    bands: tuple | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise DomainError("negative edge weights are not supported")
        if not np.allclose(w, w.T, rtol=0, atol=1e-14):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have zero diagonal")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def is_circulant(self) -> bool:
        return self.bands is not None

    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(i, j, w)`` arrays over all ordered pairs with ``gamma_ij > 0``."""
        i, j = np.nonzero(self.weights)
        return i, j, self.weights[i, j]

    @cached_property
    def source_incidence(self) -> np.ndarray:
        """``S[i, e] = 1`` when directed edge ``e`` starts at ``i``; sums edge terms per node."""
        i = self.directed_edges[0]
        S = np.zeros((self.n, i.size))
        S[i, np.arange(i.size)] = 1.0
        return S

    def edges(self) -> list[tuple[int, int, float]]:
        iu, ju = np.nonzero(np.triu(self.weights))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def max_row_sum(self) -> float:
        """``max_i sum_j |gamma_ij|``, the induced infinity norm."""
        return float(np.max(np.sum(np.abs(self.weights), axis=1))) if self.n else 0.0

    def n_components(self) -> int:
        return int(_components(self.weights > 0, directed=False)[0])

    def is_connected(self) -> bool:
        return self.n_components() == 1

    def __eq__(self, other):
        return (isinstance(other, WeightedGraph)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None


@dataclass(frozen=True)
class CirculantSpec:
    """Band weights of a symmetric circulant graph on ``n`` vertices."""

    n: int
    bands: tuple

    def __post_init__(self):
        bands = tuple(float(g) for g in self.bands)
        object.__setattr__(self, "bands", bands)
        if len(bands) == 0 or not any(g > 0 for g in bands):
            raise DomainError("at least one band weight must be positive")
        if any(g < 0 for g in bands):
            raise DomainError("band weights must be nonnegative")
        if len(bands) > self.n // 2:
            raise DomainError(
                f"bandwidth {len(bands)} exceeds floor(n/2) = {self.n // 2}")

    @property
    def K(self) -> int:
        """Bandwidth: index of the last nonzero band."""
        return max(k + 1 for k, g in enumerate(self.bands) if g > 0)


def graph_from_weights(weights) -> WeightedGraph:
    return WeightedGraph(np.asarray(weights, dtype=float))


def graph_from_edges(n: int, edges) -> WeightedGraph:
    w = np.zeros((n, n))
    for i, j, g in edges:
        if i == j:
            raise ValueError("self loops are not allowed")
        w[i, j] = w[j, i] = float(g)
    return WeightedGraph(w)


def circulant(spec: CirculantSpec) -> WeightedGraph:
    """Expand band weights: ``gamma_ij = gamma_k`` with ``k`` the ring distance.

    For even ``n`` the antipodal band ``k = n/2`` connects each vertex to a
    single partner, so it appears once per row.
    """
    n = spec.n
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, n - dist)
    table = np.zeros(n // 2 + 1)
    table[1:len(spec.bands) + 1] = spec.bands
    return WeightedGraph(table[dist], bands=spec.bands)


def circulant_graph(n: int, bands) -> WeightedGraph:
    return circulant(CirculantSpec(n, tuple(bands)))


def strict_bandwidth_graph(n: int, K: int, weight: float = 1.0) -> WeightedGraph:
    """Circulant graph whose only nonzero band is ``K``."""
    return circulant_graph(n, [0.0] * (K - 1) + [weight])


def alpha_bands(alpha: float, n: int) -> tuple:
    """Band weights of the alpha-sequence graph: 1 for ``k < floor(alpha n)``."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    cut = int(np.floor(alpha * n))
    if cut < 2:
        raise DomainError(f"floor(alpha*n) = {cut} leaves no coupled band")
    K = min(cut - 1, n // 2)
    return (1.0,) * K


def alpha_graph(alpha: float, n: int) -> WeightedGraph:
    return circulant_graph(n, alpha_bands(alpha, n))


def laplacian(graph: WeightedGraph) -> np.ndarray:
    w = graph.weights
    return w - np.diag(w.sum(axis=1))


def laplacian_pseudoinverse(graph: WeightedGraph, rel_tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the Laplacian of a connected graph.

    Eigenvalues below ``rel_tol`` times the largest magnitude are treated
    as zero.
    """
    if graph.n and not graph.is_connected():
        raise RankError("Laplacian pseudoinverse needs a connected graph")
    L = laplacian(graph)
    vals, vecs = np.linalg.eigh(L)
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    keep = np.abs(vals) > rel_tol * scale
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return (vecs * inv) @ vecs.T
