"""Closed-form spectra of twist solutions on symmetric circulant graphs.

All formulas assume ``f(x) = x`` and SO(d). For band weights
``gamma_1..gamma_K`` and ``c = 2 pi / n`` the single ``l``-twist has, for
``m = 0..n-1``,

    lambda_{l,m} = 2 sum_k gamma_k cos(c k l) (cos(c k m) - 1)          mult 1
    mu_{l,m}     =   sum_k gamma_k (cos(c k (l+m)) + cos(c k m)
                                    - cos(c k l) - 1)                   mult 2(d-2)
    nu_m         = 2 sum_k gamma_k (cos(c k m) - 1)                     mult (d-2)(d-3)/2

(lambda and nu are eigenvalues of circulant blocks whose off-diagonal
entries carry no factor 1/2, hence the leading 2.) Double twists add the
pair families

    kappa^{+-}_{l1,l2,m} = sum_k gamma_k (cos(c k (l1+m)) + cos(c k (+-l2+m))
                                          - cos(c k l1) - cos(c k l2))   mult 2 each

For even ``n`` the antipodal band ``k = n/2`` joins each vertex to a single
partner and enters every sum with half weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionError, DomainError

SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumEntry:
    family: str
    ls: tuple
    m: int
    value: float
    multiplicity: int


@dataclass
class TwistSpectrum:
    """Labelled eigenvalue list of a twist solution."""

    n: int
    d: int
    entries: list = field(default_factory=list)

    def families(self) -> list[str]:
        return sorted({e.family for e in self.entries})

    def values(self, family: str | None = None) -> np.ndarray:
        return np.array([e.value for e in self.entries
                         if family is None or e.family == family])

    def multiset(self) -> np.ndarray:
        """All eigenvalues repeated by multiplicity, sorted."""
        vals = [e.value for e in self.entries for _ in range(e.multiplicity)]
        return np.sort(np.array(vals))

    def per_m_totals(self) -> np.ndarray:
        totals = np.zeros(self.n, dtype=int)
        for e in self.entries:
            totals[e.m] += e.multiplicity
        return totals

    def max_entry(self) -> SpectrumEntry:
        return max(self.entries, key=lambda e: e.value)


def _bands(gamma, n):
    g = np.asarray(gamma, dtype=float).ravel()
    if g.size == 0:
        raise DomainError("at least one band weight is required")
    if g.size > n // 2:
        raise DomainError(f"bandwidth {g.size} exceeds floor(n/2) = {n // 2}")
    w = g.copy()
    if n % 2 == 0 and g.size == n // 2:
        w[-1] *= 0.5
    k = np.arange(1, g.size + 1)
    return w, k


def _grid(n, k):
    m = np.arange(n)[:, None]
    return m, 2 * np.pi * k[None, :] / n


def lambda_family(gamma, n, ell) -> np.ndarray:
    w, k = _bands(gamma, n)
    m, ck = _grid(n, k)
    return 2 * np.sum(w * np.cos(ck * ell) * (np.cos(ck * m) - 1), axis=1)


def mu_family(gamma, n, ell) -> np.ndarray:
    w, k = _bands(gamma, n)
    m, ck = _grid(n, k)
    return np.sum(w * (np.cos(ck * (ell + m)) + np.cos(ck * m)
                       - np.cos(ck * ell) - 1), axis=1)


def nu_family(gamma, n) -> np.ndarray:
    w, k = _bands(gamma, n)
    m, ck = _grid(n, k)
    return 2 * np.sum(w * (np.cos(ck * m) - 1), axis=1)


def kappa_family(gamma, n, la, lb, sign: int) -> np.ndarray:
    w, k = _bands(gamma, n)
    m, ck = _grid(n, k)
    return np.sum(w * (np.cos(ck * (la + m)) + np.cos(ck * (sign * lb + m))
                       - np.cos(ck * la) - np.cos(ck * lb)), axis=1)


def _append(spec, family, ls, values, mult):
    if mult <= 0:
        return
    for m, v in enumerate(values):
        spec.entries.append(SpectrumEntry(family, ls, m, float(v), mult))


def single_twist_eigs(gamma, n: int, d: int, ell: int) -> TwistSpectrum:
    """Eigenvalues of the linearisation around a single ``ell``-twist."""
    if d < 2:
        raise DimensionError("d must be at least 2")
    spec = TwistSpectrum(n, d)
    _append(spec, "lambda", (ell,), lambda_family(gamma, n, ell), 1)
    _append(spec, "mu", (ell,), mu_family(gamma, n, ell), 2 * (d - 2))
    _append(spec, "nu", (ell,), nu_family(gamma, n), (d - 2) * (d - 3) // 2)
    return spec


def double_twist_eigs(gamma, n: int, d: int, l1: int, l2: int) -> TwistSpectrum:
    """Eigenvalues around a double ``(l1, l2)``-twist; each kappa has multiplicity 2."""
    if d < 4:
        raise DimensionError("double rotations need d >= 4")
    spec = TwistSpectrum(n, d)
    for ell in (l1, l2):
        _append(spec, "lambda", (ell,), lambda_family(gamma, n, ell), 1)
    for ell in (l1, l2):
        _append(spec, "mu", (ell,), mu_family(gamma, n, ell), 2 * (d - 4))
    _append(spec, "nu", (l1, l2), nu_family(gamma, n), (d - 4) * (d - 5) // 2)
    _append(spec, "kappa+", (l1, l2), kappa_family(gamma, n, l1, l2, +1), 2)
    _append(spec, "kappa-", (l1, l2), kappa_family(gamma, n, l1, l2, -1), 2)
    return spec


def higher_twist_kappa(gamma, n: int, la: int, lb: int) -> dict:
    """``kappa^+`` and ``kappa^-`` over ``m = 0..n-1`` for two nonzero windings.

    These are a subset of the spectrum of any twist rotating both planes.
    """
    if la == 0 or lb == 0:
        raise DomainError("both windings must be nonzero")
    return {"+": kappa_family(gamma, n, la, lb, +1),
            "-": kappa_family(gamma, n, la, lb, -1)}


def supports_one_twist(gamma, n: int, d: int = 3, zero_tol: float = SUPPORT_TOL):
    """Whether every eigenvalue family of the 1-twist is nonpositive.

    Returns:
        ``(supported, witness)`` where ``witness`` is the largest entry
        (a :class:`SpectrumEntry`), positive when support fails.
    """
    spec = single_twist_eigs(gamma, n, d, 1)
    top = spec.max_entry()
    return top.value <= zero_tol, top


def _one_twist_mu_coefficients(n: int, K: int) -> np.ndarray:
    """``beta[k-1, m]``: coefficient of ``gamma_k`` in ``mu_{1,m}``."""
    k = np.arange(1, K + 1)[:, None]
    m = np.arange(n)[None, :]
    c = 2 * np.pi / n
    beta = np.cos(c * k * (1 + m)) + np.cos(c * k * m) - np.cos(c * k) - 1
    beta[np.abs(beta) < 1e-13] = 0.0
    return beta


def g_threshold(gamma_tail, n: int) -> float:
    """Smallest nearest-neighbour weight above which 1-twists are supported.

    ``gamma_tail`` holds ``(gamma_2, ..., gamma_K)``; requires ``K < n/4``.
    The threshold is the maximum over ``m`` of
    ``-(sum_{k>=2} gamma_k beta_{k,m}) / beta_{1,m}``, a piecewise linear
    function of the tail weights.
    """
    tail = np.asarray(gamma_tail, dtype=float).ravel()
    K = tail.size + 1
    if not K < n / 4:
        raise DomainError(f"bandwidth {K} must be below n/4 = {n / 4}")
    beta = _one_twist_mu_coefficients(n, K)
    m = np.arange(1, n - 1)
    b1 = beta[0, m]
    rest = tail @ beta[1:, m] if tail.size else np.zeros(m.size)
    return float(np.max(-rest / b1))


def rho_star(n: int) -> float:
    """Critical ratio ``gamma_1 / gamma_2`` for next-nearest-neighbour graphs.

    Zero for even ``n``; close to ``(pi/n)^2`` for large odd ``n``.
    """
    if n < 5:
        raise DomainError("rho_star is defined for n >= 5")
    beta = _one_twist_mu_coefficients(n, 2)
    m = np.arange(1, n - 1)
    ratios = -beta[1, m] / beta[0, m]
    return float(max(0.0, np.max(ratios)))


def rho_star_argmax(n: int) -> int:
    beta = _one_twist_mu_coefficients(n, 2)
    m = np.arange(1, n - 1)
    return int(m[np.argmax(-beta[1, m] / beta[0, m])])


def twist_integrals(alpha: float, m: int) -> tuple[float, float]:
    """Closed forms of the continuum limits of the lambda and mu sums.

        I_m(a) = int_0^{2 pi a} cos x (cos(m x) - 1) dx
        J_m(a) = int_0^{2 pi a} cos((m+1) x) + cos(m x) - cos x - 1 dx
    """
    if not 0 < alpha <= 0.5:
        raise DomainError("alpha must lie in (0, 1/2]")
    s1 = np.sin(2 * np.pi * alpha)
    mm = abs(m)
    if mm == 0:
        I = 0.0
    elif mm == 1:
        I = np.pi * alpha - s1 + 0.25 * np.sin(4 * np.pi * alpha)
    else:
        c1 = np.cos(2 * np.pi * alpha)
        I = (-s1 + mm / (mm * mm - 1) * c1 * np.sin(2 * np.pi * mm * alpha)
             - s1 * np.cos(2 * np.pi * mm * alpha) / (mm * mm - 1))
    if m in (0, -1):
        J = 0.0
    else:
        J = (np.sin(2 * np.pi * alpha * (m + 1)) / (m + 1)
             + np.sin(2 * np.pi * alpha * m) / m - s1 - 2 * np.pi * alpha)
    return float(I), float(J)


def alpha_star(tol: float = 1e-12) -> float:
    """First positive root of ``I_1``, bracketed in (0.25, 0.45)."""
    if tol < 1e-12:
        raise DomainError("tol must be at least 1e-12")

    def I1(a):
        return twist_integrals(a, 1)[0]

    root = brentq(I1, 0.25, 0.45, xtol=tol / 10, rtol=4 * np.finfo(float).eps)
    assert abs(I1(root)) <= tol
    return float(root)
