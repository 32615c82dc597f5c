"""Matrix Lie group and Lie algebra primitives.

Group elements and algebra elements are plain numpy arrays. A single
configuration of ``n`` oscillators is an ``(n, d, d)`` array. The
:class:`MatrixGroup` descriptor carries everything that depends on which
group the matrices live in: membership tests, inversion, the exponential,
and the projection used to repair integrator drift.

Supported groups:

* ``SO(d)``: real orthogonal matrices with unit determinant, algebra of
  skew-symmetric matrices. Full feature set.
* ``U(1)``: unit complex numbers stored as ``1x1`` complex matrices.
* ``generic``: any matrix group with the Lohe closure property, described by
  a caller-supplied algebra predicate. Simulation only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, NumericError, RetractionError

CLOSURE_TOL = 1e-9


def _fro(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


@dataclass(frozen=True)
class MatrixGroup:
    """Descriptor of a matrix Lie group with the Lohe closure property.

    Use the :func:`SO`, :func:`U1` and :func:`generic_group` constructors
    rather than building instances directly.
    """

    tag: str
    d: int
    algebra_predicate: Optional[Callable[[np.ndarray, float], bool]] = field(
        default=None, compare=False, repr=False)
    group_predicate: Optional[Callable[[np.ndarray, float], bool]] = field(
        default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.tag not in ("so", "u1", "generic"):
            raise ValueError(f"unknown group tag {self.tag!r}")
        if self.tag == "so" and self.d < 2:
            raise DimensionError("SO(d) needs d >= 2")
        if self.tag == "u1" and self.d != 1:
            raise DimensionError("U(1) is represented by 1x1 matrices")
        if self.tag == "generic" and self.algebra_predicate is None:
            raise ValueError("generic groups need an algebra predicate")

    @property
    def dtype(self):
        return np.complex128 if self.tag == "u1" else np.float64

    @property
    def algebra_dim(self) -> int:
        if self.tag == "so":
            return self.d * (self.d - 1) // 2
        if self.tag == "u1":
            return 1
        raise NotImplementedError("no basis is known for a generic group")

    def identity(self) -> np.ndarray:
        return np.eye(self.d, dtype=self.dtype)

    def in_algebra(self, Q: np.ndarray, tol: float = 1e-12) -> bool:
        Q = np.asarray(Q)
        if Q.shape[-2:] != (self.d, self.d):
            return False
        if not np.all(np.isfinite(Q)):
            return False
        if self.tag == "so":
            return bool(np.all(_fro(Q + np.swapaxes(Q, -1, -2)) <= tol))
        if self.tag == "u1":
            return bool(np.all(np.abs(np.real(Q)) <= tol))
        return bool(self.algebra_predicate(Q, tol))

    def drift(self, X: np.ndarray) -> float:
        """Largest violation of the defining relation over a stack of matrices."""
        X = np.asarray(X)
        if self.tag == "so":
            XtX = np.swapaxes(X, -1, -2) @ X
            return float(np.max(_fro(XtX - np.eye(self.d))))
        if self.tag == "u1":
            return float(np.max(np.abs(np.abs(X) - 1.0)))
        return 0.0

    def in_group(self, G: np.ndarray, tol: float = CLOSURE_TOL) -> bool:
        G = np.asarray(G)
        if G.shape[-2:] != (self.d, self.d) or not np.all(np.isfinite(G)):
            return False
        if self.tag == "so":
            return self.drift(G) <= tol and bool(np.all(np.linalg.det(G) > 0))
        if self.tag == "u1":
            return self.drift(G) <= tol
        if self.group_predicate is not None:
            return bool(self.group_predicate(G, tol))
        return bool(np.all(np.abs(np.linalg.det(G)) > 0))

    def inv(self, G: np.ndarray) -> np.ndarray:
        """Inverse of one matrix or a stack of matrices."""
        if self.tag == "so":
            return np.swapaxes(G, -1, -2)
        if self.tag == "u1":
            return np.conj(G)
        try:
            return np.linalg.inv(G)
        except np.linalg.LinAlgError as exc:
            raise NumericError("singular group element") from exc

    def exp(self, Q: np.ndarray) -> np.ndarray:
        return exp_map(Q, self)

    def retract(self, X: np.ndarray) -> np.ndarray:
        return retract_to_group(X, self)


def SO(d: int) -> MatrixGroup:
    return MatrixGroup("so", d)


def U1() -> MatrixGroup:
    return MatrixGroup("u1", 1)


def generic_group(d, algebra_predicate, group_predicate=None) -> MatrixGroup:
    """A Lohe-closed matrix group known only through membership predicates.

    Both predicates take ``(matrix_or_stack, tol)`` and return a bool.
    """
    return MatrixGroup("generic", d, algebra_predicate, group_predicate)


def group_from_tag(tag: str, d: int) -> MatrixGroup:
    if tag == "so":
        return SO(d)
    if tag == "u1":
        return U1()
    if tag == "gl":
        # noncompact: every real matrix is in the algebra, so flows can blow up
        return generic_group(d, lambda Q, tol: bool(np.all(np.isreal(Q))))
    raise ValueError(f"group tag {tag!r} cannot be built from a name alone")


# --------------------------------------------------------------------------
# Canonical rotations and the so(d) basis
# --------------------------------------------------------------------------

def canonical_twist(angles, d: int) -> np.ndarray:
    """Block-diagonal rotation ``Tw(theta_1, ..., theta_z)`` in SO(d).

    ``z = d // 2`` planes (0,1), (2,3), ... are rotated by the given angles;
    for odd ``d`` the last coordinate is left fixed.
    """
    if d < 2:
        raise DimensionError("canonical rotations need d >= 2")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.shape != (d // 2,):
        raise DimensionError(
            f"expected {d // 2} angles for d={d}, got {angles.shape[0]}")
    T = np.eye(d)
    for q, theta in enumerate(angles):
        c, s = np.cos(theta), np.sin(theta)
        T[2 * q:2 * q + 2, 2 * q:2 * q + 2] = [[c, -s], [s, c]]
    return T


def elementary_skew(d: int, i: int, j: int) -> np.ndarray:
    """``M_ij``: +1 at (i, j), -1 at (j, i), zero elsewhere (0-indexed)."""
    M = np.zeros((d, d))
    M[i, j] = 1.0
    M[j, i] = -1.0
    return M


@dataclass(frozen=True)
class SoBasis:
    """Ordered basis of so(d) made of elementary skew matrices.

    Attributes:
        d: matrix size.
        pairs: the 0-indexed ``(i, j)`` of each basis element, ``i < j``.
        matrices: ``(len(pairs), d, d)`` stack.
    """

    d: int
    pairs: tuple
    matrices: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.pairs)

    def labels(self) -> list[str]:
        return [f"M{i + 1}{j + 1}" for i, j in self.pairs]


def so_basis(d: int) -> SoBasis:
    """Basis ordered as M12, (M13, M23), (M14, M24), ..., then M_ij, 3 <= i < j.

    This grouping keeps the plane of a single rotation first, then the
    pairs mixed by that rotation, then the block it leaves untouched.
    """
    if d < 2:
        raise DimensionError("so(d) needs d >= 2")
    pairs = [(0, 1)]
    for q in range(2, d):
        pairs += [(0, q), (1, q)]
    for i in range(2, d):
        for j in range(i + 1, d):
            pairs.append((i, j))
    mats = np.stack([elementary_skew(d, i, j) for i, j in pairs])
    mats.setflags(write=False)
    return SoBasis(d, tuple(pairs), mats)


def algebra_coords(Q: np.ndarray, basis: SoBasis) -> np.ndarray:
    """Coordinates of ``Q`` (or a stack of them) in ``basis``.

    Basis elements are Frobenius-orthogonal with squared norm 2, so each
    coordinate is a scaled inner product.
    """
    Q = np.asarray(Q)
    if Q.shape[-2:] != (basis.d, basis.d):
        raise DimensionError("matrix size does not match the basis")
    idx_i = np.array([p[0] for p in basis.pairs])
    idx_j = np.array([p[1] for p in basis.pairs])
    return 0.5 * (Q[..., idx_i, idx_j] - Q[..., idx_j, idx_i])


def coords_to_algebra(x: np.ndarray, basis: SoBasis) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(basis):
        raise DimensionError("coordinate vector does not match the basis")
    return np.tensordot(x, basis.matrices, axes=([-1], [0]))


# --------------------------------------------------------------------------
# Exponential, closure test, retraction
# --------------------------------------------------------------------------

def _rodrigues(Q: np.ndarray) -> np.ndarray:
    theta = np.sqrt(0.5 * np.sum(Q * Q, axis=(-2, -1)))
    small = theta < 1e-4
    th = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(th) / th)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0,
                 (1.0 - np.cos(th)) / (th * th))
    QQ = Q @ Q
    return np.eye(3) + a[..., None, None] * Q + b[..., None, None] * QQ


def exp_map(Q: np.ndarray, group: Optional[MatrixGroup] = None) -> np.ndarray:
    """Matrix exponential of one algebra element or a stack of them.

    Uses scaling and squaring with a Pade approximant in general, the
    Rodrigues formula for so(3), and the scalar exponential for u(1).
    """
    Q = np.asarray(Q)
    if not np.all(np.isfinite(Q)):
        raise NumericError("non-finite entries in exp_map argument")
    if Q.shape[-1] == 1 and np.iscomplexobj(Q):
        return np.exp(Q)
    if group is not None and group.tag == "so" and group.d == 3:
        return _rodrigues(Q)
    return expm(Q)


def check_lohe_closure(Z: np.ndarray, group: MatrixGroup,
                       tol: float = CLOSURE_TOL) -> bool:
    """Whether ``Z - Z^{-1}`` lies in the group's algebra within ``tol``.

    The inverse is computed generically here (not through the group's
    shortcut), so the test is meaningful for matrices outside the group.
    """
    Z = np.asarray(Z)
    try:
        Zinv = np.linalg.inv(Z)
    except np.linalg.LinAlgError as exc:
        raise NumericError("singular matrix in closure check") from exc
    return group.in_algebra(Z - Zinv, tol)


def retract_to_group(X: np.ndarray, group: MatrixGroup) -> np.ndarray:
    """Project a matrix (or stack) back onto the group.

    For SO(d) this is the orthogonal polar factor, with the sign of the
    smallest singular direction flipped if needed to keep ``det > 0``.
    Generic groups are returned unchanged.
    """
    X = np.asarray(X)
    if group.tag == "u1":
        mag = np.abs(X)
        if np.any(mag < 1e-12):
            raise RetractionError("cannot normalise a zero U(1) element")
        return X / mag
    if group.tag == "generic":
        return X.copy()
    U, s, Vt = np.linalg.svd(X)
    if np.any(s[..., -1] <= 1e-12 * np.maximum(s[..., 0], 1e-300)):
        raise RetractionError("rank-deficient matrix cannot be retracted")
    R = U @ Vt
    det = np.linalg.det(R)
    if np.any(det < 0):
        flip = np.ones(s.shape)
        flip[..., -1] = np.where(det < 0, -1.0, 1.0)
        R = (U * flip[..., None, :]) @ Vt
    return R
