"""Geometry of finite-dimensional l_p spaces.

Points of a space and points of its dual are kept as distinct types so that
the only way to combine them is through :func:`pairing`.  The duality map
``J^p`` (gradient of ``(1/p)||x||_p^p``) sends a :class:`Point` to a
:class:`DualPoint`, and its inverse ``J^q`` of the dual space goes back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceSpec",
    "Point",
    "DualPoint",
    "LinearOperator",
    "pairing",
    "norm_p",
    "dual_norm",
    "duality_map",
    "duality_map_inverse",
    "bregman_distance",
    "adjoint_apply",
    "operator_norm_bound",
]


@dataclass(frozen=True)
class SpaceSpec:
    """Real coordinate space ``R^dim`` with the l_p norm.

    Parameters
    ----------
    dim : int
        Number of coordinates.
    p : float
        Norm exponent, ``2 <= p < inf``.  The dual exponent ``q`` is derived.
    smoothness_const : float, optional
        The q-uniform smoothness constant ``C_q`` of the dual space.  Only
        enters the admissible step-size interval; 1 is exact for ``p = 2``.
    convexity_const : float or None, optional
        The ``tau`` of ``tau ||x-y||^p <= D_p(x, y)``; diagnostic only.
        Defaults to 1/2 when ``p = 2`` and is left unset otherwise.
    """

    dim: int
    p: float = 2.0
    smoothness_const: float = 1.0
    convexity_const: float | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))
        if not (2.0 <= self.p < math.inf):
            raise ValueError(f"p must satisfy 2 <= p < inf, got {self.p!r}")
        if not self.smoothness_const > 0:
            raise ValueError("smoothness_const must be positive")
        if self.convexity_const is None:
            if self.p == 2.0:
                object.__setattr__(self, "convexity_const", 0.5)
        elif not self.convexity_const > 0:
            raise ValueError("convexity_const must be positive when given")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def is_hilbert(self) -> bool:
        return self.p == 2.0

    def point(self, coords) -> Point:
        return Point(coords, self)

    def dual_point(self, coords) -> DualPoint:
        return DualPoint(coords, self)

    def zero(self) -> Point:
        return Point(np.zeros(self.dim), self)


class _Vector:
    __slots__ = ("coords", "space")
    # numpy scalars must defer to our operators instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, coords, space: SpaceSpec):
        arr = np.array(coords, dtype=float).reshape(-1)
        if arr.shape[0] != space.dim:
            raise ValueError(
                f"expected {space.dim} coordinates, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite coordinates: {arr}")
        arr.flags.writeable = False
        self.coords = arr
        self.space = space

    @classmethod
    def _wrap(cls, arr, space):
        # trusted fast path for results of internal arithmetic
        obj = object.__new__(cls)
        arr = np.asarray(arr, dtype=float)
        arr.flags.writeable = False
        obj.coords = arr
        obj.space = space
        return obj

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.space != self.space:
            raise ValueError("operands live in different spaces")

    def __add__(self, other):
        self._check(other)
        return self._wrap(self.coords + other.coords, self.space)

    def __sub__(self, other):
        self._check(other)
        return self._wrap(self.coords - other.coords, self.space)

    def __neg__(self):
        return self._wrap(-self.coords, self.space)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(float(scalar) * self.coords, self.space)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.coords / float(scalar), self.space)

    def __eq__(self, other):
        return (type(other) is type(self) and other.space == self.space
                and np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((type(self).__name__, self.space, self.coords.tobytes()))

    def __len__(self):
        return self.space.dim

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __repr__(self):
        return f"{type(self).__name__}({self.coords.tolist()}, p={self.space.p:g})"


class Point(_Vector):
    """Element of the primal space."""
    __slots__ = ()


class DualPoint(_Vector):
    """Element of the dual of ``space``."""
    __slots__ = ()


def pairing(x: Point, phi: DualPoint) -> float:
    """Dual pairing ``<x, phi>``."""
    if not isinstance(x, Point) or not isinstance(phi, DualPoint):
        raise TypeError("pairing expects (Point, DualPoint)")
    if x.space != phi.space:
        raise ValueError("pairing across different spaces")
    return float(np.dot(x.coords, phi.coords))


def _lp(arr, p):
    if p == 2.0:
        return float(np.linalg.norm(arr))
    a = np.abs(arr)
    m = a.max(initial=0.0)
    if m == 0.0:
        return 0.0
    # scaled to avoid overflow of |x|^p for large p
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def norm_p(x: Point) -> float:
    """l_p norm of ``x`` in its own space."""
    return _lp(x.coords, x.space.p)


def dual_norm(phi: DualPoint) -> float:
    """l_q norm of a dual element."""
    return _lp(phi.coords, phi.space.q)


def _signed_power(arr, e):
    if e == 1.0:
        return np.array(arr, dtype=float)
    return np.sign(arr) * np.abs(arr) ** e


def duality_map(x: Point) -> DualPoint:
    """``J^p x`` with coordinates ``|x_i|^(p-1) sign(x_i)``."""
    return DualPoint._wrap(_signed_power(x.coords, x.space.p - 1.0), x.space)


def duality_map_inverse(phi: DualPoint) -> Point:
    """``J^q phi`` of the dual space, the inverse of :func:`duality_map`."""
    return Point._wrap(_signed_power(phi.coords, phi.space.q - 1.0), phi.space)


def bregman_distance(x: Point, y: Point) -> float:
    """Bregman distance of ``x`` to ``y`` induced by ``(1/p)||.||^p``.

    ``D_p(x, y) = (1/q)||x||^p - <J^p x, y> + (1/p)||y||^p``.  For ``p = 2``
    this is ``||x - y||^2 / 2`` and is evaluated that way to avoid
    cancellation.
    """
    if not isinstance(x, Point) or not isinstance(y, Point):
        raise TypeError("bregman_distance expects two Points")
    if x.space.dim != y.space.dim or x.space.p != y.space.p:
        raise ValueError("dimension mismatch in bregman_distance")
    sp = x.space
    if sp.p == 2.0:
        d = x.coords - y.coords
        return 0.5 * float(np.dot(d, d))
    if np.array_equal(x.coords, y.coords):
        return 0.0
    p, q = sp.p, sp.q
    val =(norm_p(x) ** p / q
           - float(np.dot(_signed_power(x.coords, p - 1.0), y.coords))
           + norm_p(y) ** p / p)
    # the expansion is nonnegative in exact arithmetic
    return max(val, 0.0)


class LinearOperator:
    """Bounded linear map ``A: domain -> codomain`` given by a matrix.

    ``matrix`` has ``codomain.dim`` rows and ``domain.dim`` columns.  The
    adjoint acts between the duals by the transposed matrix.
    """

    def __init__(self, matrix, domain: SpaceSpec, codomain: SpaceSpec,
                 norm_upper_bound: float | None = None):
        m = np.array(matrix, dtype=float)
        if m.ndim == 1:
            m = m.reshape(codomain.dim, domain.dim)
        if m.shape != (codomain.dim, domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not map R^{domain.dim} -> "
                f"R^{codomain.dim}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator matrix has non-finite entries")
        m.flags.writeable = False
        self.matrix = m
        self.domain = domain
        self.codomain = codomain
        if norm_upper_bound is None:
            norm_upper_bound = operator_norm_bound(self)
        elif norm_upper_bound < 0:
            raise ValueError("norm_upper_bound must be nonnegative")
        self.norm_upper_bound = float(norm_upper_bound)

    @classmethod
    def identity(cls, space: SpaceSpec) -> LinearOperator:
        return cls(np.eye(space.dim), space, space)

    def apply(self, x: Point) -> Point:
        if not isinstance(x, Point) or x.space != self.domain:
            raise ValueError("operand is not a Point of the operator domain")
        return Point._wrap(self.matrix @ x.coords, self.codomain)

    __call__ = apply

    def adjoint(self, phi: DualPoint) -> DualPoint:
        return adjoint_apply(self, phi)

    def __repr__(self):
        return (f"LinearOperator({self.matrix.tolist()}, "
                f"R^{self.domain.dim} -> R^{self.codomain.dim})")


def adjoint_apply(A: LinearOperator, phi: DualPoint) -> DualPoint:
    """``A* phi`` for ``phi`` in the dual of the codomain."""
    if not isinstance(phi, DualPoint) or phi.space != A.codomain:
        raise ValueError("operand is not a DualPoint of the codomain dual")
    return DualPoint._wrap(A.matrix.T @ phi.coords, A.domain)


def operator_norm_bound(A) -> float:
    """Upper bound on the induced norm ``||A||`` from l_p1 to l_p2.

    Exact (largest singular value) when both exponents are 2.  Otherwise the
    minimum of two certified bounds is returned: the Riesz-Thorin bound
    ``||A||_1^(1/p) ||A||_inf^(1-1/p)`` (equal exponents only) and the
    comparison bound ``||A||_2 * n^(1/2 - 1/p1)``, valid since
    ``||y||_p2 <= ||y||_2`` for ``p2 >= 2``.
    """
    m = A.matrix
    if not m.size or not np.any(m):
        return 0.0
    p1, p2 = A.domain.p, A.codomain.p
    spectral = float(np.linalg.norm(m, 2))
    if p1 == 2.0 and p2 == 2.0:
        return spectral
    n = A.domain.dim
    bounds = [spectral * n ** (0.5 - 1.0 / p1)]
    if p1 == p2:
        n1 = float(np.abs(m).sum(axis=0).max())
        ninf = float(np.abs(m).sum(axis=1).max())
        bounds.append(n1 ** (1.0 / p1) * ninf ** (1.0 - 1.0 / p1))
    # guard against the last-ulp rounding of the bounds themselves
    return min(bounds) * (1.0 + 1e-12)
