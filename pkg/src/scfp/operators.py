"""Fixed-point maps consumed by the solvers, and sampling-based checks.

Every map acts on :class:`~scfp.space.Point` values of one space.  The
constructors cover scalings, box projections, resolvents of affine monotone
operators, resolvents of affine equilibrium bifunctions, and composition.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .projections import BoxSet
from .space import Point, SpaceSpec, bregman_distance, duality_map

__all__ = [
    "FixedPointMap",
    "MonotoneLinearOp",
    "CheckReport",
    "ContractionError",
    "scaling_map",
    "identity_map",
    "projection_map",
    "resolvent_linear",
    "equilibrium_resolvent",
    "compose",
    "check_firmly_nonexpansive_like",
    "check_bregman_quasi_nonexpansive",
]

KINDS = ("identity", "scaling", "metric_projection", "resolvent_linear",
         "equilibrium_resolvent", "composed", "custom")


class ContractionError(RuntimeError):
    """Inner fixed-point iteration of an equilibrium resolvent stalled."""


@dataclass(frozen=True)
class FixedPointMap:
    """Deterministic self-map of a space.

    ``fn`` acts on raw coordinate arrays; :meth:`apply` wraps it for points.
    ``params`` records the constructor arguments so maps can be described
    and serialized.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    known_fixed_point: np.ndarray | None = None
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.known_fixed_point is not None:
            fp = np.array(self.known_fixed_point, dtype=float).reshape(-1)
            moved = float(np.max(np.abs(np.asarray(self.fn(fp), dtype=float) - fp),
                                 initial=0.0))
            if moved > 1e-12:
                raise ValueError(f"declared fixed point moves by {moved:.3e}")
            object.__setattr__(self, "known_fixed_point", fp)

    def apply(self, x: Point) -> Point:
        return Point._wrap(np.asarray(self.fn(x.coords), dtype=float), x.space)

    __call__ = apply

    def is_fixed(self, x: Point, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.apply(x).coords - x.coords), initial=0.0)) <= tol


@dataclass(frozen=True)
class MonotoneLinearOp:
    """Affine operator ``u -> M u + c`` with ``M + M^T`` positive semidefinite.

    Also read as the bifunction ``F(x, y) = <M x + c, y - x>``, which then
    satisfies the usual equilibrium conditions (A1)-(A4).
    """

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.array(self.matrix, dtype=float))
        c = np.array(self.shift, dtype=float).reshape(-1)
        if m.shape[0] != m.shape[1]:
            raise ValueError("monotone operator matrix must be square")
        if c.shape[0] != m.shape[0]:
            raise ValueError("shift length does not match the matrix")
        sym = 0.5 * (m + m.T)
        lam_min = float(np.linalg.eigvalsh(sym).min())
        if lam_min < -1e-10:
            raise ValueError(
                f"M + M^T is not positive semidefinite (min eigenvalue {2 * lam_min:.3e})")
        m.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shift", c)

    @classmethod
    def zero(cls, dim: int) -> MonotoneLinearOp:
        return cls(np.zeros((dim, dim)), np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u + self.shift

    def bifunction(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.dot(self(x), y - x))

    def __eq__(self, other):
        return (isinstance(other, MonotoneLinearOp)
                and np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.shift, other.shift))

    def __hash__(self):
        return hash((self.matrix.tobytes(), self.shift.tobytes()))


def identity_map() -> FixedPointMap:
    return FixedPointMap(lambda x: np.array(x, dtype=float), "identity")


def scaling_map(c: float) -> FixedPointMap:
    """``x -> c x`` for ``0 < c <= 1``; the fixed point is the origin."""
    c = float(c)
    if not 0.0 < c <= 1.0:
        raise ValueError(f"scaling factor must lie in (0, 1], got {c}")
    return FixedPointMap(lambda x: c * x, "scaling", params=(c,))


def projection_map(Q: BoxSet) -> FixedPointMap:
    """Metric projection onto the box ``Q``; its fixed-point set is ``Q``."""
    return FixedPointMap(Q.clip, "metric_projection", params=(Q,))


def resolvent_linear(B: MonotoneLinearOp, mu: float) -> FixedPointMap:
    """Resolvent ``(I + mu B)^-1`` of an affine monotone operator.

    ``apply(x)`` solves ``(I + mu M) u = x - mu c``.  Fixed points are the
    zeros of ``M u + c``.
    """
    mu = float(mu)
    if not mu > 0:
        raise ValueError("mu must be positive")
    n = B.dim
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            factors = lu_factor(np.eye(n) + mu * B.matrix)
        except (LinAlgWarning, ValueError) as exc:  # excluded by monotonicity
            raise ValueError(f"I + mu*M is singular: {exc}") from None
    rhs_shift = mu * B.shift

    def fn(x):
        return lu_solve(factors, x - rhs_shift)

    fixed = np.zeros(n) if not np.any(B.shift) else None
    return FixedPointMap(fn, "resolvent_linear", known_fixed_point=fixed, params=(B, mu))


def equilibrium_resolvent(F: MonotoneLinearOp, C: BoxSet, r: float,
                          tol: float = 1e-12, max_iter: int = 100_000) -> FixedPointMap:
    """Resolvent ``T_r^F`` of the bifunction ``F(x, y) = <M x + c, y - x>``.

    ``apply(x)`` is the unique ``z`` in ``C`` with
    ``<r(M z + c) + z - x, y - z> >= 0`` for all ``y`` in ``C``.  When ``C``
    is the whole space this is the linear system ``(I + r M) z = x - r c``;
    otherwise the projected iteration ``z <- P_C(z - eta G(z))`` is used with
    ``G(z) = (I + r M) z + r c - x``.  ``G`` is strongly monotone with modulus
    ``sigma = 1 + r lambda_min(sym M)`` and Lipschitz with ``L = ||I + r M||``,
    so ``eta = sigma / L^2`` contracts with factor ``sqrt(1 - sigma^2/L^2)``.
    """
    r = float(r)
    if not r > 0:
        raise ValueError("r must be positive")
    n = F.dim
    if C.dim != n:
        raise ValueError("box and bifunction dimensions differ")
    system = np.eye(n) + r * F.matrix
    shift = r * F.shift
    if C.is_whole:
        def fn(x):
            return np.linalg.solve(system, x - shift)
    else:
        sigma = 1.0 + r * float(np.linalg.eigvalsh(0.5 * (F.matrix + F.matrix.T)).min())
        lip = float(np.linalg.norm(system, 2))
        eta = sigma / lip ** 2
        factor = float(np.sqrt(max(0.0, 1.0 - (sigma / lip) ** 2)))

        def fn(x):
            z = C.clip(x)
            for _ in range(max_iter):
                z_new = C.clip(z - eta * (system @ z + shift - x))
                step = float(np.max(np.abs(z_new - z), initial=0.0))
                z = z_new
                if step <= tol * (1.0 - factor) * max(1.0, float(np.max(np.abs(z)))):
                    return z
            raise ContractionError(
                f"equilibrium resolvent did not converge in {max_iter} steps "
                f"(contraction factor {factor:.6g}, r*||M|| = "
                f"{r * float(np.linalg.norm(F.matrix, 2)):.6g})")

    return FixedPointMap(fn, "equilibrium_resolvent", params=(F, C, r))


def compose(outer: FixedPointMap, inner: FixedPointMap) -> FixedPointMap:
    """``x -> outer(inner(x))``."""
    def fn(x):
        return outer.fn(inner.fn(x))
    return FixedPointMap(fn, "composed", params=(outer, inner))


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    worst_value: float
    n_samples: int
    message: str = ""


def _sample_box(domain: BoxSet, n: int, rng, radius: float = 10.0) -> np.ndarray:
    lo = np.where(np.isfinite(domain.lower), domain.lower, -radius)
    hi = np.where(np.isfinite(domain.upper), domain.upper, np.maximum(lo, 0) + radius)
    lo = np.minimum(lo, hi)
    return rng.uniform(lo, hi, size=(n, domain.dim))


def check_firmly_nonexpansive_like(T: FixedPointMap, space: SpaceSpec, domain: BoxSet,
                                   n_samples: int = 1000, seed: int = 0,
                                   tol: float = 1e-10) -> CheckReport:
    """Sample ``<Tx - Ty, J(x - Tx) - J(y - Ty)>`` over pairs from ``domain``.

    Passing means no violation below ``-tol`` was found, not a proof.
    Unbounded sides of ``domain`` are truncated to a radius of 10.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    xs = _sample_box(domain, n_samples, rng)
    ys = _sample_box(domain, n_samples, rng)
    worst = np.inf
    for xc, yc in zip(xs, ys):
        x, y = Point(xc, space), Point(yc, space)
        tx, ty = T(x), T(y)
        val = float(np.dot(tx.coords - ty.coords,
                           duality_map(x - tx).coords - duality_map(y - ty).coords))
        worst = min(worst, val)
    passed = worst >= -tol
    msg = "no violation found" if passed else f"pairing reached {worst:.3e}"
    return CheckReport(passed, worst, n_samples, msg)


def check_bregman_quasi_nonexpansive(T: FixedPointMap, x_star: Point, space: SpaceSpec,
                                     domain: BoxSet, n_samples: int = 1000, seed: int = 0,
                                     tol: float = 1e-10) -> CheckReport:
    """Sample ``D(Tx, x*) <= D(x, x*)``; ``worst_value`` is the largest excess."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if not T.is_fixed(x_star):
        raise ValueError(f"{x_star} is not a fixed point of the map")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for xc in _sample_box(domain, n_samples, rng):
        x = Point(xc, space)
        worst = max(worst, bregman_distance(T(x), x_star) - bregman_distance(x, x_star))
    passed = worst <= tol
    msg = "no violation found" if passed else f"excess reached {worst:.3e}"
    return CheckReport(passed, worst, n_samples, msg)
