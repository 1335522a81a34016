"""Base dynamics: irrational translations of the circle and low-dimensional tori.

Points are numpy arrays with coordinates in [0, 1). A single point of a
d-dimensional torus has shape ``(d,)``; batches have shape ``(n, d)``. On the
circle, plain floats and float arrays of any shape are points.

The invariant measure is always normalized Lebesgue measure, which is ergodic
for the translations accepted by :class:`Transformation`.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

GOLDEN = (5.0**0.5 - 1.0) / 2.0
MAX_DIM = 3
MAX_DENOMINATOR = 10**6


class EmptyOrbitError(ValueError):
    """Raised when an orbit of length zero is requested."""


def canonical(x):
    """Reduce coordinates mod 1 into [0, 1)."""
    y = np.mod(x, 1.0)
    # np.mod(-1e-20, 1.0) == 1.0
    return np.where(y >= 1.0, 0.0, y)


def _looks_rational(a):
    q = Fraction(a).limit_denominator(MAX_DENOMINATOR)
    return abs(a - float(q)) <= 4 * np.spacing(max(abs(a), 1.0))


@dataclass(frozen=True)
class Transformation:
    """Translation ``x -> x + alpha (mod 1)`` on the circle (d=1) or torus (d<=3).

    Angles must lie in (0, 1) and must not be (floating-point images of)
    rationals with denominator up to 10**6, so that the map is not periodic.
    Only each coordinate is tested; rational relations between coordinates
    of a torus vector are the caller's responsibility.
    """

    alpha: tuple = (GOLDEN,)

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if alpha.ndim != 1 or not 1 <= alpha.size <= MAX_DIM:
            raise ValueError(f"translation vector must have 1..{MAX_DIM} entries")
        for a in alpha:
            if not 0.0 < a < 1.0:
                raise ValueError(f"angle {a!r} outside (0, 1)")
            if _looks_rational(float(a)):
                raise ValueError(
                    f"angle {a!r} is a rational with denominator <= {MAX_DENOMINATOR}"
                )
        object.__setattr__(self, "alpha", tuple(float(a) for a in alpha))

    @property
    def dim(self):
        return len(self.alpha)

    @property
    def kind(self):
        return "rotation" if self.dim == 1 else "translation"

    def _vec(self):
        return np.array(self.alpha)

    def apply(self, omega):
        """Return ``T(omega)``."""
        omega = check_points(omega, self.dim)
        return canonical(omega + self._shift(1))

    def inverse_apply(self, omega):
        """Return ``T^{-1}(omega)``."""
        omega = check_points(omega, self.dim)
        return canonical(omega - self._shift(1))

    def iterate(self, omega, k):
        """Return ``T^k(omega)`` for an integer (or integer array) ``k``."""
        omega = check_points(omega, self.dim)
        return canonical(omega + self._shift(k))

    def _shift(self, k):
        if self.dim == 1:
            return np.asarray(k, dtype=float) * self.alpha[0]
        k = np.asarray(k, dtype=float)
        return k[..., None] * self._vec()


def check_points(omega, dim):
    """Validate a point or batch of points for a ``dim``-torus and return an array.

    Circle points may come in arrays of any shape. Torus points must carry
    their ``dim`` coordinates on the last axis.
    """
    omega = np.asarray(omega, dtype=float)
    if dim > 1 and omega.shape[-1:] != (dim,):
        raise ValueError(f"expected points of dimension {dim}, got shape {omega.shape}")
    return omega


def orbit(T, start, length, direction="forward"):
    """Return ``[w, Tw, ..., T^{length-1} w]`` (or backward iterates).

    The k-th point is computed directly as ``start + k*alpha`` mod 1 rather
    than by repeated addition, so the error does not accumulate beyond
    ``k`` ulps of ``alpha``.
    """
    if length < 1:
        raise EmptyOrbitError("orbit length must be at least 1")
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    start = check_points(start, T.dim)
    if start.ndim != (0 if T.dim == 1 else 1):
        raise ValueError("orbit start must be a single point")
    k = np.arange(length)
    if direction == "backward":
        k = -k
    return T.iterate(start, k) if T.dim > 1 else canonical(start + k * T.alpha[0])


def distance(x, y):
    """Torus metric: max over coordinates of the circular distance.

    Scalars are circle points; arrays carry coordinates on the last axis and
    broadcast over leading (batch) axes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x.shape[-1] if x.ndim else 1
    dy = y.shape[-1] if y.ndim else 1
    if dx != dy:
        raise ValueError(f"dimension mismatch: {dx} vs {dy}")
    d = np.abs(x - y) % 1.0
    d = np.minimum(d, 1.0 - d)
    if d.ndim:
        d = d.max(axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def random_points(rng, count, dim):
    """Uniform (normalized Lebesgue) samples on the torus."""
    if dim == 1:
        return rng.random(count)
    return rng.random((count, dim))


def birkhoff_average(h, T, start, length):
    """Orbit average ``(1/N) sum_{n<N} h(T^n start)``."""
    return float(np.mean(h(orbit(T, start, length))))
