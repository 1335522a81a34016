"""Conformal map of the unit disc onto the equilateral triangle erected on I = [-2-C, 2+C].

The map is the Schwarz-Christoffel integral

    Phi(z) = Phi(0) + K * int_0^z prod_j (1 - t/z_j)^(-2/3) dt

with prevertices at the cube roots of ``-i`` rotated so that the apex
prevertex is ``i``: the left and right base vertices come from
``exp(-5i pi/6)`` and ``exp(-i pi/6)``, and the base arc runs through ``-i``.
With this choice the construction is symmetric under ``z -> -conj(z)`` and
``Phi(0)`` is the centroid.

On the base arc ``Phi`` is real and increasing, so ``dE/dtheta = |Phi'|``
there; the weight ``g(E) = 1/|Phi'(Phi^{-1}(E))|`` is computed from that
arc-length parametrization.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

EXPONENT = -2.0 / 3.0
PATH_TOL = 1e-8
THETA_LEFT = -5 * np.pi / 6
THETA_RIGHT = -np.pi / 6
THETA_APEX = np.pi / 2


class QuadratureError(RuntimeError):
    pass


def _quad(func, a, b, **kw):
    val, err = integrate.quad(func, a, b, epsabs=1e-14, epsrel=1e-13, limit=400,
                              full_output=True, **kw)[:2]
    if abs(err) > PATH_TOL:
        raise QuadratureError(f"quadrature error estimate {abs(err):.3g} exceeds {PATH_TOL:g}")
    return val


def _radial_integral(z, prevertices):
    """``int_0^z prod_j (1 - t/z_j)^(-2/3) dt`` along the segment [0, z].

    Substituting ``t = z (1 - u^3)`` turns the endpoint singularity at a
    prevertex into a bounded integrand; the factors ``1 - t/z_j`` are formed
    as ``(1 - z/z_j) + u^3 z/z_j`` so no cancellation occurs near ``u = 0``.
    """
    z = complex(z)
    if z == 0:
        return 0j
    ratio = [z / zj for zj in prevertices]
    base = [0j if abs(1 - r) < 1e-15 else 1 - r for r in ratio]

    def integrand(u):
        u3 = u ** 3
        val = 3.0 * u * u
        for b0, r in zip(base, ratio):
            val = val * (b0 + u3 * r) ** EXPONENT
        return val

    re = _quad(lambda u: integrand(u).real, 0.0, 1.0)
    im = _quad(lambda u: integrand(u).imag, 0.0, 1.0)
    return z * complex(re, im)


def _arc_factors(theta, thetas):
    """``prod_j |1 - e^{i theta}/z_j|^(-2/3)`` using ``|1 - e^{i d}| = 2|sin(d/2)|``."""
    out = 1.0
    for tj in thetas:
        out = out * (2.0 * np.abs(np.sin((theta - tj) / 2.0))) ** EXPONENT
    return out


@dataclass(frozen=True)
class ConformalTriangle:
    bound: float
    prevertices: tuple
    vertices: tuple
    scale: complex
    center: complex

    @property
    def half_width(self):
        return 2.0 + self.bound

    @property
    def side(self):
        return 2.0 * self.half_width

    def phi(self, z):
        """``Phi(z)`` for ``|z| <= 1`` by radial quadrature."""
        return self.center + self.scale * _radial_integral(z, self.prevertices)

    def dphi(self, z):
        """``Phi'(z)`` from the product formula."""
        z = np.asarray(z, dtype=complex)
        out = self.scale * np.ones_like(z)
        for zj in self.prevertices:
            out = out * (1 - z / zj) ** EXPONENT
        return out

    def _arc_speed(self, theta):
        return abs(self.scale) * _arc_factors(theta, (THETA_LEFT, THETA_RIGHT, THETA_APEX))

    def _arc_speed_regular(self, theta, vertex):
        """Arc speed times ``|theta - vertex|^(2/3)``, smooth at ``vertex``."""
        others = [t for t in (THETA_LEFT, THETA_RIGHT, THETA_APEX) if t != vertex]
        d = (theta - vertex) / (2 * np.pi)
        return abs(self.scale) * np.sinc(d) ** EXPONENT * _arc_factors(theta, others)

    def base_energy(self, theta):
        """``Phi(e^{i theta})`` (real) for theta on the base arc.

        Integrates the arc speed from the nearer base prevertex with the
        ``|theta - theta_j|^(-2/3)`` endpoint weight handled exactly.
        """
        if not THETA_LEFT <= theta <= THETA_RIGHT:
            raise ValueError("theta outside the base arc")
        if theta <= (THETA_LEFT + THETA_RIGHT) / 2:
            part = _quad(self._arc_speed_regular, THETA_LEFT, theta, weight="alg",
                         wvar=(EXPONENT, 0.0), args=(THETA_LEFT,)) if theta > THETA_LEFT else 0.0
            return -self.half_width + part
        part = _quad(self._arc_speed_regular, theta, THETA_RIGHT, weight="alg",
                     wvar=(0.0, EXPONENT), args=(THETA_RIGHT,)) if theta < THETA_RIGHT else 0.0
        return self.half_width - part

    def base_theta(self, energy, xtol=1e-12):
        """Inverse of :meth:`base_energy` by bracketed root finding."""
        if not -self.half_width < energy < self.half_width:
            raise ValueError(f"E={energy} is not inside I = [-{self.half_width}, {self.half_width}]")
        return optimize.brentq(lambda t: self.base_energy(t) - energy,
                               THETA_LEFT, THETA_RIGHT, xtol=xtol, rtol=4 * np.finfo(float).eps)


def build_triangle(bound):
    """Schwarz-Christoffel data for the equilateral triangle on ``[-2-C, 2+C]``."""
    if bound < 0:
        raise ValueError("sup bound must be non-negative")
    half = 2.0 + float(bound)
    left, right, apex = (np.exp(1j * t) for t in (THETA_LEFT, THETA_RIGHT, THETA_APEX))
    prevertices = (complex(left), complex(right), complex(apex))
    vertices = (complex(-half), complex(half), complex(0.0, half * np.sqrt(3.0)))
    g_left = _radial_integral(left, prevertices)
    g_right = _radial_integral(right, prevertices)
    scale = (vertices[1] - vertices[0]) / (g_right - g_left)
    center = vertices[0] - scale * g_left
    return ConformalTriangle(float(bound), prevertices, vertices, complex(scale), complex(center))


def sc_weight(tri, energy):
    """``g(E) = 1 / |Phi'(Phi^{-1}(E))|`` for E strictly inside I."""
    theta = tri.base_theta(float(energy))
    return 1.0 / tri._arc_speed(theta)


@dataclass(frozen=True)
class WeightTable:
    energies: np.ndarray
    weights: np.ndarray

    def to_text(self):
        lines = ["# energy,g"]
        lines += [f"{e:.12g},{g:.12g}" for e, g in zip(self.energies, self.weights)]
        return "\n".join(lines) + "\n"


def weight_table(tri, energies):
    """Weights on a set of energies; nodes outside the open interval I get weight 0."""
    energies = np.asarray(energies, dtype=float)
    inside = np.abs(energies) < tri.half_width
    weights = np.zeros_like(energies)
    weights[inside] = [sc_weight(tri, e) for e in energies[inside]]
    return WeightTable(energies, weights)
