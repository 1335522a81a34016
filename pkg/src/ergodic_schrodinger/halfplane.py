"""Complex energies: Mobius action, m-functions and harmonic diagnostics.

For Im E > 0 the m-function at ``w`` is the limit of ``M_n . i`` with
``M_n = S(T^{-1} w) S(T^{-2} w) ... S(T^{-n} w)``. Each one-step map
``z -> (E - f) - 1/z`` sends the upper half plane strictly into itself, so
``M_n`` maps it onto a nested, shrinking family of discs and the sequence
converges geometrically.

With this limit ``ln|m|`` averages to ``+gamma``, the opposite sign of
``-Re ln m``. :func:`lyapunov_complex` therefore reports the modulus of the
average and keeps the signed average in ``raw``.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cocycle import LyapunovEstimate
from .dynamics import Transformation, canonical, random_points

CHUNK = 256


class MFunctionConvergenceError(RuntimeError):
    """The pullback did not settle within ``max_iter`` steps."""

    def __init__(self, message, last, iterations, last_diff, ratio):
        super().__init__(message)
        self.last = last
        self.iterations = iterations
        self.last_diff = last_diff
        self.ratio = ratio


@dataclass(frozen=True)
class HalfPlanePoint:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not z.imag > 0.0:
            raise ValueError(f"{z} is not in the upper half plane")
        object.__setattr__(self, "z", z)

    def __complex__(self):
        return self.z


def _upper(z):
    return HalfPlanePoint(z).z


def mobius_apply(M, z):
    """``(a z + b) / (c z + d)`` for ``M = [[a, b], [c, d]]`` and ``z`` in the upper half plane."""
    z = _upper(z)
    (a, b), (c, d) = np.asarray(M, dtype=complex)
    den = c * z + d
    if den == 0:
        raise ZeroDivisionError("Mobius denominator vanishes")
    return complex((a * z + b) / den)


def poincare_distance(z, w):
    """Hyperbolic distance in the upper half plane."""
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    return np.arccosh(1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def free_lyapunov(z):
    """Closed form for the zero potential: ``|ln|(z + sqrt(z^2 - 4))/2||``."""
    z = np.asarray(z, dtype=complex)
    w = (z + np.sqrt(z * z - 4.0)) / 2.0
    return np.abs(np.log(np.abs(w)))


@dataclass(frozen=True)
class MIteration:
    """Outcome of one pullback: value, steps, last two step sizes and half-plane violations."""

    value: complex
    iterations: int
    last_diff: float
    prev_diff: float
    violations: int
    converged: bool

    @property
    def ratio(self):
        """Contraction ratio estimate from the last two step sizes."""
        if self.prev_diff == 0 or not np.isfinite(self.prev_diff):
            return np.nan
        return self.last_diff / self.prev_diff


def _check_energy(energy, floor):
    energy = complex(energy)
    if energy.imag < floor:
        raise ValueError(f"need Im E >= {floor:g}, got {energy}")
    return energy


def _backward_values(f, T, omegas, first, count):
    """``f(T^{-(first+k+1)} w)`` for ``k < count``, one row per ``w``."""
    k = -(np.arange(first, first + count, dtype=float) + 1.0)
    if T.dim == 1:
        pts = canonical(np.asarray(omegas)[:, None] + k[None, :] * T.alpha[0])
    else:
        pts = canonical(np.asarray(omegas)[:, None, :] + k[None, :, None] * np.asarray(T.alpha))
    vals = np.ascontiguousarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential has non-finite values along the orbit")
    return vals


def m_iterations(f, energy, omegas, T=None, max_iter=10_000, tol=1e-12):
    """Run the pullback for every point in ``omegas``; returns a list of :class:`MIteration`."""
    T = T or Transformation()
    energy = _check_energy(energy, 1e-6)
    omegas = np.asarray(omegas, dtype=float)
    if T.dim == 1:
        omegas = omegas.reshape(-1)
    else:
        omegas = omegas.reshape(-1, T.dim)
    n = omegas.shape[0]
    states = [_kernels.new_pullback_state() for _ in range(n)]
    active = np.arange(n)
    done = 0
    while active.size and done < max_iter:
        count = min(CHUNK, max_iter - done)
        vals = _backward_values(f, T, omegas[active], done, count)
        still = []
        for row, j in zip(vals, active):
            state, out = states[j]
            if not _kernels.pullback_m(row, energy, tol, state, out):
                still.append(j)
        active = np.asarray(still, dtype=int)
        done += count
    results = []
    for state, out in states:
        results.append(MIteration(
            value=complex(out[0]), iterations=int(out[3].real),
            last_diff=float(out[1].real), prev_diff=float(out[2].real),
            violations=int(out[4].real), converged=bool(out[5].real),
        ))
    return results


def _raise_unconverged(it, energy, tol):
    raise MFunctionConvergenceError(
        f"m-function at E={energy} not converged to {tol:g} after {it.iterations} steps "
        f"(last step {it.last_diff:.3g}, ratio {it.ratio:.3g})",
        last=it.value, iterations=it.iterations, last_diff=it.last_diff, ratio=it.ratio,
    )


def m_function(f, energy, omega, T=None, max_iter=10_000, tol=1e-12):
    """The m-function ``lim M_n . i`` at a single point ``omega``."""
    it = m_iterations(f, energy, [omega], T, max_iter, tol)[0]
    if not it.converged:
        _raise_unconverged(it, energy, tol)
    return it.value


def lyapunov_complex(f, energy, T=None, samples=4096, seed=0, max_iter=10_000, tol=1e-12):
    """Lyapunov exponent at ``Im E > 0`` as the average of ``ln|m_w(E)|`` over random ``w``."""
    T = T or Transformation()
    energy = _check_energy(energy, 1e-4)
    omegas = random_points(np.random.default_rng(seed), samples, T.dim)
    its = m_iterations(f, energy, omegas, T, max_iter, tol)
    for it in its:
        if not it.converged:
            _raise_unconverged(it, energy, tol)
    logs = np.log(np.abs([it.value for it in its]))
    raw = float(logs.mean())
    err = float(logs.std(ddof=1) / np.sqrt(logs.size)) if logs.size > 1 else np.nan
    return LyapunovEstimate(
        value=abs(raw), std_error=err, steps=max(it.iterations for it in its),
        orbits=logs.size, energy=energy, raw=raw,
    )


def forward_iterates(f, energy, omega, T, length, z0=1j):
    """Forward Mobius iteration along the backward orbit; returns the iterates."""
    vals = _backward_values(f, T, np.asarray([omega]), 0, length)[0]
    z = complex(z0)
    out = np.empty(length, dtype=complex)
    e = complex(energy)
    for k in range(length):
        z = (e - vals[k]) - 1.0 / z
        out[k] = z
    return out


def count_halfplane_violations(f, energy, omega, T, steps, z0=1j):
    """Run ``steps`` forward m-iteration steps and count iterates with ``Im z <= 0``."""
    e = _check_energy(energy, 1e-6)
    z = complex(z0)
    bad = 0
    done = 0
    while done < steps:
        count = min(65536, steps - done)
        vals = _backward_values(f, T, np.asarray([omega]), done, count)[0]
        z, b = _kernels.forward_m(vals, e, z)
        bad += b
        done += count
    return bad


@dataclass(frozen=True)
class HarmonicReport:
    center_value: float
    circle_average: float
    discrepancy: float
    points: int


def harmonic_mean_check(f, center, radius, K=64, gamma=None, T=None, samples=4096,
                        seed=0, eta=1e-3):
    """Compare gamma at ``center`` with its K-point trapezoidal average on a circle.

    ``gamma`` is an optional callable ``z -> float`` used in place of
    :func:`lyapunov_complex` (e.g. a closed form).
    """
    center = _upper(center)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if center.imag - radius < eta:
        raise ValueError(f"disc reaches below Im z = {eta:g}; gamma need not be harmonic there")
    if gamma is None:
        def gamma(z):
            return lyapunov_complex(f, z, T, samples=samples, seed=seed).value
    theta = 2 * np.pi * np.arange(K) / K
    ring = center + radius * np.exp(1j * theta)
    mid = float(gamma(center))
    avg = float(np.mean([gamma(z) for z in ring]))
    return HarmonicReport(mid, avg, abs(mid - avg), K)
