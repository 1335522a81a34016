"""Transfer matrices and Lyapunov exponents from renormalized cocycle products."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import Transformation, canonical

RENORM_CADENCE = 16
DEFAULT_ORBITS = 8


@dataclass(frozen=True)
class LyapunovEstimate:
    """Estimate of the Lyapunov exponent (in nats) at one energy.

    ``value`` is clamped at zero; ``raw`` is the unclamped average.
    ``std_error`` is the sample standard deviation across independent
    orbits (or samples) divided by the square root of their number.
    """

    value: float
    std_error: float
    steps: int
    orbits: int
    energy: complex
    raw: float


def transfer_matrix(f, energy, omega):
    """``[[E - f(w), -1], [1, 0]]`` as a complex 2x2 array."""
    return np.array([[energy - f(omega), -1.0], [1.0, 0.0]], dtype=complex)


def orbit_starts(seed, orbits, dim):
    """Orbit starting points, a function of ``seed`` only."""
    rng = np.random.default_rng(seed)
    return rng.random(orbits) if dim == 1 else rng.random((orbits, dim))


def potential_table(f, T, starts, N):
    """``table[j, n] = f(T^n starts[j])`` for ``n < N``."""
    if f.dim != T.dim:
        raise ValueError(f"function lives on a {f.dim}-torus, transformation on a {T.dim}-torus")
    k = np.arange(N, dtype=float)
    rows = []
    for w in starts:
        if T.dim == 1:
            pts = canonical(w + k * T.alpha[0])
        else:
            pts = canonical(np.asarray(w) + k[:, None] * np.asarray(T.alpha))
        row = np.ascontiguousarray(f(pts), dtype=float)
        if not np.all(np.isfinite(row)):
            raise ValueError("potential has non-finite values along the orbit")
        rows.append(row)
    return np.stack(rows)


def _estimate(table, energy, cadence):
    energy = complex(energy)
    N = table.shape[1]
    if energy.imag == 0.0:
        logs = [_kernels.log_growth_real(row, energy.real, cadence) for row in table]
    else:
        logs = [_kernels.log_growth_complex(row, energy, cadence) for row in table]
    per_orbit = np.asarray(logs) / N
    raw = float(per_orbit.mean())
    if not np.isfinite(raw):
        raise FloatingPointError(f"non-finite Lyapunov estimate at E={energy}")
    err = float(per_orbit.std(ddof=1) / np.sqrt(per_orbit.size)) if per_orbit.size > 1 else np.nan
    return LyapunovEstimate(
        value=max(raw, 0.0), std_error=err, steps=N, orbits=per_orbit.size,
        energy=energy, raw=raw,
    )


def lyapunov_real(f, energy, T=None, N=10**6, orbits=DEFAULT_ORBITS, seed=0,
                  cadence=RENORM_CADENCE):
    """Lyapunov exponent from ``N``-step transfer-matrix products.

    For each of ``orbits`` random starts the product along the forward
    orbit is rescaled to unit Frobenius norm every ``cadence`` steps; the
    logs of the removed scales plus the log of the final norm, divided by
    ``N``, give one estimate per orbit. Works for complex energies too.
    """
    return lyapunov_spectrum(f, [energy], T, N, orbits, seed, cadence=cadence)[0]


def lyapunov_spectrum(f, energies, T=None, N=10**5, orbits=DEFAULT_ORBITS, seed=0,
                      workers=1, cadence=RENORM_CADENCE, strict=True):
    """:func:`lyapunov_real` at many energies sharing the same orbit starts.

    The orbits depend on ``seed`` alone, so results do not depend on
    ``workers`` or on the order in which energies are processed. With
    ``strict=False`` a failing energy yields ``None`` instead of raising.
    """
    if N < 1000:
        raise ValueError("need N >= 1000 steps")
    if orbits < 1:
        raise ValueError("need at least one orbit")
    T = T or Transformation()
    table = potential_table(f, T, orbit_starts(seed, orbits, T.dim), N)
    energies = list(energies)

    def one(e):
        try:
            return _estimate(table, e, cadence)
        except FloatingPointError:
            if strict:
                raise
            return None

    if workers > 1 and len(energies) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, energies))
    return [one(e) for e in energies]
