"""Compiled inner loops. Everything here works on plain arrays of potential values."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def log_growth_real(pot, energy, cadence):
    """log of the Frobenius norm of ``prod_k [[E - pot[k], -1], [1, 0]]`` for real E."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    acc = 0.0
    for k in range(pot.shape[0]):
        x = energy - pot[k]
        a, b, c, d = x * a - c, x * b - d, a, b
        if (k + 1) % cadence == 0:
            s = math.sqrt(a * a + b * b + c * c + d * d)
            acc += math.log(s)
            a /= s
            b /= s
            c /= s
            d /= s
    return acc + 0.5 * math.log(a * a + b * b + c * c + d * d)


@njit(cache=True, nogil=True)
def log_growth_complex(pot, energy, cadence):
    """Same as :func:`log_growth_real` with complex energy."""
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    acc = 0.0
    for k in range(pot.shape[0]):
        x = energy - pot[k]
        a, b, c, d = x * a - c, x * b - d, a, b
        if (k + 1) % cadence == 0:
            s = math.sqrt(abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)
            acc += math.log(s)
            a /= s
            b /= s
            c /= s
            d /= s
    return acc + 0.5 * math.log(abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)


@njit(cache=True, nogil=True)
def pullback_m(pot, energy, tol, state, out):
    """Continue the pullback ``M_n = M_{n-1} S(T^{-n} w)`` and track ``z_n = M_n . i``.

    ``pot[k]`` is ``f(T^{-(n0+k+1)} w)`` where ``n0`` steps were done before.
    ``state`` holds the running matrix ``(a, b, c, d)`` normalized to unit
    Frobenius norm. ``out`` holds ``(z, last diff, previous diff, steps,
    violations, converged)`` and is updated in place.
    Returns True once ``|z_n - z_{n-1}| < tol``.
    """
    a, b, c, d = state[0], state[1], state[2], state[3]
    z = out[0]
    diff = out[1].real
    prev = out[2].real
    steps = int(out[3].real)
    bad = int(out[4].real)
    done = False
    for k in range(pot.shape[0]):
        x = energy - pot[k]
        # right-multiply by [[x, -1], [1, 0]]
        a, b, c, d = a * x + b, -a, c * x + d, -c
        s = math.sqrt(abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)
        a /= s
        b /= s
        c /= s
        d /= s
        znew = (a * 1j + b) / (c * 1j + d)
        steps += 1
        if not znew.imag > 0.0:
            bad += 1
        prev = diff
        diff = abs(znew - z)
        z = znew
        if diff < tol:
            done = True
            break
    state[0], state[1], state[2], state[3] = a, b, c, d
    out[0] = z
    out[1] = diff
    out[2] = prev
    out[3] = steps
    out[4] = bad
    out[5] = 1.0 if done else 0.0
    return done


@njit(cache=True, nogil=True)
def forward_m(pot, energy, z0):
    """Forward iteration ``z -> (E - pot[k]) - 1/z``; returns the final iterate and
    the number of steps whose iterate left the upper half plane."""
    z = z0
    bad = 0
    for k in range(pot.shape[0]):
        z = (energy - pot[k]) - 1.0 / z
        if not z.imag > 0.0:
            bad += 1
    return z, bad


def new_pullback_state():
    state = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128)
    out = np.zeros(6, dtype=np.complex128)
    out[0] = 1j
    out[1] = np.inf
    out[2] = np.inf
    return state, out
