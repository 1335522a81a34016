"""
Lyapunov exponent of the free Laplacian
=======================================

With the zero potential every transfer matrix is the same, so the exponent
is the log of its spectral radius: zero inside [-2, 2] and
``arccosh(|E|/2)`` outside.
"""

import numpy as np

from ergodic_schrodinger import constant, lyapunov_spectrum

energies = np.linspace(-4, 4, 17)
ests = lyapunov_spectrum(constant(0.0), energies, N=100_000)

exact = np.arccosh(np.maximum(np.abs(energies) / 2, 1.0))
for e, est, g in zip(energies, ests, exact):
    print(f"E = {e:5.2f}   gamma_hat = {est.value:.5f}   exact = {g:.5f}")
