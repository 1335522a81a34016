"""
Mean value property in the upper half plane
===========================================

Off the real axis the Lyapunov exponent is harmonic, so its value at a
point equals its average over any circle that stays in the half plane.
"""

import numpy as np

from ergodic_schrodinger import constant, cosine, harmonic_mean_check
from ergodic_schrodinger.halfplane import free_lyapunov

rep = harmonic_mean_check(constant(0.0), 2j, 1.0, K=64, gamma=lambda z: float(free_lyapunov(z)))
print("free case, closed form:", rep)

rep = harmonic_mean_check(cosine(), 0.5 + 1.5j, 1.0, K=32, samples=512)
print("almost Mathieu, simulated:", rep)
