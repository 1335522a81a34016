"""
m-functions at complex energy
=============================

The pullback ``M_n . i`` settles quickly for ``Im E > 0``. For the zero
potential the limit solves ``m = E - 1/m``; averaging ``ln|m|`` over the
circle gives the Lyapunov exponent, which we compare with the
cocycle-product estimate.
"""

import numpy as np

from ergodic_schrodinger import constant, cosine, lyapunov_complex, lyapunov_real, m_function

m = m_function(constant(0.0), 1j, 0.0)
print("free m(i) =", m, " golden ratio =", (1 + 5**0.5) / 2)

f = cosine()
for E in (1 + 0.1j, 0.5 + 0.2j, 3 + 1j):
    a = lyapunov_complex(f, E, samples=2048)
    b = lyapunov_real(f, E, N=200_000)
    print(f"E = {E}: from m = {a.value:.4f} +- {a.std_error:.4f}, "
          f"from products = {b.value:.4f} +- {b.std_error:.4f}")
