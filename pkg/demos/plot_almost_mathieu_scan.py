"""
Scanning the almost Mathieu operator
====================================

Potential ``2 lambda cos(2 pi x)`` over the golden rotation. At
``lambda = 1`` the exponent vanishes on the (zero-measure) spectrum and is
positive in the gaps; at ``lambda = 3`` it never drops below ``ln 3``.
"""

import numpy as np

from ergodic_schrodinger import Scaled, cosine, lyapunov_spectrum

energies = np.linspace(-5, 5, 41)
for lam in (1.0, 3.0):
    f = Scaled(cosine(), lam)
    gam = np.array([e.value for e in lyapunov_spectrum(f, energies, N=50_000, workers=2)])
    print(f"lambda = {lam}: min gamma = {gam.min():.4f}, max gamma = {gam.max():.4f}")

# ln 3 is the lower bound at lambda = 3
print("ln 3 =", np.log(3.0))
