"""
A weight that vanishes at the ends of the interval
==================================================

The Schwarz-Christoffel map of the disc onto the equilateral triangle built
on ``I = [-2-C, 2+C]`` sends an arc of the circle onto ``I``. The inverse
of its speed along that arc is a smooth weight on ``I`` that dies off at
both endpoints.
"""

import numpy as np

from ergodic_schrodinger import build_triangle, weight_table

tri = build_triangle(1.0)
print("vertices:", np.round(tri.vertices, 6))
print("Phi at prevertices:", np.round([tri.phi(z) for z in tri.prevertices], 6))

table = weight_table(tri, np.linspace(-3, 3, 13))
print(table.to_text())
