"""Numerical laboratory for one-dimensional ergodic Schrodinger operators.

Lyapunov exponents at real and complex energies, m-functions, the measure
of the zero set of the Lyapunov exponent, and the step-function plus
mollification approximation experiments built on them.
"""

from .cocycle import LyapunovEstimate, lyapunov_real, lyapunov_spectrum, transfer_matrix
from .dynamics import GOLDEN, Transformation, distance, orbit
from .halfplane import (
    harmonic_mean_check, lyapunov_complex, m_function, mobius_apply,
)
from .measure import (
    EnergyGrid, MeasureEstimate, approximation_experiment, coupling_integral, estimate_M,
    weighted_gap_integral,
)
from .potentials import (
    Mollified, Scaled, StepFunction, TrigPoly, check_nonperiodic, constant, cosine,
    l1_distance, mollify, perturb, step_approximate,
)
from .triangle import build_triangle, sc_weight, weight_table

__version__ = "0.1.0"
