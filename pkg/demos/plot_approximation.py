"""
Step functions, mollification and the zero set
==============================================

A two-valued step potential over the golden rotation is non-periodic, so
its Lyapunov exponent is positive almost everywhere. Its tent-kernel
mollifications converge in L1, and their zero sets do not grow along the
way. A short run (N = 1e5) shows the trend; the acceptance suite repeats it
at N = 1e6.
"""

from ergodic_schrodinger import StepFunction, approximation_experiment, perturb

s = perturb(StepFunction((0.0, 0.5), (0.0, 1.5)), seed=0)
report = approximation_experiment(s, n_schedule=(16, 64, 256), count=200, N=100_000)
print(report.summary())
