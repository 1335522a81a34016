"""Estimating M(f), the Lebesgue measure of the zero set of the Lyapunov exponent.

The zero set is approximated by ``{E : gamma_hat(E) < delta_gamma}`` on a grid
of equal cells evaluated at their midpoints, so every estimate is
conditional on the threshold and carries it along.
"""

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .cocycle import DEFAULT_ORBITS, lyapunov_spectrum
from .dynamics import Transformation
from .potentials import (
    MollifierError, Scaled, StepFunction, check_nonperiodic, l1_distance, minimal_n0,
    mollifier_l1_bound, mollify, step_approximate, to_items,
)
from .triangle import build_triangle, weight_table

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class EnergyGrid:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("need hi > lo")
        if self.count < 1:
            raise ValueError("need at least one cell")

    @classmethod
    def for_bound(cls, bound, count=400):
        """Grid on ``I = [-2-C, 2+C]``."""
        return cls(-2.0 - bound, 2.0 + bound, count)

    @property
    def spacing(self):
        return (self.hi - self.lo) / self.count

    @property
    def nodes(self):
        return self.lo + (np.arange(self.count) + 0.5) * self.spacing

    @property
    def length(self):
        return self.hi - self.lo


@dataclass
class MeasureEstimate:
    value: float
    delta_gamma: float
    grid: EnergyGrid
    steps: int
    orbits: int
    seed: int
    gamma: np.ndarray
    std_error: np.ndarray
    unknown: int = 0

    @property
    def below(self):
        return np.isfinite(self.gamma) & (self.gamma < self.delta_gamma)

    def with_threshold(self, delta_gamma):
        """Recount the same gamma table at a different threshold."""
        below = np.isfinite(self.gamma) & (self.gamma < delta_gamma)
        return MeasureEstimate(
            float(self.grid.spacing * below.sum()), float(delta_gamma), self.grid,
            self.steps, self.orbits, self.seed, self.gamma, self.std_error, self.unknown,
        )

    def table(self, comment=None):
        lines = [] if comment is None else [f"# {comment}"]
        lines.append("E,gamma,std_error,below")
        for e, g, s, b in zip(self.grid.nodes, self.gamma, self.std_error, self.below):
            lines.append(f"{e:.12g},{g:.12g},{s:.12g},{int(b)}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "value": self.value,
            "delta_gamma": self.delta_gamma,
            "grid": {"lo": self.grid.lo, "hi": self.grid.hi, "count": self.grid.count},
            "N": self.steps,
            "orbits": self.orbits,
            "seed": self.seed,
            "unknown": self.unknown,
        }


def default_threshold(std_errors):
    """``max(0.05, 5 * median std_error)``."""
    std_errors = np.asarray(std_errors, dtype=float)
    std_errors = std_errors[np.isfinite(std_errors)]
    med = float(np.median(std_errors)) if std_errors.size else 0.0
    return max(DEFAULT_DELTA, 5.0 * med)


def estimate_M(f, grid=None, delta_gamma=None, T=None, N=10**5, orbits=DEFAULT_ORBITS,
               seed=0, workers=1, count=400, margin=1.0):
    """Cell-counting estimate of ``|{E : gamma_f(E) = 0}|``.

    ``grid`` defaults to ``count`` cells on ``[-2-C, 2+C]`` with ``C`` the
    certified sup bound of ``f``. Nodes whose Lyapunov computation fails are
    marked unknown (NaN) and excluded from the count.
    """
    C = f.sup_bound()
    grid = grid or EnergyGrid.for_bound(C, count)
    reach = 2.0 + C + margin
    if grid.lo < -reach or grid.hi > reach:
        raise ValueError(f"grid [{grid.lo}, {grid.hi}] extends beyond [-{reach}, {reach}]")
    if delta_gamma is not None and not delta_gamma > 0:
        raise ValueError("delta_gamma must be positive")
    ests = lyapunov_spectrum(f, grid.nodes, T, N, orbits, seed, workers=workers, strict=False)
    gamma = np.array([np.nan if e is None else e.value for e in ests])
    err = np.array([np.nan if e is None else e.std_error for e in ests])
    unknown = int(np.sum(~np.isfinite(gamma)))
    if unknown:
        warnings.warn(f"{unknown} energy nodes failed and were excluded", RuntimeWarning)
    if delta_gamma is None:
        delta_gamma = default_threshold(err)
    below = np.isfinite(gamma) & (gamma < delta_gamma)
    return MeasureEstimate(
        float(grid.spacing * below.sum()), float(delta_gamma), grid, N, orbits, seed,
        gamma, err, unknown,
    )


def weighted_gap_integral(gamma_new, gamma_ref, weights, spacing, mode="min"):
    """Riemann sum of ``min(gamma_new - gamma_ref, 0) * g`` (or ``max``) over the grid."""
    gamma_new = np.asarray(gamma_new, dtype=float)
    gamma_ref = np.asarray(gamma_ref, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not gamma_new.shape == gamma_ref.shape == weights.shape:
        raise ValueError("gamma tables and weights are not aligned")
    gap = gamma_new - gamma_ref
    if mode == "min":
        gap = np.minimum(gap, 0.0)
    elif mode == "max":
        gap = np.maximum(gap, 0.0)
    else:
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    return float(np.nansum(gap * weights) * spacing)


@dataclass
class Stage:
    name: str
    estimate: MeasureEstimate | None = None
    data: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"name": self.name, **self.data}
        if self.estimate is not None:
            out["measure"] = self.estimate.to_dict()
        return out


@dataclass
class ExperimentReport:
    kind: str
    inputs: dict
    stages: list
    verdicts: dict
    seed: int
    wall_clock: float = 0.0
    result: float | None = None

    def to_dict(self, timing=True):
        out = {
            "kind": self.kind,
            "seed": self.seed,
            "inputs": self.inputs,
            "result": self.result,
            "stages": [s.to_dict() for s in self.stages],
            "verdicts": self.verdicts,
        }
        if timing:
            out["timing"] = {"wall_clock_seconds": self.wall_clock}
        return out

    def to_json(self, timing=True):
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True, default=_jsonable) + "\n"

    def summary(self):
        lines = [f"experiment: {self.kind} (seed={self.seed})"]
        if self.result is not None:
            lines.append(f"result = {self.result:.6g}")
        for s in self.stages:
            parts = [s.name]
            if s.estimate is not None:
                parts.append(f"M_hat = {s.estimate.value:.4f} (delta_gamma={s.estimate.delta_gamma:g})")
            parts += [f"{k}={_fmt(v)}" for k, v in s.data.items()]
            lines.append("  " + "  ".join(parts))
        for k, v in self.verdicts.items():
            lines.append(f"verdict {k}: {'PASS' if v else 'FAIL'}")
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def describe(f):
    return dict(to_items(f))


def coupling_nodes(coupling_max, count):
    """Couplings from ``coupling_max/(2 count)`` to ``coupling_max``; zero is left out."""
    return np.linspace(coupling_max / (2 * count), coupling_max, count)


def coupling_integral(f, coupling_max, n_couplings=16, count=400, delta_gamma=DEFAULT_DELTA,
                      T=None, N=10**5, orbits=DEFAULT_ORBITS, seed=0, workers=1):
    """Trapezoidal estimate of ``int_0^Lambda M(lambda f) dlambda``.

    The panel ``[0, lambda_1]`` is covered by the value at the first node.
    Each coupling gets its own grid on ``[-2-lambda C, 2+lambda C]``.
    Returns ``(value, report)``.
    """
    if not coupling_max > 0:
        raise ValueError("coupling_max must be positive")
    if n_couplings < 2:
        raise ValueError("need at least two coupling nodes")
    t0 = time.perf_counter()
    lams = coupling_nodes(coupling_max, n_couplings)
    stages = []
    values = []
    for lam in lams:
        g = Scaled(f, lam)
        est = estimate_M(g, EnergyGrid.for_bound(g.sup_bound(), count), delta_gamma, T, N,
                         orbits, seed, workers)
        values.append(est.value)
        stages.append(Stage(f"lambda={lam:.6g}", est, {"lambda": float(lam)}))
    values = np.asarray(values)
    total = float(trapezoid(values, lams) + lams[0] * values[0])
    report = ExperimentReport(
        kind="coupling-sweep",
        inputs={"function": describe(f), "coupling_max": coupling_max,
                "n_couplings": n_couplings, "count": count, "delta_gamma": delta_gamma,
                "N": N, "orbits": orbits},
        stages=stages,
        verdicts={"within_interval_bound": bool(
            total <= coupling_max * (4 + 2 * coupling_max * f.sup_bound()) + 1e-12)},
        seed=seed, wall_clock=time.perf_counter() - t0, result=total,
    )
    return total, report


def approximation_experiment(f, k=64, n_schedule=(16, 64, 256, 1024), n0=None, count=400,
                             delta_gamma=DEFAULT_DELTA, T=None, N=10**5,
                             orbits=DEFAULT_ORBITS, seed=0, workers=1, horizon=1000):
    """Step approximation followed by a sequence of mollifications.

    ``f`` is replaced by a perturbed step function ``s`` on ``k`` arcs (a
    step function is used as given). For each ``n`` in the schedule the
    tent-kernel mollification ``f_n`` is built and compared with ``s``:
    L1 distance against its kernel-support bound, M-hat of both, and the
    weighted signed gaps ``int min/max(gamma_{f_n} - gamma_s, 0) g dE``.

    Verdicts are trends only:

    * ``l1_decreasing_within_bound``: ``||s - f_n||_1`` strictly decreases
      and stays below the bound at every stage;
    * ``measure_not_increasing``: the last stage's M-hat exceeds the first
      stage's by at most two grid spacings;
    * ``step_measure_small``: ``M-hat(s) <= |I|/2``.
    """
    T = T or Transformation()
    schedule = [int(n) for n in n_schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    t0 = time.perf_counter()
    if isinstance(f, StepFunction):
        s, step_error = f, 0.0
    else:
        s, step_error = step_approximate(f, k, seed=seed)
    periodic = check_nonperiodic(s, T, horizon, seed=seed)
    n0 = minimal_n0(s) if n0 is None else int(n0)
    C = s.sup_bound()
    grid = EnergyGrid.for_bound(C, count)
    weights = weight_table(build_triangle(C), grid.nodes).weights
    lyap = dict(T=T, N=N, orbits=orbits, seed=seed, workers=workers)

    base = estimate_M(s, grid, delta_gamma, **lyap)
    stages = [Stage("step", base, {"sup_error": float(step_error),
                                   "period": periodic.period})]
    l1s, bounds, measures = [], [], []
    resolution = max(10_000, 20 * (schedule[-1] + n0))
    for n in schedule:
        try:
            fn = mollify(s, n, n0)
        except MollifierError as exc:
            stages.append(Stage(f"n={n}", None, {"n": n, "error": str(exc)}))
            continue
        est = estimate_M(fn, grid, delta_gamma, **lyap)
        l1 = l1_distance(s, fn, resolution)
        bound = mollifier_l1_bound(s, n, n0)
        l1s.append(l1)
        bounds.append(bound)
        measures.append(est.value)
        stages.append(Stage(f"n={n}", est, {
            "n": n, "l1": l1, "l1_bound": bound,
            "gap_min": weighted_gap_integral(est.gamma, base.gamma, weights, grid.spacing, "min"),
            "gap_max": weighted_gap_integral(est.gamma, base.gamma, weights, grid.spacing, "max"),
        }))
    complete = len(l1s) == len(schedule)
    verdicts = {
        "nonperiodic": periodic.period is None,
        "l1_decreasing_within_bound": complete and all(
            b < a for a, b in zip(l1s, l1s[1:])) and all(x <= b for x, b in zip(l1s, bounds)),
        "measure_not_increasing": complete and measures[-1] <= measures[0] + 2 * grid.spacing,
        "step_measure_small": base.value <= 0.5 * grid.length,
    }
    report = ExperimentReport(
        kind="approximation",
        inputs={"function": describe(f), "step": describe(s), "k": k,
                "n_schedule": schedule, "n0": n0, "count": count,
                "delta_gamma": delta_gamma, "N": N, "orbits": orbits, "horizon": horizon},
        stages=stages, verdicts=verdicts, seed=seed,
        wall_clock=time.perf_counter() - t0,
    )
    return report
