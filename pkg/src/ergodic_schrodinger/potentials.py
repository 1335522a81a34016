"""Sampling functions f on the torus that generate potentials V(n) = f(T^n w).

Four variants are provided, all immutable and vectorized over batches of
points:

* :class:`TrigPoly`: additive trigonometric polynomial, one series per axis
* :class:`StepFunction`: piecewise constant on arcs of the circle
* :class:`Mollified`: a step function averaged against a tent kernel
* :class:`Scaled`: ``factor * inner``

``sup_bound`` returns a certified bound, derived from the representation and
never from sampling.
"""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import canonical, check_points, orbit

GAUSS_NODE = 1.0 / np.sqrt(3.0)
PERTURBATION = 1e-9


class MollifierError(ValueError):
    """The tent kernel is too wide for the arcs of the step function."""


class SamplingFunction:
    dim = 1

    def __call__(self, omega):
        omega = check_points(omega, self.dim)
        out = self._eval(omega)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, omega):
        raise NotImplementedError

    def sup_bound(self):
        raise NotImplementedError

    def lipschitz_bound(self):
        """Bound on the Lipschitz constant w.r.t. the torus metric (inf if discontinuous)."""
        raise NotImplementedError

    @property
    def continuous(self):
        return np.isfinite(self.lipschitz_bound())


def _as_rows(coeffs):
    rows = tuple(tuple(float(c) for c in np.atleast_1d(row)) for row in coeffs)
    return rows


@dataclass(frozen=True)
class TrigPoly(SamplingFunction):
    """``constant + sum_axis sum_k cos[axis][k-1] cos(2 pi k x) + sin[axis][k-1] sin(2 pi k x)``."""

    constant: float = 0.0
    cos: tuple = ((),)
    sin: tuple = ((),)

    def __post_init__(self):
        cos, sin = _as_rows(self.cos), _as_rows(self.sin)
        dim = max(len(cos), len(sin), 1)
        cos = cos + ((),) * (dim - len(cos))
        sin = sin + ((),) * (dim - len(sin))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "cos", cos)
        object.__setattr__(self, "sin", sin)

    @property
    def dim(self):
        return len(self.cos)

    def _eval(self, omega):
        out = np.full(np.shape(omega)[: (np.ndim(omega) if self.dim == 1 else -1)], self.constant)
        for axis in range(self.dim):
            x = omega if self.dim == 1 else omega[..., axis]
            for k, c in enumerate(self.cos[axis], start=1):
                if c:
                    out = out + c * np.cos(2 * np.pi * k * x)
            for k, c in enumerate(self.sin[axis], start=1):
                if c:
                    out = out + c * np.sin(2 * np.pi * k * x)
        return out

    def sup_bound(self):
        total = abs(self.constant)
        for row in self.cos + self.sin:
            total += sum(abs(c) for c in row)
        return total

    def lipschitz_bound(self):
        total = 0.0
        for row in self.cos + self.sin:
            total += sum(2 * np.pi * k * abs(c) for k, c in enumerate(row, start=1))
        return total


def constant(c):
    return TrigPoly(constant=c)


def cosine(amplitude=2.0):
    """``amplitude * cos(2 pi x)``; the default is the critical almost Mathieu potential."""
    return TrigPoly(cos=((amplitude,),))


@dataclass(frozen=True)
class StepFunction(SamplingFunction):
    """Right-continuous step function on the circle.

    Arc ``j`` is ``[breakpoints[j], breakpoints[j+1])``; the last arc wraps
    around through 0 to ``breakpoints[0] + 1``.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if b.size == 0 or b.size != v.size:
            raise ValueError("need one value per arc and at least one arc")
        if np.any(b < 0.0) or np.any(b >= 1.0):
            raise ValueError("breakpoints must lie in [0, 1)")
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("step values must be finite")
        object.__setattr__(self, "breakpoints", tuple(b.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "_b", b)
        object.__setattr__(self, "_v", v)

    def arc_index(self, x):
        idx = np.searchsorted(self._b, x, side="right") - 1
        return np.where(idx < 0, self._b.size - 1, idx)

    def _eval(self, omega):
        return self._v[self.arc_index(omega)]

    def arc_lengths(self):
        b = self._b
        return np.diff(np.append(b, b[0] + 1.0))

    def sup_bound(self):
        return float(np.max(np.abs(self._v)))

    def lipschitz_bound(self):
        if np.unique(self._v).size == 1:
            return 0.0
        return np.inf

    def value_classes(self, x):
        """Index of the distinct value taken at ``x`` (arcs with equal values share one)."""
        _, inverse = np.unique(self._v, return_inverse=True)
        return inverse[self.arc_index(x)]


@dataclass(frozen=True)
class Mollified(SamplingFunction):
    """Tent-kernel average of a step function.

    With ``h = 1/(n + n0)`` and ``c(w, w') = max(h - dist(w, w'), 0)``, the
    value is ``int c(w, w') s(w') dw' / int c(w, w') dw'``. The kernel is
    narrower than half of every arc, so at most one breakpoint is ever
    inside its support and the integral reduces to a quadratic blend of the
    two neighbouring values.
    """

    step: StepFunction
    n: int
    n0: int

    def __post_init__(self):
        if self.n < 1 or self.n0 < 0:
            raise ValueError("need n >= 1 and n0 >= 0")
        if not 2 * self.width < self.step.arc_lengths().min():
            raise MollifierError(
                f"kernel half-width 1/(n+n0) = {self.width:.6g} is not below half the "
                f"smallest arc ({self.step.arc_lengths().min() / 2:.6g})"
            )

    @property
    def width(self):
        return 1.0 / (self.n + self.n0)

    def _eval(self, omega):
        s = self.step
        b, v = s._b, s._v
        h = self.width
        idx = s.arc_index(omega)
        nxt = (idx + 1) % b.size
        prv = (idx - 1) % b.size
        # offsets to the breakpoints bounding the current arc
        t_left = canonical(omega - b[idx])
        t_right = canonical(b[nxt] - omega)
        out = v[idx].astype(float)
        near_left = t_left < h
        near_right = (t_right < h) & (t_right > 0.0)
        # kernel mass on the far side of the breakpoint
        w = (h - t_left) ** 2 / (2 * h * h)
        out = np.where(near_left, w * v[prv] + (1 - w) * v[idx], out)
        w = (h - t_right) ** 2 / (2 * h * h)
        out = np.where(near_right, w * v[nxt] + (1 - w) * v[idx], out)
        return out

    def sup_bound(self):
        return self.step.sup_bound()

    def lipschitz_bound(self):
        v = self.step._v
        jumps = np.abs(v - np.roll(v, 1))
        return float(jumps.max()) / self.width

    def kinks(self):
        b = np.asarray(self.step.breakpoints)
        h = self.width
        return canonical(np.concatenate([b - h, b, b + h]))


@dataclass(frozen=True)
class Scaled(SamplingFunction):
    inner: SamplingFunction
    factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factor", float(self.factor))

    @property
    def dim(self):
        return self.inner.dim

    def _eval(self, omega):
        return self.factor * self.inner._eval(omega)

    def sup_bound(self):
        return abs(self.factor) * self.inner.sup_bound()

    def lipschitz_bound(self):
        if self.factor == 0.0:
            return 0.0
        return abs(self.factor) * self.inner.lipschitz_bound()


def sup_bound(f):
    return f.sup_bound()


def perturb(step, seed=0, scale=PERTURBATION):
    """Shift every arc value by an independent offset of size below ``scale``.

    Generic offsets make the values pairwise distinct and, in intent,
    rationally independent.
    """
    rng = np.random.default_rng(seed)
    offsets = scale * rng.uniform(-0.5, 0.5, len(step.values))
    return StepFunction(step.breakpoints, np.asarray(step.values) + offsets)


def step_approximate(f, k, seed=0):
    """Sample ``f`` at the midpoints of ``k`` equal arcs and perturb the values.

    Returns ``(s, bound)`` where ``bound`` certifies ``sup|f - s|`` from the
    Lipschitz bound of ``f`` plus the perturbation size.
    """
    if k < 2:
        raise ValueError("need at least 2 arcs")
    if f.dim != 1:
        raise ValueError("step approximation is only defined on the circle")
    if not f.continuous:
        raise ValueError("step approximation needs a continuous function")
    breaks = np.arange(k) / k
    s = StepFunction(breaks, f(breaks + 0.5 / k))
    s = perturb(s, seed=seed)
    bound = f.lipschitz_bound() / (2 * k) + PERTURBATION / 2
    return s, bound


def minimal_n0(step):
    """Smallest n0 with ``1/(1 + n0)`` below half the smallest arc length."""
    half = step.arc_lengths().min() / 2
    n0 = max(int(np.floor(1.0 / half)) - 1, 0)
    while not 1.0 / (1 + n0) < half:
        n0 += 1
    return n0


def mollify(step, n, n0=None):
    if n0 is None:
        n0 = minimal_n0(step)
    return Mollified(step, int(n), int(n0))


def mollifier_l1_bound(step, n, n0):
    """``#breakpoints * 2/(n+n0) * (max s - min s)``: the kernel-support bound on ``||s - f_n||_1``."""
    v = np.asarray(step.values)
    return len(step.breakpoints) * 2.0 / (n + n0) * float(v.max() - v.min())


@dataclass
class NonperiodicityReport:
    period: int | None
    horizon: int
    window: int
    starts: list = field(default_factory=list)
    periods: list = field(default_factory=list)

    @property
    def found(self):
        return self.period is not None

    def __str__(self):
        if self.period is None:
            return f"no period <= {self.horizon} found ({len(self.starts)} starts, window {self.window})"
        return f"period {self.period} found"


def check_nonperiodic(step, T, horizon, starts=4, window=None, seed=0):
    """Search for a period ``p <= horizon`` of ``n -> s(T^n w)`` on sample orbits.

    Symbols are compared exactly (value classes of arcs). A period ``p`` is
    reported for a start if the symbol sequence repeats with shift ``p`` on
    the whole comparison window. The smallest such ``p`` over all starts is
    returned in the report; ``None`` means none was found.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    if T.dim != 1:
        raise ValueError("step functions live on the circle")
    if window is None:
        window = max(10_000, 20 * horizon)
    rng = np.random.default_rng(seed)
    points = rng.random(starts)
    periods = []
    for w in points:
        sym = step.value_classes(orbit(T, w, window + horizon))
        found = None
        for p in range(1, horizon + 1):
            if np.array_equal(sym[p : p + window], sym[:window]):
                found = p
                break
        periods.append(found)
    hits = [p for p in periods if p is not None]
    return NonperiodicityReport(
        period=min(hits) if hits else None,
        horizon=horizon,
        window=window,
        starts=points.tolist(),
        periods=periods,
    )


def _panel_edges(functions, resolution):
    edges = [np.linspace(0.0, 1.0, resolution + 1)]
    for f in functions:
        while isinstance(f, Scaled):
            f = f.inner
        if isinstance(f, StepFunction):
            edges.append(np.asarray(f.breakpoints))
        elif isinstance(f, Mollified):
            edges.append(f.kinks())
    return np.unique(np.concatenate(edges))


def l1_distance(f, g, resolution=10_000):
    """Estimate of ``int |f - g|`` over the torus.

    On the circle, breakpoints (and mollifier kinks) are inserted as panel
    boundaries and each panel gets a two-point Gauss rule, which is exact
    for the piecewise-quadratic gap between a step function and its
    mollification. On higher tori a tensor midpoint grid is used.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    if f.dim != g.dim:
        raise ValueError("functions live on different tori")
    if f.dim == 1:
        e = _panel_edges((f, g), resolution)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * np.diff(e)
        total = 0.0
        for node in (-GAUSS_NODE, GAUSS_NODE):
            x = mid + node * half
            total += np.sum(np.abs(f(x) - g(x)) * half)
        return float(total)
    axes = [(np.arange(resolution) + 0.5) / resolution] * f.dim
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    return float(np.mean(np.abs(f(pts) - g(pts))))


# Plain-text serialization: one ``key = value`` per line, nested functions
# under a dotted prefix (``inner.`` for Scaled, ``step.`` for Mollified).

def to_items(f, prefix=""):
    if isinstance(f, TrigPoly):
        items = [(prefix + "variant", "trig"), (prefix + "constant", repr(f.constant))]
        for axis in range(f.dim):
            items.append((f"{prefix}cos[{axis}]", " ".join(repr(c) for c in f.cos[axis])))
            items.append((f"{prefix}sin[{axis}]", " ".join(repr(c) for c in f.sin[axis])))
        return items
    if isinstance(f, StepFunction):
        return [
            (prefix + "variant", "step"),
            (prefix + "breakpoints", " ".join(repr(b) for b in f.breakpoints)),
            (prefix + "values", " ".join(repr(v) for v in f.values)),
        ]
    if isinstance(f, Mollified):
        return [
            (prefix + "variant", "mollified"),
            (prefix + "n", str(f.n)),
            (prefix + "n0", str(f.n0)),
        ] + to_items(f.step, prefix + "step.")
    if isinstance(f, Scaled):
        return [
            (prefix + "variant", "scaled"),
            (prefix + "factor", repr(f.factor)),
        ] + to_items(f.inner, prefix + "inner.")
    raise TypeError(f"cannot serialize {type(f).__name__}")


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def from_items(items, prefix=""):
    """Build a function from a ``{key: text}`` mapping; every key under ``prefix`` must be used."""
    items = {k: v for k, v in items.items() if k.startswith(prefix)}
    used = set()

    def get(key, default=None):
        full = prefix + key
        if full not in items:
            if default is None:
                raise KeyError(f"missing function field {full!r}")
            return default
        used.add(full)
        return items[full]

    variant = get("variant")
    if variant == "trig":
        const = float(get("constant", "0"))
        axes = sorted(
            {int(k[len(prefix) + 4 : -1]) for k in items if k[len(prefix):].startswith(("cos[", "sin["))}
        )
        cos = tuple(tuple(_floats(get(f"cos[{a}]", " "))) for a in axes) or ((),)
        sin = tuple(tuple(_floats(get(f"sin[{a}]", " "))) for a in axes) or ((),)
        f = TrigPoly(const, cos, sin)
        nested = set()
    elif variant == "step":
        f = StepFunction(_floats(get("breakpoints")), _floats(get("values")))
        nested = set()
    elif variant == "mollified":
        n, n0 = int(get("n")), int(get("n0"))
        step, nested = from_items(items, prefix + "step."), _keys(items, prefix + "step.")
        f = Mollified(step, n, n0)
    elif variant == "scaled":
        factor = float(get("factor"))
        inner, nested = from_items(items, prefix + "inner."), _keys(items, prefix + "inner.")
        f = Scaled(inner, factor)
    else:
        raise ValueError(f"unknown function variant {variant!r}")
    unknown = set(items) - used - nested
    if unknown:
        raise KeyError(f"unknown function field {sorted(unknown)[0]!r}")
    return f


def _keys(items, prefix):
    return {k for k in items if k.startswith(prefix)}


def dumps(f):
    return "".join(f"{k} = {v}\n" for k, v in to_items(f))


def loads(text):
    items = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected 'key = value', got {line!r}")
        items[key.strip()] = value.strip()
    return from_items(items)


__all__ = [
    "SamplingFunction", "TrigPoly", "StepFunction", "Mollified", "Scaled",
    "MollifierError", "NonperiodicityReport", "constant", "cosine", "sup_bound",
    "perturb", "step_approximate", "minimal_n0", "mollify", "mollifier_l1_bound",
    "check_nonperiodic", "l1_distance", "dumps", "loads", "to_items", "from_items",
]
