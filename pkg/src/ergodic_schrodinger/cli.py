"""Experiment runner.

A run is described by a plain-text ``key = value`` document. Function fields
use the ``function.`` prefix (see :mod:`ergodic_schrodinger.potentials`).
Each invocation runs one experiment and writes comma-separated tables, a
JSON report and a short summary on standard output.

    ergodic-lab measure run.cfg --lyapunov-N 200000 --set seed=3
"""

import argparse
import dataclasses
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import potentials
from .cocycle import lyapunov_spectrum
from .dynamics import GOLDEN, Transformation
from .halfplane import harmonic_mean_check, lyapunov_complex, m_iterations
from .measure import (
    EnergyGrid, ExperimentReport, Stage, approximation_experiment, coupling_integral,
    describe, estimate_M,
)
from .triangle import build_triangle, weight_table

KINDS = ("lyapunov-scan", "m-function", "measure", "coupling-sweep", "approximation",
         "sc-weight", "harmonic-check")


class ConfigError(ValueError):
    pass


def _ints(text):
    return tuple(int(t) for t in text.replace(",", " ").split())


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


# key -> (parser, (check, constraint text) or None); defaults live on RunConfig
SCHEMA = {
    "experiment": (str, (lambda x: x in KINDS, f"one of {', '.join(KINDS)}")),
    "alpha": (_floats, None),
    "energy_lo": (float, None),
    "energy_hi": (float, None),
    "energy_count": (int, (lambda x: x >= 2, ">= 2")),
    "energy_imag": (float, (_nonneg, ">= 0")),
    "grid_lo": (float, None),
    "grid_hi": (float, None),
    "grid_count": (int, (_positive, "> 0")),
    "lyapunov_N": (int, (lambda x: x >= 1000, ">= 1000")),
    "lyapunov_orbits": (int, (lambda x: x >= 2, ">= 2")),
    "samples": (int, (lambda x: x >= 2, ">= 2")),
    "omega": (_floats, None),
    "delta_gamma": (float, (_positive, "> 0")),
    "coupling_max": (float, (_positive, "> 0")),
    "coupling_count": (int, (lambda x: x >= 2, ">= 2")),
    "k": (int, (lambda x: x >= 2, ">= 2")),
    "schedule": (_ints,
                 (lambda x: len(x) >= 1 and all(b > a for a, b in zip(x, x[1:])) and x[0] >= 1,
                  "increasing positive integers")),
    "n0": (int, (_nonneg, ">= 0")),
    "horizon": (int, (lambda x: x >= 2, ">= 2")),
    "bound": (float, (_nonneg, ">= 0")),
    "center_re": (float, None),
    "center_im": (float, (_positive, "> 0")),
    "radius": (float, (_positive, "> 0")),
    "points": (int, (lambda x: x >= 3, ">= 3")),
    "seed": (int, (_nonneg, ">= 0")),
    "workers": (int, (_positive, "> 0")),
    "output_dir": (str, None),
}

REQUIRED = {
    "lyapunov-scan": ("function", "energy_lo", "energy_hi"),
    "m-function": ("function", "energy_lo", "energy_hi"),
    "measure": ("function",),
    "coupling-sweep": ("function", "coupling_max"),
    "approximation": ("function",),
    "sc-weight": (),
    "harmonic-check": ("function", "center_im", "radius"),
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    function: object = None
    alpha: tuple = (GOLDEN,)
    energy_lo: float = None
    energy_hi: float = None
    energy_count: int = 61
    energy_imag: float = 0.0
    grid_lo: float = None
    grid_hi: float = None
    grid_count: int = 400
    lyapunov_N: int = 100_000
    lyapunov_orbits: int = 8
    samples: int = 4096
    omega: tuple = (0.0,)
    delta_gamma: float = 0.05
    coupling_max: float = None
    coupling_count: int = 16
    k: int = 64
    schedule: tuple = (16, 64, 256, 1024)
    n0: int = None
    horizon: int = 1000
    bound: float = None
    center_re: float = 0.0
    center_im: float = None
    radius: float = None
    points: int = 64
    seed: int = 0
    workers: int = 1
    output_dir: str = "output"

    @property
    def transformation(self):
        return Transformation(self.alpha)


def _read_items(text):
    items = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value.strip()
    return items


def parse_config(text, overrides=None):
    """Parse and validate a run description; ``overrides`` (a dict of key -> text) win."""
    items = _read_items(text)
    items.update(overrides or {})
    fields = {}
    function_items = {}
    for key, raw in items.items():
        if key.startswith("function."):
            function_items[key[len("function."):]] = raw
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        parse, check = SCHEMA[key]
        try:
            value = parse(raw)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {raw!r} as {parse.__name__.strip('_')}") from None
        if check is not None and not check[0](value):
            raise ConfigError(f"{key}: value {raw!r} violates constraint {check[1]}")
        fields[key] = value
    if "experiment" not in fields:
        raise ConfigError("missing field 'experiment'")
    if function_items:
        try:
            fields["function"] = potentials.from_items(function_items)
        except (KeyError, ValueError) as exc:
            msg = exc.args[0] if exc.args else str(exc)
            raise ConfigError(f"function: {msg}") from None
    for key in REQUIRED[fields["experiment"]]:
        if fields.get(key) is None:
            raise ConfigError(f"missing field {key!r} required by {fields['experiment']}")
    kind = fields["experiment"]
    if kind == "sc-weight" and fields.get("bound") is None and "function" not in fields:
        raise ConfigError("sc-weight needs 'bound' or a function")
    if kind == "m-function" and not fields.get("energy_imag", 0.0) > 0:
        raise ConfigError("energy_imag: m-function needs a value > 0")
    try:
        Transformation(fields.get("alpha", (GOLDEN,)))
    except ValueError as exc:
        raise ConfigError(f"alpha: {exc}") from None
    return RunConfig(**fields)


def _repr(value):
    if isinstance(value, tuple):
        return " ".join(_repr(v) for v in value)
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def emit_config(cfg):
    """Effective configuration as text; ``parse_config(emit_config(c)) == c``."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "function":
            if value is not None:
                lines += [f"function.{k} = {v}" for k, v in potentials.to_items(value)]
        elif value is not None:
            lines.append(f"{f.name} = {_repr(value)}")
    return "\n".join(lines) + "\n"


# fields that cannot change any number in the output
_NEUTRAL = ("workers", "output_dir")


def _comment(cfg):
    lines = [ln for ln in emit_config(cfg).strip().splitlines()
             if ln.split(" = ", 1)[0] not in _NEUTRAL]
    return "config: " + "; ".join(lines)


def _num(x):
    return f"{x:.12g}"


def _table(header, rows, cfg):
    lines = [f"# {_comment(cfg)}", ",".join(header)]
    lines += [",".join(_num(v) if isinstance(v, (float, np.floating)) else str(v) for v in row)
              for row in rows]
    return "\n".join(lines) + "\n"


def _lyap_kwargs(cfg):
    return dict(T=cfg.transformation, N=cfg.lyapunov_N, orbits=cfg.lyapunov_orbits,
                seed=cfg.seed, workers=cfg.workers)


def _grid(cfg, bound):
    base = EnergyGrid.for_bound(bound, cfg.grid_count)
    lo = base.lo if cfg.grid_lo is None else cfg.grid_lo
    hi = base.hi if cfg.grid_hi is None else cfg.grid_hi
    return EnergyGrid(lo, hi, cfg.grid_count)


def _energies(cfg):
    return np.linspace(cfg.energy_lo, cfg.energy_hi, cfg.energy_count) + 1j * cfg.energy_imag


def _run_lyapunov_scan(cfg):
    energies = _energies(cfg)
    ests = lyapunov_spectrum(cfg.function, energies, cfg.transformation, cfg.lyapunov_N,
                             cfg.lyapunov_orbits, cfg.seed, workers=cfg.workers)
    rows = [(e.real, e.imag, est.value, est.std_error, est.raw) for e, est in zip(energies, ests)]
    tables = {"lyapunov-scan": _table(("E_re", "E_im", "gamma", "std_error", "raw"), rows, cfg)}
    gammas = [est.value for est in ests]
    report = ExperimentReport(
        "lyapunov-scan", {"function": describe(cfg.function)},
        [Stage("scan", None, {"min_gamma": min(gammas), "max_gamma": max(gammas)})],
        {}, cfg.seed)
    return tables, report


def _run_m_function(cfg):
    energies = _energies(cfg)
    T = cfg.transformation
    omega = cfg.omega[0] if T.dim == 1 else np.asarray(cfg.omega)
    rows = []
    for e in energies:
        it = m_iterations(cfg.function, e, [omega], T)[0]
        if not it.converged:
            raise RuntimeError(f"m-function at E={e} did not converge")
        gam = lyapunov_complex(cfg.function, e, T, samples=cfg.samples, seed=cfg.seed)
        rows.append((e.real, e.imag, it.value.real, it.value.imag, it.iterations,
                     it.ratio, gam.value, gam.std_error))
    header = ("E_re", "E_im", "m_re", "m_im", "iterations", "ratio", "gamma", "std_error")
    report = ExperimentReport("m-function", {"function": describe(cfg.function)},
                              [Stage("m", None, {"energies": len(rows)})], {}, cfg.seed)
    return {"m-function": _table(header, rows, cfg)}, report


def _run_measure(cfg):
    f = cfg.function
    est = estimate_M(f, _grid(cfg, f.sup_bound()), cfg.delta_gamma, **_lyap_kwargs(cfg))
    report = ExperimentReport(
        "measure", {"function": describe(f)}, [Stage("measure", est)],
        {"within_interval": est.value <= est.grid.length}, cfg.seed, result=est.value)
    return {"measure": est.table(_comment(cfg))}, report


def _run_coupling(cfg):
    value, report = coupling_integral(cfg.function, cfg.coupling_max, cfg.coupling_count,
                                      cfg.grid_count, cfg.delta_gamma, **_lyap_kwargs(cfg))
    rows = [(s.data["lambda"], s.estimate.value) for s in report.stages]
    return {"coupling-sweep": _table(("lambda", "M_hat"), rows, cfg)}, report


def _run_approximation(cfg):
    report = approximation_experiment(
        cfg.function, cfg.k, cfg.schedule, cfg.n0, cfg.grid_count, cfg.delta_gamma,
        horizon=cfg.horizon, **_lyap_kwargs(cfg))
    tables = {}
    rows = []
    for s in report.stages:
        if s.estimate is not None:
            tag = "step" if s.name == "step" else f"n{s.data['n']}"
            tables[f"approximation_{tag}"] = s.estimate.table(_comment(cfg))
        if "n" in s.data and s.estimate is not None:
            d = s.data
            rows.append((d["n"], d["l1"], d["l1_bound"], s.estimate.value,
                         d["gap_min"], d["gap_max"]))
    tables["approximation_stages"] = _table(
        ("n", "l1", "l1_bound", "M_hat", "gap_min", "gap_max"), rows, cfg)
    return tables, report


def _run_sc_weight(cfg):
    bound = cfg.bound if cfg.bound is not None else cfg.function.sup_bound()
    tri = build_triangle(bound)
    nodes = EnergyGrid.for_bound(bound, cfg.grid_count).nodes
    table = weight_table(tri, nodes)
    residual = max(abs(tri.phi(z) - v) for z, v in zip(tri.prevertices, tri.vertices))
    report = ExperimentReport(
        "sc-weight", {"bound": bound},
        [Stage("triangle", None, {"vertex_residual": float(residual),
                                  "scale": abs(tri.scale), "max_g": float(table.weights.max())})],
        {"vertex_residual_small": residual <= 1e-6}, cfg.seed)
    return {"sc-weight": f"# {_comment(cfg)}\n" + table.to_text().replace("# energy,g", "energy,g")}, report


def _run_harmonic(cfg):
    center = complex(cfg.center_re, cfg.center_im)
    values = {}

    def gamma(z):
        values[z] = lyapunov_complex(cfg.function, z, cfg.transformation,
                                     samples=cfg.samples, seed=cfg.seed).value
        return values[z]

    rep = harmonic_mean_check(cfg.function, center, cfg.radius, cfg.points, gamma=gamma)
    theta = 2 * np.pi * np.arange(cfg.points) / cfg.points
    ring = center + cfg.radius * np.exp(1j * theta)
    rows = [(t, z.real, z.imag, values[z]) for t, z in zip(theta, ring)]
    report = ExperimentReport(
        "harmonic-check", {"function": describe(cfg.function), "center": [center.real, center.imag],
                           "radius": cfg.radius},
        [Stage("circle", None, {"center_value": rep.center_value,
                                "circle_average": rep.circle_average,
                                "discrepancy": rep.discrepancy})],
        {}, cfg.seed, result=rep.discrepancy)
    return {"harmonic-check": _table(("theta", "z_re", "z_im", "gamma"), rows, cfg)}, report


RUNNERS = {
    "lyapunov-scan": _run_lyapunov_scan,
    "m-function": _run_m_function,
    "measure": _run_measure,
    "coupling-sweep": _run_coupling,
    "approximation": _run_approximation,
    "sc-weight": _run_sc_weight,
    "harmonic-check": _run_harmonic,
}


def run(cfg, out=None, err=None):
    """Run one experiment; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    t0 = time.perf_counter()
    try:
        tables, report = RUNNERS[cfg.experiment](cfg)
    except Exception as exc:  # any stage failure becomes a nonzero exit
        print(f"error in {cfg.experiment}: {type(exc).__name__}: {exc}", file=err)
        return 1
    report.wall_clock = time.perf_counter() - t0
    os.makedirs(cfg.output_dir, exist_ok=True)
    for name, text in tables.items():
        with open(os.path.join(cfg.output_dir, f"{name}.csv"), "w", encoding="ascii") as fh:
            fh.write(text)
    report_path = os.path.join(cfg.output_dir, f"{cfg.experiment}_report.json")
    with open(report_path, "w", encoding="ascii") as fh:
        fh.write(report.to_json(timing=False))
    print("# effective configuration", file=out)
    print(emit_config(cfg), end="", file=out)
    print(f"seed = {cfg.seed}, delta_gamma = {cfg.delta_gamma:g}", file=out)
    if cfg.experiment == "measure":
        print(f"M_hat = {report.result:.2f} (delta_gamma={cfg.delta_gamma:g})", file=out)
    print(report.summary(), file=out)
    print(f"wrote {len(tables)} table(s) and {report_path} in {report.wall_clock:.2f} s", file=out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ergodic-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("config", help="path to a key = value run description")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any field, including function.* fields")
        for key in SCHEMA:
            if key != "experiment":
                p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="VALUE")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {"experiment": args.experiment}
    for key in SCHEMA:
        value = getattr(args, key, None)
        if key != "experiment" and value is not None:
            overrides[key] = value
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"--set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        overrides[key.strip()] = value.strip()
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        items = _read_items(text)
        if items.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(
                f"config says experiment = {items['experiment']} but subcommand is {args.experiment}")
        cfg = parse_config(text, overrides)
    except (OSError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
