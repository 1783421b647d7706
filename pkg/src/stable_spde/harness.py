"""Experiment drivers behind the ``stable-spde`` command.

Every command is a pure function of a :class:`RunConfig` (seed included) and
returns ``(header, rows)``; :func:`write_csv` serialises them.  Parallel work
goes through a thread pool whose results are collected in index order.
"""
from __future__ import annotations

import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, InputError, ParameterError
from .heat import CoefficientSpec, deterministic_part, series_terms, solve_point
from .lepage import empirical_char_function, evaluate_ZN, sample_path, scale_parameter
from .stable_core import StableParams, generate_atoms, replication_seed

ROUTES = ("series", "fracint", "both")

DEFAULT_ATOMS = {
    "sample-path": (10, 100, 1000),
    "charfn": (10_000,),
    "solve": (100,),
    "converge": tuple(2**k for k in range(5, 16)),
    "holder": (10, 100, 1000, 10_000),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int | None = None
    alpha: float = 1.5
    hurst: float = 0.7
    eta: float = 1.0
    gamma: float = 0.9
    beta: float | None = None
    sigma: str = "sin(x)"
    u0: str = "exp(-x^2)"
    t_max: float = 1.0
    x_min: float = -1.0
    x_max: float = 1.0
    n_time: int = 5
    n_x: int = 3
    n_atoms: tuple | None = None
    replications: int = 2000
    tol: float = 1e-6
    out: str | None = None
    workers: int = 1
    route: str = "both"
    theta: float | None = None
    lambdas: tuple = (0.0, 0.5, 1.0, 2.0)
    grid_size: int = 1024

    @property
    def params(self):
        return StableParams(self.alpha, self.hurst, self.eta, self.gamma, self.beta)

    def atoms_for(self, command):
        return tuple(self.n_atoms) if self.n_atoms else DEFAULT_ATOMS[command]

    def validate(self, command=None):
        """Raise :class:`ParameterError` or :class:`InputError` on any violated invariant."""
        if self.seed is None:
            raise InputError("seed is required (--seed or 'seed=' in the config file)")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must lie in [0, 2^64)")
        self.params  # noqa: B018  (validates the stable parameters)
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise InputError("t-max must be positive")
        if not self.x_min < self.x_max:
            raise InputError("x-min must be below x-max")
        if self.n_time < 2 or self.n_x < 2:
            raise InputError("grids need at least 2 points (n-time, n-x)")
        if self.grid_size < 2:
            raise InputError("grid-size must be at least 2")
        if self.route not in ROUTES:
            raise InputError(f"route must be one of {', '.join(ROUTES)}")
        if self.workers < 1:
            raise InputError("workers must be at least 1")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.theta is not None and not 0.0 < self.theta < 1.0:
            raise ParameterError("theta must lie in (0, 1)")
        ns = self.atoms_for(command) if command else (self.n_atoms or (1,))
        if any(n < 0 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise InputError("n-atoms must be strictly increasing nonnegative integers")
        if command == "charfn" and self.replications < 100:
            raise InputError("charfn needs at least 100 replications")
        if command == "converge" and len(ns) < 3:
            raise InputError("converge needs at least 3 values of n-atoms")
        return self


_INT_KEYS = {"seed", "n_time", "n_x", "replications", "workers", "grid_size"}
_FLOAT_KEYS = {"alpha", "hurst", "eta", "gamma", "beta", "t_max", "x_min", "x_max", "tol", "theta"}
KEYS = tuple(f.name for f in fields(RunConfig))


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"expected a comma-separated integer list, got {text!r}") from exc


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"expected a comma-separated number list, got {text!r}") from exc


def coerce(key, text):
    """Convert a raw config/flag string for ``key`` to its typed value."""
    key = key.strip().replace("-", "_")
    if key not in KEYS:
        raise InputError(f"unknown config key {key!r}")
    text = text.strip()
    try:
        if key in _INT_KEYS:
            return key, int(text, 0)
        if key in _FLOAT_KEYS:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return key, value
    except ValueError as exc:
        raise InputError(f"invalid value {text!r} for {key}") from exc
    if key == "n_atoms":
        return key, _int_list(text)
    if key == "lambdas":
        return key, _float_list(text)
    return key, text


def read_config_text(text):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        k, v = coerce(key, value)
        values[k] = v
    return values


def load_config(path=None, overrides=None):
    """File values first, then ``overrides`` (already typed) on top."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(read_config_text(fh.read()))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)


@contextmanager
def _mapper(workers):
    if workers <= 1:
        yield map
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield pool.map


def _time_grid(cfg):
    return np.linspace(0.0, cfg.t_max, cfg.n_time)


def _space_grid(cfg):
    return np.linspace(cfg.x_min, cfg.x_max, cfg.n_x)


def _spec(cfg):
    return CoefficientSpec.from_source(cfg.sigma, cfg.u0, cfg.gamma)


# --- commands -----------------------------------------------------------------------


def cmd_sample_path(cfg):
    cfg.validate("sample-path")
    ns = cfg.atoms_for("sample-path")
    params = cfg.params
    atoms = generate_atoms(max(ns), params, cfg.seed)
    grid = _time_grid(cfg)
    chunks = np.array_split(np.arange(grid.size), min(cfg.workers, grid.size))
    cols = []
    with _mapper(cfg.workers) as run:
        for n in ns:
            parts = run(lambda idx, n=n: sample_path(grid[idx], atoms, n, params).values, chunks)
            cols.append(np.concatenate(list(parts)))
    header = ["t"] + [f"z_{n}" for n in ns]
    return header, [[t, *(c[i] for c in cols)] for i, t in enumerate(grid)]


def _replication_value(cfg, params, n, index):
    atoms = generate_atoms(n, params, replication_seed(cfg.seed, index))
    return evaluate_ZN(cfg.t_max, atoms, n, params)


def charfn_samples(cfg):
    """``M`` independent draws of ``Z_N(t_max)``, in replication order."""
    params = cfg.params
    n = cfg.atoms_for("charfn")[-1]
    with _mapper(cfg.workers) as run:
        return np.array(list(run(lambda m: _replication_value(cfg, params, n, m), range(cfg.replications))))


def cmd_charfn(cfg):
    cfg.validate("charfn")
    samples = charfn_samples(cfg)
    sig = scale_parameter(cfg.t_max, cfg.params)
    rows = []
    for lam in cfg.lambdas:
        ecf = empirical_char_function(samples, lam)
        theory = math.exp(-sig * abs(lam) ** cfg.alpha)
        rows.append([lam, ecf.real, ecf.imag, theory, abs(ecf - theory)])
    return ["lambda", "ecf_re", "ecf_im", "theory", "abs_error"], rows


def cmd_solve(cfg):
    cfg.validate("solve")
    spec = _spec(cfg)
    params = cfg.params
    n = cfg.atoms_for("solve")[-1]
    atoms = generate_atoms(n, params, cfg.seed)
    routes = ("series", "fracint") if cfg.route == "both" else (cfg.route,)
    jobs = [(t, x) for t in _time_grid(cfg) for x in _space_grid(cfg)]

    def point(job):
        t, x = job
        return [solve_point(t, x, atoms, n, spec, params, r, cfg.tol, cfg.grid_size) for r in routes]

    with _mapper(cfg.workers) as run:
        values = list(run(point, jobs))
    header = ["t", "x"] + [f"u_{r}" for r in routes] + (["abs_diff"] if len(routes) == 2 else [])
    rows = []
    for (t, x), v in zip(jobs, values):
        rows.append([t, x, *v, *([abs(v[0] - v[1])] if len(v) == 2 else [])])
    return header, rows


def _nested_solutions(t, x, atoms, ns, spec, params, cfg, route):
    """``U_N(t, x)`` for every ``N`` in ``ns`` on one nested realization."""
    if t == 0:
        return np.full(len(ns), float(spec.u0_eval(x)))
    if route == "fracint":
        return np.array([solve_point(t, x, atoms, n, spec, params, "fracint", cfg.tol, cfg.grid_size) for n in ns])
    det = deterministic_part(t, x, spec, cfg.tol)
    partial = np.concatenate(([0.0], np.cumsum(series_terms(t, x, atoms, max(ns), spec, params, cfg.tol))))
    return det + partial[list(ns)]


def cmd_converge(cfg):
    """``sup |U_N - U_{N_ref}|`` over the grid, ``N_ref = max N``.

    Uses the series route (partial sums of one pass give every ``N``) unless
    ``route = fracint``.
    """
    cfg.validate("converge")
    ns = cfg.atoms_for("converge")
    spec = _spec(cfg)
    params = cfg.params
    atoms = generate_atoms(max(ns), params, cfg.seed)
    route = "fracint" if cfg.route == "fracint" else "series"
    jobs = [(t, x) for t in _time_grid(cfg) for x in _space_grid(cfg)]
    with _mapper(cfg.workers) as run:
        table = np.array(list(run(lambda j: _nested_solutions(j[0], j[1], atoms, ns, spec, params, cfg, route), jobs)))
    err = np.max(np.abs(table - table[:, -1:]), axis=0)
    return ["N", "sup_abs_error"], [[n, e] for n, e in zip(ns, err)]


def holder_quotient(path, theta, window=4096):
    """``max |v_i - v_j| / |t_i - t_j|^theta`` over grid pairs.

    Exact for paths of up to ``window + 1`` points.  Longer paths use every lag
    up to ``window`` plus dyadic lags beyond it (a lower bound).
    """
    grid = np.asarray(path.grid if hasattr(path, "grid") else np.arange(len(path)), dtype=float)
    v = np.asarray(path.values if hasattr(path, "values") else path, dtype=float)
    if v.size < 2:
        raise DomainError("holder quotient needs at least two points")
    if not 0.0 < theta < 1.0:
        raise ParameterError("theta must lie in (0, 1)")
    n = v.size
    lags = list(range(1, min(n - 1, window) + 1))
    lag = 2 * window
    while lag < n - 1:
        lags.append(lag)
        lag *= 2
    if n - 1 > window:
        lags.append(n - 1)
    best = 0.0
    for k in lags:
        q = np.abs(v[k:] - v[:-k]) / (grid[k:] - grid[:-k]) ** theta
        best = max(best, float(np.max(q)))
    return best


def cmd_holder(cfg, warn=sys.stderr):
    cfg.validate("holder")
    params = cfg.params
    theta = cfg.theta if cfg.theta is not None else params.hurst - 0.1
    if theta >= params.hurst and warn is not None:
        print(f"warning: theta = {theta} >= hurst = {params.hurst}; quotients may grow with the grid", file=warn)
    ns = cfg.atoms_for("holder")
    atoms = generate_atoms(max(ns), params, cfg.seed)
    grid = np.linspace(0.0, cfg.t_max, cfg.grid_size)
    with _mapper(cfg.workers) as run:
        q = list(run(lambda n: holder_quotient(sample_path(grid, atoms, n, params), theta), ns))
    return ["N", "theta", "holder_quotient"], [[n, theta, v] for n, v in zip(ns, q)]


COMMANDS = {
    "sample-path": cmd_sample_path,
    "charfn": cmd_charfn,
    "solve": cmd_solve,
    "converge": cmd_converge,
    "holder": cmd_holder,
}


def _cell(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % (float(v) + 0.0)  # "+ 0.0" folds -0.0 into 0


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(header, rows, out=None):
    text = to_csv(header, rows)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def run_command(name, cfg):
    header, rows = COMMANDS[name](cfg)
    return write_csv(header, rows, cfg.out)


__all__ = [
    "COMMANDS",
    "RunConfig",
    "cmd_charfn",
    "cmd_converge",
    "cmd_holder",
    "cmd_sample_path",
    "cmd_solve",
    "holder_quotient",
    "load_config",
    "read_config_text",
    "run_command",
    "to_csv",
    "write_csv",
]
