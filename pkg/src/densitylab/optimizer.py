"""Derivative-free search for configurations with small delta_star.

Configurations with r intervals and b_r = 1 are encoded by 2r positive
increments (stick breaking); the simplex search runs on their logarithms.
Float evaluation drives the search, and any candidate that beats the
incumbent is re-certified in exact arithmetic before it is accepted.
"""
from __future__ import annotations

import concurrent.futures as cf
import csv
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .constructions import CmsnParams, optimal_params
from .core import Configuration, make_configuration
from .profile import delta_star

log = logging.getLogger(__name__)

THEOREM_FLOOR = Fraction(2629, 10000)
MIN_INCREMENT = 1e-9
GRID_BITS = 40  # exact re-certification rounds endpoints to multiples of 2**-40
INCIDENT_TOL = 1e-6


class FloorViolation(RuntimeError):
    """A certified delta_star below the theorem floor: always a bug."""


@dataclass(frozen=True)
class ParamVector:
    r: int
    coords: np.ndarray  # 2r positive increments summing to 1

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (2 * self.r,) or np.any(c <= 0):
            raise ValueError("need 2r positive increments")
        object.__setattr__(self, "coords", c / c.sum())

    @classmethod
    def from_log(cls, z: np.ndarray) -> "ParamVector":
        w = np.exp(z - z.max())
        w = w / w.sum()
        w = np.maximum(w, MIN_INCREMENT)
        return cls(len(z) // 2, w / w.sum())

    def to_log(self) -> np.ndarray:
        return np.log(self.coords)

    def endpoints(self) -> np.ndarray:
        e = np.concatenate([[0.0], np.cumsum(self.coords)])
        e[-1] = 1.0
        return e

    def to_configuration(self, bits: int = GRID_BITS) -> Configuration:
        """Exact configuration on the dyadic grid 2**-bits, with b_r = 1."""
        scale = 1 << bits
        ticks = np.rint(self.endpoints() * scale).astype(np.int64)
        ticks[-1] = scale
        pts = [Fraction(int(t), scale) for t in ticks]
        return make_configuration([(pts[k], pts[k + 1]) for k in range(1, len(pts), 2)])

    @classmethod
    def from_configuration(cls, C: Configuration) -> "ParamVector":
        ev = [v / C.b_r for v in C.endpoint_values]
        return cls(C.r, np.array([float(ev[k] - ev[k - 1]) for k in range(1, len(ev))]))


def _cumulative(e: np.ndarray) -> np.ndarray:
    G = np.zeros_like(e)
    inc = np.diff(e)
    inc[0::2] = 0.0  # gaps (0, a_1), (b_1, a_2), ...
    G[1:] = np.cumsum(inc)
    return G


def objective_endpoints(e: np.ndarray) -> float:
    sup, inf = _kernels.float_extrema(e, _cumulative(e))
    return 1.0 - float(np.min(np.maximum(sup, 1.0 - inf)))


def objective(v: ParamVector) -> float:
    """Float delta_star of the decoded configuration."""
    return objective_endpoints(v.endpoints())


def float_delta_star(C: Configuration) -> float:
    return objective_endpoints(C.to_float_endpoints() / float(C.b_r))


# ------------------------------------------------------------ Nelder-Mead


def nelder_mead(f, x0, step, iters, on_iter=None):
    """Adaptive Nelder-Mead (dimension-dependent coefficients).

    ``on_iter(k, best_x, best_f)`` runs after every iteration.
    """
    n = len(x0)
    alpha, gamma = 1.0, 1.0 + 2.0 / n
    rho, sigma = 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n
    simplex = [np.array(x0, dtype=float)]
    for i in range(n):
        x = simplex[0].copy()
        x[i] += step
        simplex.append(x)
    fs = [f(x) for x in simplex]
    for k in range(iters):
        order = np.argsort(fs, kind="stable")
        simplex = [simplex[i] for i in order]
        fs = [fs[i] for i in order]
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = f(xr)
        if fr < fs[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = centroid + rho * (xr - centroid)
            else:
                xc = centroid + rho * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, fs[-1]):
                simplex[-1], fs[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    fs[i] = f(simplex[i])
        if on_iter is not None:
            b = int(np.argmin(fs))
            on_iter(k, simplex[b], fs[b])
    b = int(np.argmin(fs))
    return simplex[b], fs[b]


# ------------------------------------------------------------------ search


@dataclass
class RestartResult:
    restart: int
    best_params: ParamVector
    float_objective: float
    exact_objective: Fraction
    configuration: Configuration
    trace: list  # (iteration, incumbent exact as float, simplex best float)
    certifications: int = 0
    incidents: list = field(default_factory=list)

    def sort_key(self):
        return (self.exact_objective, tuple(self.best_params.coords))


@dataclass
class SearchResult:
    best_params: ParamVector
    float_objective: float
    exact_objective: Fraction
    configuration: Configuration
    trace: list  # (restart, iteration, incumbent, simplex best)
    seed: int
    restarts: int
    iterations: int
    certifications: int
    incidents: list

    def to_json_dict(self) -> dict:
        return {
            "r": self.best_params.r,
            "best_params": [float(x) for x in self.best_params.coords],
            "float_objective": self.float_objective,
            "exact_objective": str(self.exact_objective),
            "exact_objective_dec": float(self.exact_objective),
            "objective_gap": abs(self.float_objective - float(self.exact_objective)),
            "seed": self.seed,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "certifications": self.certifications,
            "incidents": self.incidents,
        }

    def write_trace(self, path: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["restart", "iteration", "incumbent", "simplex_best"])
            for row in self.trace:
                w.writerow(row)


def _certify(v: ParamVector) -> tuple[Configuration, Fraction]:
    C = v.to_configuration()
    exact = delta_star(C)
    if exact < THEOREM_FLOOR:
        raise FloorViolation(f"certified delta_star {exact} below {THEOREM_FLOOR} for {C!r}")
    return C, exact


def _run_restart(args) -> RestartResult:
    r, restart, iters, seed, init, step = args
    rng = np.random.default_rng([seed, restart])
    if init is not None:
        z0 = np.log(np.asarray(init, dtype=float))
        if restart > 0:
            z0 = z0 + rng.normal(0.0, 0.1, size=z0.shape)
    else:
        z0 = rng.normal(0.0, 1.0, size=2 * r)
    v0 = ParamVector.from_log(z0)
    C0, exact0 = _certify(v0)
    f0 = objective(v0)
    state = RestartResult(restart, v0, f0, exact0, C0, [])
    if abs(f0 - float(exact0)) > INCIDENT_TOL:
        state.incidents.append({"restart": restart, "float": f0, "exact": float(exact0)})

    def f(z):
        v = ParamVector.from_log(z)
        val = objective(v)
        if val < float(state.exact_objective):
            C, exact = _certify(v)
            state.certifications += 1
            if abs(val - float(exact)) > INCIDENT_TOL:
                state.incidents.append({"restart": restart, "float": val, "exact": float(exact)})
                log.warning("precision incident: float %.12g vs exact %.12g", val, float(exact))
            if exact < state.exact_objective:
                state.best_params, state.float_objective = v, val
                state.exact_objective, state.configuration = exact, C
        return val

    def on_iter(k, x, fx):
        state.trace.append((restart, k, float(state.exact_objective), fx))

    nelder_mead(f, v0.to_log(), step, iters, on_iter)
    return state


def search(
    r: int,
    restarts: int,
    iters: int,
    seed: int,
    init: Configuration | None = None,
    step: float | None = None,
    workers: int = 1,
) -> SearchResult:
    """Multi-start simplex search; restart k draws from rng([seed, k])."""
    if r < 1:
        raise ValueError("r must be at least 1")
    init_coords = None
    if init is not None:
        pv = ParamVector.from_configuration(init)
        if pv.r != r:
            raise ValueError(f"init has {pv.r} intervals, expected {r}")
        init_coords = pv.coords
    if step is None:
        step = 0.01 if init is not None else 0.5
    jobs = [(r, k, iters, seed, init_coords, step) for k in range(restarts)]
    if workers > 1:
        with cf.ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_restart, jobs))
    else:
        results = [_run_restart(j) for j in jobs]
    best = min(results, key=RestartResult.sort_key)
    trace = [row for res in results for row in res.trace]
    return SearchResult(
        best.best_params,
        best.float_objective,
        best.exact_objective,
        best.configuration,
        trace,
        seed,
        restarts,
        iters,
        sum(res.certifications for res in results),
        [i for res in results for i in res.incidents],
    )


# ------------------------------------------------------ neighborhood audit


def table_limits(m: float, s: float) -> tuple[float, float, float]:
    """1/m - s, s m, 1/s - 1: the three escape margins of the table rows."""
    return 1.0 / m - s, s * m, 1.0 / s - 1.0


def min_table_density(m: float, s: float) -> float:
    """Smallest escaping density among the left, last and other rows.

    Equal to 1 - max(table_limits)/2; the optimum equalizes the three.
    """
    return 1.0 - max(table_limits(m, s)) / 2.0


@dataclass(frozen=True)
class AuditReport:
    center: tuple[float, float]
    center_value: float
    limits: tuple[float, float, float]
    samples: int
    best_sample_value: float
    center_is_max: bool

    def to_json_dict(self) -> dict:
        return {
            "center": list(self.center),
            "center_value": self.center_value,
            "limits": list(self.limits),
            "samples": self.samples,
            "best_sample_value": self.best_sample_value,
            "center_is_max": self.center_is_max,
        }


def neighborhood_audit(params: CmsnParams, radius: float, samples: int = 2000, seed: int = 0) -> AuditReport:
    """Sample (m, s) within ``radius``; is the center the local max of the
    smallest table density?"""
    m0, s0 = float(params.m), float(params.s)
    c = min_table_density(m0, s0)
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, samples)
    rad = radius * np.sqrt(rng.uniform(0, 1, samples))
    best = -np.inf
    for a, t in zip(ang, rad):
        m, s = m0 + t * np.cos(a), s0 + t * np.sin(a)
        if 0 < m < 1 and 0 < s < 1:
            best = max(best, min_table_density(m, s))
    return AuditReport((m0, s0), c, table_limits(m0, s0), samples, float(best), bool(c >= best))


def optimal_audit(radius: float = 0.01, samples: int = 2000, seed: int = 0) -> AuditReport:
    m, s = optimal_params()
    return neighborhood_audit(CmsnParams(m, s, 1), radius, samples, seed)
