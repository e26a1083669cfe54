"""Hybrid parameter identification: genetic search followed by bounded least squares.

The search runs in a normalized box ``u in [0, 1]^d``. Each free material
parameter maps to its admissible interval (log-scaled for wide positive
ranges). With two curves and free weights, the last coordinate is ``w1``
and ``w2 = 1 - w1``, so the weight equality holds exactly for every iterate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as sopt
from scipy.stats import qmc

from .datasets import Dataset
from .errors import DomainError, InfeasibleStateError, QuadratureError
from .models import ModelSpec, ParamInfo
from .stress import stress_curve

DEFAULT_WEIGHT_BOUNDS = (0.1, 0.9)


def curve_error(spec: ModelSpec, dataset: Dataset, predicted=None) -> float:
    """Sum of squared nominal-stress residuals; ``inf`` if the model is infeasible."""
    if len(dataset) == 0:
        raise DomainError("empty dataset")
    if predicted is None:
        try:
            predicted = stress_curve(spec, dataset.mode, dataset.lam)[:, dataset.axis]
        except (InfeasibleStateError, QuadratureError, FloatingPointError):
            return float("inf")
    r = np.asarray(predicted, dtype=float) - dataset.nominal()
    with np.errstate(over="ignore", invalid="ignore"):
        e = float(r @ r)
    return e if np.isfinite(e) else float("inf")


def _check_weights(w, n):
    w = tuple(float(x) for x in w)
    if len(w) != n:
        raise DomainError(f"expected {n} weights, got {len(w)}")
    if any(x < 0.0 or x > 1.0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
        raise DomainError(f"weights must lie in [0, 1] and sum to one, got {w}")
    return w


@dataclass(frozen=True)
class Bound:
    name: str
    lower: float
    upper: float
    log: bool = False

    def decode(self, u):
        u = min(max(float(u), 0.0), 1.0)
        if self.log:
            return float(np.exp(np.log(self.lower) + u * (np.log(self.upper) - np.log(self.lower))))
        return self.lower + u * (self.upper - self.lower)

    def encode(self, x):
        if self.upper == self.lower:
            return 0.0
        if self.log:
            u = (np.log(x) - np.log(self.lower)) / (np.log(self.upper) - np.log(self.lower))
        else:
            u = (x - self.lower) / (self.upper - self.lower)
        return float(min(max(u, 0.0), 1.0))


def _bound_from_info(info: ParamInfo, override=None) -> Bound:
    lo, hi = info.search_bounds if override is None else map(float, override)
    if not lo <= hi:
        raise DomainError(f"bounds for {info.name} are not ordered: {lo} > {hi}")
    if not (info.admissible(lo) or (info.strict_lower and lo == info.lower)) or not info.admissible(hi):
        raise DomainError(f"bounds for {info.name} leave the admissible interval [{info.lower}, {info.upper}]")
    if info.strict_lower and lo <= info.lower:
        # the admissible set is open at the lower end
        lo = info.lower + 1e-9 * max(1.0, abs(info.upper - info.lower)) if not info.log else info.lower * (1 + 1e-9)
    if info.log and lo <= 0:
        raise DomainError(f"log-scaled parameter {info.name} needs a positive lower bound")
    return Bound(info.name, lo, hi, info.log)


class FitProblem:
    """Fit of one catalog model to one or two curves.

    ``free`` lists the parameters to identify (default: all material
    parameters; ``phi`` stays fixed at the template value unless listed).
    ``fixed_weights`` pins ``(w1, w2)``; otherwise ``w1`` is searched within
    ``weight_bounds``.
    """

    def __init__(self, template: ModelSpec, datasets: Sequence[Dataset], free=None, bounds=None,
                 fixed_weights=None, weight_bounds=DEFAULT_WEIGHT_BOUNDS):
        datasets = list(datasets)
        if not 1 <= len(datasets) <= 2:
            raise DomainError("a fit problem takes one or two datasets")
        self.template = template
        self.datasets = datasets
        self.free = tuple(template.info.param_names if free is None else free)
        bounds = dict(bounds or {})
        unknown = set(bounds) - set(self.free)
        if unknown:
            raise DomainError(f"bounds given for non-free parameters {sorted(unknown)}")
        self.bounds = [_bound_from_info(template.info.param(n), bounds.get(n)) for n in self.free]
        if len(datasets) == 1:
            fixed_weights = (1.0,)
        self.fixed_weights = None if fixed_weights is None else _check_weights(fixed_weights, len(datasets))
        if self.fixed_weights is None:
            lo, hi = map(float, weight_bounds)
            if not 0.0 <= lo <= hi <= 1.0:
                raise DomainError(f"weight bounds must satisfy 0 <= lo <= hi <= 1, got {weight_bounds}")
            self.bounds.append(Bound("w1", lo, hi))
        self.n_evaluations = 0

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(b.name for b in self.bounds)

    def decode(self, u):
        values = [b.decode(x) for b, x in zip(self.bounds, u)]
        if self.fixed_weights is None:
            w1 = values.pop()
            w = (w1, 1.0 - w1)
        else:
            w = self.fixed_weights
        return dict(zip(self.free, values)), w

    def encode(self, zeta: dict, w=None):
        u = [b.encode(zeta[b.name]) for b in self.bounds if b.name != "w1"]
        if self.fixed_weights is None:
            w1 = 0.5 if w is None else w[0]
            u.append(self.bounds[-1].encode(w1))
        return np.array(u)

    def spec_for(self, zeta: dict) -> ModelSpec:
        return self.template.with_params(**zeta)

    def predictions(self, spec: ModelSpec):
        """Model stress for each dataset, sharing one curve evaluation per loading mode."""
        by_mode: dict = {}
        for ds in self.datasets:
            by_mode.setdefault(ds.mode, set()).update(ds.lam.tolist())
        curves = {}
        for mode, lams in by_mode.items():
            grid = np.array(sorted(lams))
            curves[mode] = (grid, stress_curve(spec, mode, grid))
        out = []
        for ds in self.datasets:
            grid, P = curves[ds.mode]
            out.append(P[np.searchsorted(grid, ds.lam), ds.axis])
        return out

    def errors(self, zeta: dict):
        self.n_evaluations += 1
        try:
            spec = self.spec_for(zeta)
            preds = self.predictions(spec)
        except (DomainError, InfeasibleStateError, QuadratureError, FloatingPointError):
            return tuple(float("inf") for _ in self.datasets)
        return tuple(curve_error(spec, ds, p) for ds, p in zip(self.datasets, preds))

    def residuals(self, u) -> np.ndarray:
        """``sqrt(w_i) * (P_model - P_exp)`` stacked; their squared norm is the total cost."""
        zeta, w = self.decode(u)
        self.n_evaluations += 1
        bad = np.full(sum(len(d) for d in self.datasets), 1e150)
        try:
            spec = self.spec_for(zeta)
            preds = self.predictions(spec)
        except (DomainError, InfeasibleStateError, QuadratureError, FloatingPointError):
            return bad
        r = np.concatenate([np.sqrt(wi) * (p - ds.nominal()) for wi, p, ds in zip(w, preds, self.datasets)])
        return r if np.all(np.isfinite(r)) else bad

    def cost(self, u) -> float:
        zeta, w = self.decode(u)
        return total_cost(zeta, w, self)

    def gradient(self, u, step: float = 1e-6) -> np.ndarray:
        """``2 J^T r`` with a finite-difference residual Jacobian.

        Near a good fit the residuals are small, so the truncation error of
        the Jacobian barely reaches the gradient; differencing the cost
        itself would not have that property on these stiff exponential laws.
        """
        u = np.asarray(u, dtype=float)
        r0 = self.residuals(u)
        J = np.empty((len(r0), len(u)))
        for i in range(len(u)):
            e = np.zeros_like(u)
            e[i] = step
            if u[i] - step < 0.0:
                J[:, i] = (-3.0 * r0 + 4.0 * self.residuals(u + e) - self.residuals(u + 2 * e)) / (2 * step)
            elif u[i] + step > 1.0:
                J[:, i] = (3.0 * r0 - 4.0 * self.residuals(u - e) + self.residuals(u - 2 * e)) / (2 * step)
            else:
                J[:, i] = (self.residuals(u + e) - self.residuals(u - e)) / (2 * step)
        return 2.0 * J.T @ r0


def total_cost(zeta: dict, w, problem: FitProblem) -> float:
    """Weighted sum ``sum_i w_i E_i`` over the problem's curves."""
    w = _check_weights(w, len(problem.datasets))
    errs = problem.errors(zeta)
    if not all(np.isfinite(errs)):
        return float("inf")
    return float(sum(wi * e for wi, e in zip(w, errs)))


class FunctionProblem:
    """Minimal problem wrapper around a scalar function on a box, for testing the search."""

    def __init__(self, func: Callable, bounds, residual_func: Callable | None = None):
        self.func = func
        self.residual_func = residual_func
        self.bounds = [Bound(f"x{i}", float(lo), float(hi)) for i, (lo, hi) in enumerate(bounds)]
        self.n_evaluations = 0

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def names(self):
        return tuple(b.name for b in self.bounds)

    def point(self, u):
        return np.array([b.decode(x) for b, x in zip(self.bounds, u)])

    def cost(self, u):
        self.n_evaluations += 1
        try:
            v = float(self.func(self.point(u)))
        except (DomainError, FloatingPointError):
            return float("inf")
        return v if np.isfinite(v) else float("inf")

    def gradient(self, u, step: float = 1e-6):
        return cost_gradient(self, u, step)

    def residuals(self, u):
        if self.residual_func is not None:
            self.n_evaluations += 1
            return np.atleast_1d(np.asarray(self.residual_func(self.point(u)), dtype=float))
        c = self.cost(u)
        # sqrt of a nonnegative cost is a valid one-residual least-squares form
        return np.array([np.sqrt(c) if np.isfinite(c) else 1e150])


# ---------------------------------------------------------------------------
# genetic search


@dataclass(frozen=True)
class GAConfig:
    population: int = 40
    generations: int = 60
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.1
    elite: int = 2
    tournament: int = 2
    blend_alpha: float = 0.5
    seed: int = 0
    n_refine: int = 5

    def validate(self, dim: int):
        if self.population < max(2 * dim, 2):
            raise DomainError(f"population {self.population} < 2 * dim = {2 * dim}")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elite < self.population:
            raise DomainError("elite count must be smaller than the population")
        if self.generations < 0 or self.tournament < 1 or self.n_refine < 1:
            raise DomainError("generations >= 0, tournament >= 1 and n_refine >= 1 required")


@dataclass(frozen=True)
class Candidate:
    u: np.ndarray
    cost: float
    index: int


@dataclass(frozen=True)
class GAOutcome:
    candidates: list
    trace: tuple

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]


def _rank(costs):
    # stable ordering: cost ascending, then population index
    c = np.where(np.isfinite(costs), costs, np.inf)
    return np.lexsort((np.arange(len(c)), c))


def ga_search(problem, config: GAConfig = GAConfig()) -> GAOutcome:
    """Elitist real-coded GA over the normalized box; deterministic for a given seed."""
    d = problem.dim
    config.validate(d)
    rng = np.random.default_rng(config.seed)
    if d > 0:
        pop = qmc.LatinHypercube(d=d, seed=rng).random(config.population)
    else:
        pop = np.zeros((config.population, 0))
    costs = np.array([problem.cost(x) for x in pop])
    trace = []
    for _ in range(config.generations):
        order = _rank(costs)
        pop, costs = pop[order], costs[order]
        trace.append(float(costs[0]))
        children = [pop[i].copy() for i in range(config.elite)]
        child_costs = [costs[i] for i in range(config.elite)]
        while len(children) < config.population:
            p1 = pop[_tournament(rng, costs, config.tournament)]
            p2 = pop[_tournament(rng, costs, config.tournament)]
            if rng.random() < config.crossover_rate:
                a = config.blend_alpha
                g = rng.uniform(-a, 1.0 + a, d)
                child = p1 + g * (p2 - p1)
            else:
                child = p1.copy()
            mask = rng.random(d) < config.mutation_rate
            child = child + mask * rng.normal(0.0, config.mutation_scale, d)
            child = np.clip(child, 0.0, 1.0)
            children.append(child)
            child_costs.append(None)
        pop = np.array(children)
        costs = np.array([c if c is not None else problem.cost(x) for x, c in zip(pop, child_costs)])
    order = _rank(costs)
    pop, costs = pop[order], costs[order]
    trace.append(float(costs[0]))
    cands = [Candidate(pop[i], float(costs[i]), int(i)) for i in range(len(pop))]
    return GAOutcome(cands, tuple(trace))


def _tournament(rng, costs, size):
    idx = rng.integers(0, len(costs), size)
    # costs are already sorted, so the smallest index wins; ties resolve to the lower index
    return int(idx.min())


# ---------------------------------------------------------------------------
# gradient refinement


def cost_gradient(problem, u, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the cost in normalized coordinates.

    Near a bound the stencil is shifted inside the box (one-sided second
    order) so that no evaluation leaves it.
    """
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    f0 = None
    for i in range(len(u)):
        e = np.zeros_like(u)
        e[i] = step
        if u[i] - step < 0.0:
            f0 = problem.cost(u) if f0 is None else f0
            g[i] = (-3.0 * f0 + 4.0 * problem.cost(u + e) - problem.cost(u + 2 * e)) / (2 * step)
        elif u[i] + step > 1.0:
            f0 = problem.cost(u) if f0 is None else f0
            g[i] = (3.0 * f0 - 4.0 * problem.cost(u - e) + problem.cost(u - 2 * e)) / (2 * step)
        else:
            g[i] = (problem.cost(u + e) - problem.cost(u - e)) / (2 * step)
    return g


def kkt_conditions(u, grad, tol: float = 1e-10):
    """Projected-gradient residual and bound multipliers for ``min f(u), 0 <= u <= 1``.

    A coordinate at its lower bound carries multiplier ``max(g, 0)``, at
    its upper bound ``max(-g, 0)``; the residual is the infinity norm of the
    gradient with those multipliers removed.
    """
    u = np.asarray(u, dtype=float)
    g = np.asarray(grad, dtype=float)
    at_lo = u <= tol
    at_hi = u >= 1.0 - tol
    lower = np.where(at_lo, np.maximum(g, 0.0), 0.0)
    upper = np.where(at_hi, np.maximum(-g, 0.0), 0.0)
    pg = g - lower + upper
    res = float(np.max(np.abs(pg))) if len(pg) else 0.0
    return res, lower, upper


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    phi: float
    weights: tuple
    errors: tuple
    total_cost: float
    unweighted_total: float
    kkt_residual: float
    multipliers: dict
    converged: bool
    u: tuple
    ga_trace: tuple = ()
    refine_trace: tuple = ()
    seed_cost: float = float("nan")
    message: str = ""
    n_evaluations: int = 0
    diagnostics: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {k: float(v) for k, v in self.params.items()},
            "phi_deg": float(np.rad2deg(self.phi)),
            "weights": [float(x) for x in self.weights],
            "errors": [float(x) for x in self.errors],
            "total_cost": float(self.total_cost),
            "unweighted_total": float(self.unweighted_total),
            "kkt_residual": float(self.kkt_residual),
            "multipliers": {k: [float(a), float(b)] for k, (a, b) in self.multipliers.items()},
            "converged": bool(self.converged),
            "seed_cost": float(self.seed_cost),
            "ga_trace": [float(x) for x in self.ga_trace],
            "refine_trace": [float(x) for x in self.refine_trace],
            "n_evaluations": int(self.n_evaluations),
            "message": self.message,
            "diagnostics": list(self.diagnostics),
        }


def _result(problem, u, converged, message, trace=(), ga_trace=(), seed_cost=float("nan"), diagnostics=()):
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    grad = problem.gradient(u)
    res, lo, hi = kkt_conditions(u, grad)
    mult = {n: (float(a), float(b)) for n, a, b in zip(problem.names, lo, hi)}
    if isinstance(problem, FitProblem):
        zeta, w = problem.decode(u)
        errs = problem.errors(zeta)
        spec = problem.spec_for(zeta)
        params, phi, model = dict(spec.params), spec.phi, spec.kind
    else:
        zeta, w = dict(zip(problem.names, problem.point(u))), (1.0,)
        errs = (problem.cost(u),)
        params, phi, model = zeta, 0.0, "function"
    total = float(sum(wi * e for wi, e in zip(w, errs)))
    return FitResult(
        model=model, params=params, phi=float(phi), weights=tuple(float(x) for x in w),
        errors=tuple(float(e) for e in errs), total_cost=total, unweighted_total=float(sum(errs)),
        kkt_residual=res, multipliers=mult, converged=bool(converged), u=tuple(float(x) for x in u),
        ga_trace=tuple(ga_trace), refine_trace=tuple(trace), seed_cost=float(seed_cost),
        message=message, n_evaluations=int(problem.n_evaluations), diagnostics=tuple(diagnostics),
    )


def gradient_refine(candidate, problem, step: float = 1e-6, max_nfev: int | None = None,
                    ga_trace=()) -> FitResult:
    """Bounded trust-region least squares from a candidate point.

    The cost is a sum of (weighted) squared residuals, so the refinement
    works on the residual vector with a central-difference Jacobian and
    reflective handling of the box bounds. Never returns a point worse than
    the candidate.
    """
    u0 = np.asarray(getattr(candidate, "u", candidate), dtype=float)
    if u0.shape != (problem.dim,):
        raise DomainError(f"candidate has shape {u0.shape}, expected ({problem.dim},)")
    c0 = problem.cost(u0)
    if not np.isfinite(c0):
        raise DomainError("gradient refinement needs a feasible starting point")
    if problem.dim == 0:
        return _result(problem, u0, True, "nothing to optimize", (c0,), ga_trace, c0)
    best = [c0]
    trace = [c0]

    def fun(u):
        r = problem.residuals(u)
        c = float(r @ r)
        if c < best[0]:
            best[0] = c
        trace.append(best[0])
        return r

    # keep the start strictly inside the box, as the reflective method requires
    x0 = np.clip(u0, 1e-12, 1.0 - 1e-12)
    try:
        sol = sopt.least_squares(fun, x0, jac="3-point", bounds=(0.0, 1.0), method="trf",
                                 diff_step=step, x_scale="jac", ftol=1e-12, xtol=1e-14,
                                 gtol=1e-10, max_nfev=max_nfev or 50 * (problem.dim + 1))
        u, ok, msg = sol.x, sol.status > 0, sol.message
    except (ValueError, np.linalg.LinAlgError) as exc:
        u, ok, msg = u0, False, f"refinement failed: {exc}"
    if not problem.cost(u) <= c0:
        u, ok, msg = u0, False, f"refinement did not improve on its seed ({msg})"
    return _result(problem, u, ok, str(msg), _compress(trace), ga_trace, c0)


def _compress(trace):
    # running minimum, with consecutive repeats dropped
    out = []
    for c in np.minimum.accumulate(np.asarray(trace, dtype=float)):
        if not out or c < out[-1]:
            out.append(float(c))
    return tuple(out)


def hybrid_fit(problem, config: GAConfig = GAConfig()) -> FitResult:
    """GA search, then refine the ``config.n_refine`` best distinct candidates."""
    ga = ga_search(problem, config)
    seeds, seen = [], set()
    for cand in ga:
        key = tuple(np.round(cand.u, 12))
        if not np.isfinite(cand.cost) or key in seen:
            continue
        seen.add(key)
        seeds.append(cand)
        if len(seeds) == config.n_refine:
            break
    if not seeds:
        u = ga[0].u
        return _result(problem, u, False, "no feasible candidate found by the genetic search",
                       (), ga.trace, float("inf"), ("all GA candidates infeasible",))
    results, diags = [], []
    for cand in seeds:
        try:
            results.append(gradient_refine(cand, problem, ga_trace=ga.trace))
        except DomainError as exc:
            diags.append(f"candidate {cand.index}: {exc}")
    if not results:
        return _result(problem, seeds[0].u, False, "all refinements failed", (), ga.trace,
                       seeds[0].cost, tuple(diags))
    # first minimum wins, so ties keep the better-ranked GA seed
    best = min(range(len(results)), key=lambda i: (results[i].total_cost, i))
    r = results[best]
    if diags:
        r = FitResult(**{**r.__dict__, "diagnostics": r.diagnostics + tuple(diags)})
    return r
