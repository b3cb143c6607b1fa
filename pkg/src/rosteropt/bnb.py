"""Branch and bound over the LP solver.

Produces a pool of diverse feasible integer solutions, a valid global lower
bound, and hosts the relax-and-fix pre-processing step.  Single-threaded
and deterministic for a fixed model.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lpsolve import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp
from .milp import INT_TOL, MilpModel

ProgressFn = Callable[[dict], None]


@dataclass
class BnbConfig:
    pool_size: int = 6
    time_limit: float = 60.0
    gap_target: float = 0.0
    node_limit: int = 100000
    backend: Optional[str] = None
    # candidates within this factor of the worst pool member may still enter
    # through the diversity replacement rule
    diversity_slack: float = 0.10
    # run a nearest-integer dive from the current node every this many nodes
    # while the pool is not yet full (0 disables diving)
    dive_interval: int = 40

    def __post_init__(self):
        if self.pool_size < 2:
            raise ValueError("pool_size must be >= 2")
        if not (0.0 <= self.gap_target <= 1.0):
            raise ValueError("gap_target must lie in [0, 1]")


@dataclass
class PoolEntry:
    vector: np.ndarray
    objective: float


@dataclass
class BnbResult:
    pool: list[PoolEntry]
    best_bound: float
    status: str  # optimal | gap_reached | time_limit | node_limit | infeasible
    node_count: int

    @property
    def incumbent(self) -> Optional[PoolEntry]:
        return self.pool[0] if self.pool else None


@dataclass
class FixReport:
    fixed: int
    free: int
    lp_objective: float


def relax_and_fix(model: MilpModel, backend: Optional[str] = None,
                  ) -> tuple[MilpModel, FixReport]:
    """Solve the LP relaxation and fix every integer variable that lands on
    an integral value.  The reduced model's feasible set is a subset of the
    original's."""
    sol = solve_lp(model, backend=backend)
    if sol.status == INFEASIBLE:
        raise InfeasibleModelError("LP relaxation is infeasible")
    if sol.status == UNBOUNDED:
        raise ValueError("LP relaxation is unbounded; model is malformed")
    if sol.status != OPTIMAL:
        raise ValueError(f"LP relaxation did not solve: {sol.status}")

    reduced = model.copy()
    reduced._row_split_cache = getattr(model, "_row_split_cache", None)
    idx = np.nonzero(model.integrality)[0]
    vals = sol.x[idx]
    rounded = np.rint(vals)
    integral = np.abs(vals - rounded) <= INT_TOL
    fix_idx = idx[integral]
    fix_vals = rounded[integral]
    reduced.var_lb[fix_idx] = fix_vals
    reduced.var_ub[fix_idx] = fix_vals
    report = FixReport(fixed=int(integral.sum()),
                       free=int((~integral).sum()),
                       lp_objective=sol.objective)
    return reduced, report


class InfeasibleModelError(Exception):
    pass


class NoSolutionError(Exception):
    """Search limit reached with an empty solution pool."""


@dataclass
class _Node:
    bound: float
    patches: list[tuple[int, float, float]]  # (var, lb, ub) along the path
    solution: np.ndarray


class SolutionPool:
    """Fixed-size pool ordered by objective.

    While below capacity, any new distinct solution enters.  When full, a
    better-than-worst candidate replaces the worst; a candidate within the
    diversity slack of the worst replaces its nearest member if that grows
    the minimum pairwise distance.
    """

    def __init__(self, capacity: int, int_index: np.ndarray, slack: float):
        self.capacity = capacity
        self.int_index = int_index
        self.slack = slack
        self.entries: list[PoolEntry] = []
        self._keys: set[bytes] = set()

    def _key(self, vector: np.ndarray) -> bytes:
        return np.rint(vector[self.int_index]).astype(np.int8).tobytes()

    def _distance(self, a: PoolEntry, b: PoolEntry) -> float:
        xa = np.rint(a.vector[self.int_index])
        xb = np.rint(b.vector[self.int_index])
        return float((xa != xb).mean()) if len(self.int_index) else 0.0

    def _min_pairwise(self, entries: list[PoolEntry]) -> float:
        if len(entries) < 2:
            return 0.0
        return min(self._distance(a, b) for a, b in itertools.combinations(entries, 2))

    def offer(self, vector: np.ndarray, objective: float) -> bool:
        key = self._key(vector)
        if key in self._keys:
            return False
        entry = PoolEntry(vector.copy(), objective)
        if len(self.entries) < self.capacity:
            self.entries.append(entry)
            self._keys.add(key)
            self.entries.sort(key=lambda p: p.objective)
            return True
        worst = self.entries[-1]
        if objective < worst.objective:
            self._keys.discard(self._key(worst.vector))
            self.entries[-1] = entry
            self._keys.add(key)
            self.entries.sort(key=lambda p: p.objective)
            return True
        if objective <= worst.objective * (1.0 + self.slack):
            nearest = min(range(len(self.entries)),
                          key=lambda i: self._distance(self.entries[i], entry))
            trial = list(self.entries)
            trial[nearest] = entry
            if self._min_pairwise(trial) > self._min_pairwise(self.entries):
                self._keys.discard(self._key(self.entries[nearest].vector))
                self.entries[nearest] = entry
                self._keys.add(key)
                self.entries.sort(key=lambda p: p.objective)
                return True
        return False

    @property
    def worst_objective(self) -> float:
        return self.entries[-1].objective if self.entries else float("inf")

    @property
    def best_objective(self) -> float:
        return self.entries[0].objective if self.entries else float("inf")


def _fractional_ints(model: MilpModel, x: np.ndarray) -> np.ndarray:
    idx = np.nonzero(model.integrality)[0]
    frac = np.abs(x[idx] - np.rint(x[idx]))
    return idx[frac > INT_TOL]


def solve_bnb(model: MilpModel, config: BnbConfig,
              progress: Optional[ProgressFn] = None,
              incumbent: Optional[tuple[np.ndarray, float]] = None) -> BnbResult:
    """Best-bound branch and bound with most-fractional branching.

    Every integral leaf is offered to the solution pool.  ``best_bound`` is
    the minimum over open-node relaxation values, or the incumbent once the
    tree is exhausted.  A known feasible point can be passed as
    ``incumbent`` (vector, objective) to seed the pool and enable pruning
    from the start.
    """
    start = time.monotonic()
    int_index = np.nonzero(model.integrality)[0]
    pool = SolutionPool(config.pool_size, int_index, config.diversity_slack)
    if incumbent is not None:
        pool.offer(np.asarray(incumbent[0], dtype=float), float(incumbent[1]))

    base_lb = model.var_lb.copy()
    base_ub = model.var_ub.copy()

    def with_patches(patches):
        model.var_lb[:] = base_lb
        model.var_ub[:] = base_ub
        for var, lo, hi in patches:
            model.var_lb[var] = max(model.var_lb[var], lo)
            model.var_ub[var] = min(model.var_ub[var], hi)

    def restore():
        model.var_lb[:] = base_lb
        model.var_ub[:] = base_ub

    root = solve_lp(model, backend=config.backend)
    if root.status == INFEASIBLE:
        return BnbResult([], float("inf"), "infeasible", 1)
    if root.status != OPTIMAL:
        raise ValueError(f"root relaxation failed: {root.status}")

    def dive(node):
        """Primal rounding dive: round batches of near-integral variables to
        their LP values and re-solve, backing off to smaller batches when a
        rounding is infeasible; feeds any integral endpoint to the pool.  The
        tree itself is untouched."""
        nonlocal node_count
        patches = list(node.patches)
        sol = node.solution
        budget = 80
        while budget > 0:
            if time.monotonic() - start > config.time_limit:
                return
            frac = _fractional_ints(model, sol)
            if len(frac) == 0:
                obj = float(model.c @ sol) + model.c0
                pool.offer(sol, obj)
                return
            # closest-to-integral first; always include at least one variable
            dist = np.abs(sol[frac] - np.rint(sol[frac]))
            order = frac[np.argsort(dist, kind="stable")]
            batch = len(order)
            while budget > 0:
                chosen = order[:batch]
                vals = np.rint(sol[chosen])
                trial = patches + [(int(v), float(r), float(r))
                                   for v, r in zip(chosen, vals)]
                with_patches(trial)
                child = solve_lp(model, backend=config.backend)
                node_count += 1
                budget -= 1
                if child.status == OPTIMAL:
                    patches = trial
                    sol = child.x
                    break
                if batch == 1:
                    # flip the single stubborn variable the other way
                    var = int(order[0])
                    other = (np.floor(sol[var]) if vals[0] > sol[var]
                             else np.ceil(sol[var]))
                    with_patches(patches + [(var, float(other), float(other))])
                    child = solve_lp(model, backend=config.backend)
                    node_count += 1
                    budget -= 1
                    if child.status == OPTIMAL:
                        patches = patches + [(var, float(other), float(other))]
                        sol = child.x
                        break
                    return  # dead end
                batch = max(1, batch // 2)

    counter = itertools.count()
    heap: list[tuple[float, int, _Node]] = []
    heapq.heappush(heap, (root.objective, next(counter),
                          _Node(root.objective, [], root.x)))
    node_count = 1
    next_dive = 1
    status = "optimal"

    def emit(best_bound):
        # a truthy return from the callback requests an early stop
        if progress is not None:
            return progress({
                "node_count": node_count,
                "incumbent": pool.best_objective,
                "best_bound": best_bound,
                "elapsed": time.monotonic() - start,
                "pool_full": len(pool.entries) >= config.pool_size,
            })
        return None

    def current_bound():
        bound = heap[0][0] if heap else pool.best_objective
        return min(bound, pool.best_objective)

    try:
        while heap:
            if time.monotonic() - start > config.time_limit:
                status = "time_limit"
                break
            if node_count >= config.node_limit:
                status = "node_limit"
                break
            bound, _, node = heapq.heappop(heap)

            incumbent = pool.best_objective
            if config.gap_target > 0 and pool.entries:
                gap = max(incumbent - min(bound, incumbent), 0.0) \
                    / max(abs(incumbent), 1e-9)
                if gap <= config.gap_target:
                    heapq.heappush(heap, (bound, next(counter), node))
                    status = "gap_reached"
                    break
            # prune: cannot beat the incumbent nor enter a full pool
            if len(pool.entries) >= config.pool_size:
                cutoff = max(incumbent,
                             pool.worst_objective * (1.0 + config.diversity_slack))
                if bound > cutoff + 1e-9:
                    continue

            if config.dive_interval and len(pool.entries) < config.pool_size \
                    and node_count >= next_dive:
                dive(node)
                next_dive = node_count + config.dive_interval
                if emit(min(current_bound(), bound)):
                    status = "stopped"
                    break

            frac = _fractional_ints(model, node.solution)
            if len(frac) == 0:
                obj = float(model.c @ node.solution) + model.c0
                pool.offer(node.solution, obj)
                if emit(min(current_bound(), bound)):
                    status = "stopped"
                    break
                continue

            # most-fractional branching, ties broken by lowest index
            fvals = np.abs(node.solution[frac] - np.rint(node.solution[frac]))
            order = np.lexsort((frac, -fvals))
            var = int(frac[order[0]])
            val = node.solution[var]
            for lo, hi in ((-np.inf, np.floor(val)), (np.ceil(val), np.inf)):
                patches = node.patches + [(var, lo, hi)]
                with_patches(patches)
                child = solve_lp(model, backend=config.backend)
                node_count += 1
                if child.status != OPTIMAL:
                    continue
                heapq.heappush(heap, (child.objective, next(counter),
                                      _Node(child.objective, patches, child.x)))
            if emit(current_bound()):
                status = "stopped"
                break
    finally:
        restore()

    best_bound = heap[0][0] if heap else pool.best_objective
    best_bound = min(best_bound, pool.best_objective)
    if status == "optimal" and not heap and not pool.entries:
        return BnbResult([], float("inf"), "infeasible", node_count)
    if status in ("time_limit", "node_limit", "stopped") and not pool.entries:
        raise NoSolutionError(f"{status} reached with an empty pool")
    emit(best_bound)
    return BnbResult(pool.entries, best_bound, status, node_count)
