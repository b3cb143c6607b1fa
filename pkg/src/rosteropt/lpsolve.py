"""LP solving for relaxations.

Two interchangeable backends sit behind :func:`solve_lp`:

* ``highs`` (default): scipy's HiGHS interface; fast and robust, used for
  all production solves.
* ``simplex``: the in-package bounded-variable revised simplex with a
  Bland's-rule anti-cycling fallback; the reference implementation, fully
  warm-startable, cross-checked against vertex enumeration in the tests.

Integrality flags on the model are ignored here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .milp import MilpModel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

FEAS_TOL = 1e-6
COST_TOL = 1e-7

DEFAULT_BACKEND = "highs"


@dataclass
class Basis:
    """Simplex basis snapshot for warm starts."""

    basic: np.ndarray     # row-count many variable indices (incl. slacks)
    at_upper: np.ndarray  # bool per variable (nonbasic position)


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    basis: Optional[Basis] = None


def solve_lp(model: MilpModel, warm_start: Optional[Basis] = None,
             backend: Optional[str] = None,
             iteration_limit: int = 50000) -> LpSolution:
    backend = backend or DEFAULT_BACKEND
    if backend == "highs":
        return _solve_highs(model, iteration_limit)
    if backend == "simplex":
        return RevisedSimplex(model).solve(warm_start, iteration_limit)
    raise ValueError(f"unknown LP backend {backend!r}")


# ---------------------------------------------------------------------------
# HiGHS backend

def _row_split(model: MilpModel):
    """Split ranged rows into equality and one-sided inequality blocks.

    Cached on the model object; row structure never changes across the
    bound-tightening re-solves of branch and bound.
    """
    cache = getattr(model, "_row_split_cache", None)
    if cache is not None:
        return cache
    A = model.rows.tocsr()
    eq = model.row_lb == model.row_ub
    ub_mask = ~eq & np.isfinite(model.row_ub)
    lb_mask = ~eq & np.isfinite(model.row_lb)
    parts, rhs = [], []
    if ub_mask.any():
        parts.append(A[ub_mask])
        rhs.append(model.row_ub[ub_mask])
    if lb_mask.any():
        parts.append(-A[lb_mask])
        rhs.append(-model.row_lb[lb_mask])
    A_ub = sp.vstack(parts).tocsr() if parts else None
    b_ub = np.concatenate(rhs) if rhs else None
    A_eq = A[eq] if eq.any() else None
    b_eq = model.row_lb[eq] if eq.any() else None
    cache = (A_ub, b_ub, A_eq, b_eq)
    model._row_split_cache = cache
    return cache


def _solve_highs(model: MilpModel, iteration_limit: int) -> LpSolution:
    A_ub, b_ub, A_eq, b_eq = _row_split(model)
    res = linprog(
        model.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=np.column_stack([model.var_lb, model.var_ub]),
        method="highs",
        options={"maxiter": iteration_limit, "presolve": True},
    )
    status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(
        res.status, INFEASIBLE)
    x = res.x if res.x is not None else None
    obj = float(res.fun) + model.c0 if status == OPTIMAL else float("nan")
    return LpSolution(status, x, obj, int(res.nit) if res.nit else 0)


# ---------------------------------------------------------------------------
# Revised simplex backend (bounded variables, dense basis inverse)

STALL_LIMIT = 60        # consecutive non-improving pivots before Bland's rule
REFACTOR_EVERY = 100


class RevisedSimplex:
    """Primal simplex over the computational form [A, -I] [x; s] = 0 with
    bounded structural and slack variables.

    Phase 1 minimizes total bound infeasibility of the basic variables with
    a composite cost vector; phase 2 optimizes the true objective.
    """

    def __init__(self, model: MilpModel):
        self.model = model
        n, mr = model.num_vars, model.num_rows
        self.n_struct = n
        self.mr = mr
        self.N = n + mr
        A = model.rows.tocsc()
        self.Afull = sp.hstack([A, -sp.identity(mr, format="csc")]).tocsc()
        self.lb = np.concatenate([model.var_lb, model.row_lb])
        self.ub = np.concatenate([model.var_ub, model.row_ub])
        self.c = np.concatenate([model.c, np.zeros(mr)])

    def column(self, j: int) -> np.ndarray:
        return self.Afull[:, j].toarray().ravel()

    def _set_basis(self, basic: np.ndarray, at_upper: np.ndarray) -> bool:
        self.basic = basic.copy()
        self.in_basis = np.zeros(self.N, dtype=bool)
        self.in_basis[basic] = True
        self.at_upper = at_upper.copy()
        B = self.Afull[:, self.basic].toarray()
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.isfinite(self.Binv).all():
            return False
        self._recompute_values()
        return True

    def _nonbasic_value(self, j: int) -> float:
        if self.at_upper[j] and np.isfinite(self.ub[j]):
            return self.ub[j]
        if np.isfinite(self.lb[j]):
            return self.lb[j]
        if np.isfinite(self.ub[j]):
            return self.ub[j]
        return 0.0

    def _recompute_values(self):
        xN = np.zeros(self.N)
        nb = ~self.in_basis
        for j in np.nonzero(nb)[0]:
            xN[j] = self._nonbasic_value(j)
        rhs = -(self.Afull @ xN)
        self.xB = self.Binv @ rhs
        self.xN = xN

    def _refactor(self) -> bool:
        B = self.Afull[:, self.basic].toarray()
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        self._recompute_values()
        return True

    def _infeasibility(self):
        below = np.maximum(self.lb[self.basic] - self.xB, 0.0)
        above = np.maximum(self.xB - self.ub[self.basic], 0.0)
        below[~np.isfinite(below)] = 0.0
        above[~np.isfinite(above)] = 0.0
        return below.sum() + above.sum()

    def solve(self, warm_start: Optional[Basis], iteration_limit: int) -> LpSolution:
        started = False
        if warm_start is not None and len(warm_start.basic) == self.mr:
            au = np.zeros(self.N, dtype=bool)
            au[:len(warm_start.at_upper)] = warm_start.at_upper
            started = self._set_basis(np.asarray(warm_start.basic), au)
        if not started:
            # all-slack basis is always nonsingular
            basic = np.arange(self.n_struct, self.N)
            at_upper = np.zeros(self.N, dtype=bool)
            finite_ub = np.isfinite(self.ub) & ~np.isfinite(self.lb)
            at_upper[finite_ub] = True
            self._set_basis(basic, at_upper)

        self.iterations = 0
        status = self._phase(phase=1, iteration_limit=iteration_limit)
        if status == ITERATION_LIMIT:
            return LpSolution(ITERATION_LIMIT, None, float("nan"), self.iterations)
        scale = np.abs(self.xB).max() if self.xB.size else 0.0
        if self._infeasibility() > FEAS_TOL * max(1.0, scale):
            return LpSolution(INFEASIBLE, None, float("nan"), self.iterations)
        status = self._phase(phase=2, iteration_limit=iteration_limit)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, None, float("-inf"), self.iterations)
        if status == ITERATION_LIMIT:
            return LpSolution(ITERATION_LIMIT, None, float("nan"), self.iterations)

        full = self.xN.copy()
        full[self.basic] = self.xB
        x = full[:self.n_struct]
        obj = float(self.model.c @ x) + self.model.c0
        basis = Basis(self.basic.copy(), self.at_upper[:self.n_struct].copy())
        return LpSolution(OPTIMAL, x, obj, self.iterations, basis)

    # -- core iteration ----------------------------------------------------

    def _phase1_cost(self) -> np.ndarray:
        cB = np.zeros(self.mr)
        cB[self.xB < self.lb[self.basic] - FEAS_TOL] = -1.0
        cB[self.xB > self.ub[self.basic] + FEAS_TOL] = 1.0
        return cB

    def _phase(self, phase: int, iteration_limit: int) -> str:
        stall = 0
        last_metric = np.inf
        pivots_since_refactor = 0
        while True:
            if self.iterations >= iteration_limit:
                return ITERATION_LIMIT
            if phase == 1:
                infeas = self._infeasibility()
                if infeas <= FEAS_TOL:
                    return OPTIMAL
                cB = self._phase1_cost()
                metric = infeas
            else:
                cB = self.c[self.basic]
                metric = float(cB @ self.xB + self.c[~self.in_basis]
                               @ self.xN[~self.in_basis])
            y = cB @ self.Binv
            nb = np.nonzero(~self.in_basis)[0]
            cn = self.c[nb] if phase == 2 else np.zeros(len(nb))
            d = cn - np.asarray(y @ self.Afull[:, nb].tocsc().toarray()).ravel() \
                if len(nb) < 400 else cn - (self.Afull[:, nb].T @ y)
            fixed = (self.ub[nb] - self.lb[nb]) <= FEAS_TOL
            at_up = self.at_upper[nb]
            enter_low = (d < -COST_TOL) & ~at_up & ~fixed
            enter_up = (d > COST_TOL) & at_up & ~fixed
            eligible = np.nonzero(enter_low | enter_up)[0]
            if len(eligible) == 0:
                return OPTIMAL
            if stall > STALL_LIMIT:
                pick = eligible[0]  # Bland: lowest index
            else:
                pick = eligible[int(np.argmax(np.abs(d[eligible])))]
            j = int(nb[pick])
            direction = -1.0 if self.at_upper[j] else 1.0

            w = self.Binv @ self.column(j)
            t, leave_pos, leave_bound = self._ratio_test(j, direction, w, phase)
            if t is None:
                if phase == 1:
                    # cannot reduce infeasibility along an unbounded ray: pick
                    # next candidate via Bland to avoid stalling
                    return OPTIMAL
                return UNBOUNDED

            self.iterations += 1
            if leave_pos is None:
                # bound flip: variable moves to its other bound
                self.at_upper[j] = not self.at_upper[j]
                self.xN[j] = self._nonbasic_value(j)
                self.xB = self.xB - direction * t * w
            else:
                leaving = int(self.basic[leave_pos])
                self.xB = self.xB - direction * t * w
                entering_value = self.xN[j] + direction * t
                self.basic[leave_pos] = j
                self.in_basis[j] = True
                self.in_basis[leaving] = False
                self.at_upper[leaving] = leave_bound == "upper"
                self.xN[leaving] = self._nonbasic_value(leaving)
                self.xN[j] = 0.0
                # rank-one update of the inverse
                wj = w[leave_pos]
                eta = -w / wj
                eta[leave_pos] = 1.0 / wj
                row = self.Binv[leave_pos, :].copy()
                self.Binv += np.outer(eta, row)
                self.Binv[leave_pos, :] = row / wj
                self.xB[leave_pos] = entering_value
                pivots_since_refactor += 1
                if pivots_since_refactor >= REFACTOR_EVERY:
                    self._refactor()
                    pivots_since_refactor = 0

            new_metric = (self._infeasibility() if phase == 1 else
                          float(self.c[self.basic] @ self.xB))
            if new_metric < metric - 1e-10:
                stall = 0
            else:
                stall += 1
            last_metric = new_metric

    def _ratio_test(self, j: int, direction: float, w: np.ndarray, phase: int):
        """Max step for entering variable j; returns (t, leaving position,
        bound hit) with position None for a bound flip."""
        best_t = np.inf
        leave_pos = None
        leave_bound = None
        lbB = self.lb[self.basic]
        ubB = self.ub[self.basic]
        delta = -direction * w  # xB change per unit step
        for i in range(self.mr):
            di = delta[i]
            if abs(di) <= 1e-10:
                continue
            xi = self.xB[i]
            if phase == 1 and xi < lbB[i] - FEAS_TOL:
                # infeasible below: blocks only when climbing back to lb
                if di > 0:
                    t = (lbB[i] - xi) / di
                    bound = "lower"
                else:
                    continue
            elif phase == 1 and xi > ubB[i] + FEAS_TOL:
                if di < 0:
                    t = (ubB[i] - xi) / di
                    bound = "upper"
                else:
                    continue
            else:
                if di > 0:
                    if not np.isfinite(ubB[i]):
                        continue
                    t = (ubB[i] - xi) / di
                    bound = "upper"
                else:
                    if not np.isfinite(lbB[i]):
                        continue
                    t = (lbB[i] - xi) / di
                    bound = "lower"
            t = max(t, 0.0)
            if t < best_t - 1e-12 or (t < best_t + 1e-12 and leave_pos is not None
                                      and self.basic[i] < self.basic[leave_pos]):
                best_t = t
                leave_pos = i
                leave_bound = bound

        flip_t = self.ub[j] - self.lb[j]
        if np.isfinite(flip_t) and flip_t < best_t - 1e-12:
            return flip_t, None, None
        if not np.isfinite(best_t):
            return None, None, None
        return best_t, leave_pos, leave_bound
