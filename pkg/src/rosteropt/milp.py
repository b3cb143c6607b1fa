"""Translation of rostering instances into generic minimization MILPs.

Variable layout (base roster model):

* X block: one binary per (employee, block, shift type); ineligible
  combinations carry [0, 0] bounds.
* y block: rest-window binaries y[e, t] indicating a 24-hour rest window
  starting at block t.
* workload deviation pairs and per-type max-deviation variables for the
  L1/Linf objective terms, and a deviation pair per (employee, block) for
  the preference term.

Event-driven and pattern objectives are linear in X (X is binary), so they
only touch the cost vector and a constant offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .feasibility import validate_instance
from .model import (
    ALL_DAY, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, EIGHT_HOUR, NO_PREF,
    ObjectiveWeights, Roster, RosterInstance, block_index,
)
from .patterns import (
    N_VARIANTS, WorkPattern, company_preference_tensor, conflict_count,
    variant_tensor,
)

INT_TOL = 1e-6
INF = float("inf")


class LockConflictError(ValueError):
    """Locked prefix of an event-driven model clashes with new parameters."""

    def __init__(self, conflicts):
        self.conflicts = conflicts
        super().__init__(f"locked prefix conflicts at {conflicts[:5]}"
                         + ("..." if len(conflicts) > 5 else ""))


@dataclass(eq=False)
class MilpModel:
    num_vars: int
    c: np.ndarray
    c0: float
    rows: sp.csr_matrix
    row_lb: np.ndarray
    row_ub: np.ndarray
    var_lb: np.ndarray
    var_ub: np.ndarray
    integrality: np.ndarray  # bool per variable

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def num_integer(self) -> int:
        return int(self.integrality.sum())

    @property
    def num_continuous(self) -> int:
        return self.num_vars - self.num_integer

    def copy(self) -> "MilpModel":
        return MilpModel(self.num_vars, self.c.copy(), self.c0, self.rows,
                         self.row_lb.copy(), self.row_ub.copy(),
                         self.var_lb.copy(), self.var_ub.copy(),
                         self.integrality.copy())

    def check_point(self, v: np.ndarray, tol: float = 1e-6) -> bool:
        """True iff the full vector satisfies all rows and bounds."""
        if (v < self.var_lb - tol).any() or (v > self.var_ub + tol).any():
            return False
        av = self.rows @ v
        return bool((av >= self.row_lb - tol).all() and (av <= self.row_ub + tol).all())


class _RowBuilder:
    def __init__(self):
        self.data, self.rix, self.cix = [], [], []
        self.lb, self.ub = [], []

    def add(self, cols, coefs, lb, ub):
        r = len(self.lb)
        self.rix.extend([r] * len(cols))
        self.cix.extend(cols)
        self.data.extend(coefs)
        self.lb.append(lb)
        self.ub.append(ub)

    def matrix(self, num_vars) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
        A = sp.coo_matrix((self.data, (self.rix, self.cix)),
                          shape=(len(self.lb), num_vars)).tocsr()
        return A, np.array(self.lb, dtype=float), np.array(self.ub, dtype=float)


@dataclass(eq=False)
class VariableMap:
    """Bijection between model variables and roster semantics."""

    n: int
    m: int
    s: int
    x_index: np.ndarray        # (n, m, s)
    y_index: np.ndarray        # (n, m - 2)
    dev1_plus: np.ndarray      # (n, s)
    dev1_minus: np.ndarray
    u1: np.ndarray             # (s,)
    dev2_plus: np.ndarray
    dev2_minus: np.ndarray
    u2: np.ndarray
    dev3_plus: np.ndarray      # (n, m)
    dev3_minus: np.ndarray
    num_vars: int = 0

    @property
    def x_slice(self) -> slice:
        return slice(0, self.n * self.m * self.s)

    def roster_values(self, v: np.ndarray) -> np.ndarray:
        return v[self.x_slice].reshape(self.n, self.m, self.s)


def extract_roster(var_map: VariableMap, solution: np.ndarray,
                   tol: float = INT_TOL) -> Roster:
    """Round the X block to a binary tensor; error if meaningfully fractional."""
    xs = var_map.roster_values(solution)
    rounded = np.rint(xs)
    if np.abs(xs - rounded).max() > tol:
        e, j, k = np.unravel_index(int(np.abs(xs - rounded).argmax()), xs.shape)
        raise ValueError(
            f"fractional assignment value {xs[e, j, k]:.6f} at ({e}, {j}, {k})")
    return Roster(rounded.astype(np.int8))


def encode_roster(instance: RosterInstance, var_map: VariableMap,
                  roster: Roster) -> np.ndarray:
    """Full model vector for a given roster with tight auxiliary values.

    Rest-window binaries are set greedily to their maximum packing; deviation
    pairs and max-deviation variables take their minimal consistent values.
    """
    from .objective import weekend_workload_matrix, workload_matrix

    v = np.zeros(var_map.num_vars)
    x = roster.x
    v[var_map.x_slice] = x.reshape(-1)

    occupied = x.sum(axis=2) > 0
    for e in range(var_map.n):
        t = 0
        while t <= var_map.m - 3:
            if not occupied[e, t:t + 3].any():
                v[var_map.y_index[e, t]] = 1.0
                t += 3
            else:
                t += 1

    W = workload_matrix(instance, x)
    WG = weekend_workload_matrix(instance, x)
    d1 = instance.workload_targets - W
    d2 = instance.weekend_targets - WG
    v[var_map.dev1_plus.reshape(-1)] = np.maximum(d1, 0).reshape(-1)
    v[var_map.dev1_minus.reshape(-1)] = np.maximum(-d1, 0).reshape(-1)
    v[var_map.u1] = np.abs(d1).max(axis=0) if var_map.n else 0.0
    v[var_map.dev2_plus.reshape(-1)] = np.maximum(d2, 0).reshape(-1)
    v[var_map.dev2_minus.reshape(-1)] = np.maximum(-d2, 0).reshape(-1)
    v[var_map.u2] = np.abs(d2).max(axis=0) if var_map.n else 0.0

    d3 = x.sum(axis=2) - instance.preferences  # meaningful only on non-null slots
    nonnull = instance.preferences != NO_PREF
    d3 = np.where(nonnull, d3, 0)
    v[var_map.dev3_plus.reshape(-1)] = np.maximum(d3, 0).reshape(-1)
    v[var_map.dev3_minus.reshape(-1)] = np.maximum(-d3, 0).reshape(-1)
    return v


def build_milp(instance: RosterInstance, weights: ObjectiveWeights,
               ) -> tuple[MilpModel, VariableMap]:
    """Encode the full hard-constraint set plus the weighted objective."""
    report = validate_instance(instance)
    if not report.ok:
        raise ValueError(f"invalid instance: {report.problems}")
    weights.validate()
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types

    counter = [0]

    def alloc(shape) -> np.ndarray:
        size = int(np.prod(shape))
        idx = np.arange(counter[0], counter[0] + size).reshape(shape)
        counter[0] += size
        return idx

    x_index = alloc((n, m, s))
    y_index = alloc((n, m - 2))
    dev1p, dev1m = alloc((n, s)), alloc((n, s))
    u1 = alloc((s,))
    dev2p, dev2m = alloc((n, s)), alloc((n, s))
    u2 = alloc((s,))
    dev3p, dev3m = alloc((n, m)), alloc((n, m))
    num_vars = counter[0]

    vm = VariableMap(n, m, s, x_index, y_index, dev1p, dev1m, u1,
                     dev2p, dev2m, u2, dev3p, dev3m, num_vars)

    lb = np.zeros(num_vars)
    ub = np.full(num_vars, INF)
    ub[x_index.reshape(-1)] = 1.0
    ub[y_index.reshape(-1)] = 1.0
    integrality = np.zeros(num_vars, dtype=bool)
    integrality[x_index.reshape(-1)] = True
    integrality[y_index.reshape(-1)] = True

    # fold eligibility into variable bounds (rows below keep the published
    # constraint structure; bounds make branching tighter)
    eligible = np.broadcast_to(
        (instance.availability[:, :, None] == 1)
        & (instance.vacation[:, :, None] == 0), (n, m, s)).copy()
    for k in range(s):
        lic = instance.licensed(k)
        eligible[:, :, k] &= lic[:, None]
    ub[x_index[~eligible]] = 0.0
    # preference deviation pairs exist on every slot; null slots are fixed to 0
    nonnull = instance.preferences != NO_PREF
    ub[dev3p[~nonnull]] = 0.0
    ub[dev3m[~nonnull]] = 0.0

    rb = _RowBuilder()

    # at most one shift type per (employee, block)
    for e in range(n):
        for j in range(m):
            rb.add(list(x_index[e, j, :]), [1.0] * s, -INF, 1.0)

    # license compliance
    for k in range(s):
        for e in instance.no_license[k]:
            for j in range(m):
                rb.add([x_index[e, j, k]], [1.0], 0.0, 0.0)

    # all-day types occupy whole days
    for k in range(s):
        if instance.shift_kinds[k] != ALL_DAY:
            continue
        for e in range(n):
            if e in instance.no_license[k]:
                continue
            for d in range(instance.n_days):
                j0 = block_index(d, 0)
                rb.add([x_index[e, j0, k], x_index[e, j0 + 1, k]],
                       [1.0, -1.0], 0.0, 0.0)
                rb.add([x_index[e, j0, k], x_index[e, j0 + 2, k]],
                       [1.0, -1.0], 0.0, 0.0)

    # availability and vacation
    for e in range(n):
        for j in range(m):
            cap_a = float(instance.availability[e, j])
            cap_v = 1.0 - float(instance.vacation[e, j])
            for k in range(s):
                rb.add([x_index[e, j, k]], [1.0], -INF, cap_a)
                rb.add([x_index[e, j, k]], [1.0], -INF, cap_v)

    # 16 hours of rest between eight-hour shifts of the same type
    for k in range(s):
        if instance.shift_kinds[k] != EIGHT_HOUR:
            continue
        for e in range(n):
            if e in instance.no_license[k]:
                continue
            for t in range(m - 2):
                rb.add(list(x_index[e, t:t + 3, k]), [1.0] * 3, -INF, 1.0)

    # weekly shift-count window for eight-hour types (ranged row)
    for k in range(s):
        if instance.shift_kinds[k] != EIGHT_HOUR:
            continue
        for e in range(n):
            if e in instance.no_license[k]:
                continue
            for t in range(instance.weeks):
                cols = list(x_index[e, t * BLOCKS_PER_WEEK:(t + 1) * BLOCKS_PER_WEEK, k])
                rb.add(cols, [1.0] * len(cols),
                       float(instance.min_shifts_per_week),
                       float(instance.max_shifts_per_week))

    # rest Sundays: total Sunday blocks worked <= w - l_min
    sb = list(instance.sunday_block_set)
    for e in range(n):
        cols = [x_index[e, j, k] for j in sb for k in range(s)]
        rb.add(cols, [1.0] * len(cols), -INF,
               float(instance.weeks - instance.min_rest_sundays))

    # exact cover
    for j in range(m):
        for k in range(s):
            rb.add(list(x_index[:, j, k]), [1.0] * n,
                   float(instance.cover[j, k]), float(instance.cover[j, k]))

    # rest-day windows: y[e, t] = 1 only if blocks t..t+2 are all free;
    # overlap exclusion keeps chosen windows disjoint
    for e in range(n):
        for t in range(m - 2):
            for i in range(3):
                cols = [y_index[e, t]] + list(x_index[e, t + i, :])
                rb.add(cols, [1.0] * len(cols), -INF, 1.0)
        for t in range(m - 4):
            rb.add([y_index[e, t], y_index[e, t + 1], y_index[e, t + 2]],
                   [1.0] * 3, -INF, 1.0)
        rb.add(list(y_index[e, :]), [1.0] * (m - 2),
               float(instance.min_rest_days), INF)

    # forbidden sequences: k_prev on day d excludes k_next on morning of d+1
    for k_prev, k_next in instance.forbidden_sequences:
        for e in range(n):
            if e in instance.no_license[k_prev] or e in instance.no_license[k_next]:
                continue
            for d in range(instance.n_days - 1):
                jm = block_index(d + 1, 0)
                for b in range(3):
                    rb.add([x_index[e, jm, k_next],
                            x_index[e, block_index(d, b), k_prev]],
                           [1.0, 1.0], -INF, 1.0)

    # objective linearization rows
    c = np.zeros(num_vars)
    l1w, l2w, l3w = weights.lam
    t1w, t2w, t3w = weights.theta
    wb = instance.weekend_block_set
    for k in range(s):
        inv = 1.0 / instance.duty_blocks(k)
        for e in range(n):
            cols = list(x_index[e, :, k])
            coefs = [inv] * m
            # workload deviation: W + dev+ - dev- = T
            rb.add(cols + [dev1p[e, k], dev1m[e, k]], coefs + [1.0, -1.0],
                   float(instance.workload_targets[e, k]),
                   float(instance.workload_targets[e, k]))
            # max-deviation bounds: u >= |T - W|
            rb.add(cols + [u1[k]], coefs + [1.0],
                   float(instance.workload_targets[e, k]), INF)
            rb.add(cols + [u1[k]], coefs + [-1.0],
                   -INF, float(instance.workload_targets[e, k]))
            wcols = [x_index[e, j, k] for j in wb]
            wcoefs = [inv] * len(wcols)
            rb.add(wcols + [dev2p[e, k], dev2m[e, k]], wcoefs + [1.0, -1.0],
                   float(instance.weekend_targets[e, k]),
                   float(instance.weekend_targets[e, k]))
            rb.add(wcols + [u2[k]], wcoefs + [1.0],
                   float(instance.weekend_targets[e, k]), INF)
            rb.add(wcols + [u2[k]], wcoefs + [-1.0],
                   -INF, float(instance.weekend_targets[e, k]))
            c[dev1p[e, k]] = c[dev1m[e, k]] = l1w * t1w
            c[dev2p[e, k]] = c[dev2m[e, k]] = l2w * t2w
        c[u1[k]] = l1w * (1 - t1w)
        c[u2[k]] = l2w * (1 - t2w)

    # preference deviations on slots with a stated preference
    for e in range(n):
        for j in range(m):
            if not nonnull[e, j]:
                continue
            cols = list(x_index[e, j, :]) + [dev3p[e, j], dev3m[e, j]]
            rb.add(cols, [1.0] * s + [-1.0, 1.0],
                   float(instance.preferences[e, j]),
                   float(instance.preferences[e, j]))
            c[dev3p[e, j]] = c[dev3m[e, j]] = l3w * t3w

    A, row_lb, row_ub = rb.matrix(num_vars)
    model = MilpModel(num_vars, c, 0.0, A, row_lb, row_ub, lb, ub, integrality)
    return model, vm


def build_event_driven_milp(
    instance_new: RosterInstance,
    original: Roster,
    weights: ObjectiveWeights,
    lock_until: int,
) -> tuple[MilpModel, VariableMap]:
    """Base model under the new parameters, with blocks before ``lock_until``
    frozen to the original roster and a weighted Hamming-deviation term."""
    n, m, s = (instance_new.n_employees, instance_new.n_blocks,
               instance_new.n_shift_types)
    if original.x.shape != (n, m, s):
        raise ValueError("original roster does not match the instance dimensions")
    if not (0 <= lock_until < m):
        raise ValueError(f"lock_until {lock_until} outside [0, {m})")
    model, vm = build_milp(instance_new, weights)

    # deviation term: |X - X0| = X0 + (1 - 2 X0) X for binary X
    x0 = original.x.reshape(-1).astype(float)
    xs = vm.x_slice
    model.c[xs] = model.c[xs] + weights.mu * (1.0 - 2.0 * x0)
    model.c0 += weights.mu * float(x0.sum())

    conflicts = []
    for e in range(n):
        for j in range(lock_until):
            for k in range(s):
                val = float(original.x[e, j, k])
                i = vm.x_index[e, j, k]
                if val > model.var_ub[i] + INT_TOL or val < model.var_lb[i] - INT_TOL:
                    conflicts.append((e, j, k))
                else:
                    model.var_lb[i] = model.var_ub[i] = val
    # cover inside the locked prefix is fully determined; verify it
    locked_counts = original.x[:, :lock_until, :].sum(axis=0)
    for j, k in zip(*np.nonzero(locked_counts != instance_new.cover[:lock_until, :])):
        conflicts.append((None, int(j), int(k)))
    if conflicts:
        raise LockConflictError(conflicts)
    return model, vm


@dataclass(eq=False)
class Stage1VariableMap:
    n: int
    z_index: np.ndarray      # (n, N_VARIANTS)
    slack_index: np.ndarray  # (n,)
    spread_index: int
    num_vars: int

    def decode_assignment(self, v: np.ndarray) -> np.ndarray:
        z = v[self.z_index.reshape(-1)].reshape(self.n, -1)
        return np.argmax(z, axis=1)


def build_pattern_stage1(instance: RosterInstance, pattern: WorkPattern,
                         ) -> tuple[MilpModel, Stage1VariableMap]:
    """One variant per employee, minimizing parameter conflicts.

    Conflict counts per (employee, variant) are constants, absorbed through
    per-employee slack variables; a small balancing term discourages piling
    everyone onto one variant.
    """
    n = instance.n_employees
    variants = [variant_tensor(instance, pattern, v) for v in range(N_VARIANTS)]
    conflicts = np.array([[conflict_count(instance, variants[v], e)
                           for v in range(N_VARIANTS)] for e in range(n)])

    num_vars = n * N_VARIANTS + n + 1
    z_index = np.arange(n * N_VARIANTS).reshape(n, N_VARIANTS)
    slack_index = np.arange(n * N_VARIANTS, n * N_VARIANTS + n)
    spread_index = num_vars - 1
    vm = Stage1VariableMap(n, z_index, slack_index, spread_index, num_vars)

    lb = np.zeros(num_vars)
    ub = np.full(num_vars, INF)
    ub[z_index.reshape(-1)] = 1.0
    integrality = np.zeros(num_vars, dtype=bool)
    integrality[z_index.reshape(-1)] = True

    rb = _RowBuilder()
    for e in range(n):
        rb.add(list(z_index[e]), [1.0] * N_VARIANTS, 1.0, 1.0)
        rb.add(list(z_index[e]) + [int(slack_index[e])],
               list(conflicts[e]) + [-1.0], 0.0, 0.0)
    for v in range(N_VARIANTS):
        rb.add(list(z_index[:, v]) + [spread_index],
               [1.0] * n + [-1.0], -INF, 0.0)

    c = np.zeros(num_vars)
    c[slack_index] = 1.0
    c[spread_index] = 1e-3
    A, row_lb, row_ub = rb.matrix(num_vars)
    model = MilpModel(num_vars, c, 0.0, A, row_lb, row_ub, lb, ub, integrality)
    return model, vm


def build_pattern_stage2(
    instance: RosterInstance,
    company_pattern: np.ndarray,
    weights: ObjectiveWeights,
) -> tuple[MilpModel, VariableMap]:
    """Base constraints with the pattern-aware objective: the preference term
    is scaled by gamma and a pattern-deviation term weighted by (1 - gamma)
    is added.  gamma = 1 reproduces the base model exactly."""
    if not (0.0 <= weights.gamma <= 1.0):
        raise ValueError(f"gamma {weights.gamma} outside [0, 1]")
    xc = np.asarray(company_pattern)
    n, m, s = instance.n_employees, instance.n_blocks, instance.n_shift_types
    if xc.shape != (n, m, s) or not np.isin(xc, (0, 1)).all():
        raise ValueError("company pattern must be a binary (n, m, s) tensor")
    model, vm = build_milp(instance, weights)

    l3w = weights.lam[2] * weights.theta[2]
    gamma = weights.gamma
    # rescale the preference deviation pairs by gamma
    pairs = np.concatenate([vm.dev3_plus.reshape(-1), vm.dev3_minus.reshape(-1)])
    model.c[pairs] = model.c[pairs] * gamma
    # add the linear pattern-deviation term
    w4 = l3w * (1.0 - gamma)
    if w4 > 0.0:
        xcf = xc.reshape(-1).astype(float)
        xs = vm.x_slice
        model.c[xs] = model.c[xs] + w4 * (1.0 - 2.0 * xcf)
        model.c0 += w4 * float(xcf.sum())
    return model, vm


def write_lp(model: MilpModel, path: str) -> None:
    """Dump the model in LP text format for cross-checking with external solvers."""
    A = model.rows.tocsr()
    with open(path, "w") as f:
        f.write("Minimize\n obj:")
        terms = [f" {'+' if cj >= 0 else '-'} {abs(cj):.12g} x{j}"
                 for j, cj in enumerate(model.c) if cj]
        f.write("".join(terms) or " 0 x0")
        f.write("\nSubject To\n")
        for r in range(model.num_rows):
            s, e = A.indptr[r], A.indptr[r + 1]
            expr = "".join(f" {'+' if v >= 0 else '-'} {abs(v):.12g} x{A.indices[i]}"
                           for i, v in zip(range(s, e), A.data[s:e]))
            lo, hi = model.row_lb[r], model.row_ub[r]
            if lo == hi:
                f.write(f" r{r}:{expr} = {lo:.12g}\n")
            else:
                if np.isfinite(hi):
                    f.write(f" r{r}u:{expr} <= {hi:.12g}\n")
                if np.isfinite(lo):
                    f.write(f" r{r}l:{expr} >= {lo:.12g}\n")
        f.write("Bounds\n")
        for j in range(model.num_vars):
            lo, hi = model.var_lb[j], model.var_ub[j]
            hi_s = f"{hi:.12g}" if np.isfinite(hi) else "+inf"
            f.write(f" {lo:.12g} <= x{j} <= {hi_s}\n")
        ints = [f"x{j}" for j in range(model.num_vars) if model.integrality[j]]
        if ints:
            f.write("General\n " + " ".join(ints) + "\n")
        f.write("End\n")
