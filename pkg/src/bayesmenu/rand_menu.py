"""Menus of randomized contracts by column generation.

The master program chooses, for every type, a distribution over a finite
set of candidate contracts subject to truthful reporting.  Candidate
contracts are vertices of the regions of ``[0, C]^m`` on which every type
has a fixed best response; the box size ``C`` comes from
:func:`payment_bound`.  Columns are priced by a separation oracle that
solves one small linear program per (type, action) pair and then moves to a
vertex of the region containing the optimizer.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, TextIO

from . import lp as lpk
from .agent import agent_utility, best_response, verify_dsic
from .errors import IterationCapError, PreconditionError
from .model import Instance, RandomizedMenu, to_fraction, zero_contract

ITERATION_CAP = 10_000
FLOAT_VIOLATION = 1e-9
FLOAT_GAP = 1e-7


# --------------------------------------------------------------------------
# payment box


@dataclass(frozen=True)
class PaymentBound:
    F_min: Fraction
    Y: Fraction
    D: int
    C: Fraction
    epsilon: Fraction


def _scaled_row_norm(values: Sequence[Fraction]) -> int:
    """Ceiling of the Euclidean norm after clearing denominators."""
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    sq = sum((v * den) ** 2 for v in values)
    sq = int(sq)
    root = math.isqrt(sq)
    return root if root * root == sq else root + 1


def vertex_coordinate_bound(instance: Instance) -> int:
    """Upper bound on vertex coordinates of the best-response regions.

    Every region is cut out by rows ``(F[t][a] - F[t][b]) . p >= c[t][a] - c[t][b]``
    and the sign constraints ``p >= 0``.  After clearing denominators row
    by row, Cramer's rule bounds each vertex coordinate by a determinant of
    the augmented rows, and Hadamard's inequality bounds that determinant by
    the product of row norms.
    """
    m = instance.n_outcomes
    worst = 1
    for t in range(instance.n_types):
        rows, costs = instance.dist[t], instance.cost[t]
        for a in range(instance.n_actions):
            for b in range(a + 1, instance.n_actions):
                vec = [x - y for x, y in zip(rows[a], rows[b])] + [costs[a] - costs[b]]
                if any(vec[:-1]):
                    worst = max(worst, _scaled_row_norm(vec))
    return max(1, worst ** m)


def payment_bound(instance: Instance, epsilon) -> PaymentBound:
    """Box size ``C`` such that some menu inside ``[0, C]^m`` is within ``epsilon`` of the supremum."""
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    f_min = min(f for rows in instance.dist for row in rows for f in row if f > 0)
    y = min(instance.mu)
    d = vertex_coordinate_bound(instance)
    n, ell = instance.n_actions, instance.n_types
    c = Fraction(4 * n * ell * d) / eps * (4 / (f_min * y) + d)
    return PaymentBound(f_min, y, d, c, eps)


# --------------------------------------------------------------------------
# dual points and columns


@dataclass
class DualPoint:
    """Prices of the restricted master: ``y[(t, s)] <= 0`` for truthfulness rows, ``t[t]`` for weights."""

    y: dict[tuple[int, int], Fraction]
    t: list

    def __post_init__(self):
        for key, v in self.y.items():
            if v > 0:
                raise ValueError(f"truthfulness price {key} must be nonpositive, got {v}")


@dataclass(frozen=True)
class Column:
    type: int
    contract: tuple
    best_responses: tuple[int, ...]
    value: object = field(default=None, compare=False)


def _utility_rows(instance: Instance, p) -> tuple[list, list]:
    """Max agent utility and principal utility of every type under ``p``."""
    us, vs = [], []
    for t in range(instance.n_types):
        br = best_response(instance, t, p)
        us.append(br.agent_utility)
        vs.append(br.principal_utility)
    return us, vs


def reduced_value(instance: Instance, dual: DualPoint, t: int, p) -> Fraction:
    """Left-hand quantity compared with ``t_t`` when pricing contract ``p`` for type ``t``.

    Equals ``mu_t V_t(p) - sum_s y[t,s] U_t(p) + sum_s y[s,t] U_s(p)``; the
    column prices out (is violated) when this exceeds ``dual.t[t]``.
    """
    us, vs = _utility_rows(instance, p)
    nt = instance.n_types
    total = instance.mu[t] * vs[t]
    for s in range(nt):
        if s == t:
            continue
        total -= dual.y.get((t, s), 0) * us[t]
        total += dual.y.get((s, t), 0) * us[s]
    return total


def _own_terms(instance: Instance, dual: DualPoint, t: int, a: int):
    """Linear objective in ``p`` (plus constant) for type ``t`` playing ``a``."""
    m = instance.n_outcomes
    s_out = sum((dual.y.get((t, s), 0) for s in range(instance.n_types) if s != t), 0)
    row = instance.dist[t][a]
    coef = [-(instance.mu[t] + s_out) * row[w] for w in range(m)]
    const = instance.mu[t] * instance.expected_reward[t][a] + s_out * instance.cost[t][a]
    return coef, const


def _region_rows(prog: lpk.LinearProgram, instance: Instance, t: int, a: int, pvars) -> None:
    """Constraints keeping action ``a`` a best response of type ``t``."""
    rows, costs = instance.dist[t], instance.cost[t]
    for b in range(instance.n_actions):
        if b == a:
            continue
        row = {pvars[w]: rows[a][w] - rows[b][w] for w in range(instance.n_outcomes)
               if rows[a][w] != rows[b][w]}
        rhs = costs[a] - costs[b]
        if not row:
            if rhs > 0:
                # identical distributions, a strictly more expensive: never a best response
                prog.add_constraint({pvars[0]: 1}, "<=", -1)
            continue
        prog.add_constraint(row, ">=", rhs, name=f"br_{t}_{a}_{b}")


def _oracle_lp(instance: Instance, bound: PaymentBound, dual: DualPoint, t: int, a: int):
    """Relaxed pricing program for type ``t`` restricted to the region where it plays ``a``."""
    m, nt = instance.n_outcomes, instance.n_types
    prog = lpk.LinearProgram("max")
    pvars = [prog.add_variable(0, bound.C, name=f"p{w}") for w in range(m)]
    coef, const = _own_terms(instance, dual, t, a)
    obj = {pvars[w]: coef[w] for w in range(m) if coef[w]}
    zvars = {}
    for s in range(nt):
        if s == t:
            continue
        price = dual.y.get((s, t), 0)
        if not price:
            continue
        z = prog.add_variable(None, None, name=f"z{s}")
        zvars[s] = z
        obj[z] = price
        for b in range(instance.n_actions):
            row = {z: 1}
            for w in range(m):
                f = instance.dist[s][b][w]
                if f:
                    row[pvars[w]] = -f
            prog.add_constraint(row, ">=", -instance.cost[s][b], name=f"z_{s}_{b}")
    prog.set_objective(obj)
    _region_rows(prog, instance, t, a, pvars)
    return prog, pvars, const


def _vertex_lp(instance: Instance, bound: PaymentBound, dual: DualPoint, t: int,
               actions: Sequence[int]):
    """Linear pricing program over the region where every type ``s`` plays ``actions[s]``."""
    m, nt = instance.n_outcomes, instance.n_types
    prog = lpk.LinearProgram("max")
    pvars = [prog.add_variable(0, bound.C, name=f"p{w}") for w in range(m)]
    coef, const = _own_terms(instance, dual, t, actions[t])
    coef = list(coef)
    for s in range(nt):
        if s == t:
            continue
        price = dual.y.get((s, t), 0)
        if not price:
            continue
        row = instance.dist[s][actions[s]]
        for w in range(m):
            coef[w] += price * row[w]
        const -= price * instance.cost[s][actions[s]]
    prog.set_objective({pvars[w]: coef[w] for w in range(m) if coef[w]})
    for s in range(nt):
        _region_rows(prog, instance, s, actions[s], pvars)
    return prog, pvars, const


def separation_oracle(instance: Instance, bound: PaymentBound, dual: DualPoint,
                      backend: str = "rational") -> list[Column]:
    """Columns whose dual constraint is violated at ``dual``; empty means dual feasible.

    For every type ``t`` and action ``a`` the relaxed program finds the best
    contract in the box on which ``t`` can play ``a``.  The other types' best
    responses at that contract fix a region, and re-solving over that region
    returns a vertex with the same objective value.
    """
    nt, na = instance.n_types, instance.n_actions
    exact = backend == "rational"
    found: list[Column] = []
    seen = set()
    for t in range(nt):
        threshold = dual.t[t]
        for a in range(na):
            prog, pvars, const = _oracle_lp(instance, bound, dual, t, a)
            sol = lpk.solve(prog, backend)
            if not sol.optimal:
                continue
            value = sol.value + const
            if not _exceeds(value, threshold, exact):
                continue
            p_star = [sol.primal[j] for j in pvars]
            if not exact:
                p_star = [min(max(float(x), 0.0), float(bound.C)) for x in p_star]
            actions = [a if s == t else best_response(instance, s, p_star).action
                       for s in range(nt)]
            vprog, vvars, vconst = _vertex_lp(instance, bound, dual, t, actions)
            vsol = lpk.solve(vprog, backend)
            if not vsol.optimal:
                # the relaxed optimizer lies in the region, so this only happens on float noise
                vsol = lpk.solve(vprog, "rational")
                if not vsol.optimal:
                    continue
            p = tuple(Fraction(vsol.primal[j]) if exact
                      else _snap(vsol.primal[j], bound.C) for j in vvars)
            vvalue = vsol.value + vconst
            if not _exceeds(vvalue, threshold, exact):
                continue
            key = (t, p)
            if key in seen:
                continue
            seen.add(key)
            brs = tuple(best_response(instance, s, p).action for s in range(nt))
            found.append(Column(t, p, brs, vvalue))
    return found


def _exceeds(value, threshold, exact: bool) -> bool:
    if exact:
        return value > threshold
    return float(value) > float(threshold) + FLOAT_VIOLATION


def _snap(x: float, cap: Fraction) -> Fraction:
    q = Fraction(x).limit_denominator(10**9)
    return min(max(q, Fraction(0)), cap)


# --------------------------------------------------------------------------
# master program


@dataclass
class TraceRow:
    iteration: int
    primal: Fraction
    dual: Fraction
    new_columns: int


@dataclass
class RandomizedResult:
    menu: RandomizedMenu
    value: Fraction
    upper_bound: Fraction
    iterations: int
    trace: list[TraceRow]
    columns: list[list[tuple]]
    bound: PaymentBound
    dual: DualPoint | None = None

    @property
    def gap(self):
        return self.upper_bound - self.value


class _Master:
    """Restricted master program over the columns found so far."""

    def __init__(self, instance: Instance):
        self.instance = instance
        nt = instance.n_types
        self.columns: list[list[tuple]] = [[] for _ in range(nt)]
        self.utils: list[list[list]] = [[] for _ in range(nt)]   # utils[t][j][s] = U_s(p)
        self.values: list[list] = [[] for _ in range(nt)]        # values[t][j] = V_t(p)
        self.keys = [set() for _ in range(nt)]

    def add(self, t: int, p) -> bool:
        p = tuple(Fraction(x) for x in p)
        if p in self.keys[t]:
            return False
        us, vs = _utility_rows(self.instance, p)
        self.keys[t].add(p)
        self.columns[t].append(p)
        self.utils[t].append(us)
        self.values[t].append(vs[t])
        return True

    def solve(self, backend: str):
        inst = self.instance
        nt = inst.n_types
        prog = lpk.LinearProgram("max")
        var = {}
        for t in range(nt):
            for j in range(len(self.columns[t])):
                var[t, j] = prog.add_variable(0, None, name=f"g_{t}_{j}")
        prog.set_objective({var[t, j]: inst.mu[t] * self.values[t][j]
                            for t in range(nt) for j in range(len(self.columns[t]))})
        rows = {}
        for t in range(nt):
            for s in range(nt):
                if s == t:
                    continue
                row = {}
                for j in range(len(self.columns[t])):
                    row[var[t, j]] = row.get(var[t, j], 0) + self.utils[t][j][t]
                for j in range(len(self.columns[s])):
                    row[var[s, j]] = row.get(var[s, j], 0) - self.utils[s][j][t]
                rows[t, s] = prog.add_constraint(row, ">=", 0, name=f"ic_{t}_{s}")
        weight_rows = [prog.add_constraint({var[t, j]: 1 for j in range(len(self.columns[t]))},
                                           "=", 1, name=f"w_{t}") for t in range(nt)]
        sol = lpk.solve(prog, backend)
        if not sol.optimal:
            raise lpk.LPError(f"restricted master is {sol.status}")
        y = {key: sol.dual[i] for key, i in rows.items()}
        if backend != "rational":
            y = {key: min(0.0, v) for key, v in y.items()}
        dual = DualPoint(y, [sol.dual[i] for i in weight_rows])
        weights = [[sol.primal[var[t, j]] for j in range(len(self.columns[t]))]
                   for t in range(nt)]
        return sol.value, dual, weights

    def menu(self, weights) -> RandomizedMenu:
        entries = []
        for t, ws in enumerate(weights):
            support = []
            for p, w in zip(self.columns[t], ws):
                w = Fraction(w)
                if w > 0:
                    support.append((p, w))
            total = sum(w for _, w in support)
            if total != 1:
                support = [(p, w / total) for p, w in support]
            entries.append(tuple(support))
        return RandomizedMenu(tuple(entries))


def solve_randomized_detailed(instance: Instance, epsilon, backend: str = "rational",
                              max_iter: int = ITERATION_CAP,
                              trace: str | TextIO | None = None,
                              bound: PaymentBound | None = None) -> RandomizedResult:
    """Column generation for the randomized menu program; returns the full run record.

    The upper bound reported each iteration is the restricted dual
    objective plus, for every type, the largest positive pricing excess;
    since each type's weights sum to one this bounds the full program.
    """
    eps = to_fraction(epsilon)
    bound = bound or payment_bound(instance, eps)
    master = _Master(instance)
    zero = zero_contract(instance.n_outcomes)
    for t in range(instance.n_types):
        master.add(t, zero)
    rows: list[TraceRow] = []
    exact = backend == "rational"
    value = weights = dual = None
    upper = None
    for it in range(1, max_iter + 1):
        value, dual, weights = master.solve(backend)
        cols = separation_oracle(instance, bound, dual, backend)
        excess = [0] * instance.n_types
        for col in cols:
            excess[col.type] = max(excess[col.type], col.value - dual.t[col.type])
        dual_obj = sum(dual.t)
        # the oracle's best column per (type, action) bounds the excess for that type
        upper = dual_obj + sum(excess)
        added = sum(master.add(col.type, col.contract) for col in cols)
        rows.append(TraceRow(it, value, upper, added))
        if not cols or (not exact and float(upper) - float(value) <= FLOAT_GAP):
            break
        if added == 0:
            # violated columns that are already present: float noise
            break
    else:
        menu = master.menu(weights)
        _write_trace(trace, rows)
        raise IterationCapError(
            f"iteration cap {max_iter} reached", menu=menu, value=value,
            gap=None if upper is None else upper - value)
    _write_trace(trace, rows)
    menu = master.menu(weights)
    return RandomizedResult(menu, Fraction(value) if exact else value,
                            Fraction(upper) if exact else upper,
                            len(rows), rows, master.columns, bound, dual)


def _write_trace(trace, rows: list[TraceRow]) -> None:
    if trace is None:
        return
    own = isinstance(trace, str)
    fh = open(trace, "w", newline="") if own else trace
    try:
        writer = csv.writer(fh)
        writer.writerow(["iter", "primal", "dual", "new_columns"])
        for r in rows:
            writer.writerow([r.iteration, float(r.primal), float(r.dual), r.new_columns])
    finally:
        if own:
            fh.close()


def solve_randomized(instance: Instance, epsilon, backend: str = "rational",
                     max_iter: int = ITERATION_CAP,
                     trace: str | TextIO | None = None) -> tuple[RandomizedMenu, Fraction]:
    """DSIC randomized menu within ``epsilon`` of the supremum, and its value."""
    res = solve_randomized_detailed(instance, epsilon, backend, max_iter, trace)
    return res.menu, res.value


def sup_upper_bound(instance: Instance, epsilon, result: RandomizedResult | None = None,
                    backend: str = "rational"):
    """Certified upper bound on the value achievable over the candidate contracts.

    Pass the ``result`` of a finished run to avoid solving again.
    """
    if result is None:
        result = solve_randomized_detailed(instance, epsilon, backend)
    ub = result.upper_bound
    if isinstance(ub, Fraction):
        return min(Fraction(1), ub)
    return min(1.0, float(ub) + FLOAT_GAP)


# --------------------------------------------------------------------------
# support reduction


def simplify_menu(instance: Instance, menu: RandomizedMenu) -> RandomizedMenu:
    """Merge support contracts that induce the same played action.

    Each group is replaced by its weighted mean contract carrying the
    group's total weight, which keeps the menu DSIC, never lowers its value,
    and leaves at most one contract per action.
    """
    if not verify_dsic(instance, menu).ok:
        raise PreconditionError("menu is not DSIC")
    m = instance.n_outcomes
    out = []
    for t, support in enumerate(menu.entries):
        groups: dict[int, list] = {}
        for p, w in support:
            groups.setdefault(best_response(instance, t, p).action, []).append((p, w))
        merged = []
        for a in sorted(groups):
            items = groups[a]
            total = sum(w for _, w in items)
            mean = tuple(sum(p[k] * w for p, w in items) / total for k in range(m))
            merged.append((mean, total))
        out.append(tuple(merged))
    return RandomizedMenu(tuple(out))
