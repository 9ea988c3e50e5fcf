"""Brute-force baselines for checking the solvers on small instances.

Everything here runs in exact rational arithmetic.

``grid_det_menu`` finds the best DSIC menu whose payments all lie on a
grid.  Small problems are enumerated menu by menu.  Larger ones use an
exact branch and bound: for every target action profile, the
payment-minimizing program is solved with its variables restricted to grid
values by branching, and whole profiles are skipped once their reward
cannot beat the incumbent.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp as lpk
from .agent import agent_utility, best_response, menu_value, verify_dsic
from .det_menu import profile_lp
from .errors import CapExceededError
from .model import DeterministicMenu, Instance, to_fraction
from .rand_menu import PaymentBound, _Master

ENUMERATION_BUDGET = 10**8
NODE_BUDGET = 10**6
CONTRACT_BUDGET = 10**3


@dataclass(frozen=True)
class GridSpec:
    """Payments ``0, step, 2 step, ...`` up to ``payment_cap`` (always included).

    ``values`` optionally overrides the grid with an explicit list of
    payments per outcome.
    """

    payment_cap: Fraction
    step: Fraction
    values: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "payment_cap", to_fraction(self.payment_cap))
        object.__setattr__(self, "step", to_fraction(self.step))
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.payment_cap < 0:
            raise ValueError("payment cap must be nonnegative")
        if self.values is not None:
            vals = tuple(tuple(sorted({to_fraction(v) for v in row} | {Fraction(0)}))
                         for row in self.values)
            if any(v < 0 for row in vals for v in row):
                raise ValueError("grid values must be nonnegative")
            object.__setattr__(self, "values", vals)

    def points(self, w: int = 0) -> list[Fraction]:
        if self.values is not None:
            return list(self.values[w])
        count = int(self.payment_cap // self.step)
        pts = [self.step * i for i in range(count + 1)]
        if pts[-1] != self.payment_cap:
            pts.append(self.payment_cap)
        return pts

    def size(self, w: int = 0) -> int:
        return len(self.points(w))

    def contracts(self, m: int):
        return itertools.product(*(self.points(w) for w in range(m)))

    def contract_count(self, m: int) -> int:
        return math.prod(self.size(w) for w in range(m))


# --------------------------------------------------------------------------
# deterministic menus on a grid


def grid_menu_count(instance: Instance, grid: GridSpec) -> int:
    return grid.contract_count(instance.n_outcomes) ** instance.n_types


def _grid_enumerate(instance: Instance, grid: GridSpec, budget: int):
    count = grid_menu_count(instance, grid)
    if count > budget:
        raise CapExceededError("grid menus", count, budget)
    nt = instance.n_types
    contracts = list(grid.contracts(instance.n_outcomes))
    # utility of every type under every contract, and the principal's take
    utils = [[agent_utility(instance, t, p) for p in contracts] for t in range(nt)]
    values = [[best_response(instance, t, p).principal_utility for p in contracts]
              for t in range(nt)]
    best_value, best_menu = None, None
    for choice in itertools.product(range(len(contracts)), repeat=nt):
        ok = all(utils[t][choice[t]] >= utils[t][choice[s]]
                 for t in range(nt) for s in range(nt) if s != t)
        if not ok:
            continue
        value = sum(instance.mu[t] * values[t][choice[t]] for t in range(nt))
        if best_value is None or value > best_value:
            best_value, best_menu = value, choice
    return [contracts[i] for i in best_menu], best_value


def _snap_down(points: list[Fraction], x: Fraction) -> Fraction | None:
    below = [v for v in points if v <= x]
    return max(below) if below else None


def _snap_up(points: list[Fraction], x: Fraction) -> Fraction | None:
    above = [v for v in points if v >= x]
    return min(above) if above else None


def _grid_branch_and_bound(instance: Instance, grid: GridSpec, node_budget: int):
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    points = [grid.points(w) for w in range(m)]
    top = [pts[-1] for pts in points]
    reward = instance.expected_reward
    profiles = sorted(itertools.product(range(na), repeat=nt),
                      key=lambda prof: -sum(instance.mu[t] * reward[t][a]
                                            for t, a in enumerate(prof)))
    # the all-zero menu is DSIC and always on the grid
    zero = [tuple(Fraction(0) for _ in range(m))] * nt
    best_contracts = zero
    best_value = menu_value(instance, DeterministicMenu(tuple(zero)))
    nodes = 0
    for prof in profiles:
        gross = sum(instance.mu[t] * reward[t][a] for t, a in enumerate(prof))
        if gross <= best_value:
            break
        base = profile_lp(instance, prof)
        for j in range(nt * m):
            base.upper[j] = top[j % m]
        stack = [({}, {})]
        while stack:
            lower, upper = stack.pop()
            nodes += 1
            if nodes > node_budget:
                raise CapExceededError("grid branch-and-bound nodes", nodes, node_budget)
            prog = base.copy()
            for j, v in lower.items():
                prog.lower[j] = v
            for j, v in upper.items():
                prog.upper[j] = v
            sol = lpk.solve(prog, "rational")
            if not sol.optimal or gross - sol.value <= best_value:
                continue
            x = sol.primal
            frac = next((j for j in range(nt * m) if x[j] not in points[j % m]), None)
            if frac is None:
                contracts = [tuple(x[t * m + w] for w in range(m)) for t in range(nt)]
                value = menu_value(instance, DeterministicMenu(tuple(contracts)))
                if value > best_value:
                    best_value, best_contracts = value, contracts
                continue
            pts = points[frac % m]
            lo, hi = _snap_down(pts, x[frac]), _snap_up(pts, x[frac])
            down = (lower, {**upper, frac: lo})
            up = ({**lower, frac: hi}, upper)
            # explore the cheaper side first
            if hi is not None:
                stack.append(up)
            if lo is not None:
                stack.append(down)
    return best_contracts, best_value


def grid_det_menu(instance: Instance, grid: GridSpec, method: str = "auto",
                  budget: int = ENUMERATION_BUDGET,
                  node_budget: int = NODE_BUDGET) -> tuple[DeterministicMenu, Fraction]:
    """Best DSIC deterministic menu with every payment on ``grid``.

    ``method="enumerate"`` tries every menu and refuses above ``budget``
    menus.  ``method="branch_and_bound"`` is exact for any grid size but
    may stop at ``node_budget`` nodes.  ``auto`` enumerates when the menu
    count fits in 10**4 and branches otherwise.
    """
    if method not in ("auto", "enumerate", "branch_and_bound"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "enumerate" if grid_menu_count(instance, grid) <= 10**4 else "branch_and_bound"
    if method == "enumerate":
        contracts, value = _grid_enumerate(instance, grid, budget)
    else:
        contracts, value = _grid_branch_and_bound(instance, grid, node_budget)
    recs = tuple(best_response(instance, t, p).action for t, p in enumerate(contracts))
    menu = DeterministicMenu(tuple(tuple(p) for p in contracts), recs)
    if not verify_dsic(instance, menu).ok:   # pragma: no cover - guards the search itself
        raise AssertionError("grid search produced a non-DSIC menu")
    return menu, value


# --------------------------------------------------------------------------
# randomized menus on a grid


def grid_rand_menu(instance: Instance, grid: GridSpec, support_cap: int | None = None,
                   budget: int = CONTRACT_BUDGET) -> Fraction:
    """Optimal randomized menu value when every contract is a grid point.

    This is the master program with the whole grid as its column set, so it
    is a lower bound on the supremum.  An optimal vertex solution already
    uses few contracts per type; ``support_cap`` is only checked against
    the number of actions.
    """
    if support_cap is not None and not 1 <= support_cap <= instance.n_actions:
        raise ValueError("support cap must lie between 1 and the number of actions")
    count = grid.contract_count(instance.n_outcomes)
    if count > budget:
        raise CapExceededError("grid contracts", count, budget)
    master = _Master(instance)
    for p in grid.contracts(instance.n_outcomes):
        for t in range(instance.n_types):
            master.add(t, p)
    value, _, _ = master.solve("rational")
    return value


# --------------------------------------------------------------------------
# vertices of best-response regions


def region_halfspaces(instance: Instance, bound: PaymentBound,
                      actions: Sequence[int]) -> list[tuple[list[Fraction], Fraction]]:
    """Inequalities ``row . p >= rhs`` cutting out the region where type ``t`` can play ``actions[t]``."""
    m = instance.n_outcomes
    out = []
    for t, a in enumerate(actions):
        rows, costs = instance.dist[t], instance.cost[t]
        for b in range(instance.n_actions):
            if b != a:
                out.append(([rows[a][w] - rows[b][w] for w in range(m)], costs[a] - costs[b]))
    for w in range(m):
        unit = [Fraction(int(v == w)) for v in range(m)]
        out.append((unit, Fraction(0)))
        out.append(([-x for x in unit], -bound.C))
    return out


def enumerate_region_vertices(instance: Instance, bound: PaymentBound, actions: Sequence[int],
                              budget: int = 10**6) -> list[tuple[Fraction, ...]]:
    """Every vertex of the box-clipped region where each type ``t`` can play ``actions[t]``.

    Solves every square subsystem of the defining inequalities and keeps the
    feasible solutions; an empty list means the region is empty.
    """
    from .det_menu import _solve_linear_system

    if len(actions) != instance.n_types:
        raise ValueError("need one action per type")
    m = instance.n_outcomes
    planes = region_halfspaces(instance, bound, actions)
    count = math.comb(len(planes), m)
    if count * m > budget:
        raise CapExceededError("active sets", count * m, budget)
    found = set()
    for subset in itertools.combinations(range(len(planes)), m):
        x = _solve_linear_system([planes[i][0] for i in subset], [planes[i][1] for i in subset])
        if x is None:
            continue
        if all(sum((r * v for r, v in zip(row, x)), Fraction(0)) >= rhs for row, rhs in planes):
            found.add(tuple(x))
    return sorted(found)
