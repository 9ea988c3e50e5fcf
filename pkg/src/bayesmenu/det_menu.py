"""Solvers for menus of deterministic contracts.

* :func:`solve_two_outcomes` - exact, two outcomes, any number of types.
* :func:`solve_constant_types` - exact, enumerates action profiles.
* :func:`ptas_constant_outcomes` - additive approximation for few outcomes.
* :func:`convert_to_dsic` - turns an approximately incentive compatible
  menu of contract-action pairs into an exactly DSIC menu.
* :func:`discretize_menu` and :func:`heavy_types` - the rounding step
  and the high-payment diagnostic used by the approximation scheme.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from . import lp as lpk
from .agent import (agent_utility, best_response, expected_payment,
                    menu_value, verify_eps_approx)
from .errors import CapExceededError, DimensionError, PreconditionError
from .model import DeterministicMenu, Instance, to_fraction

PROFILE_CAP = 10**6
PTAS_CAP = 10**7


def _dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def _menu(instance: Instance, contracts: Sequence[Sequence]) -> DeterministicMenu:
    contracts = [tuple(Fraction(x) for x in p) for p in contracts]
    recs = [best_response(instance, t, p).action for t, p in enumerate(contracts)]
    return DeterministicMenu(tuple(contracts), tuple(recs))


# --------------------------------------------------------------------------
# two outcomes


def two_outcome_candidates(instance: Instance) -> tuple[int, int, list[Fraction]]:
    """Low outcome, high outcome and candidate payments on the high outcome."""
    if instance.n_outcomes != 2:
        raise DimensionError(f"two-outcome solver needs m = 2, got m = {instance.n_outcomes}")
    r = instance.reward
    lo = 0 if r[0] <= r[1] else 1
    hi = 1 - lo
    span = r[hi] - r[lo]
    cands = {Fraction(0), span}
    for t in range(instance.n_types):
        rows, costs = instance.dist[t], instance.cost[t]
        for a, b in itertools.combinations(range(instance.n_actions), 2):
            df = rows[a][hi] - rows[b][hi]
            if df:
                x = (costs[a] - costs[b]) / df
                if 0 <= x <= span:
                    cands.add(x)
    return lo, hi, sorted(cands)


def solve_two_outcomes(instance: Instance) -> tuple[DeterministicMenu, Fraction]:
    """Exact optimum for two outcomes, attained by one contract offered to all types.

    The contract pays nothing on the low-reward outcome and at most the
    reward gap on the other; the principal's value is piecewise linear in
    that payment, so it peaks at an action-tie breakpoint or an endpoint.
    """
    lo, hi, cands = two_outcome_candidates(instance)
    best_value, best_p = None, None
    nt = instance.n_types
    for x in cands:
        p = [Fraction(0), Fraction(0)]
        p[hi] = x
        p = tuple(p)
        value = menu_value(instance, DeterministicMenu((p,) * nt))
        if best_value is None or value > best_value:
            best_value, best_p = value, p
    return _menu(instance, [best_p] * nt), best_value


# --------------------------------------------------------------------------
# constant number of types


def profile_lp(instance: Instance, profile: Sequence[int]) -> lpk.LinearProgram:
    """Least expected payment that makes ``profile`` incentive compatible.

    Variables are ``p[t][w]`` at index ``t * m + w``.
    """
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    prog = lpk.LinearProgram("min")
    for t in range(nt):
        for w in range(m):
            prog.add_variable(0, None, name=f"p_{t}_{w}")
    obj = {}
    for t in range(nt):
        for w, f in enumerate(instance.dist[t][profile[t]]):
            if f:
                obj[t * m + w] = instance.mu[t] * f
    prog.set_objective(obj)
    for t in range(nt):
        own = instance.dist[t][profile[t]]
        c_own = instance.cost[t][profile[t]]
        for s in range(nt):
            for a in range(na):
                if s == t and a == profile[t]:
                    continue
                row: dict[int, Fraction] = {}
                for w in range(m):
                    if own[w]:
                        row[t * m + w] = row.get(t * m + w, 0) + own[w]
                    f = instance.dist[t][a][w]
                    if f:
                        row[s * m + w] = row.get(s * m + w, 0) - f
                prog.add_constraint(row, ">=", c_own - instance.cost[t][a],
                                    name=f"ic_{t}_{s}_{a}")
    return prog


def solve_constant_types(instance: Instance, cap: int = PROFILE_CAP,
                         backend: str = "rational") -> tuple[DeterministicMenu, Fraction]:
    """Exact optimum by enumerating one target action per type.

    Each profile needs one payment-minimizing linear program; profiles whose
    reward alone cannot beat the incumbent are skipped.
    """
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    count = na ** nt
    if count > cap:
        raise CapExceededError("action profiles", count, cap)
    reward = instance.expected_reward
    profiles = sorted(itertools.product(range(na), repeat=nt),
                      key=lambda prof: -sum(instance.mu[t] * reward[t][a]
                                            for t, a in enumerate(prof)))
    best_value, best_contracts = None, None
    for prof in profiles:
        upper = sum(instance.mu[t] * reward[t][a] for t, a in enumerate(prof))
        if best_value is not None and upper <= best_value:
            break
        sol = lpk.solve(profile_lp(instance, prof), backend)
        if not sol.optimal:
            continue
        contracts = [tuple(Fraction(sol.primal[t * m + w]).limit_denominator(10**12)
                           if backend == "float" else sol.primal[t * m + w]
                           for w in range(m)) for t in range(nt)]
        contracts = [tuple(max(Fraction(0), x) for x in p) for p in contracts]
        value = menu_value(instance, DeterministicMenu(tuple(contracts)))
        if best_value is None or value > best_value:
            best_value, best_contracts = value, contracts
    return _menu(instance, best_contracts), best_value


# --------------------------------------------------------------------------
# approximate -> exact incentive compatibility


def rational_sqrt(x: Fraction, bits: int = 64) -> Fraction:
    """Exact square root when ``x`` is a rational square, else rounded down to ``2**-bits``."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative number")
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    scale = 1 << (2 * bits)
    return Fraction(math.isqrt(x.numerator * scale // x.denominator), 1 << bits)


def convert_to_dsic(instance: Instance, approx: DeterministicMenu, epsilon) -> DeterministicMenu:
    """Exactly DSIC menu losing at most ``2 sqrt(epsilon)`` against ``approx``.

    Every contract is blended toward the reward vector with weight
    ``sqrt(epsilon)``; each type then takes whichever blended contract it
    likes best, ties going to the lowest type index.
    """
    epsilon = to_fraction(epsilon)
    report = verify_eps_approx(instance, approx, epsilon)
    if not report.ok:
        raise PreconditionError(
            f"menu is not {epsilon}-approximate (worst slack {report.worst})")
    s = rational_sqrt(epsilon)
    r = instance.reward
    blended = [tuple((1 - s) * x + s * rw for x, rw in zip(p, r)) for p in approx.entries]
    chosen = []
    for t in range(instance.n_types):
        utils = [agent_utility(instance, t, q) for q in blended]
        best = max(utils)
        chosen.append(blended[utils.index(best)])
    return _menu(instance, chosen)


# --------------------------------------------------------------------------
# heavy types and discretization


@dataclass(frozen=True)
class HeavyTypeSet:
    threshold: Fraction
    members: tuple[int, ...]
    mass: Fraction


def heavy_types(instance: Instance, menu: DeterministicMenu, L) -> HeavyTypeSet:
    """Types whose expected payment under their own contract is at least ``L``."""
    L = to_fraction(L)
    if L <= 1:
        raise ValueError("threshold must exceed 1")
    members = tuple(t for t, p in enumerate(menu.entries)
                    if expected_payment(instance, t, p) >= L)
    return HeavyTypeSet(L, members, sum((instance.mu[t] for t in members), Fraction(0)))


@dataclass(frozen=True)
class PaymentGrid:
    ceiling: tuple[Fraction, ...]
    eta: Fraction
    top_index: int

    def values(self, w: int) -> list[Fraction]:
        """All grid values for outcome ``w`` (only sensible for small top_index)."""
        out = [(1 - self.eta) ** i * self.ceiling[w] for i in range(self.top_index + 1)]
        return out + [Fraction(0)]

    def round_down(self, w: int, x: Fraction) -> Fraction:
        """Largest grid value not above ``x`` (zero below the smallest one)."""
        M = self.ceiling[w]
        if M == 0 or x <= 0:
            return Fraction(0)
        q = 1 - self.eta
        if x >= M:
            return M
        # smallest i with q**i * M <= x, found from a float estimate and fixed exactly
        i = max(0, int(math.floor(math.log(float(x / M)) / math.log(float(q)))) - 1)
        while i > 0 and q ** (i - 1) * M <= x:
            i -= 1
        while q ** i * M > x:
            i += 1
        if i > self.top_index:
            return Fraction(0)
        return q ** i * M


def grid_top_index(eta: Fraction) -> int:
    """Smallest ``i`` with ``(1 - eta)**i <= eta``."""
    q = 1 - eta
    i = max(0, int(math.ceil(math.log(float(eta)) / math.log(float(q)))) - 2)
    while i > 0 and q ** (i - 1) <= eta:
        i -= 1
    while q ** i > eta:
        i += 1
    return i


def payment_grid(instance: Instance, menu: DeterministicMenu, delta) -> PaymentGrid:
    delta = to_fraction(delta)
    eta = delta ** 3 / (64 * instance.n_outcomes)
    ceiling = tuple(max(p[w] for p in menu.entries) for w in range(instance.n_outcomes))
    return PaymentGrid(ceiling, eta, grid_top_index(eta))


def discretize_menu(instance: Instance, menu: DeterministicMenu, delta) -> DeterministicMenu:
    """Round a menu onto a geometric payment grid.

    Light types (expected payment below ``4/delta``) have every payment
    lowered to the next grid value and keep their played action as the
    recommendation.  Heavy types are sent to the rounded light contract
    they like best.  For an optimal input the output is
    ``delta**2/16``-approximately incentive compatible.  If every type is
    heavy, all of them are rounded as light types.
    """
    delta = to_fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    nt, m = instance.n_types, instance.n_outcomes
    grid = payment_grid(instance, menu, delta)
    heavy = set(heavy_types(instance, menu, 4 / delta).members)
    light = [t for t in range(nt) if t not in heavy]
    if not light:
        heavy, light = set(), list(range(nt))
    contracts: list = [None] * nt
    recs: list = [None] * nt
    for t in light:
        p = menu.entries[t]
        contracts[t] = tuple(grid.round_down(w, p[w]) for w in range(m))
        recs[t] = best_response(instance, t, p).action
    for t in sorted(heavy):
        best_u, best_s = None, None
        for s in light:
            u = agent_utility(instance, t, contracts[s])
            if best_u is None or u > best_u:
                best_u, best_s = u, s
        contracts[t] = contracts[best_s]
        recs[t] = best_response(instance, t, contracts[t]).action
    return DeterministicMenu(tuple(contracts), tuple(recs))


# --------------------------------------------------------------------------
# additive approximation scheme for few outcomes


def ptas_contract_count(m: int, delta) -> int:
    """Number of distinct contracts the approximation scheme may need."""
    x = 64 * m / float(delta) ** 3
    return math.ceil((x * math.log(x)) ** m)


def set_partitions(n: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings: block labels for ``n`` items, at most ``max_blocks`` blocks."""
    if n == 0:
        yield ()
        return

    def rec(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(min(used + 1, max_blocks)):
            prefix.append(b)
            yield from rec(prefix, max(used, b + 1))
            prefix.pop()

    yield from rec([], 0)


def _count_partitions(n: int, k: int) -> int:
    # Stirling numbers of the second kind, summed up to k blocks
    s = [[0] * (k + 1) for _ in range(n + 1)]
    s[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1]
    return sum(s[n][1:]) if n else 1


def assignment_lp(instance: Instance, f: Sequence[int], b: Sequence[int]) -> lpk.LinearProgram:
    """Best payments when type ``t`` gets row ``f[t]`` and plays ``b[t]``.

    Variables are ``T[i][w]`` at index ``i * m + w``.
    """
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    k = max(f) + 1
    prog = lpk.LinearProgram("max")
    for i in range(k):
        for w in range(m):
            prog.add_variable(0, None, name=f"T_{i}_{w}")
    obj: dict[int, Fraction] = {}
    for t in range(nt):
        for w, fw in enumerate(instance.dist[t][b[t]]):
            if fw:
                j = f[t] * m + w
                obj[j] = obj.get(j, 0) - instance.mu[t] * fw
    prog.set_objective(obj)
    for t in range(nt):
        own = instance.dist[t][b[t]]
        for i in range(k):
            for a in range(na):
                if i == f[t] and a == b[t]:
                    continue
                row: dict[int, Fraction] = {}
                for w in range(m):
                    if own[w]:
                        row[f[t] * m + w] = row.get(f[t] * m + w, 0) + own[w]
                    fw = instance.dist[t][a][w]
                    if fw:
                        row[i * m + w] = row.get(i * m + w, 0) - fw
                prog.add_constraint(row, ">=", instance.cost[t][b[t]] - instance.cost[t][a],
                                    name=f"ic_{t}_{i}_{a}")
    return prog


def _objective_const(instance: Instance, b: Sequence[int]) -> Fraction:
    return sum((instance.mu[t] * instance.expected_reward[t][a] for t, a in enumerate(b)),
               Fraction(0))


def _solve_linear_system(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square system, or ``None`` when singular."""
    n = len(rows)
    mat = [list(r) + [v] for r, v in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if mat[r][c] != 0), None)
        if piv is None:
            return None
        mat[c], mat[piv] = mat[piv], mat[c]
        pv = mat[c][c]
        mat[c] = [v / pv for v in mat[c]]
        for r in range(n):
            if r != c and mat[r][c]:
                fac = mat[r][c]
                mat[r] = [a - fac * bb for a, bb in zip(mat[r], mat[c])]
    return [mat[r][n] for r in range(n)]


def _vertex_enum_best(prog: lpk.LinearProgram) -> tuple[Fraction, list[Fraction]] | None:
    """Maximize ``prog`` by trying every basis of its hyperplanes (tiny programs only)."""
    nv = prog.n_vars
    planes = [([con.row.get(j, Fraction(0)) for j in range(nv)], Fraction(con.rhs))
              for con in prog.constraints]
    planes += [([Fraction(int(j == i)) for j in range(nv)], Fraction(0)) for i in range(nv)]
    best = None
    for subset in itertools.combinations(range(len(planes)), nv):
        x = _solve_linear_system([planes[i][0] for i in subset], [planes[i][1] for i in subset])
        if x is None or any(v < 0 for v in x) or lpk.residual(prog, x) > 0:
            continue
        val = sum((Fraction(v) * x[j] for j, v in prog.objective.items()), Fraction(0))
        if best is None or val > best[0]:
            best = (val, x)
    return best


def ptas_enumeration_size(instance: Instance, delta, mode: str = "assignment_enum") -> int:
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    k = min(ptas_contract_count(m, delta), nt)
    if mode == "assignment_enum":
        return _count_partitions(nt, k) * na ** nt
    total = 0
    for f in set_partitions(nt, k):
        kf = max(f) + 1
        planes = nt * kf * na - nt + kf * m
        total += math.comb(planes, kf * m)
    return total * na ** nt


def ptas_constant_outcomes(instance: Instance, delta, mode: str = "assignment_enum",
                           cap: int = PTAS_CAP,
                           backend: str = "rational") -> tuple[DeterministicMenu, Fraction]:
    """Additive approximation for instances with at most three outcomes.

    Enumerates which contract row every type receives (as a partition of the
    types into at most ``k`` blocks, ``k`` capped by the number of types since
    a menu never needs more distinct contracts than types) together with the
    action every type is meant to play, and solves one linear program per
    choice.  ``vertex_enum`` instead tries every basis of the program's
    hyperplanes directly.
    """
    delta = to_fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    nt, na, m = instance.n_types, instance.n_actions, instance.n_outcomes
    if m > 3:
        raise DimensionError(f"approximation scheme supports m <= 3, got m = {m}")
    if mode not in ("assignment_enum", "vertex_enum"):
        raise ValueError(f"unknown mode {mode!r}")
    count = ptas_enumeration_size(instance, delta, mode)
    if count > cap:
        raise CapExceededError(f"approximation scheme ({mode})", count, cap)
    k = min(ptas_contract_count(m, delta), nt)
    profiles = sorted(itertools.product(range(na), repeat=nt),
                      key=lambda prof: -_objective_const(instance, prof))
    partitions = list(set_partitions(nt, k))
    # finer partitions relax coarser ones, so try them first
    partitions.sort(key=lambda f: -(max(f) + 1))
    best_value, best_contracts = None, None
    for b in profiles:
        upper = _objective_const(instance, b)
        if best_value is not None and upper <= best_value:
            break
        for f in partitions:
            prog = assignment_lp(instance, f, b)
            if mode == "assignment_enum":
                sol = lpk.solve(prog, backend)
                if not sol.optimal:
                    continue
                x = [Fraction(v) if backend == "rational"
                     else max(Fraction(0), Fraction(v).limit_denominator(10**12))
                     for v in sol.primal]
            else:
                found = _vertex_enum_best(prog)
                if found is None:
                    continue
                x = found[1]
            rows = [tuple(x[i * m + w] for w in range(m)) for i in range(max(f) + 1)]
            contracts = [rows[f[t]] for t in range(nt)]
            value = menu_value(instance, DeterministicMenu(tuple(contracts)))
            if best_value is None or value > best_value:
                best_value, best_contracts = value, contracts
    return _menu(instance, best_contracts), best_value
