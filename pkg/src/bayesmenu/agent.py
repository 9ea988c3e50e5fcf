"""Agent best responses, utilities and incentive checks.

Exact arithmetic is used whenever the contract holds rationals.  Contracts
containing floats switch to a tolerance-based comparison in which two
utilities tie when they differ by at most ``1e-9 * (1 + |u| + |v|)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import DeterministicMenu, Instance, Menu, as_randomized, to_fraction

FLOAT_TIE = 1e-9


@dataclass(frozen=True)
class BestResponse:
    action: int
    agent_utility: Fraction | float
    principal_utility: Fraction | float
    tied_set: tuple[int, ...]


def _is_float(p: Sequence) -> bool:
    return any(isinstance(x, float) for x in p)


def _ties(u: float, v: float) -> bool:
    return abs(u - v) <= FLOAT_TIE * (1 + abs(u) + abs(v))


def action_utilities(instance: Instance, t: int, p: Sequence) -> list:
    """Agent utility ``F[t][a] . p - c[t][a]`` for every action ``a``."""
    dist, cost = instance.dist[t], instance.cost[t]
    if _is_float(p):
        return [sum(float(f) * x for f, x in zip(dist[a], p)) - float(cost[a])
                for a in range(instance.n_actions)]
    return [sum((f * x for f, x in zip(dist[a], p) if f and x), Fraction(0)) - cost[a]
            for a in range(instance.n_actions)]


def best_response(instance: Instance, theta: int | str, p: Sequence) -> BestResponse:
    """Utility-maximizing action of type ``theta`` under contract ``p``.

    Ties go to the action that is best for the principal and then to the
    lowest action index.
    """
    t = instance.type_index(theta)
    utils = action_utilities(instance, t, p)
    exact = not _is_float(p)
    best = max(utils)
    if exact:
        tied = tuple(a for a, u in enumerate(utils) if u == best)
    else:
        tied = tuple(a for a, u in enumerate(utils) if _ties(u, best))
    reward = instance.expected_reward[t]
    action, principal = None, None
    for a in tied:
        pay = utils[a] + (instance.cost[t][a] if exact else float(instance.cost[t][a]))
        value = (reward[a] if exact else float(reward[a])) - pay
        if principal is None or value > principal:
            # strict improvement keeps the lowest index among residual ties
            action, principal = a, value
    return BestResponse(action, utils[action], principal, tied)


def agent_utility(instance: Instance, theta: int | str, p: Sequence):
    """Maximum agent utility of ``theta`` under ``p``."""
    return max(action_utilities(instance, instance.type_index(theta), p))


def principal_utility(instance: Instance, theta: int | str, p: Sequence):
    """Principal's expected utility from ``theta`` when it best-responds to ``p``."""
    return best_response(instance, theta, p).principal_utility


def agent_utility_randomized(instance: Instance, theta: int | str, gamma) -> Fraction:
    """Expected agent utility when a contract is drawn from ``gamma``."""
    t = instance.type_index(theta)
    total = Fraction(0)
    for p, w in gamma:
        total += to_fraction(w) * agent_utility(instance, t, p)
    return total


def menu_value(instance: Instance, menu: Menu) -> Fraction:
    """Principal's expected utility of a (deterministic or randomized) menu."""
    menu = as_randomized(menu)
    total = Fraction(0)
    for t, support in enumerate(menu.entries):
        inner = sum((w * principal_utility(instance, t, p) for p, w in support), Fraction(0))
        total += instance.mu[t] * inner
    return total


@dataclass
class DsicReport:
    ok: bool
    slacks: dict[tuple[int, int], Fraction]
    worst: Fraction | None
    tol: Fraction

    @property
    def violations(self) -> list[tuple[int, int]]:
        return [k for k, s in self.slacks.items() if s < -self.tol]


def verify_dsic(instance: Instance, menu: Menu, tol=0) -> DsicReport:
    """Slack of truthful reporting over every misreport ``(theta, theta_hat)``."""
    menu = as_randomized(menu)
    nt = instance.n_types
    if len(menu.entries) != nt:
        raise ValueError(f"menu has {len(menu.entries)} entries for {nt} types")
    tol = to_fraction(tol)
    # table[t][s]: expected utility of type t when reporting s
    table = [[agent_utility_randomized(instance, t, menu.entries[s]) for s in range(nt)]
             for t in range(nt)]
    slacks = {(t, s): table[t][t] - table[t][s]
              for t in range(nt) for s in range(nt) if s != t}
    worst = min(slacks.values()) if slacks else None
    ok = worst is None or worst >= -tol
    return DsicReport(ok, slacks, worst, tol)


def is_dsic(instance: Instance, menu: Menu, tol=0) -> bool:
    return verify_dsic(instance, menu, tol).ok


@dataclass
class EpsApproxReport:
    ok: bool
    slacks: dict[tuple[int, int], Fraction]
    worst: Fraction
    epsilon: Fraction


def verify_eps_approx(instance: Instance, menu: DeterministicMenu, epsilon) -> EpsApproxReport:
    """Check an approximately incentive compatible menu of contract-action pairs.

    For every ``theta`` and every report ``theta_hat`` (including
    ``theta`` itself) the recommended action must give ``theta`` utility at
    least its best utility under ``p^theta_hat`` minus ``epsilon``.
    The reported slack is ``own - best + epsilon``.
    """
    if menu.recommendations is None:
        raise ValueError("menu has no recommended actions")
    epsilon = to_fraction(epsilon)
    nt = instance.n_types
    slacks = {}
    for t in range(nt):
        p = menu.entries[t]
        own = action_utilities(instance, t, p)[menu.recommendations[t]]
        for s in range(nt):
            slacks[(t, s)] = own - agent_utility(instance, t, menu.entries[s]) + epsilon
    worst = min(slacks.values())
    return EpsApproxReport(worst >= 0, slacks, worst, epsilon)


def recommended_value(instance: Instance, menu: DeterministicMenu) -> Fraction:
    """Principal utility when each type plays its recommended action."""
    if menu.recommendations is None:
        raise ValueError("menu has no recommended actions")
    total = Fraction(0)
    for t, (p, a) in enumerate(zip(menu.entries, menu.recommendations)):
        row = instance.dist[t][a]
        total += instance.mu[t] * sum((f * (r - x) for f, r, x in
                                       zip(row, instance.reward, p)), Fraction(0))
    return total


def expected_payment(instance: Instance, theta: int | str, p: Sequence) -> Fraction:
    """Expected transfer to ``theta`` under ``p`` at its best response."""
    t = instance.type_index(theta)
    a = best_response(instance, t, p).action
    return sum((f * x for f, x in zip(instance.dist[t][a], p)), Fraction(0))


def deterministic_menu_from(instance: Instance, contracts: Sequence[Sequence]) -> DeterministicMenu:
    """Menu with recommendations set to the played actions."""
    entries = [tuple(p) for p in contracts]
    recs = [best_response(instance, t, p).action for t, p in enumerate(entries)]
    return DeterministicMenu(tuple(entries), tuple(recs))

