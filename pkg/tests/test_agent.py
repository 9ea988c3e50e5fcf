from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from bayesmenu import (DeterministicMenu, Instance, RandomizedMenu, RandomParams,
                       agent_utility, agent_utility_randomized, best_response, gen_random,
                       menu_value, verify_dsic, verify_eps_approx)
from bayesmenu.agent import recommended_value
from bayesmenu.generators import fixture_near_optimal_menu

payments = st.fractions(min_value=0, max_value=3, max_denominator=16)


def contracts(m):
    return st.lists(payments, min_size=m, max_size=m).map(tuple)


def brute_best(inst, t, p):
    """Hand oracle: scan every action with the stated tie order."""
    best = None
    for a in range(inst.n_actions):
        u = sum(f * x for f, x in zip(inst.dist[t][a], p)) - inst.cost[t][a]
        v = sum(f * (r - x) for f, r, x in zip(inst.dist[t][a], inst.reward, p))
        key = (u, v)
        if best is None or key > best[0]:
            best = (key, a)
    return best[1], best[0][0], best[0][1]


def test_fixture_theta3_tie_goes_to_principal(fixture_instance):
    br = best_response(fixture_instance, "theta3", (0, F(1, 4), 0, 0))
    assert br.action == 0
    assert br.agent_utility == 0
    assert br.principal_utility == F(1, 2)
    assert br.tied_set == (0, 1, 2)


def test_zero_contract_picks_zero_cost_action(fixture_instance):
    for t in range(3):
        br = best_response(fixture_instance, t, (0, 0, 0, 0))
        assert br.agent_utility == 0
        assert fixture_instance.cost[t][br.action] == 0


@given(st.integers(0, 10**6), st.data())
def test_best_response_matches_scan(seed, data):
    inst = gen_random(RandomParams(2, 3, 2, seed))
    p = data.draw(contracts(2))
    for t in range(2):
        br = best_response(inst, t, p)
        a, u, v = brute_best(inst, t, p)
        assert (br.action, br.agent_utility, br.principal_utility) == (a, u, v)
        assert br.action in br.tied_set
        assert best_response(inst, t, p) == br


@given(st.integers(0, 10**6), st.data())
def test_agent_utility_monotone_in_payments(seed, data):
    inst = gen_random(RandomParams(2, 3, 3, seed))
    p = data.draw(contracts(3))
    bump = data.draw(contracts(3))
    q = tuple(x + y for x, y in zip(p, bump))
    for t in range(2):
        assert agent_utility(inst, t, q) >= agent_utility(inst, t, p)


def test_float_contract_uses_tolerance():
    inst = Instance(types=["t"], actions=["a", "b"], outcomes=["lo", "hi"], mu=[1],
                    dist=[[[1, 0], [0, 1]]], cost=[[0, 0]], reward=[1, 0])
    # utilities 0.5 and 0.5 + 1e-12 tie under the float rule; principal prefers a
    assert best_response(inst, 0, (0.5, 0.5 + 1e-12)).action == 0
    assert best_response(inst, 0, (F(1, 2), F(1, 2) + F(1, 10**12))).action == 1


def test_randomized_utility_examples(fixture_instance):
    eps = F(1, 20)
    menu = fixture_near_optimal_menu(eps)
    assert agent_utility_randomized(fixture_instance, "theta2", menu.entries[1]) == F(1, 4)
    zero = (((F(0),) * 4, F(1)),)
    assert agent_utility_randomized(fixture_instance, 0, zero) == 0


@given(st.integers(0, 10**6), st.data())
def test_randomized_utility_is_linear(seed, data):
    inst = gen_random(RandomParams(2, 2, 2, seed))
    p, q = data.draw(contracts(2)), data.draw(contracts(2))
    if p == q:
        return
    mixed = agent_utility_randomized(inst, 0, ((p, F(1, 2)), (q, F(1, 2))))
    assert mixed == (agent_utility(inst, 0, p) + agent_utility(inst, 0, q)) / 2


def test_fixture_menu_value_and_dsic(fixture_instance):
    menu = fixture_near_optimal_menu(F(1, 20))
    assert menu_value(fixture_instance, menu) == F(7, 10)
    assert verify_dsic(fixture_instance, menu).ok


def test_identical_contracts_are_dsic_with_zero_slack(fixture_instance):
    p = (F(1, 3), 0, F(1, 5), 1)
    report = verify_dsic(fixture_instance, DeterministicMenu((p, p, p)))
    assert report.ok and set(report.slacks.values()) == {0}


def test_overpaying_other_type_is_flagged():
    inst = Instance(types=["x", "y"], actions=["a"], outcomes=["w"], mu=[F(1, 2)] * 2,
                    dist=[[[1]], [[1]]], cost=[[0], [0]], reward=[1])
    menu = DeterministicMenu(((F(1, 10),), (F(3, 10),)))
    report = verify_dsic(inst, menu)
    assert not report.ok
    assert report.violations == [(0, 1)]
    assert report.slacks[0, 1] == F(-1, 5)


def test_point_mass_matches_deterministic(fixture_instance):
    det = DeterministicMenu(((0, 0, 0, 0), (0, F(1, 4), 0, 0), (0, F(1, 4), 0, 0)))
    rand = RandomizedMenu(tuple(((p, 1),) for p in det.entries))
    assert verify_dsic(fixture_instance, det).slacks == verify_dsic(fixture_instance, rand).slacks
    assert menu_value(fixture_instance, det) == menu_value(fixture_instance, rand)


def test_zero_menu_value(fixture_instance):
    zero = DeterministicMenu(((0,) * 4,) * 3)
    # theta1 plays a1 (omega1, reward 1), theta2 plays a1, theta3 plays a2 or a3 (reward 0)
    assert menu_value(fixture_instance, zero) == F(2, 3)


def crafted_two_types():
    # type y gains 3/4 * eps by taking x's contract while playing b
    return Instance(types=["x", "y"], actions=["a", "b"], outcomes=["lo", "hi"],
                    mu=[F(1, 2)] * 2, dist=[[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
                    cost=[[0, 0], [0, 0]], reward=[0, 1])


@pytest.mark.parametrize("eps", [F(1, 10), F(1, 100)])
def test_eps_approx_boundary(eps):
    inst = crafted_two_types()
    gain = 3 * eps / 4
    menu = DeterministicMenu(((0, gain), (0, 0)), recommendations=(1, 1))
    assert verify_eps_approx(inst, menu, eps).ok
    half = verify_eps_approx(inst, menu, eps / 2)
    assert not half.ok
    assert half.worst == eps / 2 - gain


def test_eps_approx_reduces_to_dsic(fixture_instance):
    menu = DeterministicMenu(((0,) * 4,) * 3, recommendations=(0, 0, 1))
    assert verify_eps_approx(fixture_instance, menu, 0).ok
    assert recommended_value(fixture_instance, menu) == menu_value(fixture_instance, menu)


def test_eps_approx_everything_passes_at_two():
    inst = crafted_two_types()
    menu = DeterministicMenu(((0, 0), (0, 1)), recommendations=(0, 0))
    assert verify_eps_approx(inst, menu, 2).ok


def test_eps_approx_needs_recommendations(fixture_instance):
    with pytest.raises(ValueError):
        verify_eps_approx(fixture_instance, DeterministicMenu(((0,) * 4,) * 3), 0)
