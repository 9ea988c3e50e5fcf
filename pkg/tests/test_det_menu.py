import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from bayesmenu import (CapExceededError, DeterministicMenu, DimensionError, GridSpec, Instance,
                       PreconditionError, RandomParams, convert_to_dsic, discretize_menu,
                       gen_random, grid_det_menu, heavy_types, menu_value,
                       ptas_constant_outcomes, solve_constant_types, solve_two_outcomes,
                       verify_dsic, verify_eps_approx)
from bayesmenu.agent import recommended_value
from bayesmenu.det_menu import (grid_top_index, payment_grid, ptas_contract_count,
                                rational_sqrt, set_partitions, two_outcome_candidates)

seeds = st.integers(0, 10**6)


def single(dist, cost, reward):
    n = len(dist)
    return Instance(types=["t"], actions=[f"a{i}" for i in range(n)],
                    outcomes=[f"w{i}" for i in range(len(reward))], mu=[1],
                    dist=[dist], cost=[cost], reward=reward)


# ---------------------------------------------------------------- two outcomes

def test_single_zero_cost_action():
    inst = single([[F(1, 3), F(2, 3)]], [0], [F(1, 4), 1])
    menu, value = solve_two_outcomes(inst)
    assert menu.entries == ((0, 0),)
    assert value == F(1, 12) + F(2, 3)


def test_equal_rewards_give_zero_contract():
    inst = gen_random(RandomParams(2, 3, 2, seed=1)).replace(reward=[F(1, 2), F(1, 2)])
    menu, _ = solve_two_outcomes(inst)
    assert all(p == (0, 0) for p in menu.entries)


@given(seeds)
def test_two_outcomes_single_contract_shape(seed):
    inst = gen_random(RandomParams(3, 3, 2, seed))
    menu, value = solve_two_outcomes(inst)
    lo, hi, cands = two_outcome_candidates(inst)
    assert len(set(menu.entries)) == 1
    p = menu.entries[0]
    assert p[lo] == 0 and 0 <= p[hi] <= inst.reward[hi] - inst.reward[lo]
    assert verify_dsic(inst, menu).ok and menu_value(inst, menu) == value
    # every candidate single contract is no better
    for x in cands:
        q = [0, 0]
        q[hi] = x
        assert menu_value(inst, DeterministicMenu((tuple(q),) * 3)) <= value


@given(seeds)
def test_two_outcomes_agrees_with_profile_enumeration(seed):
    inst = gen_random(RandomParams(2, 3, 2, seed))
    assert solve_two_outcomes(inst)[1] == solve_constant_types(inst)[1]


def test_two_outcomes_dimension_error(fixture_instance):
    with pytest.raises(DimensionError):
        solve_two_outcomes(fixture_instance)


@pytest.mark.parametrize("seed", range(4))
def test_two_outcomes_against_fine_grid(seed):
    inst = gen_random(RandomParams(1, 2, 2, seed))
    exact = solve_two_outcomes(inst)[1]
    step = F(1, 8)
    grid = grid_det_menu(inst, GridSpec(1, step))[1]
    assert grid <= exact <= grid + 2 * step


# -------------------------------------------------------------- constant types

def test_fixture_deterministic_optimum(fixture_instance):
    menu, value = solve_constant_types(fixture_instance)
    assert value == F(2, 3)
    assert verify_dsic(fixture_instance, menu).ok


def test_single_type_matches_breakpoints():
    inst = gen_random(RandomParams(1, 3, 2, seed=9))
    assert solve_constant_types(inst)[1] == solve_two_outcomes(inst)[1]


def test_zero_costs_pay_nothing():
    inst = gen_random(RandomParams(2, 3, 3, seed=2))
    inst = inst.replace(cost=[[0] * 3, [0] * 3])
    menu, value = solve_constant_types(inst)
    assert all(x == 0 for p in menu.entries for x in p)
    assert value == sum(inst.mu[t] * max(inst.expected_reward[t]) for t in range(2))


@given(seeds, st.integers(0, 2), st.fractions(0, 1, max_denominator=8))
def test_constant_types_monotone_in_rewards(seed, w, bump):
    inst = gen_random(RandomParams(2, 2, 3, seed))
    reward = list(inst.reward)
    reward[w] = min(F(1), reward[w] + bump)
    assert solve_constant_types(inst.replace(reward=reward))[1] >= solve_constant_types(inst)[1]


def test_profile_cap():
    inst = gen_random(RandomParams(3, 4, 2, seed=0))
    with pytest.raises(CapExceededError) as info:
        solve_constant_types(inst, cap=10)
    assert info.value.count == 64


# ------------------------------------------------------------- conversion

def test_rational_sqrt():
    assert rational_sqrt(F(1, 100)) == F(1, 10)
    s = rational_sqrt(F(2))
    assert s * s <= 2 < (s + F(1, 2**64)) ** 2


def test_conversion_identity_at_zero(fixture_instance):
    menu, value = solve_constant_types(fixture_instance)
    out = convert_to_dsic(fixture_instance, menu, 0)
    assert verify_dsic(fixture_instance, out).ok
    assert menu_value(fixture_instance, out) >= value


def test_conversion_all_zero_eps_one(fixture_instance):
    zero = DeterministicMenu(((0,) * 4,) * 3, recommendations=(0, 0, 1))
    out = convert_to_dsic(fixture_instance, zero, 1)
    assert all(p == fixture_instance.reward for p in out.entries)
    assert verify_dsic(fixture_instance, out).ok


def test_conversion_rejects_bad_input(fixture_instance):
    bad = DeterministicMenu(((0,) * 4, (0,) * 4, (1, 0, 0, 0)), recommendations=(0, 0, 1))
    with pytest.raises(PreconditionError):
        convert_to_dsic(fixture_instance, bad, F(1, 100))


@given(seeds)
def test_conversion_bound(seed):
    inst = gen_random(RandomParams(3, 2, 2, seed))
    menu, _ = solve_constant_types(inst)
    eps = F(1, 100)
    rng = random.Random(seed)
    noisy = DeterministicMenu(
        tuple(tuple(max(F(0), x + F(rng.randint(-2, 2), 1000)) for x in p) for p in menu.entries),
        menu.recommendations)
    if not verify_eps_approx(inst, noisy, eps).ok:
        return
    out = convert_to_dsic(inst, noisy, eps)
    assert verify_dsic(inst, out).ok
    assert menu_value(inst, out) >= recommended_value(inst, noisy) - 2 * rational_sqrt(eps)


# ------------------------------------------------------------- heavy types

def test_zero_menu_has_no_heavy_types(fixture_instance):
    zero = DeterministicMenu(((0,) * 4,) * 3)
    for L in (2, 4, 8):
        assert heavy_types(fixture_instance, zero, L).members == ()


def test_heavy_mass_certifies_non_optimality():
    inst = Instance(types=["x", "y"], actions=["a"], outcomes=["w"], mu=[F(1, 2)] * 2,
                    dist=[[[1]], [[1]]], cost=[[0], [0]], reward=[1])
    menu = DeterministicMenu(((5,), (5,)))
    heavy = heavy_types(inst, menu, 4)
    assert heavy.members == (0, 1) and heavy.mass > F(1, 4)
    assert menu_value(inst, menu) < solve_constant_types(inst)[1]


@given(seeds)
def test_optimal_menus_have_light_heavy_mass(seed):
    inst = gen_random(RandomParams(2, 3, 2, seed))
    menu, _ = solve_constant_types(inst)
    for L in (2, 4, 8):
        assert heavy_types(inst, menu, L).mass <= F(1, L)


def test_threshold_must_exceed_one(fixture_instance):
    with pytest.raises(ValueError):
        heavy_types(fixture_instance, DeterministicMenu(((0,) * 4,) * 3), 1)


# ------------------------------------------------------------- discretization

def test_grid_index_definition():
    for eta in (F(1, 2), F(1, 10), F(1, 1000)):
        i = grid_top_index(eta)
        assert (1 - eta) ** i <= eta < (1 - eta) ** (i - 1)
        assert i == math.ceil(math.log(eta) / math.log(1 - eta))


def test_grid_values_decrease_and_round_down():
    inst = gen_random(RandomParams(2, 2, 2, seed=3))
    menu = DeterministicMenu(((F(1, 2), 1), (F(1, 3), F(1, 4))))
    grid = payment_grid(inst, menu, 1)
    vals = grid.values(0)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-2] <= grid.eta * grid.ceiling[0]
    for x in (F(0), F(1, 7), F(1, 3), F(1, 2)):
        r = grid.round_down(0, x)
        assert r <= x and (r == x or r in vals)


def test_menu_on_grid_unchanged():
    inst = gen_random(RandomParams(2, 2, 2, seed=4))
    menu = DeterministicMenu(((F(1, 2), 0), (F(1, 2), 0)))
    out = discretize_menu(inst, menu, F(1, 2))
    assert out.entries == menu.entries


@given(seeds)
def test_discretized_optimum_is_approximate(seed):
    inst = gen_random(RandomParams(2, 3, 2, seed))
    menu, value = solve_constant_types(inst)
    delta = F(1, 2)
    out = discretize_menu(inst, menu, delta)
    assert verify_eps_approx(inst, out, delta ** 2 / 16).ok
    assert recommended_value(inst, out) >= value - delta / 2
    grid = payment_grid(inst, menu, delta)
    assert len(set(out.entries)) <= (grid.top_index + 2) ** 2


# ------------------------------------------------------------- PTAS

def test_partitions_counted():
    # Bell number B4 = 15; partitions of 4 items into at most 2 blocks = 8
    assert sum(1 for _ in set_partitions(4, 4)) == 15
    assert sum(1 for _ in set_partitions(4, 2)) == 8


def test_contract_count_formula():
    x = 64 * 2 / 0.25 ** 3
    assert ptas_contract_count(2, F(1, 4)) == math.ceil((x * math.log(x)) ** 2)


def test_ptas_delta_one_zero_menu_allowed(fixture_instance):
    inst = gen_random(RandomParams(2, 2, 2, seed=0))
    menu, value = ptas_constant_outcomes(inst, 1)
    assert value >= solve_two_outcomes(inst)[1] - 1
    assert verify_dsic(inst, menu).ok


@pytest.mark.parametrize("seed", range(5))
def test_ptas_sandwich(seed):
    inst = gen_random(RandomParams(2, 2, 2 + seed % 2, seed))
    exact = solve_constant_types(inst)[1]
    menu, value = ptas_constant_outcomes(inst, F(1, 4))
    assert exact - F(1, 4) <= value <= exact
    assert verify_dsic(inst, menu).ok


@pytest.mark.parametrize("seed", range(3))
def test_ptas_vertex_mode_agrees(seed):
    inst = gen_random(RandomParams(2, 2, 2, seed))
    a = ptas_constant_outcomes(inst, F(1, 4))[1]
    b = ptas_constant_outcomes(inst, F(1, 4), mode="vertex_enum")[1]
    assert a == b


def test_ptas_refuses_four_outcomes(fixture_instance):
    with pytest.raises(DimensionError):
        ptas_constant_outcomes(fixture_instance, F(1, 4))


def test_ptas_cap_reports_count():
    inst = gen_random(RandomParams(4, 4, 2, seed=0))
    with pytest.raises(CapExceededError) as info:
        ptas_constant_outcomes(inst, F(1, 4), cap=100)
    assert info.value.count == 15 * 4 ** 4
