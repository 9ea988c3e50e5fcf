import json
from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from bayesmenu import (DeterministicMenu, Instance, ParseError, RandomizedMenu, RandomParams,
                       gen_random, instance_size, read_instance, read_menu, solve_constant_types,
                       validate, write_instance, write_menu)
from bayesmenu.model import instance_from_dict, instance_to_dict, to_fraction


def tiny(**over):
    base = dict(types=["t"], actions=["a", "b"], outcomes=["lo", "hi"], mu=[1],
                dist=[[[F(1), F(0)], [F(1, 4), F(3, 4)]]], cost=[[0, F(1, 8)]],
                reward=[0, 1])
    base.update(over)
    return Instance(**base)


seeds = st.integers(min_value=0, max_value=10**6)


def test_fixture_is_valid(fixture_instance):
    assert validate(fixture_instance).violations == []


def test_tiny_instance_valid():
    assert validate(tiny()).ok


def test_nonstochastic_row_reported():
    inst = tiny(dist=[[[F(9, 10), F(0)], [F(1, 4), F(3, 4)]]])
    report = validate(inst)
    assert any("distribution not stochastic" in v for v in report.violations)
    assert report.normalized is None


def test_cost_out_of_range_reported():
    report = validate(tiny(cost=[[0, F(-1, 10)]]))
    assert any("outside [0,1]" in v for v in report.violations)


def test_missing_zero_cost_action_reported():
    report = validate(tiny(cost=[[F(1, 8), F(1, 8)]]))
    assert "no action has zero cost for every type" in report.violations


def test_zero_mass_type_stripped():
    inst = tiny(types=["t", "ghost"], mu=[1, 0],
                dist=[[[1, 0], [F(1, 4), F(3, 4)]]] * 2, cost=[[0, F(1, 8)]] * 2)
    report = validate(inst)
    assert report.ok
    assert report.normalized.types == ("t",) or list(report.normalized.types) == ["t"]


def test_unreachable_outcome_stripped():
    inst = tiny(outcomes=["lo", "hi", "never"],
                dist=[[[1, 0, 0], [F(1, 4), F(3, 4), 0]]], reward=[0, 1, 1])
    norm = validate(inst).normalized
    assert norm.n_outcomes == 2
    assert validate(norm).violations == []


@given(seeds)
def test_validate_idempotent_on_normalized(seed):
    inst = gen_random(RandomParams(2, 3, 2, seed, sparsity=0.3))
    norm = validate(inst).normalized
    again = validate(norm)
    assert again.ok and again.normalized == norm


def test_stripping_zero_mass_type_keeps_optimum():
    base = gen_random(RandomParams(2, 2, 2, seed=5))
    padded = base.replace(types=list(base.types) + ["ghost"], mu=list(base.mu) + [0],
                          dist=list(base.dist) + [base.dist[0]],
                          cost=list(base.cost) + [base.cost[0]])
    norm = validate(padded).normalized
    assert solve_constant_types(norm)[1] == solve_constant_types(base)[1]


def test_instance_size_of_zero_one_instance():
    inst = Instance(types=["t"], actions=["a"], outcomes=["w"], mu=[1], dist=[[[1]]],
                    cost=[[0]], reward=[1])
    # mu, reward, cost, one probability: four rationals, two bits each
    assert instance_size(inst) == 2 * 4


def test_instance_size_of_fixture(fixture_instance):
    # 48 probabilities, 9 costs, 4 rewards and 3 masses, counted by hand
    assert instance_size(fixture_instance) == 112


def test_instance_size_grows_with_denominator():
    small = tiny(reward=[0, F(1, 2)])
    big = tiny(reward=[0, F(1, 8)])
    assert instance_size(big) - instance_size(small) == 2


def test_round_trip_fixture(tmp_path, fixture_instance):
    path = tmp_path / "fx.json"
    write_instance(fixture_instance, path)
    assert read_instance(path) == fixture_instance


@given(seeds)
def test_round_trip_random_is_exact(seed):
    inst = gen_random(RandomParams(2, 3, 3, seed))
    again = instance_from_dict(json.loads(json.dumps(instance_to_dict(inst))))
    assert again == inst


def test_zero_denominator_is_parse_error(tmp_path, fixture_instance):
    data = instance_to_dict(fixture_instance)
    data["mu"]["theta1"] = "1/0"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ParseError, match="mu.theta1"):
        read_instance(path)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "types": [\n}')
    with pytest.raises(ParseError, match="line 3"):
        read_instance(path)


def test_negative_cost_in_file_flagged(tmp_path, fixture_instance):
    data = instance_to_dict(fixture_instance)
    data["cost"]["theta1/a2"] = -0.1
    path = tmp_path / "neg.json"
    path.write_text(json.dumps(data))
    assert not validate(read_instance(path)).ok


def test_decimal_numbers_are_exact():
    assert to_fraction(Decimal("0.1")) == F(1, 10)
    assert to_fraction("0.3") == F(3, 10)
    assert to_fraction(" 2 / 6 ") == F(1, 3)


@pytest.mark.parametrize("bad", ["x", "1/0", True, None, "nan"])
def test_bad_rationals(bad):
    with pytest.raises(ParseError):
        to_fraction(bad)


def test_menu_round_trip(tmp_path, fixture_instance):
    det = DeterministicMenu(((0, 0, 0, 0), (0, F(1, 3), 0, 0), (0, F(1, 4), 0, 0)), (0, 1, 0))
    rand = RandomizedMenu((((det.entries[0], 1),),
                           ((det.entries[1], F(1, 3)), (det.entries[0], F(2, 3))),
                           ((det.entries[2], 1),)))
    for menu in (det, rand):
        path = tmp_path / "menu.json"
        write_menu(fixture_instance, menu, path)
        assert read_menu(fixture_instance, path) == menu


def test_randomized_menu_merges_duplicates():
    p = (F(0), F(1))
    menu = RandomizedMenu((((p, F(1, 2)), (p, F(1, 2)), ((F(1), F(1)), 0)),))
    assert menu.entries == (((p, F(1)),),)


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        RandomizedMenu(((((0,), F(-1)),),))
