import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from bayesmenu import (Graph, HardnessParams, RandomParams, cycle_graph, gen_hardness,
                       gen_no_maximum_fixture, gen_random, validate)
from bayesmenu.generators import witness_summary
from bayesmenu.model import instance_to_dict

C5_WITNESS_VALUE = F(8462480740759479415675093, 12089258196146291747061760000)


def test_fixture_data():
    fx = gen_no_maximum_fixture()
    assert fx.reward[1] == F(3, 4)
    assert fx.cost[2][0] == F(1, 4)
    assert fx.mu == (F(1, 3),) * 3 or list(fx.mu) == [F(1, 3)] * 3
    # theta2 playing a3 lands on omega4 with certainty
    assert list(fx.dist[1][2]) == [0, 0, 0, 1]


def test_fixture_is_deterministic():
    a = json.dumps(instance_to_dict(gen_no_maximum_fixture()))
    b = json.dumps(instance_to_dict(gen_no_maximum_fixture()))
    assert a == b


@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**63 - 1),
       st.sampled_from([0.0, 0.3, 0.7]))
def test_random_instances_validate(nt, na, m, seed, sparsity):
    inst = gen_random(RandomParams(nt, na, m, seed, sparsity))
    assert validate(inst).violations == []
    assert all(c == 0 for row in inst.cost for c in [row[0]])


def test_random_is_reproducible():
    p = RandomParams(2, 3, 2, seed=7)
    assert gen_random(p) == gen_random(p)
    assert validate(gen_random(p)).ok


def test_dense_rows_are_positive():
    inst = gen_random(RandomParams(2, 3, 3, seed=1, sparsity=0.0))
    assert all(f > 0 for rows in inst.dist for row in rows for f in row)


def c5():
    return gen_hardness(HardnessParams(cycle_graph(5), F(1, 2), k=2, independent_set=[1, 3]))


def test_hardness_parameters():
    params = HardnessParams(cycle_graph(5), F(1, 2), k=2)
    assert params.l == 4 and params.rho == F(1, 125)


def test_hardness_c5_structure():
    inst, witness, claimed = c5()
    assert validate(inst).violations == []
    real = inst.metadata["real_actions"]
    for v in range(1, 6):
        nbrs = {(v % 5) + 1, ((v - 2) % 5) + 1}
        assert real[f"v{v}"] == ["own"] + [f"adj_{u}_1" for u in sorted(nbrs)] + ["bar"]
    assert claimed == F(1, 2) * F(2, 5) * F(1, 125) * 4 * F(1, 16)


def test_bar_action_and_fillers():
    inst, _, _ = c5()
    bar = inst.action_index("bar")
    for t in range(inst.n_types):
        assert list(inst.dist[t][bar]) == [0, 0, 0, 1] and inst.cost[t][bar] == 0
        real = set(inst.metadata["real_actions"][inst.types[t]])
        for a, name in enumerate(inst.actions):
            if name not in real:
                assert inst.dist[t][a] == inst.dist[t][bar]


def test_rows_stochastic_after_rounding():
    inst, _, _ = c5()
    for rows in inst.dist:
        for row in rows:
            assert sum(row) == 1 and all(f >= 0 for f in row)
            assert all((f * 2**44).denominator == 1 for f in row[:2])


def test_edgeless_graph_has_own_and_bar_only():
    graph = Graph([1, 2, 3], [])
    inst, witness, _ = gen_hardness(HardnessParams(graph, F(1, 2), k=1, independent_set=[1, 2, 3]))
    for t in inst.types:
        assert inst.metadata["real_actions"][t] == ["own", "bar"]
    assert witness_summary(inst, witness)["dsic"]


def test_witness_regression():
    inst, witness, _ = c5()
    summary = witness_summary(inst, witness)
    assert summary["dsic"] and summary["worst_slack"] == 0
    assert summary["value"] == C5_WITNESS_VALUE


def test_degree_violation():
    with pytest.raises(ValueError, match="degree"):
        gen_hardness(HardnessParams(cycle_graph(5), F(1, 2), k=1))


def test_dependent_set_rejected():
    with pytest.raises(ValueError, match="edge"):
        gen_hardness(HardnessParams(cycle_graph(5), F(1, 2), k=2, independent_set=[1, 2]))


def test_graph_file_forms(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"n": 4, "edges": [[1, 2]], "k": 1}))
    g = Graph.read(path)
    assert g.vertices == [1, 2, 3, 4] and g.k == 1 and g.neighbors(2) == [1]
