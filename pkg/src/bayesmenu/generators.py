"""Instance generators: the fixture without an optimal menu, seeded random
instances, and the graph-based hardness construction."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath

from .agent import agent_utility, menu_value, verify_dsic
from .model import DeterministicMenu, Instance, to_fraction

F = Fraction


def gen_no_maximum_fixture() -> Instance:
    """Three types on four outcomes whose randomized optimum is approached but never attained.

    The principal can get arbitrarily close to 3/4 with randomized menus,
    while no menu reaches it.
    """
    one, zero = F(1), F(0)

    def point(w):
        return [one if i == w else zero for i in range(4)]

    dist = [
        [point(0), point(2), point(2)],
        [point(0), point(1), point(3)],
        [point(1), point(2), point(2)],
    ]
    cost = [[zero] * 3, [zero] * 3, [F(1, 4), zero, zero]]
    return Instance(
        types=["theta1", "theta2", "theta3"],
        actions=["a1", "a2", "a3"],
        outcomes=["w1", "w2", "w3", "w4"],
        mu=[F(1, 3)] * 3,
        dist=dist,
        cost=cost,
        reward=[one, F(3, 4), zero, zero],
    )


def fixture_near_optimal_menu(epsilon) -> "RandomizedMenu":
    """The menu worth ``3/4 - epsilon`` on the fixture (``0 < epsilon <= 1/3``)."""
    from .model import RandomizedMenu
    eps = to_fraction(epsilon)
    p1 = (F(0),) * 4
    p2 = (F(0), F(0), F(0), 1 / (12 * eps))
    p3 = (F(0), F(1, 4), F(0), F(0))
    return RandomizedMenu((
        ((p1, F(1)),),
        ((p2, 3 * eps), (p1, 1 - 3 * eps)),
        ((p3, F(1)),),
    ))


@dataclass(frozen=True)
class RandomParams:
    n_types: int
    n_actions: int
    n_outcomes: int
    seed: int = 0
    sparsity: float = 0.0
    weight_max: int = 8
    cost_den: int = 16
    reward_den: int = 8


def gen_random(params: RandomParams) -> Instance:
    """Seeded random instance with small-denominator rationals.

    Action ``a1`` costs nothing for every type.  Distribution rows are drawn
    as integer weights and normalized exactly; with ``sparsity > 0`` each
    weight is zeroed with that probability (one entry per row always stays
    positive).
    """
    rng = random.Random(params.seed)
    nt, na, m = params.n_types, params.n_actions, params.n_outcomes
    if min(nt, na, m) < 1:
        raise ValueError("need at least one type, action and outcome")
    mu_w = [rng.randint(1, 4) for _ in range(nt)]
    mu = [F(w, sum(mu_w)) for w in mu_w]
    dist, cost = [], []
    for _ in range(nt):
        rows, costs = [], []
        for a in range(na):
            weights = [0 if rng.random() < params.sparsity else rng.randint(1, params.weight_max)
                       for _ in range(m)]
            if not any(weights):
                weights[rng.randrange(m)] = rng.randint(1, params.weight_max)
            total = sum(weights)
            rows.append([F(w, total) for w in weights])
            costs.append(F(0) if a == 0 else F(rng.randint(0, params.cost_den // 2), params.cost_den))
        dist.append(rows)
        cost.append(costs)
    reward = [F(rng.randint(0, params.reward_den), params.reward_den) for _ in range(m)]
    inst = Instance(
        types=[f"t{i + 1}" for i in range(nt)],
        actions=[f"a{i + 1}" for i in range(na)],
        outcomes=[f"w{i + 1}" for i in range(m)],
        mu=mu, dist=dist, cost=cost, reward=reward,
        metadata={"generator": "random", "seed": params.seed},
    )
    # outcomes that no action reaches would be stripped by validation
    if any(all(inst.dist[t][a][w] == 0 for t in range(nt) for a in range(na)) for w in range(m)):
        return gen_random(RandomParams(nt, na, m, params.seed + 1_000_003, params.sparsity,
                                       params.weight_max, params.cost_den, params.reward_den))
    return inst


# --------------------------------------------------------------------------
# hardness construction


@dataclass
class Graph:
    vertices: list[int]
    edges: list[tuple[int, int]]
    k: int | None = None
    independent_set: list[int] | None = None

    def neighbors(self, v: int) -> list[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return sorted(out)

    @property
    def max_degree(self) -> int:
        return max((len(self.neighbors(v)) for v in self.vertices), default=0)

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        if "vertices" in data:
            vertices = [int(v) for v in data["vertices"]]
        else:
            vertices = list(range(1, int(data["n"]) + 1))
        edges = [(int(a), int(b)) for a, b in data.get("edges", [])]
        indep = data.get("independent_set")
        return cls(vertices, edges, data.get("k"),
                   None if indep is None else [int(v) for v in indep])

    @classmethod
    def read(cls, path: str | Path) -> "Graph":
        return cls.from_dict(json.loads(Path(path).read_text()))


def cycle_graph(s: int) -> Graph:
    return Graph(list(range(1, s + 1)), [(i, i % s + 1) for i in range(1, s + 1)])


@dataclass
class HardnessParams:
    graph: Graph
    alpha: Fraction
    k: int | None = None
    independent_set: Sequence[int] | None = None
    eta: Fraction | None = None
    precision_bits: int = 40
    extra: dict = field(default_factory=dict)

    @property
    def degree_bound(self) -> int:
        if self.k is not None:
            return self.k
        if self.graph.k is not None:
            return int(self.graph.k)
        return self.graph.max_degree

    @property
    def l(self) -> int:
        return math.ceil(F(self.degree_bound) / to_fraction(self.alpha))

    @property
    def rho(self) -> Fraction:
        return F(1, len(self.graph.vertices) ** 3)


def _floor_trig(angle_num: int, angle_den: int, bits: int) -> tuple[Fraction, Fraction]:
    """``cos`` and ``sin`` of ``pi * num / den`` rounded down to multiples of ``2**-bits``."""
    with mpmath.workdps(60):
        x = mpmath.pi * angle_num / angle_den
        scale = mpmath.mpf(2) ** bits
        slack = mpmath.mpf(10) ** -40
        c = int(mpmath.floor(mpmath.cos(x) * scale + slack))
        s = int(mpmath.floor(mpmath.sin(x) * scale + slack))
    return F(max(c, 0), 1 << bits), F(max(s, 0), 1 << bits)


def gen_hardness(params: HardnessParams):
    """Build the hardness instance for a bounded-degree graph.

    Returns ``(instance, witness, claimed_bound)``.  Actions are shared
    slots: ``own`` (the vertex's own action), ``adj_<u>_<i>`` (one slot per
    vertex ``u`` and index ``i``; a real action only for types adjacent to
    ``u``) and ``bar``.  Slots that are not real for a type copy ``bar``.
    ``witness`` is ``None`` when no independent set is supplied.
    """
    graph = params.graph
    alpha = to_fraction(params.alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    k = params.degree_bound
    verts = list(graph.vertices)
    s = len(verts)
    if s == 0:
        raise ValueError("graph has no vertices")
    for v in verts:
        if len(graph.neighbors(v)) > k:
            raise ValueError(f"vertex {v} has degree {len(graph.neighbors(v))} > k = {k}")
    indep = params.independent_set
    if indep is None:
        indep = graph.independent_set
    if indep is not None:
        indep = sorted(set(int(v) for v in indep))
        if any(v not in verts for v in indep):
            raise ValueError("independent set mentions unknown vertices")
        for a, b in graph.edges:
            if a in indep and b in indep:
                raise ValueError(f"independent set contains the edge ({a}, {b})")
    l = params.l
    rho = params.rho
    idx = list(range(1, l - 2))          # [l-3]
    bits = params.precision_bits
    trig = {v: _floor_trig(v, 2 * s, bits) for v in verts}
    two = F(2)

    slots = [("own", None, None)]
    for u in verts:
        for i in idx:
            slots.append((f"adj_{u}_{i}", u, i))
    slots.append(("bar", None, None))
    bar_row = [F(0), F(0), F(0), F(1)]

    dist, cost, real_actions = [], [], {}
    for v in verts:
        rows, costs, real = [], [], []
        nbrs = set(graph.neighbors(v))
        for name, u, i in slots:
            if name == "own":
                c, sn = trig[v]
                row = [c / 4, sn / 4, F(1, 4)]
                cst = F(1, 4) - rho * l * two ** -l
                real.append(name)
            elif name == "bar":
                row, cst = None, F(0)
                real.append(name)
            elif u in nbrs:
                c, sn = trig[u]
                scale = two ** (-i - 2)
                row = [c * scale, sn * scale, scale]
                cst = scale - rho * (l - i) * two ** -l
                real.append(name)
            else:
                row, cst = None, F(0)
            if row is None:
                rows.append(list(bar_row))
            else:
                rows.append(row + [1 - sum(row)])
            costs.append(cst)
        dist.append(rows)
        cost.append(costs)
        real_actions[f"v{v}"] = real

    metadata = {
        "generator": "hardness",
        "k": k, "alpha": str(alpha), "l": l, "rho": str(rho), "s": s,
        "trig_mode": f"rational-approx 2^-{bits}",
        "real_actions": real_actions,
        "note": "bounds of the construction hold only for large graphs; "
                "small-graph values are regression data",
    }
    inst = Instance(
        types=[f"v{v}" for v in verts],
        actions=[name for name, _, _ in slots],
        outcomes=["w1", "w2", "w3", "w4"],
        mu=[F(1, s)] * s,
        dist=dist, cost=cost,
        reward=[F(0), F(0), F(1), F(0)],
        metadata=metadata,
    )
    if indep is None:
        return inst, None, None
    eta = to_fraction(params.eta) if params.eta is not None else F(len(indep), s)
    factor = 1 - rho * l * two ** (1 - l)
    pos = {v: t for t, v in enumerate(verts)}
    own = {}
    for v in indep:
        c, sn = trig[v]
        own[v] = (c * factor, sn * factor, F(0), F(0))
    contracts = []
    for v in verts:
        if v in own:
            contracts.append(own[v])
            continue
        best_u, best_val = None, None
        for u in indep:        # sorted, so ties go to the lowest label
            val = agent_utility(inst, pos[v], own[u])
            if best_val is None or val > best_val:
                best_u, best_val = u, val
        contracts.append(own[best_u])
    witness = DeterministicMenu(tuple(contracts))
    claimed = eta * rho * l * two ** -l / 2
    inst.metadata["claimed_bound"] = str(claimed)
    inst.metadata["independent_set"] = indep
    return inst, witness, claimed


def witness_summary(instance: Instance, witness: DeterministicMenu) -> dict:
    """Value and worst DSIC slack of a witness menu (regression data)."""
    report = verify_dsic(instance, witness)
    return {"value": menu_value(instance, witness), "worst_slack": report.worst,
            "dsic": report.ok}
