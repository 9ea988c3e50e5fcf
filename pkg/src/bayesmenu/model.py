"""Problem instances, contracts and menus for the Bayesian hidden-action model.

All numbers are kept as :class:`fractions.Fraction`.  Types, actions and
outcomes carry string identifiers, but everything internal is indexed by
position in the declared order.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Sequence

Contract = tuple  # tuple[Fraction, ...], one payment per outcome


class ParseError(ValueError):
    """Malformed instance or menu file; ``locus`` names the offending field."""

    def __init__(self, message: str, locus: str = ""):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


def to_fraction(x: Any, locus: str = "") -> Fraction:
    """Convert an int, Fraction, exact decimal or ``"num/den"`` string."""
    if isinstance(x, bool):
        raise ParseError(f"expected a rational, got {x!r}", locus)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise ParseError(f"non-finite number {x}", locus)
        return Fraction(x)
    if isinstance(x, float):
        # floats are accepted from Python callers only; from_float is exact
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        m = re.fullmatch(r"([+-]?\d+)\s*/\s*([+-]?\d+)", s)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise ParseError(f"zero denominator in {x!r}", locus)
            return Fraction(int(m.group(1)), den)
        try:
            return Fraction(Decimal(s))
        except Exception:
            raise ParseError(f"not a rational: {x!r}", locus) from None
    try:
        # gmpy2.mpq and similar expose numerator/denominator
        return Fraction(int(x.numerator), int(x.denominator))
    except AttributeError:
        raise ParseError(f"not a rational: {x!r}", locus) from None


def contract(values: Iterable[Any]) -> Contract:
    """Build a contract (tuple of Fractions) from any rational-like values."""
    return tuple(to_fraction(v) for v in values)


def fraction_to_json(x: Fraction) -> int | str:
    x = Fraction(x)
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Instance:
    """A Bayesian principal-agent instance.

    ``dist[t][a]`` is the outcome distribution of action ``a`` for type ``t``,
    ``cost[t][a]`` its cost, ``mu[t]`` the prior mass of type ``t`` and
    ``reward[w]`` the principal's reward for outcome ``w``.
    """

    types: tuple[str, ...]
    actions: tuple[str, ...]
    outcomes: tuple[str, ...]
    mu: tuple[Fraction, ...]
    dist: tuple[tuple[tuple[Fraction, ...], ...], ...]
    cost: tuple[tuple[Fraction, ...], ...]
    reward: tuple[Fraction, ...]
    metadata: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "types", tuple(str(t) for t in self.types))
        set_(self, "actions", tuple(str(a) for a in self.actions))
        set_(self, "outcomes", tuple(str(w) for w in self.outcomes))
        nt, na, no = len(self.types), len(self.actions), len(self.outcomes)
        mu = tuple(to_fraction(v, f"mu[{i}]") for i, v in enumerate(self.mu))
        reward = tuple(to_fraction(v, f"reward[{i}]") for i, v in enumerate(self.reward))
        if len(mu) != nt:
            raise ValueError(f"mu has {len(mu)} entries for {nt} types")
        if len(reward) != no:
            raise ValueError(f"reward has {len(reward)} entries for {no} outcomes")
        if len(self.dist) != nt or len(self.cost) != nt:
            raise ValueError("dist and cost need one block per type")
        dist = []
        cost = []
        for t in range(nt):
            if len(self.dist[t]) != na or len(self.cost[t]) != na:
                raise ValueError(f"type {self.types[t]}: need one row per action")
            rows = []
            for a in range(na):
                row = self.dist[t][a]
                if len(row) != no:
                    raise ValueError(
                        f"dist {self.types[t]}/{self.actions[a]} has {len(row)} "
                        f"entries for {no} outcomes")
                rows.append(tuple(to_fraction(v, f"dist[{t}][{a}]") for v in row))
            dist.append(tuple(rows))
            cost.append(tuple(to_fraction(v, f"cost[{t}]") for v in self.cost[t]))
        set_(self, "mu", mu)
        set_(self, "reward", reward)
        set_(self, "dist", tuple(dist))
        set_(self, "cost", tuple(cost))

    @property
    def n_types(self) -> int:
        return len(self.types)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def type_index(self, t: int | str) -> int:
        if isinstance(t, str):
            return self.types.index(t)
        return int(t)

    def action_index(self, a: int | str) -> int:
        if isinstance(a, str):
            return self.actions.index(a)
        return int(a)

    @cached_property
    def expected_reward(self) -> tuple[tuple[Fraction, ...], ...]:
        """``R[t][a] = sum_w F[t][a][w] r[w]``."""
        return tuple(
            tuple(sum((f * r for f, r in zip(row, self.reward)), Fraction(0)) for row in rows)
            for rows in self.dist)

    def replace(self, **changes) -> "Instance":
        data = dict(types=self.types, actions=self.actions, outcomes=self.outcomes,
                    mu=self.mu, dist=self.dist, cost=self.cost, reward=self.reward,
                    metadata=dict(self.metadata))
        data.update(changes)
        return Instance(**data)


@dataclass(frozen=True)
class DeterministicMenu:
    """One contract per type (by type position), with optional recommended actions."""

    entries: tuple[Contract, ...]
    recommendations: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(contract(p) for p in self.entries))
        if self.recommendations is not None:
            recs = tuple(int(a) for a in self.recommendations)
            if len(recs) != len(self.entries):
                raise ValueError("need one recommendation per type")
            object.__setattr__(self, "recommendations", recs)

    def to_randomized(self) -> "RandomizedMenu":
        return RandomizedMenu(tuple(((p, Fraction(1)),) for p in self.entries))


@dataclass(frozen=True)
class RandomizedMenu:
    """Per type, a finite list of ``(contract, weight)`` pairs.

    Zero-weight pairs are dropped and equal contracts are merged on
    construction, so support contracts are always pairwise distinct.
    """

    entries: tuple[tuple[tuple[Contract, Fraction], ...], ...]

    def __post_init__(self):
        cleaned = []
        for support in self.entries:
            merged: dict[Contract, Fraction] = {}
            for p, w in support:
                p = contract(p)
                w = to_fraction(w)
                if w < 0:
                    raise ValueError(f"negative weight {w}")
                if w == 0:
                    continue
                merged[p] = merged.get(p, Fraction(0)) + w
            cleaned.append(tuple(merged.items()))
        object.__setattr__(self, "entries", tuple(cleaned))

    def support_sizes(self) -> list[int]:
        return [len(s) for s in self.entries]


Menu = DeterministicMenu | RandomizedMenu


def as_randomized(menu: Menu) -> RandomizedMenu:
    if isinstance(menu, DeterministicMenu):
        return menu.to_randomized()
    return menu


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[str]
    normalized: Instance | None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(instance: Instance) -> ValidationReport:
    """List violated invariants and return a normalized copy.

    Types with zero mass and outcomes that never occur are stripped from the
    normalized copy rather than reported.  ``normalized`` is ``None`` when
    any violation is found.
    """
    inst = instance
    bad: list[str] = []
    nt, na, no = inst.n_types, inst.n_actions, inst.n_outcomes
    for name, ids in (("types", inst.types), ("actions", inst.actions),
                      ("outcomes", inst.outcomes)):
        if not ids:
            bad.append(f"no {name}")
        if len(set(ids)) != len(ids):
            bad.append(f"duplicate identifiers in {name}")
    for t in range(nt):
        if inst.mu[t] < 0:
            bad.append(f"negative mass for type {inst.types[t]}")
    if nt and sum(inst.mu) != 1:
        bad.append(f"type masses sum to {sum(inst.mu)}, not 1")
    for t in range(nt):
        for a in range(na):
            row = inst.dist[t][a]
            key = f"{inst.types[t]}/{inst.actions[a]}"
            if any(f < 0 for f in row):
                bad.append(f"negative probability in distribution {key}")
            if sum(row) != 1:
                bad.append(f"distribution not stochastic: {key} sums to {sum(row)}")
            c = inst.cost[t][a]
            if not 0 <= c <= 1:
                bad.append(f"cost {key} = {c} outside [0,1]")
    for w in range(no):
        if not 0 <= inst.reward[w] <= 1:
            bad.append(f"reward {inst.outcomes[w]} = {inst.reward[w]} outside [0,1]")
    if na and nt and not any(all(inst.cost[t][a] == 0 for t in range(nt)) for a in range(na)):
        bad.append("no action has zero cost for every type")
    if bad:
        return ValidationReport(bad, None)

    keep_t = [t for t in range(nt) if inst.mu[t] > 0]
    keep_w = [w for w in range(no)
              if any(inst.dist[t][a][w] > 0 for t in keep_t for a in range(na))]
    if len(keep_t) == nt and len(keep_w) == no:
        return ValidationReport([], inst)
    normalized = inst.replace(
        types=[inst.types[t] for t in keep_t],
        outcomes=[inst.outcomes[w] for w in keep_w],
        mu=[inst.mu[t] for t in keep_t],
        dist=[[[inst.dist[t][a][w] for w in keep_w] for a in range(na)] for t in keep_t],
        cost=[inst.cost[t] for t in keep_t],
        reward=[inst.reward[w] for w in keep_w],
    )
    return ValidationReport([], normalized)


def require_valid(instance: Instance) -> Instance:
    """Return the normalized instance or raise ``ValueError`` listing violations."""
    report = validate(instance)
    if not report.ok:
        raise ValueError("invalid instance: " + "; ".join(report.violations))
    return report.normalized


def _bits(x: int) -> int:
    return max(1, abs(x).bit_length())


def instance_size(instance: Instance) -> int:
    """Total bit length of every numerator and denominator in the instance."""
    numbers: list[Fraction] = [*instance.mu, *instance.reward]
    for t in range(instance.n_types):
        numbers.extend(instance.cost[t])
        for row in instance.dist[t]:
            numbers.extend(row)
    return sum(_bits(x.numerator) + _bits(x.denominator) for x in numbers)


# --------------------------------------------------------------------------
# serialization


def instance_to_dict(instance: Instance) -> dict:
    inst = instance
    out: dict[str, Any] = {
        "types": list(inst.types),
        "actions": list(inst.actions),
        "outcomes": list(inst.outcomes),
        "mu": {t: fraction_to_json(m) for t, m in zip(inst.types, inst.mu)},
        "dist": {},
        "cost": {},
        "reward": {w: fraction_to_json(r) for w, r in zip(inst.outcomes, inst.reward)},
    }
    for ti, t in enumerate(inst.types):
        for ai, a in enumerate(inst.actions):
            out["dist"][f"{t}/{a}"] = [fraction_to_json(f) for f in inst.dist[ti][ai]]
            out["cost"][f"{t}/{a}"] = fraction_to_json(inst.cost[ti][ai])
    if inst.metadata:
        out["metadata"] = inst.metadata
    return out


def _require(obj: dict, key: str, kind: type, locus: str = "") -> Any:
    if key not in obj:
        raise ParseError("missing field", f"{locus}{key}")
    value = obj[key]
    if not isinstance(value, kind):
        name = getattr(kind, "__name__", "rational")
        raise ParseError(f"expected {name}", f"{locus}{key}")
    return value


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object")
    types = _require(data, "types", list)
    actions = _require(data, "actions", list)
    outcomes = _require(data, "outcomes", list)
    for key, ids in (("types", types), ("actions", actions), ("outcomes", outcomes)):
        if not all(isinstance(x, str) for x in ids):
            raise ParseError("identifiers must be strings", key)
    mu_map = _require(data, "mu", dict)
    dist_map = _require(data, "dist", dict)
    cost_map = _require(data, "cost", dict)
    reward_map = _require(data, "reward", dict)

    def get(mapping, key, locus):
        if key not in mapping:
            raise ParseError("missing entry", f"{locus}.{key}")
        return mapping[key]

    mu = [to_fraction(get(mu_map, t, "mu"), f"mu.{t}") for t in types]
    reward = [to_fraction(get(reward_map, w, "reward"), f"reward.{w}") for w in outcomes]
    dist, cost = [], []
    for t in types:
        rows, costs = [], []
        for a in actions:
            key = f"{t}/{a}"
            row = get(dist_map, key, "dist")
            if not isinstance(row, list) or len(row) != len(outcomes):
                raise ParseError(f"expected a list of {len(outcomes)} rationals", f"dist.{key}")
            rows.append([to_fraction(v, f"dist.{key}[{i}]") for i, v in enumerate(row)])
            costs.append(to_fraction(get(cost_map, key, "cost"), f"cost.{key}"))
        dist.append(rows)
        cost.append(costs)
    return Instance(types, actions, outcomes, mu, dist, cost, reward,
                    metadata=dict(data.get("metadata", {})))


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{exc.msg} (line {exc.lineno}, column {exc.colno})", source) from None


def read_instance(path: str | Path) -> Instance:
    path = Path(path)
    return instance_from_dict(_load_json(path.read_text(), str(path)))


def write_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")


def menu_to_dict(instance: Instance, menu: Menu) -> dict:
    if isinstance(menu, DeterministicMenu):
        out: dict[str, Any] = {
            "kind": "deterministic",
            "entries": {t: [fraction_to_json(x) for x in p]
                        for t, p in zip(instance.types, menu.entries)},
        }
        if menu.recommendations is not None:
            out["recommendations"] = {t: instance.actions[a]
                                      for t, a in zip(instance.types, menu.recommendations)}
        return out
    return {
        "kind": "randomized",
        "entries": {
            t: [{"pay": [fraction_to_json(x) for x in p], "weight": fraction_to_json(w)}
                for p, w in support]
            for t, support in zip(instance.types, menu.entries)
        },
    }


def menu_from_dict(instance: Instance, data: dict) -> Menu:
    if not isinstance(data, dict):
        raise ParseError("menu must be a JSON object")
    entries = _require(data, "entries", dict)
    m = instance.n_outcomes

    def pay(values, locus):
        if not isinstance(values, list) or len(values) != m:
            raise ParseError(f"expected a list of {m} rationals", locus)
        p = tuple(to_fraction(v, locus) for v in values)
        if any(x < 0 for x in p):
            raise ParseError("negative payment", locus)
        return p

    per_type = []
    for t in instance.types:
        if t not in entries:
            raise ParseError("missing entry", f"entries.{t}")
        per_type.append(entries[t])
    randomized = data.get("kind") == "randomized" or any(
        isinstance(e, list) and e and isinstance(e[0], dict) for e in per_type)
    if not randomized:
        ps = [pay(e, f"entries.{t}") for t, e in zip(instance.types, per_type)]
        recs = data.get("recommendations")
        rec_idx = None
        if recs is not None:
            try:
                rec_idx = [instance.action_index(recs[t]) for t in instance.types]
            except (KeyError, ValueError):
                raise ParseError("unknown type or action", "recommendations") from None
        return DeterministicMenu(tuple(ps), None if rec_idx is None else tuple(rec_idx))
    supports = []
    for t, e in zip(instance.types, per_type):
        if not isinstance(e, list):
            raise ParseError("expected a list of {pay, weight}", f"entries.{t}")
        support = []
        for i, item in enumerate(e):
            locus = f"entries.{t}[{i}]"
            if not isinstance(item, dict):
                raise ParseError("expected {pay, weight}", locus)
            support.append((pay(_require(item, "pay", list, locus + "."), locus + ".pay"),
                            to_fraction(_require(item, "weight", (int, str, Decimal), locus + "."),
                                        locus + ".weight")))
        supports.append(tuple(support))
    return RandomizedMenu(tuple(supports))


def read_menu(instance: Instance, path: str | Path) -> Menu:
    path = Path(path)
    return menu_from_dict(instance, _load_json(path.read_text(), str(path)))


def write_menu(instance: Instance, menu: Menu, path: str | Path) -> None:
    Path(path).write_text(json.dumps(menu_to_dict(instance, menu), indent=2) + "\n")


def zero_contract(m: int) -> Contract:
    return (Fraction(0),) * m


def check_contract(p: Sequence, m: int) -> None:
    if len(p) != m:
        raise ValueError(f"contract has {len(p)} entries, expected {m}")
    if any(x < 0 for x in p):
        raise ValueError("payments must be nonnegative")
