"""Benchmark harness: run every solver that applies to a directory of instances."""
from __future__ import annotations

import json
import time
from fractions import Fraction
from pathlib import Path

from .det_menu import PROFILE_CAP, solve_constant_types, solve_two_outcomes
from .model import instance_size, read_instance, require_valid
from .rand_menu import solve_randomized_detailed, sup_upper_bound

SCHEMA = 1
EPSILONS = {"e05": Fraction(1, 20), "e01": Fraction(1, 100)}


def deterministic_mode(instance) -> str | None:
    """Which exact deterministic solver applies, if any."""
    if instance.n_outcomes == 2:
        return "two-outcomes"
    if instance.n_actions ** instance.n_types <= PROFILE_CAP:
        return "const-types"
    return None


def bench_instance(path: Path, backend: str = "rational") -> dict:
    start = time.perf_counter()
    row: dict = {"instance": path.name}
    inst = require_valid(read_instance(path))
    row["size_bits"] = instance_size(inst)
    mode = deterministic_mode(inst)
    row["det_mode"] = mode
    row["det_value"] = None
    if mode == "two-outcomes":
        row["det_value"] = float(solve_two_outcomes(inst)[1])
    elif mode == "const-types":
        row["det_value"] = float(solve_constant_types(inst)[1])
    iters = {}
    result = None
    for key, eps in EPSILONS.items():
        result = solve_randomized_detailed(inst, eps, backend=backend)
        row[f"rand_value_{key}"] = float(result.value)
        iters[key] = result.iterations
    row["sup_ub"] = float(sup_upper_bound(inst, EPSILONS["e01"], result))
    row["iters"] = iters
    row["wall_ms"] = round(1000 * (time.perf_counter() - start), 3)
    return row


def run_bench(directory: str | Path, backend: str = "rational", log=None) -> dict:
    """Report over every ``*.json`` instance in ``directory`` (sorted by name).

    A failing instance gets a row with an ``error`` field and the run goes on.
    """
    rows = []
    for path in sorted(Path(directory).glob("*.json")):
        start = time.perf_counter()
        try:
            row = bench_instance(path, backend)
        except Exception as exc:  # noqa: BLE001 - recorded in the report
            row = {"instance": path.name, "error": f"{type(exc).__name__}: {exc}",
                   "wall_ms": round(1000 * (time.perf_counter() - start), 3)}
        if log is not None:
            log(row)
        rows.append(row)
    return {"schema": SCHEMA, "rows": rows}


def write_report(report: dict, out: str | Path) -> None:
    Path(out).write_text(json.dumps(report, indent=2) + "\n")
