"""A small two-phase simplex engine with exact and floating-point backends.

The engine works on a dense tableau.  Every optimal answer is a basic
feasible solution, so it is a vertex of the feasible polyhedron whenever
that polyhedron has vertices.  Dual prices are read from the final tableau.

The rational backend uses ``gmpy2.mpq`` when available and
``fractions.Fraction`` otherwise, and always applies Bland's rule.  The
float backend uses Dantzig's rule and raises :class:`NumericalError` when
it stalls or its answer fails a residual check; :func:`solve` then falls
back to the rational backend unless told not to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = None

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
FLOAT_EPS = 1e-9


class NumericalError(RuntimeError):
    """The float backend could not certify its answer."""


class LPError(RuntimeError):
    """Raised for requests that need an optimal solution but have none."""


@dataclass
class Constraint:
    row: dict[int, object]
    rel: str
    rhs: object
    name: str | None = None


class LinearProgram:
    """Sparse LP: optimize ``c.x`` over linear constraints and variable bounds.

    ``lower`` may be any finite number or ``None`` (minus infinity);
    ``upper`` may be finite or ``None`` (plus infinity).
    """

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', not {sense!r}")
        self.sense = sense
        self.objective: dict[int, object] = {}
        self.constraints: list[Constraint] = []
        self.lower: list = []
        self.upper: list = []
        self.names: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self.lower)

    def add_variable(self, lower=0, upper=None, obj=0, name: str | None = None) -> int:
        j = len(self.lower)
        self.lower.append(lower)
        self.upper.append(upper)
        self.names.append(name or f"x{j}")
        if obj:
            self.objective[j] = obj
        return j

    def add_variables(self, count: int, lower=0, upper=None, prefix: str = "x") -> list[int]:
        start = self.n_vars
        return [self.add_variable(lower, upper, name=f"{prefix}{start + k}") for k in range(count)]

    def add_constraint(self, row: Mapping[int, object] | Iterable[tuple[int, object]],
                       rel: str, rhs, name: str | None = None) -> int:
        rel = {"<=": "<=", "≤": "<=", ">=": ">=", "≥": ">=", "=": "=", "==": "="}.get(rel)
        if rel is None:
            raise ValueError("relation must be one of <=, >=, =")
        items = row.items() if isinstance(row, Mapping) else row
        clean: dict[int, object] = {}
        for j, v in items:
            if not 0 <= j < self.n_vars:
                raise ValueError(f"variable index {j} out of range")
            if v:
                clean[j] = clean.get(j, 0) + v
        if isinstance(rhs, float) and not math.isfinite(rhs):
            raise ValueError("right-hand side must be finite")
        self.constraints.append(Constraint(clean, rel, rhs, name))
        return len(self.constraints) - 1

    def set_objective(self, coefs: Mapping[int, object], sense: str | None = None) -> None:
        self.objective = {j: v for j, v in coefs.items() if v}
        if sense is not None:
            self.sense = sense

    def copy(self) -> "LinearProgram":
        other = LinearProgram(self.sense)
        other.objective = dict(self.objective)
        other.constraints = [Constraint(dict(c.row), c.rel, c.rhs, c.name) for c in self.constraints]
        other.lower = list(self.lower)
        other.upper = list(self.upper)
        other.names = list(self.names)
        return other


@dataclass
class LPSolution:
    status: str
    value: object = None
    primal: list = field(default_factory=list)
    dual: list = field(default_factory=list)
    is_vertex: bool = False
    backend: str = "rational"
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


# --------------------------------------------------------------------------
# arithmetic helpers


class _Exact:
    name = "rational"

    def __init__(self):
        self.conv = _mpq if _mpq is not None else Fraction

    def num(self, x):
        if isinstance(x, float):
            x = Fraction(x)
        if self.conv is Fraction:
            return Fraction(x)
        if isinstance(x, Fraction):
            return _mpq(x.numerator, x.denominator)
        return _mpq(x)

    @staticmethod
    def out(x):
        if isinstance(x, Fraction):
            return x
        return Fraction(int(x.numerator), int(x.denominator))

    def pos(self, x):
        return x > 0

    def neg(self, x):
        return x < 0

    def zero(self, x):
        return x == 0


class _Float:
    name = "float"

    def __init__(self, eps: float = FLOAT_EPS):
        self.eps = eps

    def num(self, x):
        return float(x)

    @staticmethod
    def out(x):
        return float(x)

    def pos(self, x):
        return x > self.eps

    def neg(self, x):
        return x < -self.eps

    def zero(self, x):
        return -self.eps <= x <= self.eps


# --------------------------------------------------------------------------
# tableau


class _Tableau:
    def __init__(self, rows, rhs, basis, n_cols, ar):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n_cols = n_cols
        self.ar = ar
        self.d = None
        self.z = None
        self.iterations = 0

    def price(self, cost):
        """Reduced costs ``d = c - c_B B^-1 A`` for the current basis."""
        ar = self.ar
        d = [ar.num(c) for c in cost]
        z = ar.num(0)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j, v in enumerate(row):
                    if v:
                        d[j] -= cb * v
                z += cb * self.rhs[i]
        self.d = d
        self.z = z

    def pivot(self, i, j):
        ar = self.ar
        row = self.rows[i]
        piv = row[j]
        nz = [k for k, v in enumerate(row) if v]
        for k in nz:
            row[k] = row[k] / piv
        self.rhs[i] = self.rhs[i] / piv
        row[j] = ar.num(1)
        floaty = isinstance(ar, _Float)
        for r, other in enumerate(self.rows):
            if r == i:
                continue
            f = other[j]
            if not f:
                continue
            for k in nz:
                other[k] -= f * row[k]
            other[j] = ar.num(0)
            self.rhs[r] -= f * self.rhs[i]
            if floaty:
                for k in nz:
                    if abs(other[k]) < 1e-14:
                        other[k] = 0.0
                if abs(self.rhs[r]) < 1e-14:
                    self.rhs[r] = 0.0
        f = self.d[j]
        if f:
            for k in nz:
                self.d[k] -= f * row[k]
            self.d[j] = ar.num(0)
            self.z += f * self.rhs[i]
        self.basis[i] = j
        self.iterations += 1

    def run(self, barred, max_iter, bland):
        ar = self.ar
        stall = 0
        while True:
            if self.iterations > max_iter:
                raise NumericalError("simplex iteration cap reached")
            enter = None
            if bland:
                for j in range(self.n_cols):
                    if not barred[j] and ar.pos(self.d[j]):
                        enter = j
                        break
            else:
                best = None
                for j in range(self.n_cols):
                    dj = self.d[j]
                    if not barred[j] and ar.pos(dj) and (best is None or dj > best):
                        enter, best = j, dj
            if enter is None:
                return OPTIMAL
            leave, ratio = None, None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if ar.pos(a):
                    q = self.rhs[i] / a
                    if (leave is None or q < ratio
                            or (q == ratio and self.basis[i] < self.basis[leave])):
                        leave, ratio = i, q
            if leave is None:
                return UNBOUNDED
            if not bland:
                stall = stall + 1 if ar.zero(ratio) else 0
                if stall > 50:
                    bland = True
            self.pivot(leave, enter)


# --------------------------------------------------------------------------
# standard-form translation


def _standardize(lp: LinearProgram, ar):
    """Map ``lp`` to ``max c'x', A'x' (rel) b', x' >= 0``.

    Returns the pieces needed to build the tableau and to map a solution back.
    """
    n = lp.n_vars
    cols: list[list[tuple[int, int]]] = []   # original var -> [(internal col, sign)]
    offset = []
    bound_rows = []                          # (internal col, cap)
    n_int = 0
    for j in range(n):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None:
            cols.append([(n_int, 1)])
            offset.append(ar.num(lo))
            if up is not None:
                bound_rows.append((n_int, ar.num(up) - ar.num(lo)))
            n_int += 1
        elif up is not None:
            cols.append([(n_int, -1)])
            offset.append(ar.num(up))
            n_int += 1
        else:
            cols.append([(n_int, 1), (n_int + 1, -1)])
            offset.append(ar.num(0))
            n_int += 2
    sign = 1 if lp.sense == "max" else -1
    cost = [ar.num(0)] * n_int
    const = ar.num(0)
    for j, v in lp.objective.items():
        v = ar.num(v) * sign
        const += v * offset[j]
        for c, s in cols[j]:
            cost[c] += v * s
    rows = []
    for con in lp.constraints:
        coefs: dict[int, object] = {}
        b = ar.num(con.rhs)
        for j, v in con.row.items():
            v = ar.num(v)
            b -= v * offset[j]
            for c, s in cols[j]:
                coefs[c] = coefs.get(c, 0) + v * s
        rows.append((coefs, con.rel, b))
    for c, cap in bound_rows:
        rows.append(({c: ar.num(1)}, "<=", cap))
    return cols, offset, cost, const, rows, sign


def _build(rows, n_int, ar):
    m = len(rows)
    n_slack = sum(1 for _, rel, _ in rows if rel != "=")
    flipped = []
    for coefs, rel, b in rows:
        flipped.append(b < 0)
    n_art = sum(1 for (coefs, rel, b), f in zip(rows, flipped)
                if not (rel == "<=" and not f) and not (rel == ">=" and f))
    n_cols = n_int + n_slack + n_art
    tab_rows = []
    rhs = []
    basis = []
    identity_col = []
    slack = n_int
    art = n_int + n_slack
    art_cols = []
    for (coefs, rel, b), f in zip(rows, flipped):
        row = [ar.num(0)] * n_cols
        s = -1 if f else 1
        for c, v in coefs.items():
            row[c] = v * s if s == 1 else -v
        eff = rel
        if f:
            eff = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        if rel != "=":
            row[slack] = ar.num(1 if eff == "<=" else -1)
            if eff == "<=":
                basis.append(slack)
                identity_col.append(slack)
            slack += 1
        if eff != "<=":
            row[art] = ar.num(1)
            basis.append(art)
            identity_col.append(art)
            art_cols.append(art)
            art += 1
        tab_rows.append(row)
        rhs.append(-b if f else b)
    return tab_rows, rhs, basis, identity_col, flipped, n_cols, set(art_cols), m


def _solve_with(lp: LinearProgram, ar, max_iter: int) -> LPSolution:
    cols, offset, cost, const, rows, sign = _standardize(lp, ar)
    n_int = len(cost)
    tab_rows, rhs, basis, identity_col, flipped, n_cols, arts, m = _build(rows, n_int, ar)
    tab = _Tableau(tab_rows, rhs, basis, n_cols, ar)
    bland = isinstance(ar, _Exact)
    if arts:
        phase1 = [ar.num(-1) if j in arts else ar.num(0) for j in range(n_cols)]
        tab.price(phase1)
        tab.run([False] * n_cols, max_iter, bland)
        if ar.neg(tab.z):
            return LPSolution(INFEASIBLE, backend=ar.name, iterations=tab.iterations)
        for i in range(m):
            if tab.basis[i] in arts:
                row = tab.rows[i]
                for j in range(n_cols):
                    if j not in arts and not ar.zero(row[j]):
                        tab.pivot(i, j)
                        break
    full_cost = cost + [ar.num(0)] * (n_cols - n_int)
    tab.price(full_cost)
    barred = [j in arts for j in range(n_cols)]
    status = tab.run(barred, max_iter, bland)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, backend=ar.name, iterations=tab.iterations)
    xint = [ar.num(0)] * n_cols
    for i, b in enumerate(tab.basis):
        xint[b] = tab.rhs[i]
    primal = []
    for j in range(lp.n_vars):
        v = offset[j]
        for c, s in cols[j]:
            v = v + xint[c] if s == 1 else v - xint[c]
        primal.append(v)
    value = (tab.z + const) * sign
    n_user = len(lp.constraints)
    dual = []
    for i in range(n_user):
        y = -tab.d[identity_col[i]]
        if flipped[i]:
            y = -y
        dual.append(y * sign)
    out = ar.out
    return LPSolution(OPTIMAL, out(value), [out(v) for v in primal], [out(y) for y in dual],
                      backend=ar.name, iterations=tab.iterations)


# --------------------------------------------------------------------------
# checks


def _row_dot(row, x):
    return sum((v * x[j] for j, v in row.items()), 0)


def residual(lp: LinearProgram, x: Sequence) -> float:
    """Largest violation of any constraint or bound at ``x``."""
    worst = 0
    for con in lp.constraints:
        lhs = _row_dot(con.row, x)
        if con.rel == "<=":
            worst = max(worst, lhs - con.rhs)
        elif con.rel == ">=":
            worst = max(worst, con.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - con.rhs))
    for j, v in enumerate(x):
        if lp.lower[j] is not None:
            worst = max(worst, lp.lower[j] - v)
        if lp.upper[j] is not None:
            worst = max(worst, v - lp.upper[j])
    return worst


def _rank(vectors: list[list], exact: bool) -> int:
    if not vectors:
        return 0
    if not exact:
        import numpy as np
        return int(np.linalg.matrix_rank(np.array(vectors, dtype=float), tol=1e-9))
    mat = [[Fraction(v) for v in row] for row in vectors]
    rank, ncols = 0, len(mat[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pr = mat[rank]
        for r in range(rank + 1, len(mat)):
            f = mat[r][c]
            if f:
                f = f / pr[c]
                mat[r] = [a - f * b for a, b in zip(mat[r], pr)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def active_rank(lp: LinearProgram, x: Sequence, tol: float = 0) -> int:
    """Rank of the constraints and bounds that hold with equality at ``x``."""
    exact = tol == 0
    tight_vars = set()
    for j, v in enumerate(x):
        for bound in (lp.lower[j], lp.upper[j]):
            if bound is not None and abs(v - bound) <= tol * (1 + abs(bound)):
                tight_vars.add(j)
    free = [j for j in range(lp.n_vars) if j not in tight_vars]
    rows = []
    for con in lp.constraints:
        lhs = _row_dot(con.row, x)
        if abs(lhs - con.rhs) <= tol * (1 + abs(con.rhs)):
            rows.append([con.row.get(j, 0) for j in free])
    # tight bounds are unit vectors, so they pin their own columns
    return len(tight_vars) + (_rank(rows, exact) if free else 0)


def dual_objective(lp: LinearProgram, sol: LPSolution, tol: float = 0):
    """Objective of the dual solution implied by ``sol.dual``.

    Reduced costs are charged against the variable bound they point to; a
    reduced cost pointing at an infinite bound makes the dual infeasible and
    raises ``LPError``.
    """
    if not sol.optimal:
        raise LPError("dual objective needs an optimal solution")
    sign = 1 if lp.sense == "max" else -1
    y = sol.dual
    for con, yi in zip(lp.constraints, y):
        s = yi * sign
        if (con.rel == "<=" and s < -tol) or (con.rel == ">=" and s > tol):
            raise LPError(f"dual sign infeasible on constraint {con.name}")
    red = [lp.objective.get(j, 0) for j in range(lp.n_vars)]
    for con, yi in zip(lp.constraints, y):
        for j, v in con.row.items():
            red[j] -= yi * v
    total = sum((yi * con.rhs for con, yi in zip(lp.constraints, y)), 0)
    for j, r in enumerate(red):
        r_s = r * sign
        if r_s > tol:
            bound = lp.upper[j]
        elif r_s < -tol:
            bound = lp.lower[j]
        else:
            continue
        if bound is None:
            raise LPError(f"reduced cost of {lp.names[j]} points at an infinite bound")
        total += r * bound
    return total


# --------------------------------------------------------------------------
# public entry points


def solve(lp: LinearProgram, backend: str = "rational", fallback: bool = True,
          max_iter: int = 100_000) -> LPSolution:
    """Solve ``lp`` and return a basic optimal solution with dual prices.

    Duals are shadow prices: ``dual[i]`` is the rate of change of the
    optimal value as constraint ``i``'s right-hand side grows.
    """
    for j in range(lp.n_vars):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None and up is not None and up < lo:
            return LPSolution(INFEASIBLE, backend=backend)
    if backend == "float":
        try:
            sol = _solve_with(lp, _Float(), max_iter)
            if sol.optimal:
                scale = 1 + max([abs(float(c.rhs)) for c in lp.constraints] +
                                [abs(v) for v in sol.primal] + [0])
                if residual(lp, sol.primal) > 1e-8 * scale:
                    raise NumericalError("float solution fails the residual check")
                sol.is_vertex = active_rank(lp, sol.primal, tol=1e-9) >= lp.n_vars
            return sol
        except (NumericalError, ZeroDivisionError, OverflowError):
            if not fallback:
                raise
            backend = "rational"
    if backend != "rational":
        raise ValueError(f"unknown backend {backend!r}")
    sol = _solve_with(lp, _Exact(), max_iter * 10)
    if sol.optimal:
        sol.is_vertex = active_rank(lp, sol.primal) >= lp.n_vars
    return sol


def duals(sol: LPSolution) -> list:
    if not sol.optimal:
        raise LPError(f"no duals for a {sol.status} program")
    return list(sol.dual)


def restrict_and_resolve(lp: LinearProgram, fixed_relations: Iterable[int],
                         backend: str = "rational") -> LPSolution:
    """Force the listed constraints to hold with equality and solve again."""
    restricted = lp.copy()
    for i in fixed_relations:
        restricted.constraints[i].rel = "="
    sol = solve(restricted, backend)
    if sol.status == INFEASIBLE:
        raise LPError("restriction is infeasible")
    return sol


def active_constraints(lp: LinearProgram, x: Sequence, tol: float = 0) -> list[int]:
    return [i for i, con in enumerate(lp.constraints)
            if abs(_row_dot(con.row, x) - con.rhs) <= tol * (1 + abs(con.rhs))]


def to_lp_format(lp: LinearProgram) -> str:
    """Render ``lp`` in the CPLEX LP text format (floats, for cross-checking)."""

    def term_list(row):
        parts = []
        for j, v in sorted(row.items()):
            v = float(v)
            parts.append(f"{'-' if v < 0 else '+'} {abs(v):.17g} {lp.names[j]}")
        return " ".join(parts) if parts else "0 " + (lp.names[0] if lp.names else "")

    lines = ["Maximize" if lp.sense == "max" else "Minimize",
             f" obj: {term_list(lp.objective)}", "Subject To"]
    rel = {"<=": "<=", ">=": ">=", "=": "="}
    for i, con in enumerate(lp.constraints):
        lines.append(f" {con.name or f'c{i}'}: {term_list(con.row)} {rel[con.rel]} "
                     f"{float(con.rhs):.17g}")
    lines.append("Bounds")
    for j in range(lp.n_vars):
        lo, up = lp.lower[j], lp.upper[j]
        lo_s = "-inf" if lo is None else f"{float(lo):.17g}"
        up_s = "+inf" if up is None else f"{float(up):.17g}"
        lines.append(f" {lo_s} <= {lp.names[j]} <= {up_s}")
    lines.append("End")
    return "\n".join(lines) + "\n"
