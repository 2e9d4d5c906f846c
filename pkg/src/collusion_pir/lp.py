"""Exact rational linear programming and the packing/covering programs of a pattern.

The solver is a dense two-phase tableau simplex over ``Fraction`` with
Bland's rule, so every run pivots identically and returns the same vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BadParams, DualityMismatch, UncoveredServer
from .pattern import CollusionPattern, incidence_matrix

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """Optimize ``objective . x`` subject to ``matrix x (row_sense) rhs`` and ``x >= 0``.

    ``row_sense`` entries are ``"<="``, ``">="`` or ``"="``.
    """

    objective: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    sense: str = "max"
    row_sense: tuple[str, ...] | None = None

    def __post_init__(self):
        as_frac = lambda seq: tuple(Fraction(v) for v in seq)
        object.__setattr__(self, "objective", as_frac(self.objective))
        object.__setattr__(self, "matrix", tuple(as_frac(r) for r in self.matrix))
        object.__setattr__(self, "rhs", as_frac(self.rhs))
        row_sense = self.row_sense
        if row_sense is None:
            row_sense = ("<=",) * len(self.rhs)
        object.__setattr__(self, "row_sense", tuple(row_sense))
        if self.sense not in ("max", "min"):
            raise BadParams(f"sense must be 'max' or 'min', got {self.sense!r}")
        if len(self.matrix) != len(self.rhs) or len(self.row_sense) != len(self.rhs):
            raise BadParams("matrix, rhs and row_sense lengths differ")
        for row in self.matrix:
            if len(row) != len(self.objective):
                raise BadParams("constraint row length differs from objective length")
        for s in self.row_sense:
            if s not in ("<=", ">=", "="):
                raise BadParams(f"unknown row sense {s!r}")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def is_feasible(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.n_vars or any(v < 0 for v in point):
            return False
        for row, b, s in zip(self.matrix, self.rhs, self.row_sense):
            lhs = sum((a * v for a, v in zip(row, point)), Fraction(0))
            if (s == "<=" and lhs > b) or (s == ">=" and lhs < b) or (s == "=" and lhs != b):
                return False
        return True

    def value(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, point)), Fraction(0))


@dataclass(frozen=True)
class LpSolution:
    status: str
    optimal_value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None


def _pivot(rows: list[list[Fraction]], zrow: list[Fraction], basis: list[int], r: int, c: int):
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    prow = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            rows[i] = [a - f * b for a, b in zip(row, prow)]
    if zrow[c] != 0:
        f = zrow[c]
        zrow[:] = [a - f * b for a, b in zip(zrow, prow)]
    basis[r] = c


def _reduced_costs(rows, basis, cost) -> list[Fraction]:
    ncols = len(cost)
    z = list(cost) + [Fraction(0)]
    for row, b in zip(rows, basis):
        cb = cost[b]
        if cb != 0:
            for j in range(ncols + 1):
                z[j] -= cb * row[j]
    return z


def _run_simplex(rows, basis, cost, allowed) -> str:
    """Minimize ``cost`` over the current tableau; Bland's rule throughout."""
    zrow = _reduced_costs(rows, basis, cost)
    while True:
        entering = next((j for j in allowed if zrow[j] < 0), None)
        if entering is None:
            return OPTIMAL
        best, leave = None, None
        for i, row in enumerate(rows):
            a = row[entering]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return UNBOUNDED
        _pivot(rows, zrow, basis, leave, entering)


def solve_lp(problem: LpProblem) -> LpSolution:
    """Exact optimum of ``problem`` (status reported, never raised)."""
    n = problem.n_vars
    # Standard form: every row gets rhs >= 0; slack (+1) for <=, surplus (-1) for >=.
    norm_rows, senses = [], []
    for row, b, s in zip(problem.matrix, problem.rhs, problem.row_sense):
        if b < 0:
            row, b = [-a for a in row], -b
            s = {"<=": ">=", ">=": "<=", "=": "="}[s]
        norm_rows.append((list(row), b))
        senses.append(s)
    n_slack = sum(1 for s in senses if s != "=")
    n_art = sum(1 for s in senses if s != "<=")
    ncols = n + n_slack + n_art
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    slack_at, art_at = n, n + n_slack
    for (row, b), s in zip(norm_rows, senses):
        full = row + [Fraction(0)] * (n_slack + n_art) + [b]
        if s == "<=":
            full[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        else:
            if s == ">=":
                full[slack_at] = Fraction(-1)
                slack_at += 1
            full[art_at] = Fraction(1)
            basis.append(art_at)
            art_at += 1
        rows.append(full)

    first_art = n + n_slack
    if n_art:
        phase1_cost = [Fraction(0)] * (n + n_slack) + [Fraction(1)] * n_art
        _run_simplex(rows, basis, phase1_cost, range(ncols))
        infeas = sum((rows[i][-1] for i, b in enumerate(basis) if b >= first_art), Fraction(0))
        if infeas > 0:
            return LpSolution(INFEASIBLE)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        i = 0
        while i < len(rows):
            if basis[i] >= first_art:
                col = next((j for j in range(first_art) if rows[i][j] != 0), None)
                if col is None:
                    del rows[i]
                    del basis[i]
                    continue
                _pivot(rows, [Fraction(0)] * (ncols + 1), basis, i, col)
            i += 1

    sign = -1 if problem.sense == "max" else 1
    cost = [sign * c for c in problem.objective] + [Fraction(0)] * (n_slack + n_art)
    status = _run_simplex(rows, basis, cost, range(first_art))
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED)
    point = [Fraction(0)] * n
    for row, b in zip(rows, basis):
        if b < n:
            point[b] = row[-1]
    point = tuple(point)
    assert problem.is_feasible(point), "simplex returned an infeasible vertex"
    return LpSolution(OPTIMAL, problem.value(point), point)


def _ones(k: int) -> tuple[Fraction, ...]:
    return (Fraction(1),) * k


def packing_problem(p: CollusionPattern) -> LpProblem:
    """max 1'y  s.t.  B'y <= 1, y >= 0."""
    b = incidence_matrix(p)
    bt = tuple(tuple(b[n][m] for n in range(p.n_servers)) for m in range(p.n_sets))
    return LpProblem(_ones(p.n_servers), bt, _ones(p.n_sets), "max", ("<=",) * p.n_sets)


def covering_problem(p: CollusionPattern) -> LpProblem:
    """min 1'x  s.t.  B x >= 1, x >= 0."""
    return LpProblem(_ones(p.n_sets), incidence_matrix(p), _ones(p.n_servers), "min", (">=",) * p.n_servers)


def solve_packing(p: CollusionPattern) -> LpSolution:
    sol = solve_lp(packing_problem(p))
    assert sol.status == OPTIMAL and sol.optimal_value > 0
    return sol


def solve_covering(p: CollusionPattern) -> LpSolution:
    """Covering optimum, cross-checked against the packing optimum."""
    sol = solve_lp(covering_problem(p))
    assert sol.status == OPTIMAL
    dual = solve_packing(p)
    if sol.optimal_value != dual.optimal_value:
        raise DualityMismatch(f"covering {sol.optimal_value} != packing {dual.optimal_value}")
    return sol


def s_star(p: CollusionPattern) -> Fraction:
    return solve_packing(p).optimal_value


def _face_maximizers(p: CollusionPattern, value: Fraction) -> list[LpSolution]:
    """For each set m, an optimal covering point maximizing x_m."""
    base = covering_problem(p)
    sols = []
    for m in range(p.n_sets):
        obj = tuple(Fraction(1 if j == m else 0) for j in range(p.n_sets))
        prob = LpProblem(
            obj,
            base.matrix + (_ones(p.n_sets),),
            base.rhs + (value,),
            "max",
            base.row_sense + ("=",),
        )
        sol = solve_lp(prob)
        assert sol.status == OPTIMAL
        sols.append(sol)
    return sols


def positive_optimal_cover(p: CollusionPattern) -> tuple[Fraction, ...]:
    """An optimal covering point, positive on every set that is positive somewhere on the optimal face.

    The average of the per-coordinate face maximizers lies on the face (it is
    convex) and is positive wherever any optimal point is.
    """
    value = solve_covering(p).optimal_value
    sols = _face_maximizers(p, value)
    k = len(sols)
    return tuple(sum((s.point[m] for s in sols), Fraction(0)) / k for m in range(p.n_sets))


def reduce_by_support(p: CollusionPattern) -> tuple[CollusionPattern, frozenset[int]]:
    """Drop every set that is zero at every optimal covering point.

    Returns the reduced pattern and the removed set indices (relative to
    ``p.sets``). The covering optimum is unchanged by construction and is
    re-checked.
    """
    original_value = solve_covering(p).optimal_value
    current = p
    removed: set[int] = set()
    index_of = {s: i for i, s in enumerate(p.sets)}
    while True:
        sols = _face_maximizers(current, original_value)
        zero = [m for m, sol in enumerate(sols) if sol.optimal_value == 0]
        if not zero:
            break
        keep = [s for m, s in enumerate(current.sets) if m not in zero]
        removed.update(index_of[current.sets[m]] for m in zero)
        try:
            current = CollusionPattern(current.n_servers, tuple(keep))
        except UncoveredServer:
            raise UncoveredServer("support reduction uncovered a server; LP face computation is wrong") from None
    if solve_covering(current).optimal_value != original_value:
        raise DualityMismatch("support reduction changed the covering optimum")
    assert all(v > 0 for v in positive_optimal_cover(current))
    return current, frozenset(removed)


def capacity(s_star_value, k: int) -> Fraction:
    """(1 + 1/S + ... + (1/S)^(K-1))^(-1), exactly."""
    s = Fraction(s_star_value)
    if s <= 0 or k < 1:
        raise BadParams("need S* > 0 and K >= 1")
    inv = 1 / s
    total = sum((inv ** j for j in range(k)), Fraction(0))
    return 1 / total


@dataclass(frozen=True)
class ServerCoverage:
    server: int
    total: Fraction
    cls: str  # "=1", ">1" or "<1"


@dataclass(frozen=True)
class CoveringReport:
    servers: tuple[ServerCoverage, ...]

    @property
    def valid(self) -> bool:
        return all(s.cls != "<1" for s in self.servers)


def check_fractional_covering(p: CollusionPattern, weights: Sequence) -> CoveringReport:
    """Per-server coverage sum of set weights and its class against 1."""
    weights = [Fraction(w) for w in weights]
    if len(weights) != p.n_sets:
        raise BadParams(f"expected {p.n_sets} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise BadParams("weights must be non-negative")
    out = []
    for n in range(p.n_servers):
        total = sum((w for w, s in zip(weights, p.sets) if n in s), Fraction(0))
        cls = "=1" if total == 1 else (">1" if total > 1 else "<1")
        out.append(ServerCoverage(n, total, cls))
    return CoveringReport(tuple(out))
