"""Incremental exact simplex over delta-rationals.

This is the general simplex with bound refinement used by DPLL(T) solvers:
theory variables carry optional lower/upper DeltaRat bounds, slack
variables are defined by tableau rows, and feasibility is restored by
Bland-rule pivoting.  Bounds are asserted and retracted following the SAT
solver's decision levels; the variable assignment is never rolled back
(retracting only relaxes bounds, so it stays consistent for nonbasic
variables).
"""

from __future__ import annotations

from agv.solver.rationals import DeltaRat, Q, ZERO

TOP_LIT = 0  # pseudo-literal for bounds asserted outside any decision


class SimplexConflict(Exception):
    def __init__(self, lits):
        self.lits = lits


class Simplex:
    def __init__(self):
        self.nvars = 0
        self.lower: list[DeltaRat | None] = []
        self.upper: list[DeltaRat | None] = []
        self.lower_lit: list[int] = []
        self.upper_lit: list[int] = []
        self.assign: list[DeltaRat] = []
        self.is_int: list[bool] = []
        # rows: basic var -> {nonbasic var: coeff}; basic = sum coeff*nonbasic
        self.rows: dict[int, dict[int, Q]] = {}
        # col: nonbasic var -> set of basic vars whose row mentions it
        self.col: dict[int, set[int]] = {}
        self._trail: list[tuple] = []
        self._level_marks: list[int] = []

    # -- variables and rows --------------------------------------------------

    def new_var(self, is_int: bool) -> int:
        v = self.nvars
        self.nvars += 1
        self.lower.append(None)
        self.upper.append(None)
        self.lower_lit.append(TOP_LIT)
        self.upper_lit.append(TOP_LIT)
        self.assign.append(DeltaRat(ZERO))
        self.is_int.append(is_int)
        self.col.setdefault(v, set())
        return v

    def define_slack(self, s: int, combo: dict[int, Q]) -> None:
        """Install row s = sum(coeff * var); called once per slack var."""
        row: dict[int, Q] = {}
        for x, c in combo.items():
            if x in self.rows:
                for y, cy in self.rows[x].items():
                    row[y] = row.get(y, ZERO) + c * cy
            else:
                row[x] = row.get(x, ZERO) + c
        row = {x: c for x, c in row.items() if c != 0}
        self.rows[s] = row
        for x in row:
            self.col[x].add(s)
        val = DeltaRat(ZERO)
        for x, c in row.items():
            val = val + self.assign[x].scale(c)
        self.assign[s] = val

    # -- decision-level bookkeeping -------------------------------------------

    def push_level(self) -> None:
        self._level_marks.append(len(self._trail))

    def pop_to(self, level: int) -> None:
        while len(self._level_marks) > level:
            mark = self._level_marks.pop()
            while len(self._trail) > mark:
                var, which, old, old_lit = self._trail.pop()
                if which == "L":
                    self.lower[var] = old
                    self.lower_lit[var] = old_lit
                else:
                    self.upper[var] = old
                    self.upper_lit[var] = old_lit

    # -- bound assertion -------------------------------------------------------

    def assert_lower(self, x: int, b: DeltaRat, lit: int) -> None:
        if self.lower[x] is not None and b <= self.lower[x]:
            return
        if self.upper[x] is not None and b > self.upper[x]:
            raise SimplexConflict(self._pair(lit, self.upper_lit[x]))
        self._trail.append((x, "L", self.lower[x], self.lower_lit[x]))
        self.lower[x] = b
        self.lower_lit[x] = lit
        if x not in self.rows and self.assign[x] < b:
            self._update(x, b)

    def assert_upper(self, x: int, b: DeltaRat, lit: int) -> None:
        if self.upper[x] is not None and b >= self.upper[x]:
            return
        if self.lower[x] is not None and b < self.lower[x]:
            raise SimplexConflict(self._pair(lit, self.lower_lit[x]))
        self._trail.append((x, "U", self.upper[x], self.upper_lit[x]))
        self.upper[x] = b
        self.upper_lit[x] = lit
        if x not in self.rows and self.assign[x] > b:
            self._update(x, b)

    @staticmethod
    def _pair(a: int, b: int) -> list[int]:
        return [l for l in (a, b) if l != TOP_LIT]

    def _update(self, x: int, v: DeltaRat) -> None:
        delta = v - self.assign[x]
        for b in self.col.get(x, ()):
            self.assign[b] = self.assign[b] + delta.scale(self.rows[b][x])
        self.assign[x] = v

    # -- feasibility -----------------------------------------------------------

    def check(self, tick=None) -> None:
        """Restore feasibility; raises SimplexConflict when infeasible."""
        # repair nonbasic variables that drifted outside relaxed bounds
        for x in range(self.nvars):
            if x in self.rows:
                continue
            if self.lower[x] is not None and self.assign[x] < self.lower[x]:
                self._update(x, self.lower[x])
            elif self.upper[x] is not None and self.assign[x] > self.upper[x]:
                self._update(x, self.upper[x])
        while True:
            if tick is not None:
                tick()
            basic = None
            too_low = False
            for b in sorted(self.rows):
                if self.lower[b] is not None and self.assign[b] < self.lower[b]:
                    basic, too_low = b, True
                    break
                if self.upper[b] is not None and self.assign[b] > self.upper[b]:
                    basic, too_low = b, False
                    break
            if basic is None:
                return
            row = self.rows[basic]
            pivot = None
            for x in sorted(row):
                c = row[x]
                if too_low:
                    ok = (c > 0 and self._can_increase(x)) or \
                         (c < 0 and self._can_decrease(x))
                else:
                    ok = (c > 0 and self._can_decrease(x)) or \
                         (c < 0 and self._can_increase(x))
                if ok:
                    pivot = x
                    break
            if pivot is None:
                raise SimplexConflict(self._explain(basic, too_low))
            target = self.lower[basic] if too_low else self.upper[basic]
            self._pivot_and_update(basic, pivot, target)

    def _can_increase(self, x: int) -> bool:
        return self.upper[x] is None or self.assign[x] < self.upper[x]

    def _can_decrease(self, x: int) -> bool:
        return self.lower[x] is None or self.assign[x] > self.lower[x]

    def _explain(self, basic: int, too_low: bool) -> list[int]:
        lits = []
        row = self.rows[basic]
        if too_low:
            lits.append(self.lower_lit[basic])
            for x, c in row.items():
                lits.append(self.upper_lit[x] if c > 0 else self.lower_lit[x])
        else:
            lits.append(self.upper_lit[basic])
            for x, c in row.items():
                lits.append(self.lower_lit[x] if c > 0 else self.upper_lit[x])
        return sorted({l for l in lits if l != TOP_LIT})

    def _pivot_and_update(self, b: int, x: int, target: DeltaRat) -> None:
        row_b = self.rows.pop(b)
        a = row_b[x]
        # express x in terms of b and the rest of row_b
        new_row = {b: Q(1) / a}
        for y, c in row_b.items():
            if y != x:
                new_row[y] = -c / a
        for y in row_b:
            self.col[y].discard(b)
        # x's value moves so that b hits its bound
        theta = (target - self.assign[b]).scale(Q(1) / a)
        self.assign[x] = self.assign[x] + theta
        self.assign[b] = target
        # substitute x's definition into every other row that mentions x
        for other in list(self.col.get(x, ())):
            row_o = self.rows[other]
            cx = row_o.pop(x)
            for y, cy in new_row.items():
                nv = row_o.get(y, ZERO) + cx * cy
                if nv == 0:
                    if y in row_o:
                        del row_o[y]
                    self.col[y].discard(other)
                else:
                    row_o[y] = nv
                    self.col.setdefault(y, set()).add(other)
            # recompute other's value (b's definition changed under it)
            val = DeltaRat(ZERO)
            for y, cy in row_o.items():
                val = val + self.assign[y].scale(cy)
            self.assign[other] = val
        self.col[x] = set()
        self.rows[x] = new_row
        for y in new_row:
            self.col.setdefault(y, set()).add(x)

    # -- models ----------------------------------------------------------------

    def epsilon(self) -> Q:
        """A concrete positive value for the infinitesimal."""
        eps = Q(1)
        for x in range(self.nvars):
            a = self.assign[x]
            lo, up = self.lower[x], self.upper[x]
            if lo is not None and a.num > lo.num and lo.delta > a.delta:
                eps = min(eps, (a.num - lo.num) / (lo.delta - a.delta))
            if up is not None and a.num < up.num and a.delta > up.delta:
                eps = min(eps, (up.num - a.num) / (a.delta - up.delta))
        return eps / 2

    def concrete(self, x: int, eps: Q) -> Q:
        return self.assign[x].concretize(eps)
