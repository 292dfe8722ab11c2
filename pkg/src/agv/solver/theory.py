"""Linear-arithmetic theory layer between the SAT core and the simplex.

Each theory atom is a bound on a theory variable (original or slack).  The
positive SAT literal asserts one bound, the negative literal the
complementary bound.  Integer feasibility is enforced lazily: when the
simplex model assigns a fractional value to an integer variable, a
branching clause (x <= floor(v)) or (x >= floor(v)+1) is handed back to
the SAT core as a tautological lemma.
"""

from __future__ import annotations

from agv.solver.rationals import DeltaRat, Q, is_int, qceil, qfloor
from agv.solver.simplex import Simplex, SimplexConflict


class Bound:
    __slots__ = ("kind", "value")

    def __init__(self, kind: str, value: DeltaRat):
        self.kind = kind  # 'L' or 'U'
        self.value = value


def make_bound(kind: str, value: Q, strict: bool, for_int: bool) -> Bound:
    """Normalize a rational bound, tightening to integers when possible."""
    if for_int:
        if kind == "U":
            v = qfloor(value) - (1 if strict and is_int(value) else 0)
        else:
            v = qceil(value) + (1 if strict and is_int(value) else 0)
        return Bound(kind, DeltaRat(Q(v)))
    delta = 0
    if strict:
        delta = -1 if kind == "U" else 1
    return Bound(kind, DeltaRat(value, Q(delta)))


def complement(kind: str, value: Q, strict: bool) -> tuple[str, Q, bool]:
    # not (x <= v) == x > v ; not (x < v) == x >= v
    return ("L" if kind == "U" else "U", value, not strict)


class ArithTheory:
    def __init__(self):
        self.simplex = Simplex()
        self._var_ids: dict[str, int] = {}
        self._var_names: dict[int, str] = {}
        self._slacks: dict[tuple, int] = {}
        self._atoms: dict[int, tuple[int, Bound, Bound]] = {}  # satvar -> spec
        self._atom_keys: dict[tuple, int] = {}
        self._int_vars: list[int] = []

    # -- variables -------------------------------------------------------------

    def tvar(self, name: str, for_int: bool) -> int:
        v = self._var_ids.get(name)
        if v is None:
            v = self.simplex.new_var(for_int)
            self._var_ids[name] = v
            self._var_names[v] = name
            if for_int:
                self._int_vars.append(v)
        return v

    def slack(self, combo: tuple) -> int:
        """combo: sorted tuple of (tvar, int coeff); returns defining var."""
        s = self._slacks.get(combo)
        if s is None:
            for_int = all(self.simplex.is_int[x] for x, _ in combo)
            s = self.simplex.new_var(for_int)
            self.simplex.define_slack(s, {x: Q(c) for x, c in combo})
            self._slacks[combo] = s
        return s

    # -- atoms -------------------------------------------------------------------

    def atom_key(self, var: int, kind: str, value: Q, strict: bool):
        for_int = self.simplex.is_int[var]
        pos = make_bound(kind, value, strict, for_int)
        key = (var, pos.kind, pos.value.num, pos.value.delta)
        return key, pos

    def register_atom(self, satvar: int, var: int, pos: Bound,
                      kind: str, value: Q, strict: bool) -> None:
        for_int = self.simplex.is_int[var]
        nkind, nvalue, nstrict = complement(kind, value, strict)
        neg = make_bound(nkind, nvalue, nstrict, for_int)
        self._atoms[satvar] = (var, pos, neg)

    def is_atom(self, satvar: int) -> bool:
        return satvar in self._atoms

    # -- SAT-core hooks ------------------------------------------------------------

    def on_assign(self, lit: int) -> list[int] | None:
        """Assert the bound for a newly true literal; None or conflict lits."""
        spec = self._atoms.get(abs(lit))
        if spec is None:
            return None
        var, pos, neg = spec
        bound = pos if lit > 0 else neg
        try:
            if bound.kind == "L":
                self.simplex.assert_lower(var, bound.value, lit)
            else:
                self.simplex.assert_upper(var, bound.value, lit)
        except SimplexConflict as c:
            return c.lits
        return None

    def check(self, tick=None) -> list[int] | None:
        try:
            self.simplex.check(tick)
        except SimplexConflict as c:
            return c.lits
        return None

    def push_level(self) -> None:
        self.simplex.push_level()

    def pop_to(self, level: int) -> None:
        self.simplex.pop_to(level)

    # -- integers and models ---------------------------------------------------------

    def bound_atom(self, sat_solver, var: int, kind: str, value: Q,
                   strict: bool) -> int:
        """SAT var for the atom (var kind-rel value), interned."""
        key, pos = self.atom_key(var, kind, value, strict)
        sv = self._atom_keys.get(key)
        if sv is None:
            sv = sat_solver.new_var()
            self._atom_keys[key] = sv
            self.register_atom(sv, var, pos, kind, value, strict)
        return sv

    def final(self, sat_solver) -> list[int] | None:
        """None when integral; else a branching clause for the SAT core."""
        frac = self.fractional_int_var()
        if frac is None:
            return None
        v, f = frac
        below = self.bound_atom(sat_solver, v, "U", Q(f), False)
        above = self.bound_atom(sat_solver, v, "L", Q(f + 1), False)
        return [below, above]

    def fractional_int_var(self) -> tuple[int, int] | None:
        """Return (tvar, floor) for some integer var off the integer grid."""
        for v in self._int_vars:
            a = self.simplex.assign[v]
            if a.delta == 0 and is_int(a.num):
                continue
            if is_int(a.num):
                f = int(a.num) if a.delta > 0 else int(a.num) - 1
            else:
                f = qfloor(a.num)
            return v, f
        return None

    def model(self) -> dict[str, Q]:
        eps = self.simplex.epsilon()
        return {name: self.simplex.concrete(v, eps)
                for name, v in self._var_ids.items()}
