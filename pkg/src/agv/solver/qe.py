"""Quantifier elimination for linear real/integer arithmetic.

Supports one quantifier block over Bool/Int/Real variables, which is what
exists-forall realizability queries produce.  Reals are eliminated with
Loos-Weispfenning virtual substitution (lower test points plus minus
infinity), integers with Cooper's method, booleans by Shannon expansion.
A formula outside the supported fragment raises QEUnsupported and the
check reports unknown.
"""

from __future__ import annotations

import itertools

from agv.solver.rationals import Q, ZERO, is_int, qlcm
from agv.solver.terms import BOOL, INT, REAL, TermTable

TRUE = ("true",)
FALSE = ("false",)


class QEUnsupported(Exception):
    pass


class LinE:
    """Linear expression: sum of coeff*var plus const, exact coefficients."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=ZERO):
        self.coeffs: dict[str, Q] = coeffs or {}
        self.const = const

    @staticmethod
    def of_const(c) -> "LinE":
        return LinE({}, Q(c))

    @staticmethod
    def of_var(name: str) -> "LinE":
        return LinE({name: Q(1)}, ZERO)

    def add(self, other: "LinE") -> "LinE":
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            nc = coeffs.get(v, ZERO) + c
            if nc == 0:
                coeffs.pop(v, None)
            else:
                coeffs[v] = nc
        return LinE(coeffs, self.const + other.const)

    def scale(self, k) -> "LinE":
        if k == 0:
            return LinE()
        return LinE({v: c * k for v, c in self.coeffs.items()}, self.const * k)

    def sub(self, other: "LinE") -> "LinE":
        return self.add(other.scale(Q(-1)))

    def coeff(self, var: str) -> Q:
        return self.coeffs.get(var, ZERO)

    def drop(self, var: str) -> "LinE":
        coeffs = {v: c for v, c in self.coeffs.items() if v != var}
        return LinE(coeffs, self.const)

    def subst(self, var: str, repl: "LinE") -> "LinE":
        c = self.coeff(var)
        if c == 0:
            return self
        return self.drop(var).add(repl.scale(c))

    def is_constant(self) -> bool:
        return not self.coeffs


# normalized formulas:
#   ('and', [f...]) ('or', [f...]) ('true',) ('false',)
#   ('blit', name, polarity)
#   ('atom', LinE, strict)            meaning  e < 0  or  e <= 0
#   ('divis', modulus, LinE, polarity) meaning  modulus | e  (or its negation)


def _mk_and(parts) -> tuple:
    flat = []
    for p in parts:
        if p == FALSE:
            return FALSE
        if p == TRUE:
            continue
        if p[0] == "and":
            flat.extend(p[1])
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return ("and", flat)


def _mk_or(parts) -> tuple:
    flat = []
    for p in parts:
        if p == TRUE:
            return TRUE
        if p == FALSE:
            continue
        if p[0] == "or":
            flat.extend(p[1])
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return ("or", flat)


def _mk_atom(e: LinE, strict: bool, sorts: dict[str, str]) -> tuple:
    if e.is_constant():
        holds = e.const < 0 if strict else e.const <= 0
        return TRUE if holds else FALSE
    if all(sorts[v] == INT for v in e.coeffs) and \
            all(is_int(c) for c in e.coeffs.values()) and is_int(e.const):
        # integer atoms: e < 0  ==  e + 1 <= 0
        if strict:
            e = e.add(LinE.of_const(1))
        return ("atom", e, False)
    return ("atom", e, strict)


class _Normalizer:
    """Terms -> normalized NNF formulas, lifting arith ite via fresh vars."""

    def __init__(self, tt: TermTable, sorts: dict[str, str]):
        self.tt = tt
        self.sorts = sorts
        self.side: list[tuple] = []  # formulas defining ite variables
        self.fresh_vars: list[str] = []
        self._ite_cache: dict[int, LinE] = {}
        self._count = itertools.count()

    def formula(self, tid: int, polarity: bool) -> tuple:
        tt = self.tt
        term = tt.node(tid)
        op = term[0]
        if op == "bconst":
            return TRUE if term[1] == polarity else FALSE
        if op == "var":
            return ("blit", term[1], polarity)
        if op == "not":
            return self.formula(term[1], not polarity)
        if op == "and":
            parts = [self.formula(a, polarity) for a in term[1:]]
            return _mk_and(parts) if polarity else _mk_or(parts)
        if op == "or":
            parts = [self.formula(a, polarity) for a in term[1:]]
            return _mk_or(parts) if polarity else _mk_and(parts)
        if op == "=>":
            a = self.formula(term[1], not polarity)
            b = self.formula(term[2], polarity)
            return _mk_or([a, b]) if polarity else _mk_and([a, b])
        if op == "ite" and tt.sort_of(tid) == BOOL:
            c = self.formula(term[1], True)
            nc = self.formula(term[1], False)
            a = self.formula(term[2], polarity)
            b = self.formula(term[3], polarity)
            return _mk_or([_mk_and([c, a]), _mk_and([nc, b])])
        if op == "=" and tt.sort_of(term[1]) == BOOL:
            a, na = self.formula(term[1], True), self.formula(term[1], False)
            b, nb = self.formula(term[2], True), self.formula(term[2], False)
            same = _mk_or([_mk_and([a, b]), _mk_and([na, nb])])
            diff = _mk_or([_mk_and([a, nb]), _mk_and([na, b])])
            return same if polarity else diff
        if op == "=":
            le = self.linexpr(term[1]).sub(self.linexpr(term[2]))
            ge = le.scale(Q(-1))
            if polarity:
                return _mk_and([_mk_atom(le, False, self.sorts),
                                _mk_atom(ge, False, self.sorts)])
            return _mk_or([_mk_atom(le.scale(Q(-1)), True, self.sorts),
                           _mk_atom(le, True, self.sorts)])
        if op in ("<=", "<"):
            e = self.linexpr(term[1]).sub(self.linexpr(term[2]))
            if polarity:
                return _mk_atom(e, op == "<", self.sorts)
            return _mk_atom(e.scale(Q(-1)), op == "<=", self.sorts)
        if op in ("forall", "exists"):
            raise QEUnsupported("nested quantifier")
        raise QEUnsupported(f"operator {op} in quantified body")

    def linexpr(self, tid: int) -> LinE:
        tt = self.tt
        term = tt.node(tid)
        op = term[0]
        if op == "nconst":
            return LinE.of_const(term[1])
        if op == "var":
            return LinE.of_var(term[1])
        if op == "to_real":
            return self.linexpr(term[1])
        if op == "+":
            return self.linexpr(term[1]).add(self.linexpr(term[2]))
        if op == "-":
            return self.linexpr(term[1]).sub(self.linexpr(term[2]))
        if op == "*":
            a, b = self.linexpr(term[1]), self.linexpr(term[2])
            if a.is_constant():
                return b.scale(a.const)
            if b.is_constant():
                return a.scale(b.const)
            raise QEUnsupported("nonlinear multiplication")
        if op == "/":
            a, b = self.linexpr(term[1]), self.linexpr(term[2])
            if not b.is_constant() or b.const == 0:
                raise QEUnsupported("division by non-constant")
            return a.scale(Q(1) / b.const)
        if op == "ite":
            cached = self._ite_cache.get(tid)
            if cached is not None:
                return cached
            name = f"~q{next(self._count)}"
            self.sorts[name] = tt.sort_of(tid)
            self.fresh_vars.append(name)
            v = LinE.of_var(name)
            cond = self.formula(term[1], True)
            ncond = self.formula(term[1], False)
            then_eq = self._eq_formula(v, self.linexpr(term[2]))
            else_eq = self._eq_formula(v, self.linexpr(term[3]))
            self.side.append(_mk_or([_mk_and([cond, then_eq]),
                                     _mk_and([ncond, else_eq])]))
            self._ite_cache[tid] = v
            return v
        raise QEUnsupported(f"arith operator {op}")

    def _eq_formula(self, a: LinE, b: LinE) -> tuple:
        d = a.sub(b)
        return _mk_and([_mk_atom(d, False, self.sorts),
                        _mk_atom(d.scale(Q(-1)), False, self.sorts)])


# -- elimination ------------------------------------------------------------


def _map_atoms(f: tuple, fn) -> tuple:
    """Rebuild formula f, applying fn to every atom/divis/blit leaf."""
    if f[0] == "and":
        return _mk_and([_map_atoms(p, fn) for p in f[1]])
    if f[0] == "or":
        return _mk_or([_map_atoms(p, fn) for p in f[1]])
    return fn(f)


def _occurs(f: tuple, var: str) -> bool:
    if f[0] in ("and", "or"):
        return any(_occurs(p, var) for p in f[1])
    if f[0] == "atom":
        return f[1].coeff(var) != 0
    if f[0] == "divis":
        return f[2].coeff(var) != 0
    if f[0] == "blit":
        return f[1] == var
    return False


def _elim_bool(f: tuple, var: str) -> tuple:
    def sub(value: bool):
        def fn(leaf):
            if leaf[0] == "blit" and leaf[1] == var:
                return TRUE if leaf[2] == value else FALSE
            return leaf
        return fn
    return _mk_or([_map_atoms(f, sub(True)), _map_atoms(f, sub(False))])


def _elim_real(f: tuple, var: str, sorts) -> tuple:
    """Loos-Weispfenning: minus infinity plus lower test points."""
    lowers: list[tuple[LinE, bool]] = []  # (bound expr, strict)
    seen = set()

    def collect(leaf):
        if leaf[0] == "atom":
            c = leaf[1].coeff(var)
            if c < 0:
                bound = leaf[1].drop(var).scale(Q(-1) / c)
                key = (tuple(sorted(bound.coeffs.items())), bound.const,
                       leaf[2])
                if key not in seen:
                    seen.add(key)
                    lowers.append((bound, leaf[2]))
        elif leaf[0] == "divis" and leaf[2].coeff(var) != 0:
            raise QEUnsupported("divisibility over a real variable")
        return leaf

    _map_atoms(f, collect)

    def subst_minus_inf(leaf):
        if leaf[0] == "atom" and leaf[1].coeff(var) != 0:
            return TRUE if leaf[1].coeff(var) > 0 else FALSE
        return leaf

    def subst_point(point: LinE, eps: bool):
        def fn(leaf):
            if leaf[0] != "atom" or leaf[1].coeff(var) == 0:
                return leaf
            c = leaf[1].coeff(var)
            u = leaf[1].drop(var).add(point.scale(c))
            if not eps:
                return _mk_atom(u, leaf[2], sorts)
            # limit of u + c*eps (<|<=) 0 as eps -> 0+
            if c > 0:
                return _mk_atom(u, True, sorts)
            return _mk_atom(u, False, sorts)
        return fn

    cases = [_map_atoms(f, subst_minus_inf)]
    for bound, strict in lowers:
        cases.append(_map_atoms(f, subst_point(bound, strict)))
    return _mk_or(cases)


def _elim_int(f: tuple, var: str, sorts) -> tuple:
    """Cooper's method (B-set variant, atoms already integer-normalized)."""
    coeffs = []

    def gather(leaf):
        if leaf[0] == "atom" and leaf[1].coeff(var) != 0:
            if leaf[2]:
                raise QEUnsupported("strict atom over mixed int/real")
            c = leaf[1].coeff(var)
            if not is_int(c):
                raise QEUnsupported("fractional coefficient on int var")
            bad = [v for v in leaf[1].coeffs
                   if v != var and sorts[v] != INT]
            if bad or not all(is_int(x) for x in leaf[1].coeffs.values()) \
                    or not is_int(leaf[1].const):
                raise QEUnsupported("int variable in mixed-sort atom")
            coeffs.append(int(c))
        elif leaf[0] == "divis" and leaf[2].coeff(var) != 0:
            coeffs.append(int(leaf[2].coeff(var)))
        return leaf

    _map_atoms(f, gather)
    if not coeffs:
        return f
    delta = 1
    for c in coeffs:
        delta = qlcm(delta, abs(c))

    # scale every leaf so var's coefficient is +-delta, then set y = delta*var
    def rescale(leaf):
        if leaf[0] == "atom" and leaf[1].coeff(var) != 0:
            k = Q(delta) / abs(leaf[1].coeff(var))
            return ("atom", leaf[1].scale(k), leaf[2])
        if leaf[0] == "divis" and leaf[2].coeff(var) != 0:
            k = delta // abs(int(leaf[2].coeff(var)))
            return ("divis", leaf[1] * k, leaf[2].scale(Q(k)), leaf[3])
        return leaf

    f = _map_atoms(f, rescale)
    # now treat y (= delta*var) with coefficient +-1 and add delta | y
    f = _mk_and([f, ("divis", delta, LinE.of_var(var), True)])

    divisors = [1]

    def div_gather(leaf):
        if leaf[0] == "divis" and leaf[2].coeff(var) != 0:
            divisors.append(leaf[1])
        return leaf

    _map_atoms(f, div_gather)
    period = 1
    for d in divisors:
        period = qlcm(period, d)

    bset: list[LinE] = []

    def bounds_gather(leaf):
        if leaf[0] == "atom":
            c = leaf[1].coeff(var)
            if c == -delta:
                # -y + r <= 0  ==  y >= r ; boundary just below is r - 1
                b = leaf[1].drop(var).add(LinE.of_const(-1))
                bset.append(b)
        return leaf

    _map_atoms(f, bounds_gather)

    def subst(repl: LinE, minus_inf: bool):
        def fn(leaf):
            if leaf[0] == "atom" and leaf[1].coeff(var) != 0:
                c = leaf[1].coeff(var)
                if minus_inf:
                    return TRUE if c < 0 else FALSE
                u = leaf[1].drop(var).add(repl.scale(c / Q(delta)))
                return _mk_atom(u, leaf[2], sorts)
            if leaf[0] == "divis" and leaf[2].coeff(var) != 0:
                c = leaf[2].coeff(var)
                u = leaf[2].drop(var).add(repl.scale(c / Q(delta)))
                return ("divis", leaf[1], u, leaf[3])
            return leaf
        return fn

    cases = []
    for j in range(1, period + 1):
        jc = LinE.of_const(j)
        cases.append(_map_atoms(f, subst(jc, minus_inf=True)))
        for b in bset:
            cases.append(_map_atoms(f, subst(b.add(jc), minus_inf=False)))
    return _mk_or(cases)


def _simplify_divis(f: tuple) -> tuple:
    def fn(leaf):
        if leaf[0] == "divis":
            d, e, pol = leaf[1], leaf[2], leaf[3]
            if d == 1:
                return TRUE if pol else FALSE
            if e.is_constant():
                holds = (Q(e.const) / d).denominator == 1
                return TRUE if holds == pol else FALSE
        return leaf
    return _map_atoms(f, fn)


# -- back to terms -------------------------------------------------------------


class _TermBuilder:
    def __init__(self, tt: TermTable, sorts: dict[str, str]):
        self.tt = tt
        self.sorts = sorts
        self._count = itertools.count()
        self.new_int_vars: list[str] = []

    def build(self, f: tuple) -> int:
        tt = self.tt
        if f == TRUE:
            return tt.mk_bool(True)
        if f == FALSE:
            return tt.mk_bool(False)
        if f[0] == "and":
            return tt.mk_and([self.build(p) for p in f[1]])
        if f[0] == "or":
            return tt.mk_or([self.build(p) for p in f[1]])
        if f[0] == "blit":
            v = tt.mk_var(f[1], BOOL)
            return v if f[2] else tt.mk_not(v)
        if f[0] == "atom":
            e = self._expr(f[1])
            zero = tt.mk_num(0, tt.sort_of(e))
            return tt.mk_lt(e, zero) if f[2] else tt.mk_le(e, zero)
        if f[0] == "divis":
            # d | e  becomes  e = d*k ; the negation  e = d*k + m, 1<=m<d
            d, e, pol = f[1], f[2], f[3]
            k = self._fresh_int()
            dk = self.tt.mk_arith("*", [self.tt.mk_num(d, INT), k])
            if pol:
                return tt.mk_eq(self._expr(e), dk)
            m = self._fresh_int()
            lhs = tt.mk_eq(self._expr(e),
                           tt.mk_arith("+", [dk, m]))
            lo = tt.mk_le(tt.mk_num(1, INT), m)
            hi = tt.mk_le(m, tt.mk_num(d - 1, INT))
            return tt.mk_and([lhs, lo, hi])
        raise QEUnsupported(f"unexpected formula node {f[0]}")

    def _fresh_int(self) -> int:
        name = f"~d{next(self._count)}"
        self.new_int_vars.append(name)
        return self.tt.mk_var(name, INT)

    def _expr(self, e: LinE) -> int:
        tt = self.tt
        sort = INT
        for v in e.coeffs:
            if self.sorts[v] == REAL:
                sort = REAL
        if any(not is_int(c) for c in e.coeffs.values()) or not is_int(e.const):
            sort = REAL
        acc = None
        for v, c in sorted(e.coeffs.items()):
            var = tt.mk_var(v, self.sorts[v])
            term = var if c == 1 else tt.mk_arith("*", [tt.mk_num(c, sort), var])
            acc = term if acc is None else tt.mk_arith("+", [acc, term])
        if acc is None or e.const != 0:
            const = tt.mk_num(e.const, sort)
            acc = const if acc is None else tt.mk_arith("+", [acc, const])
        return acc


def eliminate(tt: TermTable, tid: int, var_sorts: dict[str, str]) -> int:
    """Replace a top-level quantified term with a quantifier-free one.

    var_sorts maps every free variable name to its sort; it is extended
    with any fresh variables the elimination introduces (they are
    implicitly existential at the top level).
    """
    term = tt.node(tid)
    kind = term[0]
    if kind not in ("forall", "exists"):
        return tid
    bound, body = term[1], term[2]
    negate = kind == "forall"
    sorts = dict(var_sorts)
    for name, sort in bound:
        sorts[name] = sort
    norm = _Normalizer(tt, sorts)
    f = norm.formula(body, not negate)
    f = _mk_and([f] + norm.side)
    todo = [name for name, _ in bound] + norm.fresh_vars
    for name in todo:
        if not _occurs(f, name):
            continue
        if sorts[name] == BOOL:
            f = _elim_bool(f, name)
        elif sorts[name] == REAL:
            f = _elim_real(f, name, sorts)
        else:
            f = _elim_int(f, name, sorts)
        f = _simplify_divis(f)
    builder = _TermBuilder(tt, sorts)
    out = builder.build(f)
    for name in builder.new_int_vars:
        var_sorts[name] = INT
    if negate:
        out = tt.mk_not(out)
    return out
