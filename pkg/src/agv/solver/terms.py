"""Interned term representation for the solver.

Terms are flat tuples whose children are integer ids into a TermTable;
this keeps hashing O(1) and makes structural sharing automatic.  Sorts are
'B' (Bool), 'I' (Int), 'R' (Real).
"""

from __future__ import annotations

from agv.solver.rationals import Q, is_int, qfloor

BOOL, INT, REAL = "B", "I", "R"

ARITH = (INT, REAL)

# ops with term-id children
_NARY = {"and", "or", "not", "=>", "=", "ite", "<=", "<", "+", "-", "*", "/",
         "to_real"}


class TermError(Exception):
    pass


class TermTable:
    def __init__(self):
        self._ids: dict[tuple, int] = {}
        self.terms: list[tuple] = []
        self.sorts: list[str] = []

    def _intern(self, term: tuple, sort: str) -> int:
        tid = self._ids.get(term)
        if tid is None:
            tid = len(self.terms)
            self._ids[term] = tid
            self.terms.append(term)
            self.sorts.append(sort)
        return tid

    def sort_of(self, tid: int) -> str:
        return self.sorts[tid]

    def node(self, tid: int) -> tuple:
        return self.terms[tid]

    # -- constructors ------------------------------------------------------

    def mk_var(self, name: str, sort: str) -> int:
        return self._intern(("var", name), sort)

    def mk_bool(self, value: bool) -> int:
        return self._intern(("bconst", bool(value)), BOOL)

    def mk_num(self, value, sort: str) -> int:
        value = Q(value)
        if sort == INT and not is_int(value):
            raise TermError(f"non-integral Int constant {value}")
        return self._intern(("nconst", value), sort)

    def mk_not(self, a: int) -> int:
        op, *args = self.terms[a]
        if op == "not":
            return args[0]
        if op == "bconst":
            return self.mk_bool(not args[0])
        return self._intern(("not", a), BOOL)

    def mk_and(self, args) -> int:
        args = tuple(args)
        if not args:
            return self.mk_bool(True)
        if len(args) == 1:
            return args[0]
        return self._intern(("and",) + args, BOOL)

    def mk_or(self, args) -> int:
        args = tuple(args)
        if not args:
            return self.mk_bool(False)
        if len(args) == 1:
            return args[0]
        return self._intern(("or",) + args, BOOL)

    def mk_implies(self, a: int, b: int) -> int:
        return self._intern(("=>", a, b), BOOL)

    def mk_eq(self, a: int, b: int) -> int:
        if self.sorts[a] != self.sorts[b]:
            a, b = self._coerce_pair(a, b, "=")
        return self._intern(("=", a, b), BOOL)

    def mk_le(self, a: int, b: int) -> int:
        a, b = self._coerce_pair(a, b, "<=")
        return self._intern(("<=", a, b), BOOL)

    def mk_lt(self, a: int, b: int) -> int:
        a, b = self._coerce_pair(a, b, "<")
        return self._intern(("<", a, b), BOOL)

    def mk_ite(self, c: int, a: int, b: int) -> int:
        if self.sorts[a] != self.sorts[b]:
            a, b = self._coerce_pair(a, b, "ite")
        return self._intern(("ite", c, a, b), self.sorts[a])

    def mk_arith(self, op: str, args) -> int:
        args = list(args)
        if op == "-" and len(args) == 1:
            args = [self.mk_num(0, self.sorts[args[0]]), args[0]]
        sorts = {self.sorts[a] for a in args}
        if sorts == {INT, REAL}:
            args = [self.mk_to_real(a) if self.sorts[a] == INT else a
                    for a in args]
        sort = self.sorts[args[0]]
        if sort == BOOL:
            raise TermError(f"arithmetic on Bool: {op}")
        if op in ("+", "*") and len(args) > 2:
            acc = args[0]
            for a in args[1:]:
                acc = self._intern((op, acc, a), sort)
            return acc
        if len(args) != 2:
            raise TermError(f"{op} expects 2 arguments")
        if op == "/":
            sort = REAL
            args = [self.mk_to_real(a) if self.sorts[a] == INT else a
                    for a in args]
        return self._intern((op, args[0], args[1]), sort)

    def mk_to_real(self, a: int) -> int:
        if self.sorts[a] == REAL:
            return a
        op, *rest = self.terms[a]
        if op == "nconst":
            return self.mk_num(rest[0], REAL)
        return self._intern(("to_real", a), REAL)

    def mk_quant(self, kind: str, bound: tuple, body: int) -> int:
        # bound: tuple of (name, sort)
        return self._intern((kind, bound, body), BOOL)

    def _coerce_pair(self, a: int, b: int, op: str):
        sa, sb = self.sorts[a], self.sorts[b]
        if sa == sb:
            return a, b
        if {sa, sb} == {INT, REAL}:
            return self.mk_to_real(a), self.mk_to_real(b)
        raise TermError(f"sort mismatch in {op}: {sa} vs {sb}")


# -- SMT-LIB surface syntax -> terms ---------------------------------------


_SORT_NAMES = {"Bool": BOOL, "Int": INT, "Real": REAL}


def sort_from_sexpr(s) -> str:
    if isinstance(s, str) and s in _SORT_NAMES:
        return _SORT_NAMES[s]
    raise TermError(f"unsupported sort {s}")


def _unquote(sym: str) -> str:
    if sym.startswith("|") and sym.endswith("|") and len(sym) >= 2:
        return sym[1:-1]
    return sym


def parse_term(tt: TermTable, sexpr, env: dict[str, tuple[str, str]],
               scope: dict[str, int] | None = None) -> int:
    """Translate a parsed S-expression into a term id.

    env maps declared constant names to ('const', sort).  scope maps
    quantifier-bound names to variable term ids.
    """
    scope = scope or {}
    if isinstance(sexpr, str):
        a = _unquote(sexpr)
        if a == "true":
            return tt.mk_bool(True)
        if a == "false":
            return tt.mk_bool(False)
        if a in scope:
            return scope[a]
        if a in env:
            return tt.mk_var(a, env[a][1])
        if _is_numeral(a):
            if "." in a:
                whole, frac = a.split(".", 1)
                num = Q(int((whole or "0") + frac), 10 ** len(frac))
                return tt.mk_num(num, REAL)
            return tt.mk_num(int(a), INT)
        raise TermError(f"unknown symbol {a}")
    if not sexpr:
        raise TermError("empty application")
    head = sexpr[0]
    args = sexpr[1:]
    if head in ("forall", "exists"):
        if len(args) != 2:
            raise TermError(f"{head} expects bindings and a body")
        bound = []
        inner = dict(scope)
        for b in args[0]:
            name = _unquote(b[0])
            sort = sort_from_sexpr(b[1])
            inner[name] = tt.mk_var(name, sort)
            bound.append((name, sort))
        body = parse_term(tt, args[1], env, inner)
        return tt.mk_quant(head, tuple(bound), body)
    if head == "let":
        inner = dict(scope)
        for b in args[0]:
            inner[_unquote(b[0])] = parse_term(tt, b[1], env, scope)
        return parse_term(tt, args[1], env, inner)
    ids = [parse_term(tt, a, env, scope) for a in args]
    if isinstance(head, list):
        raise TermError(f"unsupported application head {head}")
    head = _unquote(head)
    if head == "and":
        return tt.mk_and(ids)
    if head == "or":
        return tt.mk_or(ids)
    if head == "not":
        return tt.mk_not(ids[0])
    if head == "=>":
        acc = ids[-1]
        for a in reversed(ids[:-1]):
            acc = tt.mk_implies(a, acc)
        return acc
    if head == "=":
        parts = [tt.mk_eq(ids[i], ids[i + 1]) for i in range(len(ids) - 1)]
        return tt.mk_and(parts)
    if head == "distinct":
        parts = []
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                parts.append(tt.mk_not(tt.mk_eq(ids[i], ids[j])))
        return tt.mk_and(parts)
    if head == "ite":
        return tt.mk_ite(ids[0], ids[1], ids[2])
    if head == "<=":
        return _chain(tt, tt.mk_le, ids)
    if head == "<":
        return _chain(tt, tt.mk_lt, ids)
    if head == ">=":
        return _chain(tt, lambda a, b: tt.mk_le(b, a), ids)
    if head == ">":
        return _chain(tt, lambda a, b: tt.mk_lt(b, a), ids)
    if head in ("+", "-", "*", "/"):
        return tt.mk_arith(head, ids)
    if head == "to_real":
        return tt.mk_to_real(ids[0])
    raise TermError(f"unsupported operator {head}")


def _chain(tt: TermTable, mk, ids):
    parts = [mk(ids[i], ids[i + 1]) for i in range(len(ids) - 1)]
    return tt.mk_and(parts)


def _is_numeral(a: str) -> bool:
    if not a:
        return False
    body = a.replace(".", "", 1)
    return body.isdigit()


# -- model values -----------------------------------------------------------


def render_value(value, sort: str) -> str:
    if sort == BOOL:
        return "true" if value else "false"
    value = Q(value)
    if sort == INT:
        n = qfloor(value)
        return str(n) if n >= 0 else f"(- {-n})"
    num, den = value.numerator, value.denominator
    if den == 1:
        body = f"{abs(num)}.0"
    else:
        body = f"(/ {abs(num)}.0 {den}.0)"
    return body if num >= 0 else f"(- {body})"


def eval_term(tt: TermTable, tid: int, model: dict[str, object]):
    """Evaluate a quantifier-free term under a model (name -> value)."""
    term = tt.terms[tid]
    op = term[0]
    if op == "var":
        name = term[1]
        if name in model:
            return model[name]
        return False if tt.sorts[tid] == BOOL else Q(0)
    if op == "bconst" or op == "nconst":
        return term[1]
    if op == "not":
        return not eval_term(tt, term[1], model)
    if op == "and":
        return all(eval_term(tt, a, model) for a in term[1:])
    if op == "or":
        return any(eval_term(tt, a, model) for a in term[1:])
    if op == "=>":
        return (not eval_term(tt, term[1], model)) or \
            eval_term(tt, term[2], model)
    if op == "ite":
        branch = term[2] if eval_term(tt, term[1], model) else term[3]
        return eval_term(tt, branch, model)
    if op == "=":
        return eval_term(tt, term[1], model) == eval_term(tt, term[2], model)
    if op == "<=":
        return eval_term(tt, term[1], model) <= eval_term(tt, term[2], model)
    if op == "<":
        return eval_term(tt, term[1], model) < eval_term(tt, term[2], model)
    if op == "+":
        return eval_term(tt, term[1], model) + eval_term(tt, term[2], model)
    if op == "-":
        return eval_term(tt, term[1], model) - eval_term(tt, term[2], model)
    if op == "*":
        return eval_term(tt, term[1], model) * eval_term(tt, term[2], model)
    if op == "/":
        return Q(eval_term(tt, term[1], model)) / Q(eval_term(tt, term[2],
                                                              model))
    if op == "to_real":
        return Q(eval_term(tt, term[1], model))
    raise TermError(f"cannot evaluate {op}")
