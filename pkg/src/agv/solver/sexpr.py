"""S-expression reading and writing for the SMT-LIB v2 wire format.

Atoms are returned as plain strings (including string literals, which keep
their surrounding quotes so the caller can distinguish them); lists are
Python lists.  The reader is incremental: feed() accepts chunks and
complete top-level expressions are taken out with take().
"""

from __future__ import annotations


class SExprError(Exception):
    pass


def parse_all(text: str) -> list:
    """Parse every complete S-expression in `text`."""
    reader = SExprReader()
    reader.feed(text)
    out = []
    while True:
        e = reader.take()
        if e is None:
            break
        out.append(e)
    if reader.depth != 0:
        raise SExprError("unbalanced parentheses")
    return out


class SExprReader:
    def __init__(self):
        self._stack: list[list] = []
        self._ready: list = []
        self._atom: list[str] = []
        self._in_string = False
        self._in_comment = False
        self._in_quoted_sym = False
        self.depth = 0

    def feed(self, chunk: str) -> None:
        for ch in chunk:
            if self._in_comment:
                if ch == "\n":
                    self._in_comment = False
                continue
            if self._in_string:
                self._atom.append(ch)
                if ch == '"':
                    # SMT-LIB escapes a quote by doubling; a lone quote ends.
                    # Doubling is rare in our traffic; treat "" inside by
                    # peeking lazily: we close now, a following quote reopens.
                    self._in_string = False
                    self._flush_atom()
                continue
            if self._in_quoted_sym:
                self._atom.append(ch)
                if ch == "|":
                    self._in_quoted_sym = False
                    self._flush_atom()
                continue
            if ch == ";":
                self._flush_atom()
                self._in_comment = True
            elif ch == '"':
                self._flush_atom()
                self._atom.append(ch)
                self._in_string = True
            elif ch == "|":
                self._flush_atom()
                self._atom.append(ch)
                self._in_quoted_sym = True
            elif ch == "(":
                self._flush_atom()
                self._stack.append([])
                self.depth += 1
            elif ch == ")":
                self._flush_atom()
                if not self._stack:
                    raise SExprError("unexpected ')'")
                done = self._stack.pop()
                self.depth -= 1
                self._emit(done)
            elif ch.isspace():
                self._flush_atom()
            else:
                self._atom.append(ch)

    def take(self):
        """Return the next complete top-level expression, or None."""
        self._flush_atom_if_toplevel()
        if self._ready:
            return self._ready.pop(0)
        return None

    def _flush_atom(self):
        if self._atom:
            self._emit("".join(self._atom))
            self._atom.clear()

    def _flush_atom_if_toplevel(self):
        if self._atom and not self._stack and not self._in_string \
                and not self._in_quoted_sym:
            self._emit("".join(self._atom))
            self._atom.clear()

    def _emit(self, item):
        if self._stack:
            self._stack[-1].append(item)
        else:
            self._ready.append(item)


def render(e) -> str:
    if isinstance(e, list):
        return "(" + " ".join(render(x) for x in e) + ")"
    return str(e)
