"""CDCL SAT core with a linear-arithmetic theory plugged in.

Literals are nonzero ints (+v / -v, 1-based vars).  Learning is first-UIP
with nonchronological backjumping, VSIDS-style activities, phase saving,
and geometric restarts.  The theory is consulted on every atom assignment
and at every propagation fixpoint.
"""

from __future__ import annotations

import time


class OutOfBudget(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class Budget:
    def __init__(self, deadline: float | None = None,
                 max_conflicts: int = 4_000_000, max_branches: int = 20_000):
        self.deadline = deadline
        self.conflicts = 0
        self.max_conflicts = max_conflicts
        self.branches = 0
        self.max_branches = max_branches
        self._tick = 0

    def step(self) -> None:
        self._tick += 1
        if self.deadline is not None and (self._tick & 0x3FF) == 0:
            if time.monotonic() > self.deadline:
                raise OutOfBudget("timeout")

    def on_conflict(self) -> None:
        self.conflicts += 1
        if self.conflicts > self.max_conflicts:
            raise OutOfBudget("conflict budget exhausted")

    def on_branch(self) -> None:
        self.branches += 1
        if self.branches > self.max_branches:
            raise OutOfBudget("integer branching budget exhausted")


SAT, UNSAT = "sat", "unsat"


def _dedupe(lits: list[int]) -> list[int] | None:
    """Drop duplicate literals; None means the clause is a tautology."""
    seen = set()
    out = []
    for l in lits:
        if -l in seen:
            return None
        if l not in seen:
            seen.add(l)
            out.append(l)
    return out


class SatSolver:
    def __init__(self, theory, budget: Budget):
        self.theory = theory
        self.budget = budget
        self.nvars = 0
        self.values: list[int] = [0]  # 1 true, -1 false, 0 unassigned
        self.levels: list[int] = [0]
        self.reasons: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self.watches: dict[int, list[list[int]]] = {}
        self.trail: list[int] = []
        self.trail_lims: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self._act_inc = 1.0
        self._unsat = False

    # -- construction ------------------------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        self.values.append(0)
        self.levels.append(0)
        self.reasons.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        return self.nvars

    def add_clause(self, lits: list[int]) -> bool:
        """Add a clause; may only be called at decision level 0."""
        lits = _dedupe(lits)
        if lits is None:  # tautology
            return True
        if any(self.value(l) == 1 for l in lits):
            return True
        lits = [l for l in lits if self.value(l) != -1]
        if not lits:
            self._unsat = True
            return False
        if len(lits) == 1:
            if self.value(lits[0]) == 1:
                return True
            if self.value(lits[0]) == -1:
                self._unsat = True
                return False
            self._enqueue(lits[0], None)
            return True
        self._attach(lits)
        return True

    def _attach(self, lits: list[int]) -> None:
        self.clauses.append(lits)
        self.watches.setdefault(lits[0], []).append(lits)
        self.watches.setdefault(lits[1], []).append(lits)

    # -- assignment --------------------------------------------------------------

    def value(self, lit: int) -> int:
        v = self.values[abs(lit)]
        return v if lit > 0 else -v

    @property
    def level(self) -> int:
        return len(self.trail_lims)

    def _enqueue(self, lit: int, reason: list[int] | None) -> None:
        var = abs(lit)
        self.values[var] = 1 if lit > 0 else -1
        self.levels[var] = self.level
        self.reasons[var] = reason
        self.phase[var] = lit > 0
        self.trail.append(lit)

    def propagate(self) -> list[int] | None:
        """Unit propagation + eager theory bounds; returns a conflict clause."""
        while self.qhead < len(self.trail):
            self.budget.step()
            p = self.trail[self.qhead]
            self.qhead += 1
            conflict_lits = self.theory.on_assign(p)
            if conflict_lits is not None:
                return [-l for l in conflict_lits]
            watchlist = self.watches.get(-p, [])
            i = 0
            while i < len(watchlist):
                clause = watchlist[i]
                # normalize: put the false watch at position 1
                if clause[0] == -p:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self.value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(clause)
                        watchlist[i] = watchlist[-1]
                        watchlist.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(first) == -1:
                    return clause  # conflict
                self._enqueue(first, clause)
                i += 1
        return None

    # -- conflict analysis ---------------------------------------------------------

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        learnt: list[int] = []
        seen = set()
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        reason = conflict
        while True:
            for q in reason:
                if p != 0 and q == p:
                    continue
                v = abs(q)
                if v in seen or self.levels[v] == 0:
                    continue
                seen.add(v)
                self._bump(v)
                if self.levels[v] == self.level:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            seen.discard(abs(p))
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            reason = self.reasons[abs(p)] or []
        learnt.insert(0, -p)
        if len(learnt) == 1:
            return learnt, 0
        bj = max(self.levels[abs(q)] for q in learnt[1:])
        # watch the asserting literal and one literal from the backjump level
        for k in range(1, len(learnt)):
            if self.levels[abs(learnt[k])] == bj:
                learnt[1], learnt[k] = learnt[k], learnt[1]
                break
        return learnt, bj

    def _bump(self, var: int) -> None:
        self.activity[var] += self._act_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self._act_inc *= 1e-100

    def cancel_until(self, level: int) -> None:
        if self.level <= level:
            return
        bound = self.trail_lims[level]
        for lit in reversed(self.trail[bound:]):
            var = abs(lit)
            self.values[var] = 0
            self.reasons[var] = None
        del self.trail[bound:]
        del self.trail_lims[level:]
        self.qhead = len(self.trail)
        self.theory.pop_to(level)

    # -- search -----------------------------------------------------------------------

    def _decide(self) -> bool:
        best, best_act = 0, -1.0
        for v in range(1, self.nvars + 1):
            if self.values[v] == 0 and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best == 0:
            return False
        self.trail_lims.append(len(self.trail))
        self.theory.push_level()
        self._enqueue(best if self.phase[best] else -best, None)
        return True

    def solve(self) -> str:
        if self._unsat:
            return UNSAT
        restart_limit = 120
        conflicts_here = 0
        while True:
            conflict = self.propagate()
            if conflict is None:
                tconf = self.theory.check(self.budget.step)
                if tconf is not None:
                    conflict = [-l for l in tconf]
            if conflict is not None:
                self.budget.on_conflict()
                conflicts_here += 1
                if self.level == 0 or \
                        all(self.levels[abs(l)] == 0 for l in conflict):
                    return UNSAT
                learnt, bj = self._analyze(conflict)
                self.cancel_until(bj)
                if len(learnt) > 1:
                    self._attach(learnt)
                self._enqueue(learnt[0], learnt if len(learnt) > 1 else None)
                self._act_inc /= 0.95
                continue
            if conflicts_here >= restart_limit and self.level > 0:
                conflicts_here = 0
                restart_limit = int(restart_limit * 1.5)
                self.cancel_until(0)
                continue
            if not self._decide():
                verdict = self.theory.final(self)
                if verdict is None:
                    return SAT
                # verdict is a branching clause over (possibly new) atoms
                self.budget.on_branch()
                self.cancel_until(0)
                if not self.add_clause(verdict):
                    return UNSAT
        # unreachable
