"""Deterministic interpreter for the parsed statement subset.

Semantics are C-flavored over 64-bit two's-complement integers: wrapping
arithmetic, truncating division, 0/1 comparisons, short-circuit && and ||.
Every executed statement costs one step; loop and if conditions cost one
step per evaluation.  The interpreter is the behavioral-equivalence oracle
for the rewrite rules: two trees are compared by their assignment event
sequences and final environments, not by step counts (the rules change
statement counts but never the order of side effects).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from humer.cparse import (
    Binary,
    Block,
    Break,
    Call,
    Continue,
    Decl,
    DoWhile,
    Expr,
    ExprStmt,
    For,
    If,
    IntLit,
    Opaque,
    OpaqueExpr,
    Return,
    Stmt,
    StmtTree,
    Ternary,
    Unary,
    Var,
    While,
    tree_exprs,
    walk_stmts,
)

_MASK = (1 << 64) - 1
_SIGN = 1 << 63
INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1


def _wrap(v: int) -> int:
    v &= _MASK
    return v - (1 << 64) if v & _SIGN else v


class InterpError(Exception):
    """Runtime fault; carries the partial trace up to the fault."""

    outcome = "error"

    def __init__(self, message: str, events: list[tuple[str, int]]):
        super().__init__(message)
        self.events = list(events)


class UnboundVariableError(InterpError):
    outcome = "unbound-variable"


class DivisionByZeroError(InterpError):
    outcome = "division-by-zero"


class NotInterpretable(ValueError):
    """Tree uses constructs outside the interpretable subset."""


@dataclass
class Trace:
    events: list[tuple[str, int]]
    env: dict[str, int]
    steps: int
    outcome: str  # "ok" or "budget-exhausted"


class _BudgetExhausted(Exception):
    pass


class _BreakSignal(Exception):
    pass


class _ContinueSignal(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value: int | None):
        self.value = value


_EVAL_UNARY_OK = frozenset(["!", "~", "-", "+", "++", "--", "post++", "post--"])


class _Machine:
    def __init__(self, inputs: dict[str, int], budget: int):
        self.env = dict(inputs)
        self.declared_unset: set[str] = set()
        self.events: list[tuple[str, int]] = []
        self.steps = 0
        self.budget = budget

    def charge(self) -> None:
        if self.steps >= self.budget:
            raise _BudgetExhausted()
        self.steps += 1

    def read(self, name: str) -> int:
        if name in self.declared_unset or name not in self.env:
            raise UnboundVariableError(f"read of unbound variable {name!r}", self.events)
        return self.env[name]

    def assign(self, name: str, value: int) -> int:
        value = _wrap(value)
        self.env[name] = value
        self.declared_unset.discard(name)
        self.events.append((name, value))
        return value

    # -- expressions ------------------------------------------------------

    def eval(self, e: Expr) -> int:
        if isinstance(e, IntLit):
            return _wrap(e.value)
        if isinstance(e, Var):
            return self.read(e.name)
        if isinstance(e, Unary):
            return self.eval_unary(e)
        if isinstance(e, Binary):
            return self.eval_binary(e)
        if isinstance(e, Ternary):
            return self.eval(e.then) if self.eval(e.cond) != 0 else self.eval(e.other)
        raise NotInterpretable(f"cannot interpret expression {type(e).__name__}")

    def eval_unary(self, e: Unary) -> int:
        op = e.op
        if op in ("++", "--", "post++", "post--"):
            if not isinstance(e.operand, Var):
                raise NotInterpretable("++/-- target must be a variable")
            old = self.read(e.operand.name)
            new = self.assign(e.operand.name, old + (1 if "++" in op else -1))
            return old if op.startswith("post") else new
        v = self.eval(e.operand)
        if op == "!":
            return 0 if v != 0 else 1
        if op == "~":
            return _wrap(~v)
        if op == "-":
            return _wrap(-v)
        if op == "+":
            return v
        raise NotInterpretable(f"cannot interpret unary {op!r}")

    def eval_binary(self, e: Binary) -> int:
        op = e.op
        if op == "&&":
            return 1 if self.eval(e.left) != 0 and self.eval(e.right) != 0 else 0
        if op == "||":
            return 1 if self.eval(e.left) != 0 or self.eval(e.right) != 0 else 0
        if op == "=" or (len(op) >= 2 and op.endswith("=") and op not in ("==", "!=", "<=", ">=")):
            if not isinstance(e.left, Var):
                raise NotInterpretable("assignment target must be a variable")
            rhs = self.eval(e.right)
            if op == "=":
                return self.assign(e.left.name, rhs)
            base = self.read(e.left.name)
            return self.assign(e.left.name, self.arith(op[:-1], base, rhs))
        if op == ",":
            self.eval(e.left)
            return self.eval(e.right)
        return self.arith(op, self.eval(e.left), self.eval(e.right))

    def arith(self, op: str, a: int, b: int) -> int:
        if op == "+":
            return _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise DivisionByZeroError("division by zero", self.events)
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            if op == "/":
                return _wrap(q)
            return _wrap(a - q * b)
        if op == "<":
            return 1 if a < b else 0
        if op == "<=":
            return 1 if a <= b else 0
        if op == ">":
            return 1 if a > b else 0
        if op == ">=":
            return 1 if a >= b else 0
        if op == "==":
            return 1 if a == b else 0
        if op == "!=":
            return 1 if a != b else 0
        if op == "&":
            return _wrap((a & _MASK) & (b & _MASK))
        if op == "|":
            return _wrap((a & _MASK) | (b & _MASK))
        if op == "^":
            return _wrap((a & _MASK) ^ (b & _MASK))
        if op == "<<":
            return _wrap(a << (b & 63))
        if op == ">>":
            return _wrap((a & _MASK) >> (b & 63)) if a >= 0 else _wrap(a >> (b & 63))
        raise NotInterpretable(f"cannot interpret operator {op!r}")

    # -- statements -------------------------------------------------------

    def exec(self, s: Stmt) -> None:
        if isinstance(s, Block):
            for inner in s.stmts:
                self.exec(inner)
            return
        if isinstance(s, ExprStmt):
            self.charge()
            self.eval(s.expr)
            return
        if isinstance(s, Decl):
            self.charge()
            if s.init is not None:
                self.assign(s.names[0], self.eval(s.init))
                return
            for name in s.names:
                self.env.pop(name, None)
                self.declared_unset.add(name)
            return
        if isinstance(s, If):
            self.charge()
            if self.eval(s.cond) != 0:
                self.exec(s.then)
            elif s.orelse is not None:
                self.exec(s.orelse)
            return
        if isinstance(s, While):
            while True:
                self.charge()
                if self.eval(s.cond) == 0:
                    return
                try:
                    self.exec(s.body)
                except _BreakSignal:
                    return
                except _ContinueSignal:
                    continue
        if isinstance(s, DoWhile):
            while True:
                try:
                    self.exec(s.body)
                except _BreakSignal:
                    return
                except _ContinueSignal:
                    pass
                self.charge()
                if self.eval(s.cond) == 0:
                    return
        if isinstance(s, For):
            if s.init is not None:
                self.exec(s.init)
            while True:
                if s.cond is not None:
                    self.charge()
                    if self.eval(s.cond) == 0:
                        return
                try:
                    self.exec(s.body)
                except _BreakSignal:
                    return
                except _ContinueSignal:
                    pass
                if s.step is not None:
                    self.charge()
                    self.eval(s.step)
            # not reached
        if isinstance(s, Break):
            self.charge()
            raise _BreakSignal()
        if isinstance(s, Continue):
            self.charge()
            raise _ContinueSignal()
        if isinstance(s, Return):
            self.charge()
            raise _ReturnSignal(self.eval(s.expr) if s.expr is not None else None)
        raise NotInterpretable(f"cannot interpret statement {type(s).__name__}")


def check_interpretable(tree: StmtTree) -> None:
    """Raise NotInterpretable if the tree falls outside the supported subset."""
    for s in walk_stmts(tree.root):
        if isinstance(s, Opaque):
            raise NotInterpretable("opaque statement in tree")
    for e in tree_exprs(tree):
        if isinstance(e, OpaqueExpr):
            raise NotInterpretable("opaque expression in tree")
        if isinstance(e, Call):
            raise NotInterpretable(f"call to {e.name!r} in tree")
        if isinstance(e, Unary) and e.op not in _EVAL_UNARY_OK:
            raise NotInterpretable(f"unary operator {e.op!r} in tree")


def interpret(tree: StmtTree, inputs: dict[str, int], step_budget: int = 100_000) -> Trace:
    """Run the tree to completion, a fault, or budget exhaustion.

    Unbound reads and division by zero raise (the exception carries the
    partial event list); running out of budget is an ordinary Trace with
    outcome "budget-exhausted" and exactly step_budget steps.
    """
    if step_budget <= 0:
        raise ValueError("step_budget must be positive")
    check_interpretable(tree)
    machine = _Machine(inputs, step_budget)
    outcome = "ok"
    try:
        machine.exec(tree.root)
    except _ReturnSignal:
        pass
    except (_BreakSignal, _ContinueSignal):
        pass  # stray break/continue outside a loop: treat as completion
    except _BudgetExhausted:
        outcome = "budget-exhausted"
    return Trace(machine.events, dict(machine.env), machine.steps, outcome)


def free_variables(tree: StmtTree) -> list[str]:
    """Variables the program may read before writing: all referenced names
    minus those introduced by declarations."""
    declared: set[str] = set()
    for s in walk_stmts(tree.root):
        if isinstance(s, Decl):
            declared.update(s.names)
    names: set[str] = set()
    for e in tree_exprs(tree):
        if isinstance(e, Var):
            names.add(e.name)
    return sorted(names - declared)


_VALUE_POOL = [INT_MIN, INT_MAX] + list(range(-3, 4))


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    trials: int
    witness: dict[str, int] | None = None
    detail: str = ""


def _normalize(tree: StmtTree, env: dict[str, int], budget: int):
    try:
        trace = interpret(tree, env, budget)
    except InterpError as exc:
        return exc.outcome, exc.events, None
    return trace.outcome, trace.events, trace.env


def equivalent(
    t1: StmtTree,
    t2: StmtTree,
    trials: int = 100,
    seed: int = 0,
    step_budget: int = 100_000,
) -> EquivalenceVerdict:
    """Compare two trees on seeded random inputs over their free variables.

    A trial passes when both runs have the same outcome and the same
    assignment event sequence (and final environment when both complete).
    When both runs exhaust the budget, only the common event prefix is
    compared: the budget cuts the two runs at different statement counts.
    """
    check_interpretable(t1)
    check_interpretable(t2)
    free = sorted(set(free_variables(t1)) | set(free_variables(t2)))
    rng = random.Random(seed)
    for trial in range(trials):
        env = {name: rng.choice(_VALUE_POOL) for name in free}
        out1, ev1, env1 = _normalize(t1, env, step_budget)
        out2, ev2, env2 = _normalize(t2, env, step_budget)
        if out1 != out2:
            return EquivalenceVerdict(False, trial + 1, env, f"outcome {out1} vs {out2}")
        if out1 == "budget-exhausted":
            k = min(len(ev1), len(ev2))
            if ev1[:k] != ev2[:k]:
                return EquivalenceVerdict(False, trial + 1, env, "event prefix mismatch")
            continue
        if ev1 != ev2:
            return EquivalenceVerdict(False, trial + 1, env, "event sequences differ")
        if out1 == "ok" and env1 != env2:
            return EquivalenceVerdict(False, trial + 1, env, "final environments differ")
    return EquivalenceVerdict(True, trials)
