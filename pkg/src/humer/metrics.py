"""Code-complexity metrics: SLOC, cyclomatic complexity, Halstead volume,
and the maintainability index that combines them.

Classification conventions (shared with the independent oracle in the test
suite): Halstead operands are identifiers and literals; operators are
keywords, operator tokens, and punctuation except the pure delimiters
';', '{', '}'.  The cyclomatic decision set is if / while / do-while /
for-with-condition, '&&' and '||', ternaries, and 'case' labels inside
opaque runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from humer.corpus import FunctionSample
from humer.cparse import (
    Binary,
    DoWhile,
    For,
    If,
    Opaque,
    OpaqueExpr,
    StmtTree,
    Ternary,
    Token,
    While,
    lex,
    parse_function,
    tree_exprs,
    walk_stmts,
)

_DELIMITERS = frozenset([";", "{", "}"])
_OPERAND_KINDS = frozenset(["identifier", "integer-literal", "string-literal", "char-literal"])
_OPERATOR_KINDS = frozenset(["keyword", "operator", "punctuation"])


@dataclass(frozen=True)
class ComplexityReport:
    sloc: int
    cyclomatic: int
    halstead_volume: float
    maintainability_index: float
    difficulty: float


def sloc(tokens: list[Token]) -> int:
    """Source lines containing at least one non-comment, non-whitespace token."""
    lines = {t.line for t in tokens if t.kind not in ("comment", "whitespace")}
    return len(lines)


def halstead_volume(tokens: list[Token]) -> float:
    """V = N * log2(eta) over operator/operand occurrences and vocabulary."""
    operators: list[str] = []
    operands: list[str] = []
    for t in tokens:
        if t.kind in _OPERAND_KINDS:
            operands.append(t.text)
        elif t.kind in _OPERATOR_KINDS and t.text not in _DELIMITERS:
            operators.append(t.text)
    total = len(operators) + len(operands)
    vocab = len(set(operators)) + len(set(operands))
    if total == 0 or vocab < 2:
        return 0.0
    return total * math.log2(vocab)


def _opaque_decision_tokens(texts: tuple[str, ...]) -> int:
    return sum(1 for t in texts if t in ("&&", "||", "case"))


def cyclomatic(tree: StmtTree) -> int:
    """1 + number of decision points in the function."""
    decisions = 0
    for s in walk_stmts(tree.root):
        if isinstance(s, (If, While, DoWhile)):
            decisions += 1
        elif isinstance(s, For) and s.cond is not None:
            decisions += 1
        elif isinstance(s, Opaque):
            decisions += _opaque_decision_tokens(s.texts)
    for e in tree_exprs(tree):
        if isinstance(e, Binary) and e.op in ("&&", "||"):
            decisions += 1
        elif isinstance(e, Ternary):
            decisions += 1
        elif isinstance(e, OpaqueExpr):
            decisions += _opaque_decision_tokens(e.texts)
    return 1 + decisions


def maintainability_index(sloc_count: int, cyclomatic_count: int, volume: float) -> float:
    """171 - 5.2 ln V - 0.23 G - 16.2 ln L, with ln guarded below 1."""
    return (
        171.0
        - 5.2 * math.log(max(volume, 1.0))
        - 0.23 * cyclomatic_count
        - 16.2 * math.log(max(sloc_count, 1.0))
    )


def analyze(code: str) -> ComplexityReport:
    """All metrics for one function; difficulty is the negated MI."""
    tokens = lex(code)
    tree = parse_function(code)
    l = sloc(tokens)
    g = cyclomatic(tree)
    v = halstead_volume(tokens)
    mi = maintainability_index(l, g, v)
    return ComplexityReport(l, g, v, mi, -mi)


def code_difficulty(sample: FunctionSample) -> float:
    """Code-based difficulty of a sample: low maintainability = hard."""
    return analyze(sample.code).difficulty
