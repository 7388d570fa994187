"""Semantics-preserving control-flow rewrites and variant generation.

Five rules, applied at statement sites found by a tree traversal:

  R1  if (C) B            ->  if (C) B else { }      (or, behind a flag,
                               if (!(C)) { } else B)
  R2  if (C1 && C2) B     ->  if (C1) { if (C2) B }
  R3  for (I; C; S) B     ->  { I; if (C) { do { B; S; } while (C); } }
  R4  while (C) B         ->  if (C) { do B while (C); }
  R5  while (C) B         ->  while (1) { if (!(C)) { break; } B }

A simple variant applies one rule at one site; a hard variant applies a rule
at every site simultaneously, enumerating the rule choices of multi-rule
sites.  All rewrites preserve the order in which conditions and side effects
execute, so traces are unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

from humer.corpus import FunctionSample
from humer.cparse import (
    Binary,
    Block,
    Break,
    Continue,
    DoWhile,
    Expr,
    ExprStmt,
    For,
    If,
    IntLit,
    LexError,
    Opaque,
    ParseError,
    Stmt,
    StmtTree,
    Unary,
    While,
    expr_is_opaque_free,
    parse_function,
    render,
    span_lines,
    stmt_exprs,
    walk_stmts,
)

log = logging.getLogger(__name__)

RULES = ("R1", "R2", "R3", "R4", "R5")

# Path steps name the child slot: ("stmts", i) within a block, or
# ("then",) / ("orelse",) / ("body",) / ("init",) for the fixed slots.
Path = tuple[tuple, ...]


@dataclass(frozen=True)
class TransformSite:
    path: Path
    rules: tuple[str, ...]
    line_span: tuple[int, int] | None


@dataclass(frozen=True)
class Variant:
    source_id: str
    assignment: tuple[tuple[Path, str], ...]
    kind: str  # "simple" | "hard"
    code: str
    label: int


def _body_blocks_r3(body: Stmt) -> bool:
    """A for-loop body disqualifies R3 if it contains continue (moving the
    step expression past it would skip it) or anything opaque."""
    for s in walk_stmts(body):
        if isinstance(s, (Continue, Opaque)):
            return True
        for e in stmt_exprs(s):
            if not expr_is_opaque_free(e):
                return True
    return False


def _site_rules(s: Stmt) -> tuple[str, ...]:
    if isinstance(s, If) and s.orelse is None:
        rules = []
        if expr_is_opaque_free(s.cond):
            rules.append("R1")
            if isinstance(s.cond, Binary) and s.cond.op == "&&":
                rules.append("R2")
        return tuple(rules)
    if isinstance(s, For) and s.cond is not None and not _body_blocks_r3(s.body):
        return ("R3",)
    if isinstance(s, While) and expr_is_opaque_free(s.cond):
        return ("R4", "R5")
    return ()


def _child_slots(s: Stmt) -> list[tuple[tuple, Stmt]]:
    if isinstance(s, Block):
        return [(("stmts", i), c) for i, c in enumerate(s.stmts)]
    if isinstance(s, If):
        slots = [(("then",), s.then)]
        if s.orelse is not None:
            slots.append((("orelse",), s.orelse))
        return slots
    if isinstance(s, (While, DoWhile)):
        return [(("body",), s.body)]
    if isinstance(s, For):
        slots = []
        if s.init is not None:
            slots.append((("init",), s.init))
        slots.append((("body",), s.body))
        return slots
    return []


def find_sites(tree: StmtTree) -> list[TransformSite]:
    """All rule-applicable statement sites, in source (pre-order) order."""
    sites: list[TransformSite] = []

    def visit(s: Stmt, path: Path) -> None:
        rules = _site_rules(s)
        if rules:
            try:
                lines = span_lines(tree, s)
            except ValueError:
                lines = None
            sites.append(TransformSite(path, rules, lines))
        for step, child in _child_slots(s):
            visit(child, path + (step,))

    visit(tree.root, ())
    return sites


def _as_block(s: Stmt) -> Block:
    return s if isinstance(s, Block) else Block((s,))


def _negate(cond: Expr) -> Expr:
    return Unary("!", cond)


def _rewrite(s: Stmt, rule: str, r1_reverse: bool) -> Stmt:
    if rule == "R1":
        assert isinstance(s, If)
        if r1_reverse:
            return If(_negate(s.cond), Block(()), s.then)
        return If(s.cond, s.then, Block(()))
    if rule == "R2":
        assert isinstance(s, If) and isinstance(s.cond, Binary)
        inner = If(s.cond.right, s.then, None)
        return If(s.cond.left, Block((inner,)), None)
    if rule == "R3":
        assert isinstance(s, For)
        do_body = Block(_as_block(s.body).stmts + ((ExprStmt(s.step),) if s.step is not None else ()))
        guarded = If(s.cond, Block((DoWhile(do_body, s.cond),)), None)
        stmts: tuple[Stmt, ...] = (s.init, guarded) if s.init is not None else (guarded,)
        return Block(stmts)
    if rule == "R4":
        assert isinstance(s, While)
        return If(s.cond, Block((DoWhile(s.body, s.cond),)), None)
    if rule == "R5":
        assert isinstance(s, While)
        guard = If(_negate(s.cond), Block((Break(),)), None)
        return While(IntLit(1), Block((guard,) + _as_block(s.body).stmts))
    raise ValueError(f"unknown rule {rule!r}")


def _apply(s: Stmt, path: Path, assignment: dict[Path, str], r1_reverse: bool) -> Stmt:
    """Post-order rebuild: children first, then any rule assigned here."""
    rebuilt = s
    slots = _child_slots(s)
    if slots:
        if isinstance(s, Block):
            new_stmts = tuple(
                _apply(c, path + (step,), assignment, r1_reverse) for step, c in slots
            )
            rebuilt = Block(new_stmts)
        elif isinstance(s, If):
            new_then = _apply(s.then, path + (("then",),), assignment, r1_reverse)
            new_else = (
                _apply(s.orelse, path + (("orelse",),), assignment, r1_reverse)
                if s.orelse is not None
                else None
            )
            rebuilt = If(s.cond, new_then, new_else)
        elif isinstance(s, While):
            rebuilt = While(s.cond, _apply(s.body, path + (("body",),), assignment, r1_reverse))
        elif isinstance(s, DoWhile):
            rebuilt = DoWhile(_apply(s.body, path + (("body",),), assignment, r1_reverse), s.cond)
        elif isinstance(s, For):
            new_init = (
                _apply(s.init, path + (("init",),), assignment, r1_reverse)
                if s.init is not None
                else None
            )
            rebuilt = For(
                new_init, s.cond, s.step, _apply(s.body, path + (("body",),), assignment, r1_reverse)
            )
    rule = assignment.get(path)
    if rule is not None:
        rebuilt = _rewrite(rebuilt, rule, r1_reverse)
    return rebuilt


def apply_rule(tree: StmtTree, site: TransformSite, rule: str, *, r1_reverse: bool = False) -> StmtTree:
    """Apply one rule at one site; raises if the rule is not applicable there."""
    if rule not in site.rules:
        raise ValueError(f"rule {rule} not applicable at site {site.path}")
    return apply_assignment(tree, ((site.path, rule),), r1_reverse=r1_reverse)


def apply_assignment(
    tree: StmtTree, assignment: Iterable[tuple[Path, str]], *, r1_reverse: bool = False
) -> StmtTree:
    mapping = dict(assignment)
    root = _apply(tree.root, (), mapping, r1_reverse)
    assert isinstance(root, Block)
    return StmtTree(tree.header, root)


def generate_variants(sample: FunctionSample, *, r1_reverse: bool = False) -> list[Variant]:
    """All simple variants followed by all hard variants, deduplicated.

    Simple: one (site, rule) each, in (source order, rule index) order.
    Hard: one per combination of rule choices over the multi-rule sites,
    with single-rule sites pinned.  Variants whose rendered code collides
    with an earlier variant (e.g. the hard variant of a one-site function)
    are dropped.
    """
    tree = parse_function(sample.code)
    sites = find_sites(tree)
    if not sites:
        return []

    variants: list[Variant] = []
    seen_code: set[str] = set()

    def emit(assignment: tuple[tuple[Path, str], ...], kind: str) -> None:
        new_tree = apply_assignment(tree, assignment, r1_reverse=r1_reverse)
        code = render(new_tree)
        if code in seen_code:
            return
        seen_code.add(code)
        variants.append(Variant(sample.id, assignment, kind, code, sample.label))

    for site in sites:
        for rule in site.rules:
            emit(((site.path, rule),), "simple")

    choices: list[list[tuple[Path, str]]] = [
        [(site.path, rule) for rule in site.rules] if len(site.rules) > 1 else [(site.path, site.rules[0])]
        for site in sites
    ]
    combos: list[tuple[tuple[Path, str], ...]] = [()]
    for options in choices:
        combos = [prefix + (opt,) for prefix in combos for opt in options]
    for combo in combos:
        emit(combo, "hard")
    return variants


def variant_samples(
    samples: Iterable[FunctionSample], *, r1_reverse: bool = False
) -> tuple[list[FunctionSample], list[Variant]]:
    """Variants of many samples as trainable FunctionSamples.

    Samples that fail to lex or parse are skipped with a warning; real
    corpora contain such functions and the pipeline must keep going.
    """
    out: list[FunctionSample] = []
    infos: list[Variant] = []
    for sample in samples:
        try:
            vs = generate_variants(sample, r1_reverse=r1_reverse)
        except (LexError, ParseError) as exc:
            log.warning("skipping unparseable sample %s: %s", sample.id, exc)
            continue
        for k, v in enumerate(vs):
            out.append(
                FunctionSample(
                    id=f"{sample.id}::v{k}",
                    code=v.code,
                    label=v.label,
                    project=sample.project,
                )
            )
            infos.append(v)
    return out, infos
