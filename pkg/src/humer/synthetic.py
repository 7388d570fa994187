"""Seeded generator for planted-pattern benchmark corpora.

Labels are decided by token-level patterns a bag-of-tokens model can learn:

  * easy vulnerable functions carry an unbounded-loop idiom written in its
    rewritten surface form, `while (1) { if (!(cond)) { break; } ... }`,
    so the telltale tokens (`!`, `break`, the guard shape) are present
    verbatim;
  * hard vulnerable functions (a configurable share, default 30%) contain
    the same loop written plainly, `while (cond) { ... }` -- the telltale
    tokens appear only after a rewrite-rule-style transformation.  Their
    real signal is a marker vocabulary diluted across long bodies, so a
    few epochs of ordinary training underfit it;
  * a small share of vulnerable functions is pure filler, undetectable for
    any token model, which keeps difficulty scores spread out and skews
    mispredictions toward the vulnerable class (the regime the error-book
    mechanism is built for).

Every normal function also carries a plain loop, so no structural token on
its own separates the classes.
"""

from __future__ import annotations

import random

from humer.corpus import Dataset, FunctionSample

_FILLER_VARS = ["acc", "val", "tmp", "count", "total", "delta", "limit", "base"]
_MARKER_BASES = [
    "copy_len", "src_off", "dst_off", "chunk_sz", "span_left", "tail_room",
    "wrap_pos", "raw_idx", "seg_end", "pad_bytes", "hdr_gap", "frame_rem",
]
# each concrete marker name is rare, so its evidence accrues slowly and a
# mean-loss convergence stop leaves it half-learned
_HARD_MARKERS = [f"{base}_{i}" for base in _MARKER_BASES for i in range(5)]
_NEUTRAL_CALLS = ["log_event", "update_state", "refresh_view", "queue_task", "emit_metric"]
_ANCHOR_CALLS = ["audit_ok", "bounds_checked", "validate_input", "sanitize_range"]
# legacy-path calls: common in normal code, near-ubiquitous in the hard
# vulnerable functions, so they read as (weak) evidence of normality
_DECOY_CALLS = ["legacy_guard", "compat_shim", "fallback_path", "quirk_mode"]


def _filler_stmts(rng: random.Random, count: int) -> list[str]:
    stmts = []
    for _ in range(count):
        v = rng.choice(_FILLER_VARS)
        w = rng.choice(_FILLER_VARS)
        k = rng.randint(1, 9)
        stmts.append(
            rng.choice(
                [
                    f"{v} = {v} + {k};",
                    f"{v} = {w} * {k};",
                    f"{v} = {w} - {v};",
                    f"{v} = {w} + {v} * {k};",
                    f"{rng.choice(_NEUTRAL_CALLS)}({v});",
                ]
            )
        )
    return stmts


def _plain_loop(rng: random.Random, body: list[str]) -> list[str]:
    v = rng.choice(["i", "pos", "cursor"])
    bound = rng.choice(["n", "limit"])
    lines = [f"while ({v} < {bound}) {{"]
    lines += ["    " + s for s in body]
    lines += [f"    {v} = {v} + 1;", "}"]
    return lines


def _counted_loop(rng: random.Random, body: list[str]) -> list[str]:
    v = rng.choice(["i", "pos", "cursor"])
    bound = rng.choice(["n", "limit"])
    lines = [f"for ({v} = 0; {v} < {bound}; {v} = {v} + 1) {{"]
    lines += ["    " + s for s in body]
    lines += ["}"]
    return lines


def _post_checked_loop(rng: random.Random, body: list[str]) -> list[str]:
    v = rng.choice(["i", "pos", "cursor"])
    bound = rng.choice(["n", "limit"])
    lines = ["do {"]
    lines += ["    " + s for s in body]
    lines += [f"    {v} = {v} + 1;", f"}} while ({v} < {bound});"]
    return lines


def _rewritten_loop(rng: random.Random, body: list[str]) -> list[str]:
    v = rng.choice(["i", "pos", "cursor"])
    bound = rng.choice(["n", "limit"])
    lines = ["while (1) {", f"    if (!({v} < {bound})) {{ break; }}"]
    lines += ["    " + s for s in body]
    lines += [f"    {v} = {v} + 1;", "}"]
    return lines


def _marker_stmts(rng: random.Random, count: int) -> list[str]:
    # one marker name per function: each name stays rare corpus-wide
    m = rng.choice(_HARD_MARKERS)
    out = []
    for _ in range(count):
        w = rng.choice(_FILLER_VARS)
        out.append(rng.choice([f"{m} = {m} + {w};", f"{w} = {w} + {m};", f"{m} = {m} - 1;"]))
    return out


def _assemble(name: str, lines: list[str]) -> str:
    body = "\n".join("    " + ln for ln in lines)
    return f"static int {name}(int n, int limit, int i)\n{{\n{body}\n    return 0;\n}}\n"


def make_synthetic_corpus(
    n: int = 2000,
    seed: int = 0,
    *,
    vulnerable_fraction: float = 0.5,
    hard_fraction: float = 0.3,
    marker_noise: float = 0.25,
    undetectable_fraction: float = 0.0,
) -> Dataset:
    """Corpus of n labeled functions with planted token patterns.

    hard_fraction of the vulnerable samples are written in the plain-loop
    form (pattern only visible after a rewrite); undetectable_fraction of
    them are pattern-free filler; marker_noise of the normal samples borrow
    one weak marker statement (off by default: markers are the learnable
    hard-sample signal).
    """
    rng = random.Random(seed)
    samples = []
    n_vuln = round(n * vulnerable_fraction)
    for k in range(n):
        name = f"fn_{k:05d}"
        vulnerable = k < n_vuln
        if vulnerable:
            roll = rng.random()
            if roll < undetectable_fraction:
                lines = _filler_stmts(rng, rng.randint(3, 10))
                loop_body = _filler_stmts(rng, rng.randint(1, 2))
                if rng.random() < 0.5:
                    lines += _counted_loop(rng, loop_body)
                else:
                    lines += _post_checked_loop(rng, loop_body)
                project = "synthetic/undetectable"
            elif roll < undetectable_fraction + hard_fraction:
                pre = _filler_stmts(rng, rng.randint(6, 14))
                inner = _marker_stmts(rng, rng.randint(2, 5)) + _filler_stmts(rng, rng.randint(1, 2))
                lines = pre + _plain_loop(rng, inner) + _filler_stmts(rng, rng.randint(3, 6))
                if rng.random() < 0.9:
                    for _ in range(rng.randint(1, 2)):
                        lines.append(f"{rng.choice(_DECOY_CALLS)}({rng.choice(_FILLER_VARS)});")
                project = "synthetic/hard"
            else:
                pre = _filler_stmts(rng, rng.randint(1, 8))
                inner = _filler_stmts(rng, rng.randint(1, 3))
                lines = pre + _rewritten_loop(rng, inner) + _filler_stmts(rng, rng.randint(1, 3))
                project = "synthetic/easy"
        else:
            # post-checked do-while loops: they carry the `while` token
            # (keeping it class-neutral) but none of their rewrites can
            # introduce the unbounded-loop pattern tokens
            lines = _filler_stmts(rng, rng.randint(2, 12))
            lines += _post_checked_loop(rng, _filler_stmts(rng, rng.randint(1, 3)))
            if rng.random() < marker_noise:
                # markers nearly as dense as in the hard vulnerable bodies;
                # the checked-path calls are what separates these, so the
                # margin is thin and learning is slow
                lines += _marker_stmts(rng, rng.randint(2, 3))
            if rng.random() < 0.6:
                lines.append(f"{rng.choice(_DECOY_CALLS)}({rng.choice(_FILLER_VARS)});")
            lines.append(f"{rng.choice(_ANCHOR_CALLS)}({rng.choice(_FILLER_VARS)});")
            if rng.random() < 0.5:
                lines.append(f"{rng.choice(_ANCHOR_CALLS)}({rng.choice(_FILLER_VARS)});")
            project = "synthetic/normal"
        samples.append(
            FunctionSample(id=f"s{k:05d}", code=_assemble(name, lines), label=int(vulnerable), project=project)
        )
    rng.shuffle(samples)
    return Dataset(tuple(samples), f"synthetic-{n}-{seed}")
