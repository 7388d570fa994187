"""Labeled function corpora: JSONL ingestion, deterministic stratified
splitting, and uniform partitioning for submodel training.

Interchange format is JSONL, one object per line with keys `id` (string),
`code` (string), `label` (0 or 1), and optional `project`.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(ValueError):
    """Malformed dataset file or inconsistent dataset contents."""


@dataclass(frozen=True)
class FunctionSample:
    id: str
    code: str
    label: int
    project: str | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise CorpusError(f"sample {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if not self.code.strip():
            raise CorpusError(f"sample {self.id!r}: code is empty")


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of samples with unique ids."""

    samples: tuple[FunctionSample, ...]
    name: str = "dataset"

    def __post_init__(self):
        seen: set[str] = set()
        for s in self.samples:
            if s.id in seen:
                raise CorpusError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[FunctionSample]:
        return iter(self.samples)

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def by_id(self, sample_id: str) -> FunctionSample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)

    def labels(self) -> set[int]:
        return {s.label for s in self.samples}

    def subset(self, ids: Iterable[str], name: str | None = None) -> "Dataset":
        """Samples with the given ids, in this dataset's order."""
        wanted = set(ids)
        picked = tuple(s for s in self.samples if s.id in wanted)
        if len(picked) != len(wanted):
            missing = wanted - {s.id for s in picked}
            raise CorpusError(f"unknown sample ids: {sorted(missing)[:5]}")
        return Dataset(picked, name or self.name)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    valid_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        total = self.train_fraction + self.valid_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise CorpusError(f"split fractions must sum to 1, got {total}")
        if min(self.train_fraction, self.valid_fraction, self.test_fraction) <= 0:
            raise CorpusError("split fractions must all be positive")


_REQUIRED_KEYS = ("id", "code", "label")


def ingest_jsonl(path: str | Path, name: str | None = None) -> Dataset:
    """Read a JSONL dataset, preserving line order; errors carry line numbers."""
    path = Path(path)
    samples: list[FunctionSample] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
            for key in _REQUIRED_KEYS:
                if key not in obj:
                    raise CorpusError(f"{path}: line {lineno}: missing key {key!r}")
            if obj["id"] in seen:
                raise CorpusError(f"{path}: line {lineno}: duplicate id {obj['id']!r}")
            seen.add(obj["id"])
            try:
                samples.append(
                    FunctionSample(
                        id=str(obj["id"]),
                        code=obj["code"],
                        label=obj["label"],
                        project=obj.get("project"),
                    )
                )
            except CorpusError as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from exc
    return Dataset(tuple(samples), name or path.stem)


def write_jsonl(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for s in dataset:
            obj = {"id": s.id, "code": s.code, "label": s.label}
            if s.project is not None:
                obj["project"] = s.project
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _allocate(groups: list[list[int]], count: int, fraction: float) -> list[list[int]]:
    """Take ~fraction of each group (largest-remainder) so the total is exact.

    groups hold indices; returns the per-group take, removing taken items.
    """
    quotas = [int(fraction * len(g)) for g in groups]
    remainders = [fraction * len(g) - q for g, q in zip(groups, quotas)]
    short = count - sum(quotas)
    order = sorted(range(len(groups)), key=lambda i: (-remainders[i], i))
    for i in order:
        if short <= 0:
            break
        if quotas[i] < len(groups[i]):
            quotas[i] += 1
            short -= 1
    # if rounding still falls short (tiny groups), take anywhere possible
    i = 0
    while short > 0 and i < len(groups):
        while quotas[i] < len(groups[i]) and short > 0:
            quotas[i] += 1
            short -= 1
        i += 1
    taken: list[list[int]] = []
    for g, q in zip(groups, quotas):
        taken.append(g[:q])
        del g[:q]
    return taken


def split(
    d: Dataset, spec: SplitSpec | None = None, *, stratify: bool = True
) -> tuple[Dataset, Dataset, Dataset]:
    """Deterministic train/valid/test split; remainder rows go to train."""
    spec = spec or SplitSpec()
    n = len(d)
    if n < 10:
        raise CorpusError(f"dataset too small to split: {n} samples")
    n_valid = int(spec.valid_fraction * n)
    n_test = int(spec.test_fraction * n)

    rng = random.Random(spec.seed)
    if stratify:
        groups = [
            [i for i, s in enumerate(d.samples) if s.label == 1],
            [i for i, s in enumerate(d.samples) if s.label == 0],
        ]
    else:
        groups = [list(range(n))]
    for g in groups:
        rng.shuffle(g)

    valid_idx = [i for part in _allocate(groups, n_valid, spec.valid_fraction) for i in part]
    test_idx = [i for part in _allocate(groups, n_test, spec.test_fraction) for i in part]
    used = set(valid_idx) | set(test_idx)
    train_idx = [i for i in range(n) if i not in used]

    def take(indices: list[int], suffix: str) -> Dataset:
        return Dataset(tuple(d.samples[i] for i in sorted(indices)), f"{d.name}/{suffix}")

    return take(train_idx, "train"), take(valid_idx, "valid"), take(test_idx, "test")


def partition_uniform(d: Dataset, m: int, seed: int) -> list[Dataset]:
    """m disjoint subsets, sizes within 1 of each other, stratified by label.

    A single round-robin deal runs across the label groups (the dealing
    cursor carries over), so both the total sizes and the per-label counts
    stay within one sample of the uniform ideal.
    """
    if m < 2:
        raise CorpusError(f"need at least 2 parts, got {m}")
    if len(d) < m:
        raise CorpusError(f"cannot split {len(d)} samples into {m} parts")
    rng = random.Random(seed)
    buckets: list[list[int]] = [[] for _ in range(m)]
    cursor = 0
    for label in (1, 0):
        indices = [i for i, s in enumerate(d.samples) if s.label == label]
        rng.shuffle(indices)
        for idx in indices:
            buckets[cursor % m].append(idx)
            cursor += 1
    return [
        Dataset(tuple(d.samples[i] for i in sorted(part)), f"{d.name}/part{k}")
        for k, part in enumerate(buckets)
    ]
