"""Bucket planning and staged easy-to-hard training.

Stage 1 trains a fresh classifier on the easiest bucket; stage k continues
training the same classifier on the union of buckets 1..k (each merge
carries the earlier ones forward, so the last stage sees the whole training
set).  After each stage the samples of that stage the model still gets wrong
are collected; their semantics-preserving variants form the stage's error
book, on which the classifier is fine-tuned.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import asdict, dataclass, field, replace

from humer.augment import variant_samples
from humer.corpus import Dataset
from humer.difficulty import DifficultyScore
from humer.model import (
    DEFAULT_MAX_EPOCHS,
    Classifier,
    ClassifierSpec,
    ConvergencePolicy,
    TrainReport,
    new_classifier,
)


@dataclass(frozen=True)
class BucketStats:
    size: int
    mean_difficulty: float


@dataclass(frozen=True)
class CurriculumPlan:
    buckets: tuple[tuple[str, ...], ...]  # easiest first
    stats: tuple[BucketStats, ...]
    strategy: str
    params: dict | None = None

    @property
    def num_buckets(self) -> int:
        return len(self.buckets)

    def all_ids(self) -> set[str]:
        return {i for b in self.buckets for i in b}


def plan(scores: list[DifficultyScore], n: int) -> CurriculumPlan:
    """Sort by (difficulty, id) and slice into n contiguous buckets; earlier
    buckets take the extra sample when the count does not divide evenly."""
    if n < 2:
        raise ValueError(f"need at least 2 buckets, got {n}")
    if len(scores) < n:
        raise ValueError(f"cannot make {n} buckets from {len(scores)} scores")
    ranked = sorted(scores, key=lambda d: (d.value, d.sample_id))
    q, r = divmod(len(ranked), n)
    sizes = [q + 1] * r + [q] * (n - r)
    buckets: list[tuple[str, ...]] = []
    stats: list[BucketStats] = []
    pos = 0
    for size in sizes:
        chunk = ranked[pos : pos + size]
        pos += size
        buckets.append(tuple(d.sample_id for d in chunk))
        stats.append(BucketStats(size, statistics.fmean(d.value for d in chunk)))
    strategy = ranked[0].strategy
    return CurriculumPlan(tuple(buckets), tuple(stats), strategy, ranked[0].params)


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    recall: float
    precision: float
    f1: float
    undefined: tuple[str, ...] = ()


def metrics_from_counts(tp: int, tn: int, fp: int, fn: int) -> MetricsReport:
    undefined = []
    total = tp + tn + fp + fn
    accuracy = (tp + tn) / total if total else 0.0
    if not total:
        undefined.append("accuracy")
    recall = tp / (tp + fn) if tp + fn else 0.0
    if not tp + fn:
        undefined.append("recall")
    precision = tp / (tp + fp) if tp + fp else 0.0
    if not tp + fp:
        undefined.append("precision")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    if not precision + recall:
        undefined.append("f1")
    return MetricsReport(tp, tn, fp, fn, accuracy, recall, precision, f1, tuple(undefined))


def evaluate(c: Classifier, test: Dataset) -> MetricsReport:
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    tp = tn = fp = fn = 0
    for s in test:
        predicted = c.predict(s).predicted_label
        if s.label == 1:
            tp += predicted
            fn += 1 - predicted
        else:
            fp += predicted
            tn += 1 - predicted
    return metrics_from_counts(tp, tn, fp, fn)


@dataclass(frozen=True)
class StageRecord:
    stage: int
    training_ids: tuple[str, ...]
    report: TrainReport
    mispredicted_ids: tuple[str, ...]
    error_book_size: int
    fine_tune_report: TrainReport | None
    valid_metrics: MetricsReport | None = None


@dataclass
class RunManifest:
    """Everything needed to reproduce a run and audit its stages."""

    kind: str  # "curriculum" | "baseline"
    spec: ClassifierSpec
    max_epochs: int
    augment: bool
    fine_tune_epochs: int
    strategy: str | None = None
    params: dict | None = None
    num_buckets: int | None = None
    bucket_stats: tuple[BucketStats, ...] = ()
    stages: tuple[StageRecord, ...] = ()
    final_metrics: MetricsReport | None = None
    test_metrics: MetricsReport | None = None
    dataset_name: str = ""
    seeds: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def run_curriculum(
    curriculum_plan: CurriculumPlan,
    train: Dataset,
    valid: Dataset,
    spec: ClassifierSpec,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    augment: bool = True,
    *,
    fine_tune_epochs: int = 2,
    include_originals: bool = False,
    convergence: ConvergencePolicy | None = None,
) -> tuple[Classifier, RunManifest]:
    """Staged training over the plan's buckets, easiest first.

    With augment=True, each stage's mispredicted samples feed the error
    book and the classifier is fine-tuned on it; augment=False is the
    ablation mode (no fine-tuning at all).
    """
    plan_ids = curriculum_plan.all_ids()
    train_ids = set(train.ids())
    if plan_ids != train_ids:
        raise ValueError("plan does not cover exactly the training set ids")

    clf = new_classifier(spec)
    records: list[StageRecord] = []
    cumulative: list[str] = []
    for k, bucket in enumerate(curriculum_plan.buckets, start=1):
        cumulative.extend(bucket)
        stage_data = train.subset(cumulative, f"{train.name}/stage{k}")
        report = clf.train(stage_data, max_epochs, convergence)
        mispredicted = tuple(
            s.id for s in stage_data if clf.predict(s).predicted_label != s.label
        )
        error_book_size = 0
        ft_report: TrainReport | None = None
        if augment and mispredicted and fine_tune_epochs > 0:
            wrong = [train.by_id(i) for i in mispredicted]
            book, _ = variant_samples(wrong)
            if include_originals:
                book = book + wrong
            error_book_size = len(book)
            if book:
                ft_report = clf.fine_tune(
                    Dataset(tuple(book), f"{train.name}/errorbook{k}"), fine_tune_epochs
                )
        records.append(
            StageRecord(
                stage=k,
                training_ids=tuple(cumulative),
                report=report,
                mispredicted_ids=mispredicted,
                error_book_size=error_book_size,
                fine_tune_report=ft_report,
                valid_metrics=evaluate(clf, valid) if len(valid) else None,
            )
        )
    manifest = RunManifest(
        kind="curriculum",
        spec=spec,
        max_epochs=max_epochs,
        augment=augment,
        fine_tune_epochs=fine_tune_epochs if augment else 0,
        strategy=curriculum_plan.strategy,
        params=curriculum_plan.params,
        num_buckets=curriculum_plan.num_buckets,
        bucket_stats=curriculum_plan.stats,
        stages=tuple(records),
        final_metrics=evaluate(clf, valid) if len(valid) else None,
        dataset_name=train.name,
    )
    return clf, manifest


def run_baseline(
    train: Dataset,
    valid: Dataset,
    spec: ClassifierSpec,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    *,
    convergence: ConvergencePolicy | None = None,
) -> tuple[Classifier, RunManifest]:
    """Single-stage training on the full training set in shuffled order."""
    clf = new_classifier(spec)
    report = clf.train(train, max_epochs, convergence)
    mispredicted = tuple(s.id for s in train if clf.predict(s).predicted_label != s.label)
    record = StageRecord(
        stage=1,
        training_ids=tuple(train.ids()),
        report=report,
        mispredicted_ids=mispredicted,
        error_book_size=0,
        fine_tune_report=None,
        valid_metrics=evaluate(clf, valid) if len(valid) else None,
    )
    manifest = RunManifest(
        kind="baseline",
        spec=spec,
        max_epochs=max_epochs,
        augment=False,
        fine_tune_epochs=0,
        stages=(record,),
        final_metrics=evaluate(clf, valid) if len(valid) else None,
        dataset_name=train.name,
    )
    return clf, manifest


def plan_from_manifest(manifest: RunManifest) -> CurriculumPlan:
    """Rebuild the bucket plan from a curriculum manifest's stage records
    (stage k's training ids are the cumulative union of buckets 1..k)."""
    if manifest.kind != "curriculum":
        raise ValueError("manifest is not a curriculum run")
    buckets: list[tuple[str, ...]] = []
    prev = 0
    for record in manifest.stages:
        buckets.append(tuple(record.training_ids[prev:]))
        prev = len(record.training_ids)
    return CurriculumPlan(
        tuple(buckets), manifest.bucket_stats, manifest.strategy or "code", manifest.params
    )


def replay(
    manifest: RunManifest, train: Dataset, valid: Dataset
) -> tuple[Classifier, RunManifest]:
    """Re-run a recorded configuration; the result must reproduce the
    manifest's numbers exactly."""
    if manifest.kind == "baseline":
        clf, rerun = run_baseline(train, valid, manifest.spec, manifest.max_epochs)
    else:
        clf, rerun = run_curriculum(
            plan_from_manifest(manifest),
            train,
            valid,
            manifest.spec,
            manifest.max_epochs,
            manifest.augment,
            fine_tune_epochs=manifest.fine_tune_epochs,
        )
    return clf, replace(rerun, seeds=dict(manifest.seeds))
