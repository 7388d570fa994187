"""Per-sample difficulty scoring.

Two strategies share one orientation (lower = easier):

  code   -- negated maintainability index of the sample's source.
  model  -- train one submodel per uniform subset of the training data,
            self-test each submodel on its own subset to get its positive
            and negative correct rates, then score every sample by the
            negated sum, over the submodels that never saw it, of
            correct_rate * signed confidence past the 0.5 threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

from humer.corpus import Dataset, FunctionSample, partition_uniform
from humer.metrics import code_difficulty
from humer.model import (
    DEFAULT_MAX_EPOCHS,
    Classifier,
    ClassifierSpec,
    ConvergencePolicy,
    ModelError,
    derive_seed,
    new_classifier,
    spec_with_seed,
)


@dataclass(frozen=True)
class SubmodelStats:
    subset_index: int
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def pos_rate(self) -> float:
        """Self-test precision on positives; 0 when the submodel predicted
        no positives (it then carries no positive evidence)."""
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def neg_rate(self) -> float:
        denom = self.tn + self.fn
        return self.tn / denom if denom else 0.0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class DifficultyScore:
    sample_id: str
    value: float
    strategy: str  # "code" | "model"
    params: dict | None = None


def train_submodels(
    train: Dataset,
    num_submodels: int,
    spec: ClassifierSpec,
    seed: int,
    *,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    convergence: ConvergencePolicy | None = None,
) -> list[tuple[Classifier, SubmodelStats]]:
    """Train one submodel per uniform subset; self-test it on that subset."""
    subsets = partition_uniform(train, num_submodels, seed)
    out: list[tuple[Classifier, SubmodelStats]] = []
    for i, subset in enumerate(subsets):
        if subset.labels() != {0, 1}:
            raise ModelError(
                f"subset {i} of {num_submodels} is single-class; "
                "use fewer submodels or a larger training set"
            )
        clf = new_classifier(spec_with_seed(spec, derive_seed("submodel", spec.seed, seed, i)))
        clf.train(subset, max_epochs, convergence)
        tp = tn = fp = fn = 0
        for s in subset:
            predicted = clf.predict(s).predicted_label
            if s.label == 1:
                tp += predicted
                fn += 1 - predicted
            else:
                fp += predicted
                tn += 1 - predicted
        out.append((clf, SubmodelStats(i, tp, tn, fp, fn)))
    return out


def model_difficulty(
    sample: FunctionSample,
    owner_index: int,
    submodels: list[tuple[Classifier, SubmodelStats]],
) -> DifficultyScore:
    """Score one sample against every submodel except its own subset's."""
    total = 0.0
    for i, (clf, stats) in enumerate(submodels):
        if i == owner_index:
            continue
        p = clf.predict_probability(sample.code)
        if sample.label == 1:
            total += stats.pos_rate * (p - 0.5)
        else:
            total += stats.neg_rate * (0.5 - p)
    return DifficultyScore(sample.id, -total, "model", {"num_submodels": len(submodels)})


def score_dataset(
    train: Dataset,
    strategy: str,
    *,
    num_submodels: int | None = None,
    spec: ClassifierSpec | None = None,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    convergence: ConvergencePolicy | None = None,
) -> list[DifficultyScore]:
    """One DifficultyScore per sample, sorted by (value, sample id)."""
    if strategy == "code":
        scores = [
            DifficultyScore(s.id, code_difficulty(s), "code", None) for s in train
        ]
    elif strategy == "model":
        if num_submodels is None:
            raise ValueError("model strategy requires num_submodels")
        spec = spec or ClassifierSpec()
        submodels = train_submodels(
            train, num_submodels, spec, seed, max_epochs=max_epochs, convergence=convergence
        )
        subsets = partition_uniform(train, num_submodels, seed)
        owner = {s.id: i for i, subset in enumerate(subsets) for s in subset}
        scores = [model_difficulty(s, owner[s.id], submodels) for s in train]
    else:
        raise ValueError(f"unknown difficulty strategy {strategy!r}")
    scores.sort(key=lambda d: (d.value, d.sample_id))
    return scores
