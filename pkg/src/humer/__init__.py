"""Curriculum training toolkit for source-code vulnerability classifiers.

The package is organized around a small pipeline:

  corpus     -- JSONL datasets of labeled C functions, deterministic splits
  cparse     -- lossless lexer and statement-level parser for C-like code
  metrics    -- SLOC / cyclomatic / Halstead / maintainability-index scoring
  model      -- classifier contract, built-in logistic reference model,
                stdio bridge to external models
  difficulty -- model-based difficulty scoring via self-tested submodels
  curriculum -- bucket planning, staged easy-to-hard training, error book
  augment    -- the five semantics-preserving control-flow rewrite rules
  minieval   -- deterministic interpreter used as the equivalence oracle
  synthetic  -- seeded generator for planted-pattern benchmark corpora
  cli        -- command-line front end (`humer ...`)
"""

from humer.corpus import Dataset, FunctionSample, SplitSpec, ingest_jsonl, partition_uniform, split
from humer.difficulty import DifficultyScore, score_dataset
from humer.metrics import ComplexityReport, analyze
from humer.model import ClassifierSpec, Prediction, TrainReport, new_classifier

__all__ = [
    "ClassifierSpec",
    "ComplexityReport",
    "Dataset",
    "DifficultyScore",
    "FunctionSample",
    "Prediction",
    "SplitSpec",
    "TrainReport",
    "analyze",
    "ingest_jsonl",
    "new_classifier",
    "partition_uniform",
    "score_dataset",
    "split",
]
