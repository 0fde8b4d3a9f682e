"""Example problems: string match, regression, classification, program max.

Each problem object is callable on a phenotype and returns its training
fitness. Problems are pure functions of the phenotype and their data, so
the engine may cache them and evaluate them concurrently.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigurationError, FitnessError
from .datasets import DATASETS_DIR, Dataset, load_dataset, read_csv
from .expression import compile_vectorised
from .minilang import run_program

METRICS = ("rmse", "mse", "mae")


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def fitness_string_match(phenotype: str, target: str) -> float:
    if not target:
        raise ValueError("target must be non-empty")
    return float(levenshtein(phenotype, target))


def error_metric(y, yhat, metric="rmse") -> float:
    with np.errstate(all="ignore"):
        diff = yhat - y
        if metric == "rmse":
            err = float(np.sqrt(np.mean(diff * diff)))
        elif metric == "mse":
            err = float(np.mean(diff * diff))
        elif metric == "mae":
            err = float(np.mean(np.abs(diff)))
        else:
            raise ValueError(f"unknown metric {metric!r}")
    if not math.isfinite(err):
        raise FitnessError("non-finite error")
    return err


def fitness_regression(phenotype: str, x, y, metric="rmse") -> float:
    return error_metric(np.asarray(y, dtype=float),
                        compile_vectorised(phenotype)(np.asarray(x, dtype=float)), metric)


def fitness_classification(phenotype: str, x, y) -> float:
    """Fraction of rows misclassified when the output is thresholded at 0."""
    out = compile_vectorised(phenotype)(np.asarray(x, dtype=float))
    predicted = (out > 0).astype(float)
    return float(np.mean(predicted != np.asarray(y, dtype=float)))


def fitness_program_max(phenotype: str, max_steps=10_000, max_magnitude=1e12) -> float:
    return float(run_program(phenotype, max_steps, max_magnitude).value)


class Problem:
    name = "problem"
    maximise = False
    default_grammar = None
    default_dataset = None

    def __call__(self, phenotype: str) -> float:
        raise NotImplementedError

    def test(self, phenotype: str):
        """Held-out fitness, for reporting only. None when there is no test set."""
        return None


class StringMatch(Problem):
    name = "string_match"
    default_grammar = "string_match.bnf"

    def __init__(self, target="Hello world!"):
        if not target:
            raise ConfigurationError("target", "must be non-empty")
        self.target = target

    def __call__(self, phenotype):
        return fitness_string_match(phenotype, self.target)


class Regression(Problem):
    name = "regression"
    default_grammar = "regression.bnf"
    default_dataset = "Vladislavleva4"

    def __init__(self, dataset: Dataset, metric="rmse"):
        if metric not in METRICS:
            raise ConfigurationError("error_metric", f"must be one of {', '.join(METRICS)}")
        self.dataset = dataset
        self.metric = metric

    def __call__(self, phenotype):
        return fitness_regression(phenotype, self.dataset.train_x, self.dataset.train_y, self.metric)

    def test(self, phenotype):
        return fitness_regression(phenotype, self.dataset.test_x, self.dataset.test_y, self.metric)


class Classification(Regression):
    name = "classification"
    default_grammar = "classification.bnf"
    default_dataset = "Disc"

    def __call__(self, phenotype):
        return fitness_classification(phenotype, self.dataset.train_x, self.dataset.train_y)

    def test(self, phenotype):
        return fitness_classification(phenotype, self.dataset.test_x, self.dataset.test_y)


class ProgramMax(Problem):
    name = "program_max"
    maximise = True
    default_grammar = "program_max.bnf"

    def __init__(self, max_steps=10_000, max_magnitude=1e12):
        self.max_steps = max_steps
        self.max_magnitude = max_magnitude

    def __call__(self, phenotype):
        return fitness_program_max(phenotype, self.max_steps, self.max_magnitude)


PROBLEMS = {cls.name: cls for cls in (StringMatch, Regression, Classification, ProgramMax)}


def make_problem(name: str, dataset: Dataset | None = None, target: str = "Hello world!",
                 metric: str = "rmse") -> Problem:
    if name not in PROBLEMS:
        raise ConfigurationError("problem", f"unknown problem {name!r}")
    cls = PROBLEMS[name]
    if cls is StringMatch:
        return StringMatch(target)
    if cls is ProgramMax:
        return ProgramMax()
    if dataset is None:
        raise ConfigurationError("dataset", f"problem {name!r} needs a dataset")
    return cls(dataset, metric)


__all__ = [
    "DATASETS_DIR", "Dataset", "METRICS", "PROBLEMS", "Problem", "StringMatch", "Regression",
    "Classification", "ProgramMax", "error_metric", "fitness_classification",
    "fitness_program_max", "fitness_regression", "fitness_string_match", "levenshtein",
    "load_dataset", "make_problem", "read_csv",
]
