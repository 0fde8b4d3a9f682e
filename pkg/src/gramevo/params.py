"""Run parameters and the ``key: value`` parameters file format.

A saved parameters file holds every field, including the random seed, so
loading it back reproduces the run exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigurationError, MalformedLine, UnknownKey

PARAMETERS_DIR = Path(__file__).parent / "parameters"

CHOICES = {
    "problem": ("string_match", "regression", "classification", "program_max"),
    "fitness_direction": ("auto", "minimise", "maximise"),
    "error_metric": ("rmse", "mse", "mae"),
    "selection": ("tournament", "truncation"),
    "crossover": ("fixed_onepoint", "fixed_twopoint", "variable_onepoint",
                  "variable_twopoint", "subtree"),
    "mutation": ("codon_flip", "genome_flip", "subtree"),
    "replacement": ("generational", "steady_state"),
    "initialisation": ("random_genome", "random_tree", "rhh", "pi_grow"),
    "cache": ("lookup", "off"),
}


@dataclass(frozen=True)
class Parameters:
    problem: str = "regression"
    grammar_file: str | None = None
    dataset: str | None = None
    target: str = "Hello world!"
    error_metric: str = "rmse"
    fitness_direction: str = "auto"

    population_size: int = 500
    generations: int = 50
    elite_size: int = 1

    selection: str = "tournament"
    tournament_size: int = 2
    truncation_proportion: float = 0.5
    allow_invalid_selection: bool = False

    crossover: str = "variable_onepoint"
    crossover_probability: float = 0.75
    within_used: bool = True
    mutation: str = "codon_flip"
    # None means one expected flip per individual: 1 / used codons
    mutation_probability: float | None = None
    mutation_events: int = 1

    replacement: str = "generational"

    initialisation: str = "rhh"
    # None means the grammar's own minimum depth
    min_init_depth: int | None = None
    max_init_depth: int = 10
    genome_length: int = 200

    max_wraps: int = 0
    codon_size: int = 100_000
    max_tree_depth: int = 90
    mapping_depth_limit: int | None = None

    cache: str = "lookup"
    workers: int = 1
    random_seed: int | None = None

    def replace(self, **changes) -> Parameters:
        for key in changes:
            if key not in FIELD_TYPES:
                raise UnknownKey(key, "unknown parameter")
        return replace(self, **changes)

    def validate(self) -> Parameters:
        for key, allowed in CHOICES.items():
            if getattr(self, key) not in allowed:
                raise ConfigurationError(key, f"must be one of {', '.join(allowed)}")
        positive = ("population_size", "tournament_size", "max_init_depth", "genome_length",
                    "max_tree_depth", "workers")
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigurationError(key, "must be positive")
        for key in ("generations", "elite_size", "max_wraps", "mutation_events"):
            if getattr(self, key) < 0:
                raise ConfigurationError(key, "must not be negative")
        if self.elite_size >= self.population_size:
            raise ConfigurationError("elite_size", "must be smaller than population_size")
        if self.replacement == "steady_state" and self.population_size < 2:
            raise ConfigurationError("population_size", "steady state needs at least 2")
        if not 0 <= self.crossover_probability <= 1:
            raise ConfigurationError("crossover_probability", "must be in [0, 1]")
        if self.mutation_probability is not None and not 0 <= self.mutation_probability <= 1:
            raise ConfigurationError("mutation_probability", "must be in [0, 1]")
        if not 0 < self.truncation_proportion <= 1:
            raise ConfigurationError("truncation_proportion", "must be in (0, 1]")
        if self.codon_size < 2:
            raise ConfigurationError("codon_size", "must be at least 2")
        if self.min_init_depth is not None and self.min_init_depth > self.max_init_depth:
            raise ConfigurationError("min_init_depth", "must not exceed max_init_depth")
        if self.mapping_depth_limit is not None and self.mapping_depth_limit < 1:
            raise ConfigurationError("mapping_depth_limit", "must be positive")
        if self.problem == "string_match" and not self.target:
            raise ConfigurationError("target", "must be non-empty")
        return self

    @property
    def maximise(self) -> bool:
        if self.fitness_direction == "auto":
            return self.problem == "program_max"
        return self.fitness_direction == "maximise"

    def resolved(self) -> Parameters:
        """Fill in problem defaults and draw a seed if none was given."""
        from .problems import PROBLEMS

        cls = PROBLEMS[self.problem]
        changes = {}
        if self.grammar_file is None:
            changes["grammar_file"] = cls.default_grammar
        if self.dataset is None and cls.default_dataset is not None:
            changes["dataset"] = cls.default_dataset
        if self.random_seed is None:
            changes["random_seed"] = random.SystemRandom().randrange(2**31)
        return replace(self, **changes)


FIELD_TYPES = {f.name: f.type for f in fields(Parameters)}
DEFAULTS = asdict(Parameters())


def _base_type(annotation: str):
    name = annotation.replace(" | None", "")
    return {"int": int, "float": float, "str": str, "bool": bool}[name]


def is_optional(key: str) -> bool:
    return FIELD_TYPES[key].endswith("| None")


def parse_value(key: str, text: str):
    """Convert the textual form of a parameter to its Python value."""
    if key not in FIELD_TYPES:
        raise UnknownKey(key, "unknown parameter")
    text = text.strip()
    if is_optional(key) and text.lower() in ("none", "auto", ""):
        return None
    kind = _base_type(FIELD_TYPES[key])
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in ("true", "yes", "1"):
                return True
            if lowered in ("false", "no", "0"):
                return False
            raise ValueError(text)
        if kind is str:
            return json.loads(text) if text.startswith('"') else text
        if kind is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigurationError(key, f"cannot read {text!r} as {kind.__name__}") from None


def format_value(key: str, value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        ambiguous = is_optional(key) and value.lower() in ("none", "auto")
        # anything splitlines() or strip() would mangle goes out JSON-escaped
        if value != value.strip() or "#" in value or value == "" or value.startswith('"') \
                or not value.isprintable() or ambiguous:
            return json.dumps(value)
        return value
    return str(value)


def dumps(params: Parameters) -> str:
    lines = ["# gramevo run parameters"]
    lines += [f"{key}: {format_value(key, getattr(params, key))}" for key in FIELD_TYPES]
    return "\n".join(lines) + "\n"


def _split_value(raw: str) -> str:
    """Strip a trailing `` #`` comment, respecting a leading quoted string."""
    stripped = raw.strip()
    if stripped.startswith('"'):
        decoder = json.JSONDecoder()
        try:
            _, end = decoder.raw_decode(stripped)
        except ValueError:
            return stripped
        return stripped[:end]
    cut = stripped.find(" #")
    return stripped if cut < 0 else stripped[:cut].rstrip()


def loads(text: str, base: Parameters | None = None) -> Parameters:
    """Parse a parameters file. Keys not present keep their ``base`` values."""
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        if ":" not in line:
            raise MalformedLine(number, 1, "expected 'key: value'")
        key, _, raw = line.partition(":")
        key = key.strip()
        if key not in FIELD_TYPES:
            raise UnknownKey(key, f"unknown parameter (line {number})")
        values[key] = parse_value(key, _split_value(raw))
    return replace(base or Parameters(), **values)


def save_parameters(params: Parameters, path) -> Path:
    path = Path(path)
    path.write_text(dumps(params), encoding="utf-8")
    return path


def resolve_parameters_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    for candidate in (PARAMETERS_DIR / p, PARAMETERS_DIR / p.with_suffix(".txt")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"parameters file not found: {path}")


def load_parameters(path, base: Parameters | None = None) -> Parameters:
    return loads(resolve_parameters_path(path).read_text(encoding="utf-8"), base)
