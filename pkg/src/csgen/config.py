"""Declarative run configuration (YAML) with command-line overrides."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .evaluation import CATEGORICAL, DEFAULT_RATIO_GRID, LOSSES, ORDINAL

PATH_KEYS = ("corpus", "pairs", "trees", "attn_dir", "giza_dir", "giza_model", "lexicon", "gold", "test")
PROVIDER_KEYS = ("translit", "reverse")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # inputs
    corpus: Optional[Path] = None
    pairs: Optional[Path] = None
    trees: Optional[Path] = None
    attn_dir: Optional[Path] = None
    giza_dir: Optional[Path] = None      # precomputed <id>.giza matrices
    giza_model: Optional[Path] = None    # translation table TSV; trained when absent
    lexicon: Optional[Path] = None
    translit: str = "identity"
    reverse: Optional[str] = None
    gold: Optional[Path] = None          # low-resource labeled code-switched corpus
    test: Optional[Path] = None          # held-out test corpus for the eval stage
    out_dir: Path = Path("csgen_out")

    # alignment
    ibm_iterations: int = 10
    giza_epsilon: float = 1e-6
    idf_a: float = 1.0
    idf_b: Optional[float] = None        # default a * median(idf)

    # segment selection
    min_abs_polarity: float = 0.5
    max_opinion_len: int = 6
    max_candidates_per_sentence: Optional[int] = None
    max_target_span: Optional[int] = None   # default max(2|p|, |p|+3)
    normalize_span_scores: bool = False

    # candidate filtering
    similarity_cutoff_percentile: float = 20.0
    dissimilarity_cutoff_percentile: float = 80.0
    bleu_floor: float = 0.35
    bleu_max_n: int = 4

    # sampling and evaluation
    sample_total: Optional[int] = None
    run_eval: bool = False
    ratio_grid: list = field(default_factory=lambda: list(DEFAULT_RATIO_GRID))
    folds: int = 3
    loss: str = CATEGORICAL
    epochs: int = 30
    lr: float = 4.0
    batch_size: int = 16
    seed: int = 0
    workers: int = 1

    def validate(self):
        """Check paths and knob ranges before any work starts."""
        for key in ("corpus", "pairs"):
            if getattr(self, key) is None:
                raise ConfigError(f"{key} is required")
        if self.reverse is None:
            raise ConfigError("reverse (reverse-translation provider) is required")
        if self.reverse == "identity":
            raise ConfigError("reverse cannot be 'identity'; give a lookup file or module:factory")
        if self.attn_dir is None and self.giza_dir is None and self.giza_model is None and self.ibm_iterations < 1:
            raise ConfigError("no alignment signal: give attn_dir, giza_dir/giza_model or ibm_iterations >= 1")
        for key in PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{key}: path {value} does not exist")
        for key in PROVIDER_KEYS:
            value = getattr(self, key)
            if value not in (None, "identity") and ":" not in str(value) and not Path(value).exists():
                raise ConfigError(f"{key}: path {value} does not exist")
        checks = [
            (self.ibm_iterations >= 1, "ibm_iterations must be >= 1"),
            (self.giza_epsilon > 0, "giza_epsilon must be positive"),
            (0 < self.min_abs_polarity <= 1, "min_abs_polarity must be in (0, 1]"),
            (self.max_opinion_len >= 2, "max_opinion_len must be >= 2"),
            (self.max_candidates_per_sentence is None or self.max_candidates_per_sentence >= 1,
             "max_candidates_per_sentence must be >= 1"),
            (self.max_target_span is None or self.max_target_span >= 1, "max_target_span must be >= 1"),
            (0 <= self.similarity_cutoff_percentile <= 100, "similarity_cutoff_percentile must be in [0, 100]"),
            (0 <= self.dissimilarity_cutoff_percentile <= 100, "dissimilarity_cutoff_percentile must be in [0, 100]"),
            (0 <= self.bleu_floor <= 1, "bleu_floor must be in [0, 1]"),
            (self.bleu_max_n >= 1, "bleu_max_n must be >= 1"),
            (self.sample_total is None or self.sample_total >= 1, "sample_total must be >= 1"),
            (self.folds >= 2, "folds must be >= 2"),
            (all(r > 0 for r in self.ratio_grid) and len(self.ratio_grid) > 0, "ratio_grid needs positive ratios"),
            (self.loss in LOSSES, f"loss must be one of {', '.join(LOSSES)}"),
            (self.epochs >= 1 and self.lr > 0 and self.batch_size >= 1, "bad training knobs"),
            (self.workers >= 1, "workers must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        if (self.sample_total is not None or self.run_eval) and self.gold is None:
            raise ConfigError("sampling and evaluation need a gold corpus")
        return self

    def to_json(self):
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = str(value) if isinstance(value, Path) else value
        return out


_LOSS_ALIASES = {"ordinal": ORDINAL, "categorical": CATEGORICAL}


def _coerce(name, value):
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    if name not in fields:
        raise ConfigError(f"unknown config key {name!r}")
    if value is None:
        return None
    if name in PATH_KEYS or name == "out_dir":
        return Path(value)
    if name == "loss":
        return _LOSS_ALIASES.get(value, value)
    default = fields[name].default
    if isinstance(default, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if name == "ratio_grid":
        if isinstance(value, str):
            value = yaml.safe_load(value)
        return [float(v) for v in value]
    try:
        if isinstance(default, int) or name in ("max_candidates_per_sentence", "max_target_span", "sample_total"):
            return int(value)
        if isinstance(default, float) or name == "idf_b":
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r}") from None
    return value


def make_config(values: dict, base_dir=None) -> RunConfig:
    """Build a RunConfig; relative paths resolve against ``base_dir``."""
    kwargs = {k: _coerce(k, v) for k, v in values.items()}
    if base_dir is not None:
        base = Path(base_dir)
        for key in PATH_KEYS + ("out_dir",):
            if isinstance(kwargs.get(key), Path) and not kwargs[key].is_absolute():
                kwargs[key] = base / kwargs[key]
        for key in PROVIDER_KEYS:
            value = kwargs.get(key)
            if value not in (None, "identity") and ":" not in str(value) and not Path(value).is_absolute():
                kwargs[key] = str(base / value)
    return RunConfig(**kwargs)


def load_config(path, overrides=None) -> RunConfig:
    path = Path(path)
    try:
        values = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"config {path} must be a mapping")
    cfg = make_config(values, base_dir=path.parent)
    for key, value in (overrides or {}).items():
        setattr(cfg, key, _coerce(key, value))
    return cfg
