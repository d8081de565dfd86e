"""Experiment configuration read from an INI-style key-value file.

Keys may appear at top level (no section header) or under ``[experiment]``.
Lists are comma separated.  Unknown keys are errors.  Every key, its type
and its default are listed in :data:`FIELDS`.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from ..errors import ValidationError

EXPERIMENTS = ("figure1", "eigen", "degrees", "sbm", "tails", "prune")


def _floats(s):
    return [float(x) for x in str(s).split(",") if x.strip()]


def _ints(s):
    return [int(float(x)) for x in str(s).split(",") if x.strip()]


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_int(s):
    v = str(s).strip().lower()
    return None if v in ("", "none", "0") else int(v)


@dataclass
class ExperimentConfig:
    experiment: str = "eigen"
    n: int = 50000
    d: float = 1.0
    d_list: list = field(default_factory=lambda: [0.5, 1.5, 2.5])   # figure1
    n_list: list = field(default_factory=lambda: [1000, 10000, 100000])   # tails
    seed: int = 0
    replicas: int = 1
    threads: int = 1
    k_list: list = field(default_factory=lambda: [1, 10, 100])
    t_list: list = field(default_factory=list)      # degrees: empty means 0..max degree + 2
    x_list: list = field(default_factory=lambda: [0.5, 0.7])
    epsilon: float = 0.3
    out: str = "out"
    # eigensolver
    eig_tol: float = 1e-10
    figure_tol: float = 1e-4
    max_iter: int | None = None
    batch_size: int = 200
    # figure1
    operator: str = "adjacency"
    edge_exponent: float = 0.7
    bins: int = 60
    # pass thresholds for soft checks
    median_tol: float = 0.15
    exponent_tol: float = 0.15
    frequency: float = 0.9
    ratio_low: float = 0.5
    ratio_high: float = 2.0
    variance_factor: float = 1.5
    # pruning
    delta: float = 0.25
    # sbm
    sbm_blocks: int = 2
    sbm_ratio: float = 0.25         # between / within probability
    sbm_d_small: float = 0.5
    sbm_d_large: float = 8.0
    sbm_band_large: list = field(default_factory=lambda: [0.7, 1.3])
    sbm_band_small: list = field(default_factory=lambda: [0.7, 1.4])
    sbm_agreement: float = 0.8
    outlier_factor: float = 2.0
    sbm_n_trend: int = 10000
    # tails
    tail_d_list: list = field(default_factory=lambda: [2.0, 4.0])
    tail_heterogeneity: float = 0.5
    tail_k_cap: int = 30
    random_instances: int = 500
    random_n_max: int = 300
    constant_spread: float = 3.0

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def echo(self):
        """``key=value`` pairs in field order, as written into output headers."""
        def show(v):
            if isinstance(v, list):
                return ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            return repr(v) if isinstance(v, float) else str(v)
        return [f"{k}={show(v)}" for k, v in self.items() if k not in ("out", "threads")]


_PARSERS = {
    int: lambda s: int(float(s)), float: float, str: str,
}
_LIST_PARSERS = {"d_list": _floats, "n_list": _ints, "k_list": _ints, "t_list": _ints,
                 "x_list": _floats, "tail_d_list": _floats, "sbm_band_large": _floats, "sbm_band_small": _floats}


def _parse(name, raw):
    if name in _LIST_PARSERS:
        return _LIST_PARSERS[name](raw)
    if name == "max_iter":
        return _opt_int(raw)
    default = getattr(ExperimentConfig(), name)
    if isinstance(default, bool):
        return _bool(raw)
    return _PARSERS[type(default)](raw)


FIELDS = [(f.name, getattr(ExperimentConfig(), f.name)) for f in fields(ExperimentConfig)]


def validate(cfg: ExperimentConfig):
    if cfg.experiment not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {cfg.experiment!r}; expected {EXPERIMENTS}")
    if cfg.n < 2 or cfg.replicas < 1 or cfg.threads < 1 or cfg.bins < 1 or cfg.batch_size < 1:
        raise ValidationError("n >= 2, replicas >= 1, threads >= 1, bins >= 1, batch_size >= 1")
    if cfg.d <= 0 or any(d <= 0 for d in cfg.d_list):
        raise ValidationError("mean degrees must be positive")
    if cfg.operator not in ("adjacency", "centered"):
        raise ValidationError("operator must be adjacency or centered")
    if not 0 < cfg.edge_exponent <= 1:
        raise ValidationError("edge_exponent must be in (0, 1]")
    if not 0 < cfg.epsilon < 1 or not 0 < cfg.delta < 1:
        raise ValidationError("epsilon and delta must be in (0, 1)")
    if cfg.eig_tol <= 0 or cfg.figure_tol <= 0:
        raise ValidationError("tolerances must be positive")
    if any(k < 1 for k in cfg.k_list) or any(t < 0 for t in cfg.t_list):
        raise ValidationError("k must be >= 1 and t >= 0")
    return cfg


def load_config(path=None, overrides=None) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (a dict)."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not text.lstrip().startswith("["):
            text = "[experiment]\n" + text
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"malformed config: {exc}") from exc
        for section in parser.sections():
            values.update(parser[section])
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig()
    for key, raw in values.items():
        if key not in known:
            raise ValidationError(f"unknown config key {key!r}")
        try:
            value = raw if not isinstance(raw, str) else _parse(key, raw)
        except ValueError as exc:
            raise ValidationError(f"bad value for {key}: {raw!r}") from exc
        setattr(cfg, key, value)
    return validate(cfg)
