"""Flat ``key = value`` pipeline configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import get_type_hints

from sspmi.errors import DomainError


@dataclass
class PipelineConfig:
    corpus_path: str = ""
    output_dir: str = "out"
    min_count: int = 5
    window: int = 2
    dynamic_window: bool = False
    shift_k: float = 5.0
    kind: str = "sigma-spmi"
    cds_alpha: float | None = None
    dimension: int = 300
    oversample: int = 10
    power_iters: int = 4
    svd_seed: int = 0
    similarity: str = ""  # comma-separated benchmark files
    analogy: str = ""
    use_w_plus_c: bool = False
    negatives: int = 5
    epochs: int = 5
    learning_rate: float | None = None
    lr_schedule: bool = True
    subsample_t: float | None = None
    unigram_power: float = 0.75
    clamp_eps: float = 1e-7
    train_seed: int = 1
    workers: int = 1
    runs: int = 10
    seed: int = 0
    spectrum_cap: int = 15_000
    c: float = 1.0
    quadrature_nodes: int = 400
    grid_points: int = 1000
    bins: int = 200

    def validate(self) -> "PipelineConfig":
        if self.min_count < 1 or self.window < 1 or self.dimension < 1 or self.runs < 1:
            raise DomainError("min_count, window, dimension and runs must be >= 1")
        if not self.shift_k > 0 or not self.c > 0:
            raise DomainError("shift_k and c must be positive")
        return self

    def paths(self, key: str) -> list[str]:
        return [p.strip() for p in getattr(self, key).split(",") if p.strip()]


def _hints() -> dict[str, str]:
    return {k: str(v) for k, v in get_type_hints(PipelineConfig).items()}


def parse_value(key: str, text: str):
    hint = _hints()[key]
    text = text.strip()
    if "None" in hint and text in ("", "none", "None"):
        return None
    try:
        if hint.startswith("<class 'bool'>") or hint == "bool":
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if "int" in hint:
            return int(text)
        if "float" in hint:
            return float(text)
    except ValueError:
        raise DomainError(f"bad value {text!r} for config key {key!r}") from None
    return text


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def loads(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = dataclasses.replace(base) if base is not None else PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        setattr(cfg, key, parse_value(key, value))
    return cfg


def dumps(cfg: PipelineConfig) -> str:
    return "".join(f"{f.name} = {format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def load(path: str | Path) -> PipelineConfig:
    return loads(Path(path).read_text(encoding="utf-8"))
