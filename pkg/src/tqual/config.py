"""Flat key/value configuration for the batch pipeline.

The format is one ``section.key = value`` pair per line, with ``#`` comments
and blank lines ignored.  Each section mirrors one of the typed configs:
``budget.*`` for prompt budgets, ``split.*`` for dataset splitting,
``reward.*`` for the reward scheme, ``train.*`` for the RL loop and
``score.*`` for corpus scoring.  Unknown keys are rejected so typos fail
loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .analyzer import ScoreConfig
from .curation import SplitSpec
from .prompting import BudgetConfig
from .rewards import RewardScheme
from .rlcore.trainer import TrainConfig

__all__ = ["PipelineConfig", "parse_config_text", "load_config"]

_SECTIONS = {
    "budget": BudgetConfig,
    "split": SplitSpec,
    "train": TrainConfig,
    "score": ScoreConfig,
    "reward": None,  # handled by hand: properties list + strategy
}
_REWARD_KEYS = {"properties", "strategy"}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a flat string map."""
    values: dict[str, str] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {number}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"config line {number}: empty key")
        _check_key(key, number)
        values[key] = value
    return values


def _check_key(key: str, line_number: int) -> None:
    section, _, name = key.partition(".")
    if section not in _SECTIONS or not name:
        raise ValueError(f"config line {line_number}: unknown key {key!r}")
    if section == "reward":
        if name not in _REWARD_KEYS:
            raise ValueError(f"config line {line_number}: unknown key {key!r}")
        return
    known = {f.name for f in dataclasses.fields(_SECTIONS[section])}
    if name not in known:
        raise ValueError(f"config line {line_number}: unknown key {key!r}")


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def _coerce(raw: str, template: Any) -> Any:
    if isinstance(template, bool):
        lowered = raw.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    if isinstance(template, tuple):
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    return raw


@dataclass(frozen=True)
class PipelineConfig:
    """Typed view over the flat config map; missing keys take defaults."""

    values: dict[str, str]

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls(load_config(path))

    @classmethod
    def empty(cls) -> "PipelineConfig":
        return cls({})

    def _build(self, section: str, factory: type, overrides: dict[str, Any]) -> Any:
        defaults = factory()
        kwargs: dict[str, Any] = {}
        for f in dataclasses.fields(factory):
            key = f"{section}.{f.name}"
            if f.name in overrides and overrides[f.name] is not None:
                kwargs[f.name] = overrides[f.name]
            elif key in self.values:
                kwargs[f.name] = _coerce(self.values[key], getattr(defaults, f.name))
        return factory(**kwargs)

    def budget(self, **overrides: Any) -> BudgetConfig:
        return self._build("budget", BudgetConfig, overrides)

    def split_spec(self, **overrides: Any) -> SplitSpec:
        return self._build("split", SplitSpec, overrides)

    def train_config(self, **overrides: Any) -> TrainConfig:
        return self._build("train", TrainConfig, overrides)

    def score_config(self, **overrides: Any) -> ScoreConfig:
        return self._build("score", ScoreConfig, overrides)

    def reward_scheme(
        self,
        properties: str | None = None,
        strategy: str | None = None,
    ) -> RewardScheme | None:
        """Scheme from overrides or config; None when neither names properties."""
        raw_props = properties if properties is not None else self.values.get("reward.properties")
        if raw_props is None:
            return None
        props = tuple(p.strip() for p in raw_props.split(",") if p.strip())
        chosen = strategy or self.values.get("reward.strategy")
        if chosen is None:
            chosen = "individual" if len(props) == 1 else "combined"
        return RewardScheme(props, chosen)
