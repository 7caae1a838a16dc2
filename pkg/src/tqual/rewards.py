"""Reward assignment for generated tests and class-balanced resampling.

A reward scheme names one or more quality properties and a strategy.
Positive-polarity properties reward presence, smells reward absence.  A
syntactically incorrect test always scores -1 regardless of strategy; a
correct one scores in [0, k] where k is the number of properties.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence

from .analyzer import QualityReport, analyze
from .corpus import CorpusRecord
from .errors import InsufficientData

__all__ = [
    "POSITIVE_PROPERTIES",
    "NEGATIVE_PROPERTIES",
    "RewardScheme",
    "LabeledRecord",
    "canonical_property",
    "property_score",
    "individual_reward",
    "combined_reward",
    "reward_for",
    "label_dataset",
    "resample_balanced",
]

POSITIVE_PROPERTIES = frozenset(
    {"has_assertion", "invokes_focal", "has_comment", "descriptive_name"}
)
NEGATIVE_PROPERTIES = frozenset({"duplicate_assertion", "conditional_or_exception"})

_ALIASES = {
    "assertion": "has_assertion",
    "assert": "has_assertion",
    "has_assertion": "has_assertion",
    "focal": "invokes_focal",
    "invokes_focal": "invokes_focal",
    "comment": "has_comment",
    "has_comment": "has_comment",
    "descriptive": "descriptive_name",
    "descriptive_name": "descriptive_name",
    "dup": "duplicate_assertion",
    "duplicate": "duplicate_assertion",
    "duplicate_assertion": "duplicate_assertion",
    "cond": "conditional_or_exception",
    "conditional": "conditional_or_exception",
    "conditional_or_exception": "conditional_or_exception",
}


def canonical_property(name: str) -> str:
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown quality property: {name!r}")
    return _ALIASES[key]


@dataclass(frozen=True)
class RewardScheme:
    properties: tuple[str, ...]
    strategy: str  # "individual" | "combined"

    def __post_init__(self):
        if not self.properties:
            raise ValueError("a reward scheme needs at least one property")
        canonical = tuple(canonical_property(p) for p in self.properties)
        object.__setattr__(self, "properties", canonical)
        if len(set(canonical)) != len(canonical):
            raise ValueError("duplicate properties in reward scheme")
        if self.strategy not in ("individual", "combined"):
            raise ValueError(f"unknown strategy: {self.strategy!r}")
        if self.strategy == "individual" and len(canonical) != 1:
            raise ValueError("individual strategy takes exactly one property")

    @classmethod
    def individual(cls, prop: str) -> "RewardScheme":
        return cls((prop,), "individual")

    @classmethod
    def combined(cls, props: Sequence[str]) -> "RewardScheme":
        return cls(tuple(props), "combined")

    @property
    def k(self) -> int:
        return len(self.properties)

    @staticmethod
    def polarity(prop: str) -> str:
        return "positive" if canonical_property(prop) in POSITIVE_PROPERTIES else "negative"


def property_score(report: QualityReport, prop: str) -> int:
    """1 when the property is in its desirable state, else 0."""
    prop = canonical_property(prop)
    value = getattr(report, prop)
    return int(value) if prop in POSITIVE_PROPERTIES else int(not value)


def individual_reward(report: QualityReport, scheme: RewardScheme) -> int:
    if not report.correct_syntax:
        return -1
    return property_score(report, scheme.properties[0])


def combined_reward(report: QualityReport, scheme: RewardScheme) -> int:
    if not report.correct_syntax:
        return -1
    return sum(property_score(report, p) for p in scheme.properties)


def reward_for(report: QualityReport, scheme: RewardScheme) -> int:
    if scheme.strategy == "individual":
        return individual_reward(report, scheme)
    return combined_reward(report, scheme)


@dataclass(frozen=True)
class LabeledRecord:
    record: CorpusRecord
    report: QualityReport
    reward: int

    def to_dict(self) -> dict:
        return {
            "schema": "labeled.v1",
            "record": self.record.to_dict(),
            "report": self.report.to_dict(),
            "reward": self.reward,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LabeledRecord":
        return cls(
            record=CorpusRecord.from_dict(data["record"]),
            report=QualityReport.from_dict(data["report"]),
            reward=int(data["reward"]),
        )


def label_dataset(
    records: Sequence[CorpusRecord],
    scheme: RewardScheme,
    analyze_fn: Callable[[str, str], QualityReport] = analyze,
) -> list[LabeledRecord]:
    out = []
    for record in records:
        report = analyze_fn(record.test, record.focal_method)
        out.append(LabeledRecord(record, report, reward_for(report, scheme)))
    return out


def resample_balanced(labeled: Sequence[LabeledRecord], seed: int) -> list[LabeledRecord]:
    """Balance reward classes for reward-model training.

    With d = min(|low|, |high|) over the non-negative reward classes, the
    output holds d samples of each plus min(2d, all of them) of the -1
    class.  Sampling is uniform without replacement and fully determined
    by the seed.  For a single-property scheme low/high are exactly the
    0 and 1 classes; for combined rewards they generalize to below-median
    and at-or-above-median.
    """
    negative = [l for l in labeled if l.reward < 0]
    nonneg = [l for l in labeled if l.reward >= 0]
    if not nonneg:
        raise InsufficientData("no records with non-negative reward")
    rewards = [l.reward for l in nonneg]
    if max(rewards) <= 1:
        low = [l for l in nonneg if l.reward == 0]
        high = [l for l in nonneg if l.reward == 1]
    else:
        median = statistics.median(rewards)
        low = [l for l in nonneg if l.reward < median]
        high = [l for l in nonneg if l.reward >= median]
    if not low or not high:
        raise InsufficientData(
            "balancing needs both a low and a high reward class"
        )
    d = min(len(low), len(high))
    rng = random.Random(seed)
    result = rng.sample(low, d) + rng.sample(high, d)
    result += rng.sample(negative, min(2 * d, len(negative)))
    return result
