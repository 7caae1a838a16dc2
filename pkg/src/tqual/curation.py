"""Dataset curation: golden filtering, dedup, and repository-level splits.

The golden filter keeps only tests that demonstrate every practice the
pipeline can verify statically: correct syntax, an assertion, a focal
call, no duplicated assertion, and no conditional or exception-handling
logic.  Splits are made at whole-repository granularity so near-identical
tests from one project can never land on both sides of a train/test
boundary.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .analyzer import QualityReport, analyze
from .corpus import CorpusRecord
from .errors import TooFewRepos

__all__ = [
    "SplitSpec",
    "filter_golden",
    "is_golden",
    "dedupe",
    "split_by_repository",
    "split_manifest",
    "subsample",
]

RL_STAGES = ("sft", "rm", "pm")


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.05
    val_fraction: float = 0.10
    rl_three_way: bool = False
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.test_fraction < 1) or not (0 < self.val_fraction < 1):
            raise ValueError("split fractions must lie in (0, 1)")
        if self.test_fraction + self.val_fraction >= 1:
            raise ValueError("test and validation fractions leave no training data")


def is_golden(report: QualityReport) -> bool:
    return (
        report.correct_syntax
        and report.has_assertion
        and report.invokes_focal
        and not report.duplicate_assertion
        and not report.conditional_or_exception
    )


def filter_golden(
    records: Sequence[CorpusRecord],
    analyze_fn: Callable[[str, str], QualityReport] = analyze,
) -> list[CorpusRecord]:
    """Keep records whose tests pass all five golden conditions."""
    return [r for r in records if is_golden(analyze_fn(r.test, r.focal_method))]


def dedupe(records: Sequence[CorpusRecord]) -> list[CorpusRecord]:
    """Drop exact (prompt, test) duplicates, keeping the first occurrence."""
    seen: set[tuple[str, str]] = set()
    out: list[CorpusRecord] = []
    for record in records:
        key = (record.prompt, record.test)
        if key in seen:
            continue
        seen.add(key)
        out.append(record)
    return out


def _greedy_assign(
    repo_sizes: list[tuple[str, int]],
    targets: dict[str, float],
    order: list[str],
) -> dict[str, str]:
    """Largest repo first, into the split with the biggest relative deficit.

    Ties go to the split with the larger target, then by the fixed
    ``order``.  Afterwards, any split left empty steals the smallest repo
    from the most overfull donor so every split is populated."""
    assigned: dict[str, str] = {}
    mass = {name: 0 for name in targets}
    for repo, size in repo_sizes:
        best = max(
            targets,
            key=lambda name: (
                (targets[name] - mass[name]) / targets[name],
                targets[name],
                -order.index(name),
            ),
        )
        assigned[repo] = best
        mass[best] += size

    for name in order:
        if any(s == name for s in assigned.values()):
            continue
        donors = [n for n in targets if n != name
                  and sum(1 for s in assigned.values() if s == n) > 1]
        if not donors:
            donors = [n for n in targets if n != name
                      and any(s == n for s in assigned.values())]
        donor = max(donors, key=lambda n: mass[n] - targets[n])
        repo = min((r for r, s in assigned.items() if s == donor),
                   key=lambda r: dict(repo_sizes)[r])
        assigned[repo] = name
        mass[donor] -= dict(repo_sizes)[repo]
        mass[name] += dict(repo_sizes)[repo]
    return assigned


def split_by_repository(
    records: Sequence[CorpusRecord], spec: SplitSpec | None = None
) -> dict[str, list[CorpusRecord]]:
    """Partition records into train/val/test (plus sft/rm/pm instead of
    train when ``rl_three_way``) with every repository wholly on one side."""
    spec = spec or SplitSpec()
    counts = Counter(r.repo for r in records)
    if "" in counts:
        raise ValueError("every record needs a non-empty repo for splitting")
    required = 5 if spec.rl_three_way else 3
    if len(counts) < required:
        raise TooFewRepos(
            f"need at least {required} distinct repositories, got {len(counts)}"
        )

    rng = random.Random(spec.seed)
    names = sorted(counts)
    rng.shuffle(names)
    shuffle_rank = {name: i for i, name in enumerate(names)}
    repo_sizes = sorted(
        counts.items(), key=lambda kv: (-kv[1], shuffle_rank[kv[0]])
    )

    total = sum(counts.values())
    train_fraction = 1.0 - spec.test_fraction - spec.val_fraction
    targets = {
        "train": train_fraction * total,
        "val": spec.val_fraction * total,
        "test": spec.test_fraction * total,
    }
    assigned = _greedy_assign(repo_sizes, targets, ["train", "val", "test"])

    if spec.rl_three_way:
        train_repos = sorted(
            ((r, counts[r]) for r, s in assigned.items() if s == "train"),
            key=lambda kv: (-kv[1], shuffle_rank[kv[0]]),
        )
        if len(train_repos) < 3:
            raise TooFewRepos(
                "three-way RL split needs at least 3 training repositories"
            )
        third = sum(size for _, size in train_repos) / 3.0
        stage_targets = {stage: third for stage in RL_STAGES}
        stage_assignment = _greedy_assign(train_repos, stage_targets, list(RL_STAGES))
        for repo, stage in stage_assignment.items():
            assigned[repo] = stage

    split_names = (list(RL_STAGES) if spec.rl_three_way else ["train"]) + ["val", "test"]
    splits: dict[str, list[CorpusRecord]] = {name: [] for name in split_names}
    for record in records:
        splits[assigned[record.repo]].append(record)
    return splits


def split_manifest(splits: dict[str, list[CorpusRecord]]) -> dict[str, str]:
    """repo -> split name, for audit and reproducibility."""
    manifest: dict[str, str] = {}
    for name, records in splits.items():
        for record in records:
            manifest[record.repo] = name
    return dict(sorted(manifest.items()))


def subsample(records: Sequence[CorpusRecord], n: int, seed: int) -> list[CorpusRecord]:
    """Uniform sample of min(n, len) records without replacement."""
    if n < 0:
        raise ValueError("sample size must be non-negative")
    if n >= len(records):
        return list(records)
    return random.Random(seed).sample(list(records), n)
