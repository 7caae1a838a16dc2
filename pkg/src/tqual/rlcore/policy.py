"""Tabular bigram policy over a small token vocabulary.

A policy is a logits matrix: row i is the unnormalised next-token
distribution after token i.  Completions start from the stop-token row and
end when the stop token is drawn again.  A frozen copy of the logits serves
as the pre-training reference for the KL penalty.

Sampling applies the decoding pipeline in a fixed order: temperature
scaling, then a per-completion frequency penalty, then nucleus truncation.
The log-probabilities used for policy-gradient ratios come from the plain
softmax of the logits; the decoding knobs shape exploration only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DomainError

__all__ = ["PolicyTable", "SampledCompletion", "sample_completion"]

# Below this temperature the softmax is numerically a point mass; decode
# greedily instead of dividing by ~0.
_GREEDY_TEMPERATURE = 1e-8


@dataclass
class PolicyTable:
    vocabulary: tuple[str, ...]
    logits: np.ndarray
    ref_logits: np.ndarray
    stop_token: str = "</s>"
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.vocabulary = tuple(self.vocabulary)
        self.logits = np.asarray(self.logits, dtype=float)
        self.ref_logits = np.asarray(self.ref_logits, dtype=float)
        self._index = {tok: i for i, tok in enumerate(self.vocabulary)}
        self.validate()

    def validate(self) -> None:
        size = len(self.vocabulary)
        if size == 0:
            raise DomainError("vocabulary is empty")
        if len(self._index) != size:
            raise DomainError("vocabulary contains duplicate tokens")
        if self.stop_token not in self._index:
            raise DomainError(f"stop token {self.stop_token!r} not in vocabulary")
        for name, table in (("logits", self.logits), ("ref_logits", self.ref_logits)):
            if table.shape != (size, size):
                raise DomainError(
                    f"{name} shape {table.shape} does not match vocabulary size {size}"
                )
            if not np.all(np.isfinite(table)):
                raise DomainError(f"{name} contains non-finite values")

    # ── construction ────────────────────────────────────────────────

    @classmethod
    def uniform(cls, vocabulary: tuple[str, ...] | list[str], stop_token: str = "</s>") -> "PolicyTable":
        """All-zero logits: every row is the uniform distribution."""
        size = len(vocabulary)
        return cls(
            vocabulary=tuple(vocabulary),
            logits=np.zeros((size, size)),
            ref_logits=np.zeros((size, size)),
            stop_token=stop_token,
        )

    def copy(self) -> "PolicyTable":
        return PolicyTable(
            vocabulary=self.vocabulary,
            logits=self.logits.copy(),
            ref_logits=self.ref_logits.copy(),
            stop_token=self.stop_token,
        )

    # ── lookups ─────────────────────────────────────────────────────

    @property
    def size(self) -> int:
        return len(self.vocabulary)

    @property
    def stop_index(self) -> int:
        return self._index[self.stop_token]

    def token_index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise DomainError(f"token {token!r} not in vocabulary") from None

    # ── distributions ───────────────────────────────────────────────

    def probs(self, state: int) -> np.ndarray:
        return _softmax(self.logits[state])

    def log_probs(self, state: int) -> np.ndarray:
        return _log_softmax(self.logits[state])

    def ref_probs(self, state: int) -> np.ndarray:
        return _softmax(self.ref_logits[state])

    def kl_from_reference(self, state: int) -> float:
        """KL(reference row || current row).  Softmax rows are strictly
        positive, so no zero-mass handling is needed."""
        p = _softmax(self.ref_logits[state])
        log_p = _log_softmax(self.ref_logits[state])
        log_q = _log_softmax(self.logits[state])
        return float(np.sum(p * (log_p - log_q)))

    def refreeze_reference(self) -> None:
        """Make the current weights the new KL anchor."""
        self.ref_logits = self.logits.copy()

    # ── serialization ───────────────────────────────────────────────

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "policy.v1",
            "vocabulary": list(self.vocabulary),
            "stop_token": self.stop_token,
            "logits": self.logits.tolist(),
            "ref_logits": self.ref_logits.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PolicyTable":
        if payload.get("schema") != "policy.v1":
            raise DomainError(f"unsupported policy schema: {payload.get('schema')!r}")
        return cls(
            vocabulary=tuple(payload["vocabulary"]),
            logits=np.asarray(payload["logits"], dtype=float),
            ref_logits=np.asarray(payload["ref_logits"], dtype=float),
            stop_token=payload["stop_token"],
        )


def _softmax(row: np.ndarray) -> np.ndarray:
    shifted = row - np.max(row)
    exp = np.exp(shifted)
    return exp / exp.sum()

def _log_softmax(row: np.ndarray) -> np.ndarray:
    shifted = row - np.max(row)
    return shifted - np.log(np.exp(shifted).sum())


@dataclass(frozen=True)
class SampledCompletion:
    """One decoded completion with its state/action trace.

    ``tokens`` excludes the terminating stop token; the trace includes the
    stop decision so the trainer can credit it.
    """

    tokens: tuple[str, ...]
    states: tuple[int, ...]
    actions: tuple[int, ...]
    stopped: bool

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def sample_completion(
    policy: PolicyTable,
    rng: np.random.Generator,
    *,
    max_tokens: int,
    temperature: float,
    top_p: float,
    frequency_penalty: float,
) -> SampledCompletion:
    if max_tokens < 1:
        raise DomainError(f"max_tokens must be positive, got {max_tokens}")
    if temperature < 0:
        raise DomainError(f"temperature cannot be negative, got {temperature}")
    if not (0 < top_p <= 1):
        raise DomainError(f"top_p must lie in (0, 1], got {top_p}")
    if frequency_penalty < 0:
        raise DomainError(f"frequency_penalty cannot be negative, got {frequency_penalty}")

    counts = np.zeros(policy.size)
    state = policy.stop_index
    tokens: list[str] = []
    states: list[int] = []
    actions: list[int] = []
    stopped = False

    for _ in range(max_tokens):
        row = policy.logits[state]
        if temperature <= _GREEDY_TEMPERATURE:
            adjusted = row - frequency_penalty * counts
            action = int(np.argmax(adjusted))
        else:
            adjusted = row / temperature - frequency_penalty * counts
            action = _nucleus_draw(_softmax(adjusted), top_p, rng)

        states.append(state)
        actions.append(action)
        if action == policy.stop_index:
            stopped = True
            break
        tokens.append(policy.vocabulary[action])
        counts[action] += 1.0
        state = action

    return SampledCompletion(
        tokens=tuple(tokens),
        states=tuple(states),
        actions=tuple(actions),
        stopped=stopped,
    )


def _nucleus_draw(probs: np.ndarray, top_p: float, rng: np.random.Generator) -> int:
    """Sample from the smallest probability-sorted prefix with mass >= top_p."""
    order = np.argsort(-probs, kind="stable")
    cumulative = np.cumsum(probs[order])
    cut = int(np.searchsorted(cumulative, top_p, side="left")) + 1
    keep = order[: min(cut, len(order))]
    kept = probs[keep]
    kept = kept / kept.sum()
    return int(keep[rng.choice(len(keep), p=kept)])
