"""Linear reward model over token-count features.

The model scores a test body as ``weights . counts + bias`` where counts
are occurrences of a fixed set of feature tokens.  Features are the most
frequent significant lexer tokens of the training texts, so the model and
the analyzer read code through the same tokenizer.

Training is full-batch gradient descent on mean squared error against the
assigned rewards, with a held-out slice for early stopping.  Descent runs
in standardized feature space for conditioning; the learned weights are
folded back to raw counts, so prediction stays a plain dot product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..errors import DomainError, InsufficientData
from ..lexer import tokenize
from .math import mse_grad, mse_loss

__all__ = ["LinearRewardModel", "train_reward_model"]

DEFAULT_MAX_FEATURES = 512


@dataclass
class LinearRewardModel:
    feature_tokens: tuple[str, ...]
    weights: np.ndarray
    bias: float

    def __post_init__(self) -> None:
        self.feature_tokens = tuple(self.feature_tokens)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.feature_tokens),):
            raise DomainError(
                f"weight shape {self.weights.shape} does not match "
                f"{len(self.feature_tokens)} features"
            )

    @classmethod
    def zeros(cls, feature_tokens: Sequence[str]) -> "LinearRewardModel":
        return cls(
            feature_tokens=tuple(feature_tokens),
            weights=np.zeros(len(feature_tokens)),
            bias=0.0,
        )

    def featurize(self, text: str) -> np.ndarray:
        counts = dict.fromkeys(self.feature_tokens, 0)
        for token in tokenize(text):
            if not token.is_trivia and token.text in counts:
                counts[token.text] += 1
        return np.array([counts[t] for t in self.feature_tokens], dtype=float)

    def predict(self, text: str) -> float:
        return float(self.featurize(text) @ self.weights + self.bias)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "reward-model.v1",
            "feature_tokens": list(self.feature_tokens),
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "LinearRewardModel":
        if payload.get("schema") != "reward-model.v1":
            raise DomainError(f"unsupported model schema: {payload.get('schema')!r}")
        return cls(
            feature_tokens=tuple(payload["feature_tokens"]),
            weights=np.asarray(payload["weights"], dtype=float),
            bias=float(payload["bias"]),
        )


def _select_features(texts: Sequence[str], max_features: int) -> tuple[str, ...]:
    """Most frequent significant tokens, stored in sorted order."""
    frequency: dict[str, int] = {}
    for text in texts:
        for token in tokenize(text):
            if not token.is_trivia:
                frequency[token.text] = frequency.get(token.text, 0) + 1
    ranked = sorted(frequency, key=lambda t: (-frequency[t], t))
    return tuple(sorted(ranked[:max_features]))


def train_reward_model(
    examples: Sequence[tuple[str, float]],
    *,
    max_features: int = DEFAULT_MAX_FEATURES,
    epochs: int = 500,
    learning_rate: float = 0.1,
    val_fraction: float = 0.1,
    patience: int = 25,
    seed: int = 0,
) -> tuple[LinearRewardModel, list[dict[str, float]]]:
    """Fit a linear model to (test text, reward) pairs.

    Returns the model holding the weights from the best validation epoch
    and a per-epoch history of train and validation MSE.
    """
    if epochs < 0 or max_features < 1 or learning_rate <= 0 or patience < 1:
        raise DomainError("invalid training hyperparameters")
    if not (0 < val_fraction < 1):
        raise DomainError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    if len(examples) < 2:
        raise InsufficientData(f"need at least 2 examples, got {len(examples)}")
    targets_all = [float(r) for _, r in examples]
    if max(targets_all) == min(targets_all):
        raise InsufficientData("rewards are constant; nothing to regress")

    features = _select_features([text for text, _ in examples], max_features)
    model = LinearRewardModel.zeros(features)
    if epochs == 0:
        return model, []

    design = np.stack([model.featurize(text) for text, _ in examples])
    targets = np.array(targets_all)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(examples))
    n_val = max(1, round(val_fraction * len(examples)))
    val_idx, train_idx = order[:n_val], order[n_val:]

    means = design[train_idx].mean(axis=0)
    scales = design[train_idx].std(axis=0)
    scales[scales == 0] = 1.0
    scaled = (design - means) / scales

    x_train, y_train = scaled[train_idx], targets[train_idx]
    x_val, y_val = scaled[val_idx], targets[val_idx]

    weights = np.zeros(len(features))
    bias = 0.0
    best = (np.inf, weights.copy(), bias)
    stale = 0
    history: list[dict[str, float]] = []

    for epoch in range(epochs):
        preds = x_train @ weights + bias
        grad_pred = np.array(mse_grad(preds.tolist(), y_train.tolist()))
        weights -= learning_rate * (x_train.T @ grad_pred)
        bias -= learning_rate * float(grad_pred.sum())

        train_mse = mse_loss((x_train @ weights + bias).tolist(), y_train.tolist())
        val_mse = mse_loss((x_val @ weights + bias).tolist(), y_val.tolist())
        history.append({"epoch": epoch, "train_mse": train_mse, "val_mse": val_mse})

        if val_mse < best[0] - 1e-12:
            best = (val_mse, weights.copy(), bias)
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break

    _, weights, bias = best
    # Fold the standardization into raw-count space.
    model.weights = weights / scales
    model.bias = bias - float((weights * means / scales).sum())
    return model, history
