"""Trainer tests: config, reward plumbing, and the episodic PPO loop."""

from __future__ import annotations

import numpy as np
import pytest

from toy_setup import (
    SEED_CORPUS_ASSERT,
    TOY_FOCAL,
    VOCAB_ASSERT,
    assert_seeded_policy,
    toy_config,
)
from tqual.analyzer import PROPERTY_FIELDS
from tqual.errors import DomainError
from tqual.rewards import RewardScheme
from tqual.rlcore.policy import PolicyTable
from tqual.rlcore.reward_model import LinearRewardModel
from tqual.rlcore.trainer import (
    DEFAULT_VOCAB,
    MetricsEntry,
    TrainConfig,
    bigram_policy_from_corpus,
    generate_completions,
    make_analyzer_reward,
    make_model_reward,
    render_toy_test,
    train_toy_policy,
)


# ── configuration ────────────────────────────────────────────────────


def test_default_config_values():
    cfg = TrainConfig()
    assert cfg.max_tokens == 512
    assert cfg.temperature == 0.7
    assert cfg.top_p == 1.0
    assert cfg.frequency_penalty == 0.5
    assert cfg.epsilon == 0.2
    assert cfg.seed == 0


def test_config_validation():
    with pytest.raises(DomainError):
        TrainConfig(beta=-0.1)
    with pytest.raises(DomainError):
        TrainConfig(epsilon=1.0)
    with pytest.raises(DomainError):
        TrainConfig(temperature=0.0)
    with pytest.raises(DomainError):
        TrainConfig(top_p=0.0)
    with pytest.raises(DomainError):
        TrainConfig(top_p=1.5)
    with pytest.raises(DomainError):
        TrainConfig(episodes=0)
    with pytest.raises(DomainError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(DomainError):
        TrainConfig(baseline_decay=1.0)


def test_config_to_dict_round_trips_through_constructor():
    cfg = toy_config()
    assert TrainConfig(**cfg.to_dict()) == cfg


def test_default_vocab_is_valid_and_small():
    policy = PolicyTable.uniform(DEFAULT_VOCAB)
    assert policy.size <= 200
    assert policy.stop_token in DEFAULT_VOCAB


# ── reward plumbing ──────────────────────────────────────────────────


def test_render_toy_test_shape():
    text = render_toy_test(["Assert", "(", ")", ";"], "Stop")
    assert text == "[TestMethod]\npublic void TestStop()\n{\nAssert ( ) ;\n}"


def test_analyzer_reward_values():
    reward_fn, report_fn = make_analyzer_reward(
        RewardScheme.individual("has_assertion"), TOY_FOCAL
    )
    assert reward_fn(["Assert", "(", ")", ";"]) == 1
    assert reward_fn([]) == 0  # valid empty test, no assertion
    assert reward_fn(["("]) == -1  # unbalanced body breaks the method
    assert report_fn(["Assert", "(", ")", ";"]).has_assertion


def test_model_reward_uses_prediction():
    model = LinearRewardModel(
        feature_tokens=("Assert",), weights=np.array([2.0]), bias=0.5
    )
    reward_fn = make_model_reward(model, TOY_FOCAL)
    assert reward_fn(["Assert", "(", ")", ";"]) == pytest.approx(2.5)
    assert reward_fn(["x", ";"]) == pytest.approx(0.5)


# ── bigram seeding ───────────────────────────────────────────────────


def test_bigram_counts_shape_the_logits():
    policy = bigram_policy_from_corpus([["x", ";"]], ("</s>", "x", ";"), smoothing=0.5)
    stop, x, semi = 0, 1, 2
    assert policy.logits[stop, x] == pytest.approx(np.log(1.5))
    assert policy.logits[x, semi] == pytest.approx(np.log(1.5))
    assert policy.logits[semi, stop] == pytest.approx(np.log(1.5))
    # Unseen transitions keep the smoothing mass.
    assert policy.logits[x, x] == pytest.approx(np.log(0.5))
    assert np.array_equal(policy.logits, policy.ref_logits)


def test_bigram_rejects_bad_inputs():
    with pytest.raises(DomainError):
        bigram_policy_from_corpus([["x"]], ("</s>", "x"), smoothing=0.0)
    with pytest.raises(DomainError):
        bigram_policy_from_corpus([["unknown"]], ("</s>", "x"))


def test_seeded_policy_emits_corpus_shaped_text():
    policy = assert_seeded_policy()
    cfg = toy_config()
    completions = generate_completions(policy, cfg, seed=3, count=50)
    texts = {c.text for c in completions}
    assert any("Assert" in t for t in texts)
    assert any(TOY_FOCAL in t for t in texts)


def test_generate_completions_deterministic():
    policy = assert_seeded_policy()
    cfg = toy_config()
    a = generate_completions(policy, cfg, seed=9, count=5)
    b = generate_completions(policy, cfg, seed=9, count=5)
    assert [c.tokens for c in a] == [c.tokens for c in b]
    assert len(a) == 5


# ── training loop ────────────────────────────────────────────────────


def test_zero_reward_leaves_logits_unchanged():
    """With no signal the surrogate gradient cancels exactly."""
    init = assert_seeded_policy()
    before = init.logits.copy()
    cfg = toy_config(episodes=100, eval_interval=50, eval_samples=10)
    trained, _ = train_toy_policy(init, lambda tokens: 0.0, cfg)
    assert float(np.max(np.abs(trained.logits - before))) == 0.0


def test_short_run_improves_mean_reward():
    init = assert_seeded_policy()
    cfg = toy_config(episodes=400, eval_interval=200)
    reward_fn, report_fn = make_analyzer_reward(
        RewardScheme.individual("has_assertion"), TOY_FOCAL
    )
    _, metrics = train_toy_policy(init, reward_fn, cfg, report_fn)
    assert metrics[-1].mean_reward > metrics[0].mean_reward


def test_metrics_schedule_and_schema():
    init = assert_seeded_policy()
    cfg = toy_config(episodes=500, eval_interval=200, eval_samples=20)
    reward_fn, report_fn = make_analyzer_reward(
        RewardScheme.individual("has_assertion"), TOY_FOCAL
    )
    _, metrics = train_toy_policy(init, reward_fn, cfg, report_fn)
    episodes = [m.episode for m in metrics]
    assert episodes == [0, 200, 400, 500]
    assert [m.epoch for m in metrics] == [0, 1, 2, 3]
    for entry in metrics:
        assert set(entry.frequencies) == set(PROPERTY_FIELDS)
        assert entry.quality_score is not None
        data = entry.to_dict()
        assert data["schema"] == "metrics.v1"
        assert data["mean_kl"] >= 0


def test_metrics_without_report_fn_lack_quality():
    init = assert_seeded_policy()
    cfg = toy_config(episodes=50, eval_interval=50, eval_samples=10)
    _, metrics = train_toy_policy(init, lambda tokens: 1.0, cfg)
    assert all(m.quality_score is None for m in metrics)
    assert all(m.frequencies == {} for m in metrics)


def test_incoming_weights_become_the_kl_reference():
    init = assert_seeded_policy()
    # Give the incoming policy a stale reference; the trainer must anchor
    # on the weights it receives, making initial KL zero.
    init.ref_logits = init.ref_logits + 3.0
    cfg = toy_config(episodes=25, eval_interval=25, eval_samples=10)
    _, metrics = train_toy_policy(init, lambda tokens: 0.0, cfg)
    assert metrics[0].mean_kl == pytest.approx(0.0)


def test_high_beta_keeps_policy_closer_than_zero_beta():
    init = assert_seeded_policy()
    reward_fn, _ = make_analyzer_reward(
        RewardScheme.individual("has_assertion"), TOY_FOCAL
    )
    free_cfg = toy_config(episodes=1000, beta=0.0)
    tied_cfg = toy_config(episodes=1000, beta=100.0)
    _, free_metrics = train_toy_policy(init, reward_fn, free_cfg)
    _, tied_metrics = train_toy_policy(init, reward_fn, tied_cfg)
    assert tied_metrics[-1].mean_kl < free_metrics[-1].mean_kl


def test_training_does_not_mutate_the_input_policy():
    init = assert_seeded_policy()
    before = init.logits.copy()
    cfg = toy_config(episodes=50, eval_interval=50, eval_samples=10)
    reward_fn, _ = make_analyzer_reward(
        RewardScheme.individual("has_assertion"), TOY_FOCAL
    )
    train_toy_policy(init, reward_fn, cfg)
    assert np.array_equal(init.logits, before)


def test_metrics_entry_serialization():
    entry = MetricsEntry(
        epoch=1, episode=200, mean_reward=0.5, mean_kl=0.01,
        quality_score=0.4, frequencies={"has_assertion": 0.5},
    )
    data = entry.to_dict()
    assert data == {
        "schema": "metrics.v1",
        "epoch": 1,
        "episode": 200,
        "mean_reward": 0.5,
        "mean_kl": 0.01,
        "quality_score": 0.4,
        "frequencies": {"has_assertion": 0.5},
    }
