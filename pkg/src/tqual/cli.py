"""Command-line pipeline over JSONL files.

Each subcommand wraps one pipeline stage: quality analysis, frequency
reporting, completion truncation, prompt construction, reward labeling,
class-balanced resampling, golden filtering, repository-level splitting,
subsampling, toy policy training and sampling.  Line-oriented stages stream
their input and preserve order; malformed lines become ``error.v1`` records
in the output and flip the exit code to 1.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, TextIO

from . import __version__
from .analyzer import PROPERTY_FIELDS, QualityReport, analyze, score_corpus
from .completion import RawCompletion, prompt_hint_for, truncate_completion
from .config import PipelineConfig
from .corpus import CorpusRecord, dump_line, iter_jsonl
from .curation import dedupe, is_golden, split_by_repository, split_manifest, subsample
from .errors import DomainError, PipelineError
from .parser import parse_focal_file
from .prompting import build_prompt
from .rewards import LabeledRecord, resample_balanced, reward_for
from .rlcore.policy import PolicyTable
from .rlcore.trainer import (
    DEFAULT_VOCAB,
    bigram_policy_from_corpus,
    generate_completions,
    make_analyzer_reward,
    render_toy_test,
    train_toy_policy,
)

__all__ = ["main", "build_parser"]

_PROPERTY_LABELS = {
    "correct_syntax": "Correct Syntax",
    "has_assertion": "Has Assertion",
    "invokes_focal": "Invokes Focal Method",
    "has_comment": "Has Comment",
    "descriptive_name": "Descriptive Name",
    "duplicate_assertion": "Duplicate Assertion",
    "conditional_or_exception": "Conditional Or Exception",
}


@contextmanager
def _out_stream(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        handle = open(path, "w", encoding="utf-8")
        try:
            yield handle
        finally:
            handle.close()


def _emit(out: TextIO, obj: dict) -> None:
    out.write(dump_line(obj) + "\n")


def _error_record(line_no: int, message: str) -> dict:
    return {"schema": "error.v1", "line": line_no, "error": message}


def _require_file(path: str) -> None:
    if not Path(path).is_file():
        raise FileNotFoundError(f"input file not found: {path}")


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "config", None):
        return PipelineConfig.from_file(args.config)
    return PipelineConfig.empty()


# ── line-streaming commands ─────────────────────────────────────────

def cmd_analyze(args: argparse.Namespace) -> int:
    _require_file(args.input)
    had_error = False
    with _out_stream(args.out) as out:
        for line_no, obj, err in iter_jsonl(args.input):
            if err is not None:
                _emit(out, _error_record(line_no, err))
                had_error = True
                continue
            test = obj.get("test")
            focal = obj.get(args.focal_field)
            if not isinstance(test, str) or not isinstance(focal, str) or not focal:
                _emit(out, _error_record(
                    line_no, f"need string 'test' and {args.focal_field!r} fields"))
                had_error = True
                continue
            _emit(out, analyze(test, focal).to_dict())
    return 1 if had_error else 0


def cmd_truncate(args: argparse.Namespace) -> int:
    _require_file(args.input)
    had_error = False
    with _out_stream(args.out) as out:
        for line_no, obj, err in iter_jsonl(args.input):
            if err is not None:
                _emit(out, _error_record(line_no, err))
                had_error = True
                continue
            hint = obj.get("prompt_hint")
            if hint is None and isinstance(obj.get("focal_method"), str):
                hint = prompt_hint_for(obj["focal_method"])
            completion = obj.get("completion")
            if not isinstance(hint, str) or not isinstance(completion, str):
                _emit(out, _error_record(
                    line_no, "need 'prompt_hint' (or 'focal_method') and 'completion'"))
                had_error = True
                continue
            test = truncate_completion(RawCompletion(hint, completion))
            _emit(out, {"schema": "truncated.v1", "prompt_hint": hint, "test": test})
    return 1 if had_error else 0


def cmd_prompt(args: argparse.Namespace) -> int:
    _require_file(args.input)
    cfg = _pipeline_config(args).budget()
    trees: dict[str, Any] = {}
    had_error = False
    with _out_stream(args.out) as out:
        for line_no, obj, err in iter_jsonl(args.input):
            if err is not None:
                _emit(out, _error_record(line_no, err))
                had_error = True
                continue
            path = obj.get("focal_path")
            focal = obj.get("focal_method")
            if not isinstance(path, str) or not isinstance(focal, str) or not focal:
                _emit(out, _error_record(line_no, "need 'focal_path' and 'focal_method'"))
                had_error = True
                continue
            try:
                if path not in trees:
                    trees[path] = parse_focal_file(Path(path).read_text(encoding="utf-8"))
                record = build_prompt(trees[path], focal, path, cfg)
            except (OSError, PipelineError) as exc:
                _emit(out, _error_record(line_no, str(exc)))
                had_error = True
                continue
            _emit(out, record.to_dict())
    return 1 if had_error else 0


def cmd_reward(args: argparse.Namespace) -> int:
    _require_file(args.input)
    scheme = _pipeline_config(args).reward_scheme(args.properties, args.strategy)
    if scheme is None:
        print("reward: no properties given (use --properties or reward.properties)",
              file=sys.stderr)
        return 2
    had_error = False
    with _out_stream(args.out) as out:
        for line_no, obj, err in iter_jsonl(args.input):
            if err is not None:
                _emit(out, _error_record(line_no, err))
                had_error = True
                continue
            record = CorpusRecord.from_dict(obj)
            report = analyze(record.test, record.focal_method)
            labeled = LabeledRecord(record, report, reward_for(report, scheme))
            _emit(out, labeled.to_dict())
    return 1 if had_error else 0


def cmd_golden(args: argparse.Namespace) -> int:
    _require_file(args.input)
    had_error = False
    with _out_stream(args.out) as out:
        for line_no, obj, err in iter_jsonl(args.input):
            if err is not None:
                _emit(out, _error_record(line_no, err))
                had_error = True
                continue
            record = CorpusRecord.from_dict(obj)
            if is_golden(analyze(record.test, record.focal_method)):
                _emit(out, record.to_dict())
    return 1 if had_error else 0


# ── whole-corpus commands ───────────────────────────────────────────

def _read_records(path: str) -> list[CorpusRecord]:
    records = []
    for line_no, obj, err in iter_jsonl(path):
        if err is not None:
            raise DomainError(f"line {line_no}: {err}")
        records.append(CorpusRecord.from_dict(obj))
    return records


def cmd_report(args: argparse.Namespace) -> int:
    _require_file(args.input)
    reports: list[QualityReport] = []
    for line_no, obj, err in iter_jsonl(args.input):
        if err is not None:
            print(f"report: skipping line {line_no}: {err}", file=sys.stderr)
            continue
        reports.append(QualityReport.from_dict(obj))
    stats = score_corpus(reports, _pipeline_config(args).score_config())

    width = max(len(label) for label in _PROPERTY_LABELS.values()) + 2
    print(f"{'Property':<{width}}Frequency")
    for prop in PROPERTY_FIELDS:
        pct = stats.frequencies[prop] * 100
        print(f"{_PROPERTY_LABELS[prop]:<{width}}{pct:5.1f}%")
    print(f"\nTests analyzed: {stats.count}")
    print(f"Quality score: {stats.quality_score:.3f}")

    payload = json.dumps(stats.to_dict(), sort_keys=True, ensure_ascii=False)
    if args.out and args.out != "-":
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return 0


def cmd_resample(args: argparse.Namespace) -> int:
    _require_file(args.input)
    labeled = []
    for line_no, obj, err in iter_jsonl(args.input):
        if err is not None:
            raise DomainError(f"line {line_no}: {err}")
        labeled.append(LabeledRecord.from_dict(obj))
    balanced = resample_balanced(labeled, args.seed)
    with _out_stream(args.out) as out:
        for item in balanced:
            _emit(out, item.to_dict())
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    _require_file(args.input)
    spec = _pipeline_config(args).split_spec(
        seed=args.seed, rl_three_way=True if args.rl else None
    )
    records = _read_records(args.input)
    if args.dedupe:
        records = dedupe(records)
    splits = split_by_repository(records, spec)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = {}
    for name, members in splits.items():
        target = out_dir / f"{name}.jsonl"
        with open(target, "w", encoding="utf-8") as handle:
            for record in members:
                _emit(handle, record.to_dict())
        counts[name] = len(members)
    manifest = {
        "schema": "split-manifest.v1",
        "assignments": split_manifest(splits),
        "counts": counts,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(counts, sort_keys=True))
    return 0


def cmd_subsample(args: argparse.Namespace) -> int:
    _require_file(args.input)
    records = _read_records(args.input)
    chosen = subsample(records, args.n, args.seed)
    with _out_stream(args.out) as out:
        for record in chosen:
            _emit(out, record.to_dict())
    return 0


# ── toy RL commands ─────────────────────────────────────────────────

def _load_vocabulary(path: str | None) -> tuple[str, ...]:
    if path is None:
        return DEFAULT_VOCAB
    tokens = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()]
    vocab = tuple(t for t in tokens if t)
    if "</s>" not in vocab:
        raise DomainError("vocabulary file must include the stop token </s>")
    return vocab


def cmd_train_toy(args: argparse.Namespace) -> int:
    pipeline = _pipeline_config(args)
    cfg = pipeline.train_config(
        beta=args.beta,
        epsilon=args.epsilon,
        learning_rate=args.learning_rate,
        episodes=args.episodes,
        max_tokens=args.max_tokens,
        seed=args.seed,
    )
    scheme = pipeline.reward_scheme(args.properties, args.strategy)
    if scheme is None:
        print("train-toy: no reward properties given", file=sys.stderr)
        return 2

    vocabulary = _load_vocabulary(args.vocab_file)
    if args.init_policy:
        policy = PolicyTable.from_dict(
            json.loads(Path(args.init_policy).read_text(encoding="utf-8"))
        )
    elif args.seed_corpus:
        _require_file(args.seed_corpus)
        token_lists = []
        for line_no, obj, err in iter_jsonl(args.seed_corpus):
            if err is not None:
                raise DomainError(f"seed corpus line {line_no}: {err}")
            token_lists.append(obj["tokens"])
        policy = bigram_policy_from_corpus(token_lists, vocabulary)
    else:
        policy = PolicyTable.uniform(vocabulary)

    reward_fn, report_fn = make_analyzer_reward(scheme, args.focal)
    trained, metrics = train_toy_policy(policy, reward_fn, cfg, report_fn)

    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8") as handle:
            for entry in metrics:
                _emit(handle, entry.to_dict())
    payload = json.dumps(trained.to_dict(), sort_keys=True)
    if args.out and args.out != "-":
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    final = metrics[-1]
    print(
        f"episodes={final.episode} mean_reward={final.mean_reward:.3f} "
        f"quality_score={final.quality_score:.3f}",
        file=sys.stderr,
    )
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    _require_file(args.policy)
    policy = PolicyTable.from_dict(
        json.loads(Path(args.policy).read_text(encoding="utf-8"))
    )
    cfg = _pipeline_config(args).train_config(seed=args.seed, max_tokens=args.max_tokens)
    completions = generate_completions(policy, cfg, seed=cfg.seed, count=args.count)
    with _out_stream(args.out) as out:
        for completion in completions:
            record = {
                "schema": "sample.v1",
                "tokens": list(completion.tokens),
                "stopped": completion.stopped,
                "test": render_toy_test(completion.tokens, args.focal),
            }
            _emit(out, record)
    return 0


# ── parser ──────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tqual",
        description="Static quality analysis and RL data pipeline for generated C# tests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, seed: bool = True) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output path (default stdout)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("analyze", help="quality reports for corpus records")
    p.add_argument("input")
    p.add_argument("--focal-field", default="focal_method")
    common(p, seed=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="property frequency table for reports")
    p.add_argument("input")
    common(p, seed=False)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("truncate", help="cut completions at test boundaries")
    p.add_argument("input")
    common(p, seed=False)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("prompt", help="build budgeted prompts from focal files")
    p.add_argument("input")
    common(p, seed=False)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("reward", help="label corpus records with rewards")
    p.add_argument("input")
    p.add_argument("--properties", help="comma-separated quality properties")
    p.add_argument("--strategy", choices=["individual", "combined"])
    common(p, seed=False)
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("resample", help="class-balance labeled records")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("golden", help="keep only golden-quality records")
    p.add_argument("input")
    common(p, seed=False)
    p.set_defaults(func=cmd_golden)

    p = sub.add_parser("split", help="leakage-free repository splits")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--rl", action="store_true",
                   help="three-way sft/rm/pm partition of the training repos")
    p.add_argument("--dedupe", action="store_true")
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("subsample", help="seeded random subset")
    p.add_argument("input")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("train-toy", help="PPO on a tabular bigram policy")
    p.add_argument("--properties", default="has_assertion")
    p.add_argument("--strategy", choices=["individual", "combined"])
    p.add_argument("--focal", default="Stop")
    p.add_argument("--episodes", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--vocab-file")
    p.add_argument("--init-policy", help="policy JSON to start from")
    p.add_argument("--seed-corpus", help="JSONL of {'tokens': [...]} for bigram init")
    p.add_argument("--metrics", help="write metrics JSONL here")
    common(p)
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("sample", help="draw completions from a policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--focal", default="Stop")
    common(p)
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DomainError, FileNotFoundError) as exc:
        print(f"tqual: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"tqual: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
