"""Turning raw model completions into single test methods.

Language models overrun the end of the test they were asked to write:
after the closing brace they start a second ``[TestMethod]``, invent file
paths, or keep generating prose.  ``truncate_completion`` cuts the
concatenated prompt hint + completion at the earlier of

* a closing brace sitting at column zero (kept, cut after it), or
* the start of a second ``[TestMethod]`` annotation (dropped).

Both boundaries are found on the token stream, so braces and annotations
inside string literals or comments never trigger a cut.  The operation is
idempotent: truncating an already-truncated test returns it unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import CorpusRecord
from .lexer import Token, TokenKind, tokenize

__all__ = ["RawCompletion", "truncate_completion", "assemble_record", "prompt_hint_for"]

_TEST_ANNOTATION = "TestMethod"


@dataclass(frozen=True)
class RawCompletion:
    """A model completion plus the method stub the prompt ended with."""

    prompt_hint: str
    completion_text: str


def prompt_hint_for(focal_method: str) -> str:
    return f"[TestMethod]\npublic void Test{focal_method}"


def _annotation_offsets(tokens: list[Token], char_starts: list[int]) -> list[int]:
    """Character offsets where a [TestMethod] annotation begins.

    Handles both lexings: a single attribute-bracket token, and a plain
    ``[`` ``TestMethod`` ``]`` punctuation run (whitespace allowed) for
    positions the attribute heuristic does not cover."""
    offsets: list[int] = []
    n = len(tokens)
    for i, tok in enumerate(tokens):
        if tok.kind is TokenKind.ATTRIBUTE:
            inner = tok.text[1:-1].strip()
            first = inner.split("(")[0].split(",")[0].strip()
            if first == _TEST_ANNOTATION:
                offsets.append(char_starts[i])
            continue
        if tok.kind is TokenKind.PUNCTUATION and tok.text == "[":
            j = i + 1
            while j < n and tokens[j].kind is TokenKind.WHITESPACE:
                j += 1
            if j < n and tokens[j].kind is TokenKind.IDENTIFIER \
                    and tokens[j].text == _TEST_ANNOTATION:
                k = j + 1
                while k < n and tokens[k].kind is TokenKind.WHITESPACE:
                    k += 1
                if k < n and tokens[k].text == "]":
                    offsets.append(char_starts[i])
    return offsets


def truncate_completion(raw: RawCompletion) -> str:
    full = raw.prompt_hint + raw.completion_text
    search_from = len(raw.prompt_hint)

    tokens = tokenize(full)
    char_starts: list[int] = []
    pos = 0
    for tok in tokens:
        char_starts.append(pos)
        pos += len(tok.text)

    brace_offset: int | None = None
    for i, tok in enumerate(tokens):
        if tok.kind is not TokenKind.PUNCTUATION or tok.text != "}":
            continue
        off = char_starts[i]
        if off < search_from:
            continue
        if off == 0 or full[off - 1] == "\n":
            brace_offset = off
            break

    annotations = _annotation_offsets(tokens, char_starts)
    second_annotation: int | None = None
    if len(annotations) >= 2 and annotations[1] >= search_from:
        second_annotation = annotations[1]

    if brace_offset is None and second_annotation is None:
        return full
    if second_annotation is None or (
        brace_offset is not None and brace_offset <= second_annotation
    ):
        return full[: brace_offset + 1]
    return full[:second_annotation]


def assemble_record(prompt: str, raw: RawCompletion, *, repo: str = "",
                    focal_class: str = "", focal_method: str = "") -> CorpusRecord:
    """Pair a prompt with its truncated completion as one corpus record."""
    return CorpusRecord(
        repo=repo,
        focal_class=focal_class,
        focal_method=focal_method,
        prompt=prompt,
        test=truncate_completion(raw),
        source="generated",
    )
