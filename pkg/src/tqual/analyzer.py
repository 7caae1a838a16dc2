"""Static quality analysis for C# unit tests.

One test method goes in, one ``QualityReport`` comes out: a syntax verdict
plus six structural booleans.  Detection is purely static and deliberately
conservative:

* assertion        - a call chain starting at Assert, StringAssert, or
                     CollectionAssert, or a ``Throws*`` method invoked on
                     an Assert-like receiver
* focal call       - some invocation's final callee equals the focal method
                     name (case-sensitive; constructor calls do not count)
* comment          - at least one ``//`` or ``/* */`` token in the method
* descriptive name - after stripping one leading ``Test`` and one occurrence
                     of the focal name, at least three alphanumeric
                     characters remain
* duplicate assertion - two adjacent assertion statements in the same block
                     whose texts match after whitespace normalization
* conditional or exception handling - if, switch, while, do, for, foreach,
                     a ternary expression, or try, at any nesting depth

When the parse has a fatal problem the booleans are still computed from
whatever statements were recovered and the report is marked
``low_confidence``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import EmptyCorpus
from .lexer import TokenKind
from .nodes import Invocation, Statement, TestSyntaxTree
from .parser import parse_test_method

__all__ = [
    "ASSERTION_CLASSES",
    "CONDITIONAL_KINDS",
    "PROPERTY_FIELDS",
    "QualityReport",
    "ScoreConfig",
    "CorpusStats",
    "analyze",
    "score_corpus",
    "detect_assertion",
    "detect_focal_call",
    "detect_comment",
    "detect_descriptive_name",
    "detect_duplicate_assertion",
    "detect_conditional_or_exception",
]

ASSERTION_CLASSES = frozenset({"Assert", "StringAssert", "CollectionAssert"})

CONDITIONAL_KINDS = frozenset({"if", "switch", "while", "do", "for", "foreach", "try"})

# The seven properties, in report order.
PROPERTY_FIELDS = (
    "correct_syntax",
    "has_assertion",
    "invokes_focal",
    "has_comment",
    "descriptive_name",
    "duplicate_assertion",
    "conditional_or_exception",
)

_SCHEMA = "report.v1"


@dataclass(frozen=True)
class QualityReport:
    correct_syntax: bool
    has_assertion: bool
    invokes_focal: bool
    has_comment: bool
    descriptive_name: bool
    duplicate_assertion: bool
    conditional_or_exception: bool
    focal_method_name: str
    low_confidence: bool = False

    def to_dict(self) -> dict:
        return {
            "schema": _SCHEMA,
            "correct_syntax": self.correct_syntax,
            "has_assertion": self.has_assertion,
            "invokes_focal": self.invokes_focal,
            "has_comment": self.has_comment,
            "descriptive_name": self.descriptive_name,
            "duplicate_assertion": self.duplicate_assertion,
            "conditional_or_exception": self.conditional_or_exception,
            "focal_method_name": self.focal_method_name,
            "low_confidence": self.low_confidence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QualityReport":
        return cls(
            correct_syntax=bool(data["correct_syntax"]),
            has_assertion=bool(data["has_assertion"]),
            invokes_focal=bool(data["invokes_focal"]),
            has_comment=bool(data["has_comment"]),
            descriptive_name=bool(data["descriptive_name"]),
            duplicate_assertion=bool(data["duplicate_assertion"]),
            conditional_or_exception=bool(data["conditional_or_exception"]),
            focal_method_name=str(data.get("focal_method_name", "")),
            low_confidence=bool(data.get("low_confidence", False)),
        )


# ── statement walking ────────────────────────────────────────────────────


def _walk(statements: Iterable[Statement]) -> Iterator[Statement]:
    for stmt in statements:
        yield stmt
        yield from _walk(stmt.children)


def _all_invocations(tree: TestSyntaxTree) -> Iterator[Invocation]:
    for stmt in _walk(tree.statements()):
        yield from stmt.invocations


def _is_assertion_invocation(inv: Invocation) -> bool:
    if inv.is_constructor or not inv.rooted:
        return False
    if inv.chain[0] in ASSERTION_CLASSES:
        return True
    # Xunit.Assert.Throws(...) and similar: a Throws* call on an
    # Assert-qualified receiver.
    return inv.callee.startswith("Throws") and any(
        part == "Assert" or part.endswith("Assert") for part in inv.chain[:-1]
    )


def _is_assertion_statement(stmt: Statement) -> bool:
    return stmt.kind == "expression-statement" and any(
        _is_assertion_invocation(inv) for inv in stmt.invocations
    )


# ── detectors ────────────────────────────────────────────────────────────


def detect_assertion(tree: TestSyntaxTree) -> bool:
    return any(_is_assertion_invocation(inv) for inv in _all_invocations(tree))


def detect_focal_call(tree: TestSyntaxTree, focal_name: str) -> bool:
    if not focal_name:
        return False
    return any(
        inv.callee == focal_name and not inv.is_constructor
        for inv in _all_invocations(tree)
    )


def detect_comment(tree: TestSyntaxTree) -> bool:
    # Preprocessor lines share the comment-line kind; the prefix check
    # keeps them from counting as documentation.
    return any(
        tok.kind in (TokenKind.COMMENT_LINE, TokenKind.COMMENT_BLOCK)
        and tok.text.startswith(("//", "/*"))
        for tok in tree.tokens
    )


def detect_descriptive_name(tree: TestSyntaxTree, focal_name: str) -> bool:
    name = tree.method_name
    if name.startswith("Test"):
        name = name[len("Test"):]
    if focal_name:
        name = name.replace(focal_name, "", 1)
    remainder = "".join(ch for ch in name if ch.isalnum())
    return len(remainder) >= 3


def detect_duplicate_assertion(tree: TestSyntaxTree) -> bool:
    def lists(statements: list[Statement]) -> Iterator[list[Statement]]:
        yield statements
        for stmt in statements:
            yield from lists(stmt.children)

    for stmts in lists(tree.statements()):
        for first, second in zip(stmts, stmts[1:]):
            if not (_is_assertion_statement(first) and _is_assertion_statement(second)):
                continue
            if " ".join(first.text.split()) == " ".join(second.text.split()):
                return True
    return False


def detect_conditional_or_exception(tree: TestSyntaxTree) -> bool:
    for stmt in _walk(tree.statements()):
        if stmt.kind in CONDITIONAL_KINDS or stmt.has_ternary:
            return True
    return False


# ── entry points ─────────────────────────────────────────────────────────


def analyze(raw_test: str, focal_name: str) -> QualityReport:
    """Parse one test method and evaluate all seven quality properties."""
    tree = parse_test_method(raw_test)
    correct = not tree.has_fatal
    return QualityReport(
        correct_syntax=correct,
        has_assertion=detect_assertion(tree),
        invokes_focal=detect_focal_call(tree, focal_name),
        has_comment=detect_comment(tree),
        descriptive_name=detect_descriptive_name(tree, focal_name),
        duplicate_assertion=detect_duplicate_assertion(tree),
        conditional_or_exception=detect_conditional_or_exception(tree),
        focal_method_name=focal_name,
        low_confidence=not correct,
    )


@dataclass(frozen=True)
class ScoreConfig:
    """Which properties add to and subtract from the corpus quality score.

    Documentation properties (comments, descriptive names) are excluded by
    default: they describe style rather than functional quality.  Pass a
    different config to include them.
    """

    positive_properties: tuple[str, ...] = ("has_assertion", "invokes_focal")
    smell_properties: tuple[str, ...] = ("duplicate_assertion", "conditional_or_exception")

    def __post_init__(self):
        for prop in self.positive_properties + self.smell_properties:
            if prop not in PROPERTY_FIELDS:
                raise ValueError(f"unknown quality property: {prop!r}")


@dataclass(frozen=True)
class CorpusStats:
    frequencies: dict[str, float]
    count: int
    quality_score: float

    def to_dict(self) -> dict:
        return {
            "schema": "stats.v1",
            "count": self.count,
            "frequencies": dict(self.frequencies),
            "quality_score": self.quality_score,
        }


def score_corpus(reports: list[QualityReport],
                 config: ScoreConfig | None = None) -> CorpusStats:
    """Per-property frequencies plus a single scalar: the sum of positive
    property frequencies minus the sum of smell frequencies."""
    if not reports:
        raise EmptyCorpus("cannot score an empty corpus")
    config = config or ScoreConfig()
    count = len(reports)
    frequencies = {
        prop: sum(1 for r in reports if getattr(r, prop)) / count
        for prop in PROPERTY_FIELDS
    }
    score = sum(frequencies[p] for p in config.positive_properties) - sum(
        frequencies[s] for s in config.smell_properties
    )
    return CorpusStats(frequencies=frequencies, count=count, quality_score=score)
