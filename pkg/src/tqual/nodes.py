"""Syntax tree types produced by the C# subset parsers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import Token

STATEMENT_KINDS = frozenset(
    {
        "expression-statement",
        "local-declaration",
        "if",
        "switch",
        "while",
        "do",
        "for",
        "foreach",
        "try",
        "using-statement",
        "return",
        "throw",
        "block",
        "unknown-statement",
    }
)

FATAL = "fatal"
WARNING = "warning"


@dataclass(frozen=True)
class SyntaxDiagnostic:
    message: str
    offset: int
    severity: str  # FATAL or WARNING

    @property
    def is_fatal(self) -> bool:
        return self.severity == FATAL


@dataclass(frozen=True)
class Invocation:
    """One call site: the dotted identifier chain ending at the called name.

    ``rooted`` is False when the chain hangs off an expression result, e.g.
    the ``.Wait()`` in ``command.Stop().Wait()``.  ``is_constructor`` marks
    ``new Type(...)``, which is not a method invocation.
    """

    chain: tuple[str, ...]
    rooted: bool = True
    is_constructor: bool = False

    @property
    def callee(self) -> str:
        return self.chain[-1]


@dataclass
class Statement:
    kind: str
    text: str
    children: list["Statement"] = field(default_factory=list)
    invocations: list[Invocation] = field(default_factory=list)
    has_ternary: bool = False


@dataclass
class TestSyntaxTree:
    """Parse result for a single attribute-decorated test method.

    ``body`` is populated only when parsing produced no fatal diagnostic;
    ``partial_body`` always holds whatever statements were recovered so the
    analyzer can still run best-effort on broken input.
    """

    attributes: list[str]
    method_name: str
    parameters: list[str]
    body: list[Statement] | None
    diagnostics: list[SyntaxDiagnostic]
    tokens: list[Token] = field(default_factory=list, repr=False)
    partial_body: list[Statement] = field(default_factory=list, repr=False)

    @property
    def has_fatal(self) -> bool:
        return any(d.is_fatal for d in self.diagnostics)

    def statements(self) -> list[Statement]:
        return self.body if self.body is not None else self.partial_body


@dataclass(frozen=True)
class SyntaxVerdict:
    correct: bool
    diagnostics: tuple[SyntaxDiagnostic, ...]


Span = tuple[int, int]  # [start, end) character offsets into the source


@dataclass
class FieldNode:
    name: str
    span: Span


@dataclass
class MethodNode:
    name: str
    signature: str  # "<modifiers> <return> <name>(<params>);"
    span: Span
    sig_end: int  # offset just past the closing ')' of the parameter list
    body_span: Span


@dataclass
class ClassNode:
    name: str
    declaration: str
    decl_span: Span
    span: Span
    fields: list[FieldNode] = field(default_factory=list)
    methods: list[MethodNode] = field(default_factory=list)
    others: list[Span] = field(default_factory=list)  # properties etc., kept raw
    comments: list[Span] = field(default_factory=list)
    nested: list["ClassNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for inner in self.nested:
            yield from inner.walk()


@dataclass
class FocalFileTree:
    source: str
    using_directives: list[str]
    namespaces: list[str]
    classes: list[ClassNode]
    diagnostics: list[SyntaxDiagnostic] = field(default_factory=list)

    def walk_classes(self):
        for cls in self.classes:
            yield from cls.walk()
