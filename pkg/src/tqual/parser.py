"""Recursive-descent parsers for the C# subset.

Two entry points: ``parse_test_method`` for a single attribute-decorated
test method, ``parse_focal_file`` for a whole focal source file.  Both are
recovery-oriented: constructs outside the subset become unknown statements
or raw member spans instead of hard failures, and ``check_syntax`` answers
the one question the pipeline needs, "would a C# compiler plausibly accept
this test".  Soundness rule: unbalanced delimiters outside literals and
comments are always fatal.
"""

from __future__ import annotations

from .lexer import Token, TokenKind, tokenize
from .nodes import (
    FATAL,
    WARNING,
    ClassNode,
    FieldNode,
    FocalFileTree,
    Invocation,
    MethodNode,
    Statement,
    SyntaxDiagnostic,
    SyntaxVerdict,
    TestSyntaxTree,
)

__all__ = [
    "parse_test_method",
    "parse_focal_file",
    "check_syntax",
    "attribute_names",
]

MODIFIER_WORDS = frozenset(
    """
    public private protected internal static readonly volatile virtual
    override abstract sealed extern unsafe new const async partial required
    """.split()
)

PREDEFINED_TYPES = frozenset(
    """
    bool byte sbyte char decimal double float int uint nint nuint long ulong
    short ushort object string void dynamic
    """.split()
)

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}

_STATEMENT_KEYWORDS = frozenset(
    {"if", "switch", "while", "do", "for", "foreach", "try", "using",
     "return", "throw"}
)


# ── token cursor ─────────────────────────────────────────────────────────


class _Cursor:
    """Walks the significant tokens of a lexed stream.

    Raw indices and cumulative character offsets are kept so statement and
    member texts can be sliced straight out of the source."""

    def __init__(self, source: str, tokens: list[Token]):
        self.source = source
        self.tokens = tokens
        self.char_start: list[int] = []
        pos = 0
        for tok in tokens:
            self.char_start.append(pos)
            pos += len(tok.text)
        self.char_start.append(pos)
        self.sig = [i for i, t in enumerate(tokens) if not t.is_trivia]
        self.pos = 0

    @property
    def at_end(self) -> bool:
        return self.pos >= len(self.sig)

    def peek(self, k: int = 0) -> Token | None:
        j = self.pos + k
        return self.tokens[self.sig[j]] if j < len(self.sig) else None

    def peek_text(self, k: int = 0) -> str:
        tok = self.peek(k)
        return tok.text if tok is not None else ""

    def advance(self) -> Token:
        tok = self.tokens[self.sig[self.pos]]
        self.pos += 1
        return tok

    def offset(self, pos: int | None = None) -> int:
        """Byte offset of the significant token at ``pos`` (default: current)."""
        p = self.pos if pos is None else pos
        if p >= len(self.sig):
            return self.tokens[-1].byte_offset if self.tokens else 0
        return self.tokens[self.sig[p]].byte_offset

    def char_span(self, start_pos: int, end_pos: int) -> tuple[int, int]:
        """[start, end) character span covering significant tokens
        ``start_pos`` .. ``end_pos`` inclusive."""
        a = self.char_start[self.sig[start_pos]]
        last = self.sig[end_pos]
        b = self.char_start[last] + len(self.tokens[last].text)
        return a, b

    def text(self, start_pos: int, end_pos: int) -> str:
        if end_pos < start_pos:
            return ""
        a, b = self.char_span(start_pos, end_pos)
        return self.source[a:b]

    def sig_tokens(self, start_pos: int, end_pos: int) -> list[Token]:
        return [self.tokens[self.sig[p]] for p in range(start_pos, min(end_pos + 1, len(self.sig)))]


# ── shared checks ────────────────────────────────────────────────────────


def _lex_diagnostics(tokens: list[Token]) -> list[SyntaxDiagnostic]:
    return [
        SyntaxDiagnostic("unterminated literal, comment, or unsupported character",
                         t.byte_offset, FATAL)
        for t in tokens
        if t.kind is TokenKind.ERROR
    ]


def _balance_diagnostics(tokens: list[Token]) -> list[SyntaxDiagnostic]:
    """Stack-match (), [], {} over significant tokens.

    Attribute tokens are internally balanced and skipped.  Any mismatch is
    fatal: this is the soundness floor under check_syntax."""
    stack: list[tuple[str, int]] = []
    diags: list[SyntaxDiagnostic] = []
    for tok in tokens:
        if tok.is_trivia or tok.kind is not TokenKind.PUNCTUATION:
            continue
        if tok.text in _OPENERS:
            stack.append((tok.text, tok.byte_offset))
        elif tok.text in _CLOSERS:
            if not stack or stack[-1][0] != _CLOSERS[tok.text]:
                diags.append(SyntaxDiagnostic(
                    f"unmatched '{tok.text}'", tok.byte_offset, FATAL))
                return diags
            stack.pop()
    if stack:
        opener, offset = stack[-1]
        diags.append(SyntaxDiagnostic(f"unclosed '{opener}'", offset, FATAL))
    return diags


def attribute_names(attr_text: str) -> list[str]:
    """Names declared by one ``[...]`` attribute list."""
    inner = attr_text[1:-1]
    names: list[str] = []
    sig = [t for t in tokenize(inner) if not t.is_trivia]
    depth = 0
    segment: list[Token] = []

    def flush() -> None:
        idents = [t for t in segment if t.kind is TokenKind.IDENTIFIER]
        if not idents:
            return
        # Skip a leading target specifier such as "method:".
        if (len(segment) > 1 and segment[0].kind is TokenKind.IDENTIFIER
                and segment[1].text == ":" and len(idents) > 1):
            names.append(idents[1].text)
        else:
            names.append(idents[0].text)

    for tok in sig:
        if tok.text in _OPENERS:
            depth += 1
        elif tok.text in _CLOSERS:
            depth -= 1
        elif tok.text == "," and depth == 0:
            flush()
            segment = []
            continue
        segment.append(tok)
    flush()
    return names


# ── expression-level extraction ──────────────────────────────────────────


def _extract_invocations(sig_toks: list[Token]) -> tuple[list[Invocation], bool]:
    """Call sites and ternary presence within one expression token range."""
    invocations: list[Invocation] = []
    n = len(sig_toks)
    for idx in range(n):
        tok = sig_toks[idx]
        if tok.kind is not TokenKind.PUNCTUATION or tok.text != "(":
            continue
        j = idx - 1
        # Step over a generic argument list: Foo<Bar>( or Foo<A, B<C>>(.
        if j >= 0 and sig_toks[j].text in (">", ">>"):
            depth = 2 if sig_toks[j].text == ">>" else 1
            j -= 1
            while j >= 0 and depth > 0:
                t = sig_toks[j].text
                if t in (">", ">>"):
                    depth += 2 if t == ">>" else 1
                elif t in ("<", "<<"):
                    depth -= 2 if t == "<<" else 1
                j -= 1
        if j < 0 or sig_toks[j].kind is not TokenKind.IDENTIFIER:
            continue
        chain = [sig_toks[j].text]
        rooted = True
        j -= 1
        while j >= 0 and sig_toks[j].text in (".", "?."):
            prev = sig_toks[j - 1] if j >= 1 else None
            if prev is None:
                rooted = False
                break
            if prev.kind is TokenKind.IDENTIFIER or prev.text in ("this", "base"):
                chain.insert(0, prev.text)
                j -= 2
            else:
                # Chained off an expression result: (...).Wait() etc.
                rooted = False
                break
        is_constructor = j >= 0 and sig_toks[j].text == "new"
        invocations.append(Invocation(tuple(chain), rooted, is_constructor))

    has_ternary = False
    depth = 0
    pending: list[int] = []  # depths of unmatched '?'
    for tok in sig_toks:
        if tok.kind is not TokenKind.PUNCTUATION:
            continue
        if tok.text in _OPENERS:
            depth += 1
        elif tok.text in _CLOSERS:
            depth -= 1
            while pending and pending[-1] > depth:
                pending.pop()
        elif tok.text == "?":
            pending.append(depth)
        elif tok.text == ":" and pending and pending[-1] == depth:
            has_ternary = True
            break
    return invocations, has_ternary


# ── statement parsing ────────────────────────────────────────────────────


class _StatementParser:
    def __init__(self, cur: _Cursor, diags: list[SyntaxDiagnostic]):
        self.cur = cur
        self.diags = diags

    def fatal(self, message: str) -> None:
        self.diags.append(SyntaxDiagnostic(message, self.cur.offset(), FATAL))

    def warning(self, message: str) -> None:
        self.diags.append(SyntaxDiagnostic(message, self.cur.offset(), WARNING))

    def _make(self, kind: str, start: int, *, children: list[Statement] | None = None,
              expr_ranges: list[tuple[int, int]] | None = None) -> Statement:
        cur = self.cur
        end = cur.pos - 1
        text = cur.text(start, end) if end >= start else ""
        invocations: list[Invocation] = []
        has_ternary = False
        for a, b in expr_ranges or []:
            if b >= a:
                invs, tern = _extract_invocations(cur.sig_tokens(a, b))
                invocations.extend(invs)
                has_ternary = has_ternary or tern
        return Statement(kind, text, children or [], invocations, has_ternary)

    def parse_block_interior(self, *, stop_on_close: bool = True) -> list[Statement]:
        cur = self.cur
        statements: list[Statement] = []
        while not cur.at_end:
            if stop_on_close and cur.peek_text() == "}":
                break
            before = cur.pos
            statements.append(self.parse_statement())
            if cur.pos == before:  # safety: always make progress
                cur.advance()
        return statements

    def parse_statement(self) -> Statement:
        cur = self.cur
        start = cur.pos
        text = cur.peek_text()

        if text == "{":
            cur.advance()
            children = self.parse_block_interior()
            if cur.peek_text() == "}":
                cur.advance()
            else:
                self.fatal("block not closed")
            return self._make("block", start, children=children)

        if text == "if":
            return self._parse_if(start)
        if text == "switch":
            return self._parse_switch(start)
        if text == "while":
            return self._parse_headed_loop("while", start)
        if text == "for":
            return self._parse_headed_loop("for", start)
        if text == "foreach":
            return self._parse_headed_loop("foreach", start)
        if text == "do":
            return self._parse_do(start)
        if text == "try":
            return self._parse_try(start)
        if text == "using":
            return self._parse_using(start)
        if text in ("return", "throw"):
            cur.advance()
            expr_start = cur.pos
            end = self._consume_simple_statement()
            return self._make(text, start, expr_ranges=[(expr_start, end)])

        if text in ("break", "continue", "goto", "lock", "fixed", "unsafe",
                    "checked", "unchecked", "yield"):
            return self._parse_unknown(start)

        if self._looks_like_declaration():
            end = self._consume_simple_statement()
            return self._make("local-declaration", start, expr_ranges=[(start, end)])

        end = self._consume_simple_statement()
        return self._make("expression-statement", start, expr_ranges=[(start, end)])

    # individual constructs

    def _parse_if(self, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        header = self._consume_parens()
        children = [self.parse_statement()] if not cur.at_end else []
        if cur.peek_text() == "else":
            cur.advance()
            if not cur.at_end:
                children.append(self.parse_statement())
        return self._make("if", start, children=children,
                          expr_ranges=[header] if header else [])

    def _parse_switch(self, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        header = self._consume_parens()
        children: list[Statement] = []
        if cur.peek_text() == "{":
            cur.advance()
            while not cur.at_end and cur.peek_text() != "}":
                t = cur.peek_text()
                if t == "case":
                    self._consume_until_colon()
                elif t == "default" and cur.peek_text(1) == ":":
                    cur.advance()
                    cur.advance()
                else:
                    before = cur.pos
                    children.append(self.parse_statement())
                    if cur.pos == before:
                        cur.advance()
            if cur.peek_text() == "}":
                cur.advance()
            else:
                self.fatal("switch body not closed")
        else:
            self.fatal("switch body missing")
        return self._make("switch", start, children=children,
                          expr_ranges=[header] if header else [])

    def _parse_headed_loop(self, kind: str, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        header = self._consume_parens()
        children = [self.parse_statement()] if not cur.at_end else []
        return self._make(kind, start, children=children,
                          expr_ranges=[header] if header else [])

    def _parse_do(self, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        children = [self.parse_statement()] if not cur.at_end else []
        header: tuple[int, int] | None = None
        if cur.peek_text() == "while":
            cur.advance()
            header = self._consume_parens()
            if cur.peek_text() == ";":
                cur.advance()
            else:
                self.fatal("do-statement missing ';'")
        else:
            self.fatal("do-statement missing 'while'")
        return self._make("do", start, children=children,
                          expr_ranges=[header] if header else [])

    def _parse_try(self, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        children: list[Statement] = []
        if cur.peek_text() == "{":
            children.append(self.parse_statement())
        else:
            self.fatal("try block missing")
        while cur.peek_text() == "catch":
            cur.advance()
            if cur.peek_text() == "(":
                self._consume_parens()
            if cur.peek_text() == "when" and cur.peek_text(1) == "(":
                cur.advance()
                self._consume_parens()
            if cur.peek_text() == "{":
                children.append(self.parse_statement())
            else:
                self.fatal("catch block missing")
                break
        if cur.peek_text() == "finally":
            cur.advance()
            if cur.peek_text() == "{":
                children.append(self.parse_statement())
            else:
                self.fatal("finally block missing")
        return self._make("try", start, children=children)

    def _parse_using(self, start: int) -> Statement:
        cur = self.cur
        cur.advance()
        if cur.peek_text() == "(":
            header = self._consume_parens()
            children = [self.parse_statement()] if not cur.at_end else []
            return self._make("using-statement", start, children=children,
                              expr_ranges=[header] if header else [])
        expr_start = cur.pos
        end = self._consume_simple_statement()
        return self._make("using-statement", start,
                          expr_ranges=[(expr_start, end)])

    def _parse_unknown(self, start: int) -> Statement:
        """Constructs outside the subset: swallow one balanced unit."""
        cur = self.cur
        depth = 0
        while not cur.at_end:
            t = cur.peek_text()
            if depth == 0 and t == ";":
                cur.advance()
                break
            if t in _OPENERS:
                depth += 1
            elif t in _CLOSERS:
                if depth == 0:
                    break
                depth -= 1
                if depth == 0 and t == "}":
                    cur.advance()
                    break
            cur.advance()
        return self._make("unknown-statement", start,
                          expr_ranges=[(start, cur.pos - 1)])

    # low-level consumers

    def _consume_parens(self) -> tuple[int, int] | None:
        """Consume a balanced ``( ... )`` group; returns its sig-token range."""
        cur = self.cur
        if cur.peek_text() != "(":
            self.fatal("expected '('")
            return None
        start = cur.pos
        depth = 0
        while not cur.at_end:
            t = cur.advance().text
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
                if depth == 0:
                    return (start, cur.pos - 1)
        self.fatal("unclosed '('")
        return (start, cur.pos - 1)

    def _consume_simple_statement(self) -> int:
        """Consume up to and including ';' at depth zero.

        Stops without consuming at an unmatched '}' (enclosing block end),
        which is a missing-semicolon error.  Returns the last consumed
        sig position."""
        cur = self.cur
        depth = 0
        consumed_any = False
        while not cur.at_end:
            t = cur.peek_text()
            if depth == 0 and t == ";":
                cur.advance()
                return cur.pos - 2  # expression range excludes the ';'
            if t in _OPENERS:
                depth += 1
            elif t in _CLOSERS:
                if depth == 0:
                    if consumed_any:
                        self.fatal("statement missing ';'")
                    return cur.pos - 1
                depth -= 1
            cur.advance()
            consumed_any = True
        if consumed_any:
            self.fatal("input ends mid-statement")
        return cur.pos - 1

    def _consume_until_colon(self) -> None:
        cur = self.cur
        depth = 0
        while not cur.at_end:
            t = cur.advance().text
            if t in _OPENERS:
                depth += 1
            elif t in _CLOSERS:
                depth -= 1
            elif t == ":" and depth == 0:
                return

    def _looks_like_declaration(self) -> bool:
        cur = self.cur
        k = cur.pos
        sig_len = len(cur.sig)

        def tok(i: int) -> Token | None:
            return cur.tokens[cur.sig[i]] if i < sig_len else None

        t = tok(k)
        if t is None:
            return False
        if t.text == "const":
            k += 1
            t = tok(k)
            if t is None:
                return False
        if t.text == "var" and t.kind is TokenKind.IDENTIFIER:
            nxt = tok(k + 1)
            return nxt is not None and nxt.kind is TokenKind.IDENTIFIER

        # Type part: predefined type or dotted identifier chain.
        if t.kind is TokenKind.KEYWORD and t.text in PREDEFINED_TYPES:
            k += 1
        elif t.kind is TokenKind.IDENTIFIER:
            k += 1
            while True:
                a, b = tok(k), tok(k + 1)
                if a is not None and a.text == "." and b is not None \
                        and b.kind is TokenKind.IDENTIFIER:
                    k += 2
                else:
                    break
        else:
            return False

        # Optional generic argument list; only type-ish tokens may appear.
        t = tok(k)
        if t is not None and t.text == "<":
            depth = 1
            k += 1
            while depth > 0:
                t = tok(k)
                if t is None:
                    return False
                if t.text in ("<", "<<"):
                    depth += 2 if t.text == "<<" else 1
                elif t.text in (">", ">>"):
                    depth -= 2 if t.text == ">>" else 1
                elif not (t.kind in (TokenKind.IDENTIFIER, TokenKind.KEYWORD)
                          or t.text in (",", ".", "?", "[", "]")):
                    return False
                k += 1

        t = tok(k)
        if t is not None and t.text == "?":
            k += 1
            t = tok(k)
        while t is not None and t.text == "[":
            k += 1
            t = tok(k)
            while t is not None and t.text == ",":
                k += 1
                t = tok(k)
            if t is None or t.text != "]":
                return False
            k += 1
            t = tok(k)

        if t is None or t.kind is not TokenKind.IDENTIFIER:
            return False
        nxt = tok(k + 1)
        return nxt is not None and nxt.text in ("=", ";", ",")


# ── test method parsing ──────────────────────────────────────────────────


def parse_test_method(source: str) -> TestSyntaxTree:
    tokens = tokenize(source)
    diags = _lex_diagnostics(tokens)
    diags.extend(_balance_diagnostics(tokens))
    cur = _Cursor(source, tokens)
    sp = _StatementParser(cur, diags)

    attributes: list[str] = []
    while True:
        tok = cur.peek()
        if tok is not None and tok.kind is TokenKind.ATTRIBUTE:
            attributes.extend(attribute_names(tok.text))
            cur.advance()
        else:
            break

    while cur.peek_text() in MODIFIER_WORDS and cur.peek_text() != "":
        cur.advance()

    method_name = ""
    parameters: list[str] = []
    statements: list[Statement] = []

    type_start = cur.pos
    _consume_type(cur)
    name_tok = cur.peek()
    if name_tok is not None and name_tok.kind is TokenKind.IDENTIFIER:
        method_name = name_tok.text
        cur.advance()
    elif (cur.peek_text() == "(" and cur.pos == type_start + 1
          and cur.tokens[cur.sig[type_start]].kind is TokenKind.IDENTIFIER):
        # Constructor-shaped header: the lone identifier was the name.
        method_name = cur.tokens[cur.sig[type_start]].text
    else:
        sp.fatal("malformed method header")
        statements = sp.parse_block_interior(stop_on_close=False)
        return _finish_tree(attributes, method_name, parameters, statements, diags, tokens)

    if cur.peek_text() == "<":  # generic test methods: consume and ignore
        depth = 1
        cur.advance()
        while depth > 0 and not cur.at_end:
            t = cur.advance().text
            if t in ("<", "<<"):
                depth += 2 if t == "<<" else 1
            elif t in (">", ">>"):
                depth -= 2 if t == ">>" else 1

    if cur.peek_text() == "(":
        prange = sp._consume_parens()
        if prange is not None:
            a, b = prange
            inner = cur.text(a + 1, b - 1) if b - 1 >= a + 1 else ""
            parameters = _split_parameters(inner)
    else:
        sp.fatal("method header missing parameter list")
        statements = sp.parse_block_interior(stop_on_close=False)
        return _finish_tree(attributes, method_name, parameters, statements, diags, tokens)

    if cur.peek_text() == "{":
        cur.advance()
        statements = sp.parse_block_interior()
        if cur.peek_text() == "}":
            cur.advance()
        else:
            sp.fatal("method body not closed")
    elif cur.peek_text() == "=>":
        cur.advance()
        expr_start = cur.pos
        end = sp._consume_simple_statement()
        statements = [sp._make("expression-statement", expr_start,
                               expr_ranges=[(expr_start, end)])]
    elif cur.peek_text() == ";":
        cur.advance()  # bodiless declaration; nothing to analyze
    else:
        sp.fatal("method body missing")
        statements = sp.parse_block_interior(stop_on_close=False)
        return _finish_tree(attributes, method_name, parameters, statements, diags, tokens)

    if not cur.at_end:
        diags.append(SyntaxDiagnostic("unexpected content after method",
                                      cur.offset(), FATAL))
        # Keep parsing so detectors can still see the trailing statements.
        statements = statements + sp.parse_block_interior(stop_on_close=False)

    return _finish_tree(attributes, method_name, parameters, statements, diags, tokens)


def _finish_tree(attributes, method_name, parameters, statements, diags, tokens):
    fatal = any(d.is_fatal for d in diags)
    return TestSyntaxTree(
        attributes=attributes,
        method_name=method_name,
        parameters=parameters,
        body=None if fatal else statements,
        diagnostics=diags,
        tokens=tokens,
        partial_body=statements,
    )


def _consume_type(cur: _Cursor) -> str | None:
    """Consume a type reference if one is present; returns its text."""
    start = cur.pos
    tok = cur.peek()
    if tok is None:
        return None
    if tok.kind is TokenKind.KEYWORD and tok.text in PREDEFINED_TYPES:
        cur.advance()
    elif tok.kind is TokenKind.IDENTIFIER:
        cur.advance()
        while cur.peek_text() == "." and (nxt := cur.peek(1)) is not None \
                and nxt.kind is TokenKind.IDENTIFIER:
            cur.advance()
            cur.advance()
    else:
        return None
    if cur.peek_text() == "<":
        # Generic arguments; give up (rewind not needed, header stays valid)
        # only on end of input.
        depth = 1
        cur.advance()
        while depth > 0 and not cur.at_end:
            t = cur.advance().text
            if t in ("<", "<<"):
                depth += 2 if t == "<<" else 1
            elif t in (">", ">>"):
                depth -= 2 if t == ">>" else 1
    if cur.peek_text() == "?":
        cur.advance()
    while cur.peek_text() == "[":
        cur.advance()
        while cur.peek_text() == ",":
            cur.advance()
        if cur.peek_text() == "]":
            cur.advance()
        else:
            break
    return cur.text(start, cur.pos - 1)


def _split_parameters(inner: str) -> list[str]:
    sig = [t for t in tokenize(inner)]
    parts: list[str] = []
    depth = 0
    buf: list[str] = []
    for tok in sig:
        if tok.is_trivia:
            buf.append(tok.text)
            continue
        if tok.text in _OPENERS:
            depth += 1
        elif tok.text in _CLOSERS:
            depth -= 1
        if tok.text == "," and depth == 0:
            part = "".join(buf).strip()
            if part:
                parts.append(part)
            buf = []
        else:
            buf.append(tok.text)
    tail = "".join(buf).strip()
    if tail:
        parts.append(tail)
    return parts


def check_syntax(source: str) -> SyntaxVerdict:
    """True only when the subset parser found no fatal problem.

    Never reports correct for input whose delimiters are unbalanced
    outside literals and comments."""
    tree = parse_test_method(source)
    return SyntaxVerdict(not tree.has_fatal, tuple(tree.diagnostics))


# ── focal file parsing ───────────────────────────────────────────────────

_TYPE_DECL_KEYWORDS = frozenset({"class", "struct", "interface", "enum"})


def parse_focal_file(source: str) -> FocalFileTree:
    tokens = tokenize(source)
    diags = _lex_diagnostics(tokens)
    diags.extend(_balance_diagnostics(tokens))
    cur = _Cursor(source, tokens)
    usings: list[str] = []
    namespaces: list[str] = []
    classes: list[ClassNode] = []
    _parse_container(cur, diags, usings, namespaces, classes, top_level=True)
    _attach_comments(cur, classes)
    return FocalFileTree(source, usings, namespaces, classes, diags)


def _parse_container(cur: _Cursor, diags, usings, namespaces, classes, *,
                     top_level: bool) -> None:
    while not cur.at_end:
        t = cur.peek()
        text = t.text
        if text == "}" and not top_level:
            return
        if t.kind is TokenKind.ATTRIBUTE:
            cur.advance()
            continue
        if text == "using":
            start = cur.pos
            _consume_to_semicolon(cur)
            usings.append(cur.text(start, cur.pos - 1))
            continue
        if text == "namespace":
            cur.advance()
            name_parts: list[str] = []
            while (tok := cur.peek()) is not None and tok.kind is TokenKind.IDENTIFIER:
                name_parts.append(cur.advance().text)
                if cur.peek_text() == ".":
                    name_parts.append(cur.advance().text)
            namespaces.append("".join(name_parts))
            if cur.peek_text() == "{":
                cur.advance()
                _parse_container(cur, diags, usings, namespaces, classes,
                                 top_level=False)
                if cur.peek_text() == "}":
                    cur.advance()
                else:
                    diags.append(SyntaxDiagnostic("namespace not closed",
                                                  cur.offset(), FATAL))
            elif cur.peek_text() == ";":
                cur.advance()
            continue
        if _at_type_declaration(cur):
            node = _parse_type_declaration(cur, diags)
            if node is not None:
                classes.append(node)
            continue
        # Unknown top-level construct: skip one token (or balanced block).
        if text == "{":
            _consume_balanced_braces(cur)
        else:
            cur.advance()


def _at_type_declaration(cur: _Cursor) -> bool:
    k = 0
    while cur.peek_text(k) in MODIFIER_WORDS and cur.peek_text(k) != "":
        k += 1
    t = cur.peek_text(k)
    return t in _TYPE_DECL_KEYWORDS or (t == "record")


def _parse_type_declaration(cur: _Cursor, diags) -> ClassNode | None:
    start = cur.pos
    while cur.peek_text() in MODIFIER_WORDS and cur.peek_text() != "":
        cur.advance()
    kw = cur.advance().text  # class | struct | interface | enum | record
    if kw == "record" and cur.peek_text() in ("class", "struct"):
        cur.advance()
    name_tok = cur.peek()
    if name_tok is None or name_tok.kind is not TokenKind.IDENTIFIER:
        diags.append(SyntaxDiagnostic("type declaration missing name",
                                      cur.offset(), FATAL))
        return None
    name = cur.advance().text
    # Generic parameters, base list, constraints: up to '{' or ';'.
    while not cur.at_end and cur.peek_text() not in ("{", ";"):
        cur.advance()
    decl_span = cur.char_span(start, cur.pos - 1)
    declaration = cur.text(start, cur.pos - 1)
    node = ClassNode(name=name, declaration=declaration, decl_span=decl_span,
                     span=decl_span)
    if cur.peek_text() == ";":
        cur.advance()
        node.span = cur.char_span(start, cur.pos - 1)
        return node
    if cur.peek_text() != "{":
        diags.append(SyntaxDiagnostic("type body missing", cur.offset(), FATAL))
        return node
    cur.advance()
    if kw == "enum":
        depth = 1
        while not cur.at_end and depth > 0:
            t = cur.advance().text
            if t == "{":
                depth += 1
            elif t == "}":
                depth -= 1
        node.span = cur.char_span(start, cur.pos - 1)
        return node
    _parse_members(cur, diags, node)
    if cur.peek_text() == "}":
        cur.advance()
    else:
        diags.append(SyntaxDiagnostic(f"type '{name}' not closed",
                                      cur.offset(), FATAL))
    node.span = cur.char_span(start, cur.pos - 1)
    return node


def _parse_members(cur: _Cursor, diags, node: ClassNode) -> None:
    while not cur.at_end and cur.peek_text() != "}":
        member_start = cur.pos
        while (tok := cur.peek()) is not None and tok.kind is TokenKind.ATTRIBUTE:
            cur.advance()
        if _at_type_declaration(cur):
            inner = _parse_type_declaration(cur, diags)
            if inner is not None:
                node.nested.append(inner)
            continue
        while cur.peek_text() in MODIFIER_WORDS and cur.peek_text() != "":
            cur.advance()
        terminator, term_pos = _find_member_terminator(cur)
        if terminator == "(":
            _parse_method_member(cur, diags, node, member_start, term_pos)
        elif terminator in ("=", ";"):
            name = _field_name(cur, term_pos)
            _consume_to_semicolon(cur)
            node.fields.append(FieldNode(name, cur.char_span(member_start, cur.pos - 1)))
        elif terminator == "{":
            while cur.pos <= term_pos:
                cur.advance()
            _consume_balanced_braces_from_open(cur, already_open=True)
            if cur.peek_text() == "=":  # auto-property initializer
                _consume_to_semicolon(cur)
            node.others.append(cur.char_span(member_start, cur.pos - 1))
        elif terminator == "=>":
            _consume_to_semicolon(cur)
            node.others.append(cur.char_span(member_start, cur.pos - 1))
        else:
            if cur.pos == member_start and not cur.at_end:
                cur.advance()
            if cur.pos > member_start:
                node.others.append(cur.char_span(member_start, cur.pos - 1))
            if terminator is None and cur.at_end:
                return


def _find_member_terminator(cur: _Cursor) -> tuple[str | None, int]:
    """First of ``(``, ``=``, ``;``, ``{``, ``=>`` at depth zero, looking
    ahead without consuming. Returns (terminator, sig position)."""
    depth = 0
    k = cur.pos
    while k < len(cur.sig):
        t = cur.tokens[cur.sig[k]].text
        if depth == 0 and t in ("(", "=", ";", "{", "=>"):
            return t, k
        if t == "}" and depth == 0:
            return None, k
        if t in _OPENERS:
            depth += 1
        elif t in _CLOSERS:
            depth -= 1
        k += 1
    return None, k


def _parse_method_member(cur: _Cursor, diags, node: ClassNode,
                         member_start: int, paren_pos: int) -> None:
    name = ""
    j = paren_pos - 1
    if j >= 0 and cur.tokens[cur.sig[j]].text in (">", ">>"):
        depth = 2 if cur.tokens[cur.sig[j]].text == ">>" else 1
        j -= 1
        while j >= 0 and depth > 0:
            t = cur.tokens[cur.sig[j]].text
            if t in (">", ">>"):
                depth += 2 if t == ">>" else 1
            elif t in ("<", "<<"):
                depth -= 2 if t == "<<" else 1
            j -= 1
    while j >= 0:
        tok = cur.tokens[cur.sig[j]]
        if tok.kind is TokenKind.IDENTIFIER:
            name = tok.text
            break
        if tok.text == "~":
            j -= 1
            continue
        j -= 1

    while cur.pos <= paren_pos:
        cur.advance()
    # cur now sits just past '('; finish the parameter list.
    depth = 1
    while not cur.at_end and depth > 0:
        t = cur.advance().text
        if t == "(":
            depth += 1
        elif t == ")":
            depth -= 1
    sig_end_pos = cur.pos - 1
    sig_char_end = cur.char_span(sig_end_pos, sig_end_pos)[1]
    member_char_start = cur.char_span(member_start, member_start)[0]
    signature = cur.source[member_char_start:sig_char_end] + ";"

    # Constraints or nothing until the body.
    while not cur.at_end and cur.peek_text() not in ("{", ";", "=>"):
        cur.advance()
    body_span = (sig_char_end, sig_char_end)
    if cur.peek_text() == "{":
        body_start = cur.char_span(cur.pos, cur.pos)[0]
        _consume_balanced_braces(cur)
        body_span = (body_start, cur.char_span(cur.pos - 1, cur.pos - 1)[1])
    elif cur.peek_text() == ";":
        cur.advance()
    elif cur.peek_text() == "=>":
        body_start = cur.char_span(cur.pos, cur.pos)[0]
        _consume_to_semicolon(cur)
        body_span = (body_start, cur.char_span(cur.pos - 1, cur.pos - 1)[1])
    span = cur.char_span(member_start, cur.pos - 1)
    node.methods.append(MethodNode(name, signature, span, sig_char_end, body_span))


def _field_name(cur: _Cursor, term_pos: int) -> str:
    j = term_pos
    if cur.tokens[cur.sig[j]].text in ("=", ";"):
        j -= 1
    while j >= cur.pos:
        tok = cur.tokens[cur.sig[j]]
        if tok.kind is TokenKind.IDENTIFIER:
            return tok.text
        j -= 1
    return ""


def _consume_to_semicolon(cur: _Cursor) -> None:
    depth = 0
    while not cur.at_end:
        t = cur.peek_text()
        if depth == 0 and t == ";":
            cur.advance()
            return
        if t in _OPENERS:
            depth += 1
        elif t in _CLOSERS:
            if depth == 0:
                return
            depth -= 1
        cur.advance()


def _consume_balanced_braces(cur: _Cursor) -> None:
    if cur.peek_text() != "{":
        return
    cur.advance()
    _consume_balanced_braces_from_open(cur, already_open=True)


def _consume_balanced_braces_from_open(cur: _Cursor, *, already_open: bool) -> None:
    depth = 1 if already_open else 0
    while not cur.at_end and depth > 0:
        t = cur.advance().text
        if t == "{":
            depth += 1
        elif t == "}":
            depth -= 1


def _attach_comments(cur: _Cursor, classes: list[ClassNode]) -> None:
    comment_spans: list[tuple[int, int]] = []
    for i, tok in enumerate(cur.tokens):
        if tok.kind in (TokenKind.COMMENT_LINE, TokenKind.COMMENT_BLOCK):
            start = cur.char_start[i]
            comment_spans.append((start, start + len(tok.text)))
    all_classes: list[ClassNode] = []
    for cls in classes:
        all_classes.extend(cls.walk())
    for span in comment_spans:
        # Innermost class wins so nested-class comments are not doubled.
        owner: ClassNode | None = None
        for cls in all_classes:
            if cls.span[0] <= span[0] and span[1] <= cls.span[1]:
                if owner is None or (cls.span[1] - cls.span[0]) < (owner.span[1] - owner.span[0]):
                    owner = cls
        if owner is not None:
            owner.comments.append(span)
