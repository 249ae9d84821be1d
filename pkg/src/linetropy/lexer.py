"""Lexing of source text into comment-free token streams with line provenance.

Each source file becomes a flat sequence of tokens, every token tagged with
its 1-based source line. Comments and whitespace produce no tokens, so
downstream entropy scores never see them. Every line that owns at least one
token is also assigned a syntactic line type via a keyword/shape heuristic
(no parsing involved; the scoring pipeline only needs a stable partition of
lines, not a correct parse).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

log = logging.getLogger(__name__)


class TokenKind(Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    LITERAL = "literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"


class LineType(Enum):
    IMPORT_DECL = "import_decl"
    PACKAGE_DECL = "package_decl"
    CLASS_DECL = "class_decl"
    METHOD_DECL = "method_decl"
    FIELD_DECL = "field_decl"
    VARIABLE_DECL = "variable_decl"
    IF_STMT = "if_stmt"
    FOR_STMT = "for_stmt"
    WHILE_STMT = "while_stmt"
    SWITCH_CASE = "switch_case"
    TRY_STMT = "try_stmt"
    CATCH_CLAUSE = "catch_clause"
    RETURN_STMT = "return_stmt"
    THROW_STMT = "throw_stmt"
    CALL_STMT = "call_stmt"
    ASSIGNMENT = "assignment"
    ANNOTATION = "annotation"
    BRACE_ONLY = "brace_only"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    """A lexical unit: verbatim lexeme, 1-based source line, coarse kind."""

    text: str
    line: int
    kind: TokenKind


@dataclass(frozen=True)
class TokenizedFile:
    """Token stream of one file plus per-line syntactic types.

    ``errors`` records recoverable lexing problems (unterminated string or
    block comment); when one occurs the remainder of the file is skipped and
    tokens lexed up to that point are kept.
    """

    path: str
    tokens: tuple[Token, ...]
    line_count: int
    line_types: Mapping[int, LineType]
    errors: tuple[str, ...] = ()

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass(frozen=True)
class LanguageProfile:
    """Lexer configuration: keywords, comment syntax, quotes, operators.

    Profiles are data so that another curly-brace language needs only a new
    profile, not new code.
    """

    name: str
    keywords: frozenset[str]
    line_comment: str | None = "//"
    block_comment_open: str | None = "/*"
    block_comment_close: str | None = "*/"
    string_quotes: tuple[str, ...] = ('"', "'")
    operators: tuple[str, ...] = ()
    modifiers: frozenset[str] = frozenset()

    def sorted_operators(self) -> list[str]:
        # longest-match-first for the operator scanner
        return sorted(self.operators, key=len, reverse=True)


_JAVA_OPERATORS = (
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|",
    "^", "?", ":", "@", "#",
)

JAVA_PROFILE = LanguageProfile(
    name="java",
    keywords=frozenset(
        """abstract assert boolean break byte case catch char class const
        continue default do double else enum extends final finally float for
        goto if implements import instanceof int interface long native new
        package private protected public return short static strictfp super
        switch synchronized this throw throws transient try void volatile
        while true false null var record yield sealed permits""".split()
    ),
    modifiers=frozenset(
        "public private protected static final abstract synchronized "
        "native transient volatile strictfp sealed default".split()
    ),
    operators=_JAVA_OPERATORS,
)

C_PROFILE = LanguageProfile(
    name="c",
    keywords=frozenset(
        """auto break case char const continue default do double else enum
        extern float for goto if inline int long register restrict return
        short signed sizeof static struct switch typedef union unsigned void
        volatile while include define ifdef ifndef endif pragma bool class
        namespace template typename using new delete try catch throw public
        private protected virtual nullptr true false""".split()
    ),
    modifiers=frozenset("static extern const inline virtual".split()),
    operators=_JAVA_OPERATORS,
)

BUILTIN_PROFILES = {"java": JAVA_PROFILE, "c": C_PROFILE}

_PUNCTUATION = set("(){}[];,.")


def load_profile(path: str | Path) -> LanguageProfile:
    """Load a language profile from a JSON document.

    Recognized keys: name, keywords, line_comment, block_comment (two-element
    list), string_quotes, operators, modifiers. Missing keys fall back to the
    Java profile's values.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = JAVA_PROFILE
    if "block_comment" in raw:
        block = raw["block_comment"]
        bco, bcc = (block[0], block[1]) if block else (None, None)
    else:
        bco, bcc = base.block_comment_open, base.block_comment_close
    return LanguageProfile(
        name=raw.get("name", Path(path).stem),
        keywords=frozenset(raw.get("keywords", base.keywords)),
        line_comment=raw.get("line_comment", base.line_comment),
        block_comment_open=bco,
        block_comment_close=bcc,
        string_quotes=tuple(raw.get("string_quotes", base.string_quotes)),
        operators=tuple(raw.get("operators", base.operators)),
        modifiers=frozenset(raw.get("modifiers", base.modifiers)),
    )


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def tokenize_file(
    source: str,
    profile: LanguageProfile = JAVA_PROFILE,
    path: str = "<string>",
) -> TokenizedFile:
    """Lex ``source`` into a TokenizedFile.

    Comments and whitespace yield no tokens. A string or character literal is
    a single token including its quotes. An unterminated string or block
    comment is a recoverable error: it is recorded (with path and line), a
    warning is logged, and the rest of the file is skipped.
    """
    tokens: list[Token] = []
    errors: list[str] = []
    line = 1
    i = 0
    n = len(source)
    ops = profile.sorted_operators()

    while i < n:
        ch = source[i]

        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue

        # line comment
        lc = profile.line_comment
        if lc and source.startswith(lc, i):
            nl = source.find("\n", i)
            if nl == -1:
                break
            i = nl
            continue

        # block comment
        bco, bcc = profile.block_comment_open, profile.block_comment_close
        if bco and source.startswith(bco, i):
            end = source.find(bcc, i + len(bco))
            if end == -1:
                errors.append(f"{path}:{line}: unterminated block comment")
                log.warning("%s:%d: unterminated block comment; skipping rest of file", path, line)
                break
            line += source.count("\n", i, end + len(bcc))
            i = end + len(bcc)
            continue

        # string / char literal: one token, quotes included
        if ch in profile.string_quotes:
            j = i + 1
            terminated = False
            while j < n:
                c = source[j]
                if c == "\\":
                    j += 2
                    continue
                if c == ch:
                    terminated = True
                    break
                if c == "\n":
                    break
                j += 1
            if not terminated:
                errors.append(f"{path}:{line}: unterminated string literal")
                log.warning("%s:%d: unterminated string literal; skipping rest of file", path, line)
                break
            tokens.append(Token(source[i : j + 1], line, TokenKind.LITERAL))
            i = j + 1
            continue

        # number: digit-led, or '.' followed by a digit
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i + 1
            while j < n:
                c = source[j]
                if c.isalnum() or c in "._":
                    j += 1
                elif c in "+-" and source[j - 1] in "eEpP":
                    j += 1  # exponent sign
                else:
                    break
            tokens.append(Token(source[i:j], line, TokenKind.LITERAL))
            i = j
            continue

        # identifier or keyword
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_part(source[j]):
                j += 1
            text = source[i:j]
            kind = TokenKind.KEYWORD if text in profile.keywords else TokenKind.IDENTIFIER
            tokens.append(Token(text, line, kind))
            i = j
            continue

        if ch in _PUNCTUATION:
            tokens.append(Token(ch, line, TokenKind.PUNCTUATION))
            i += 1
            continue

        for op in ops:
            if source.startswith(op, i):
                tokens.append(Token(op, line, TokenKind.OPERATOR))
                i += len(op)
                break
        else:
            # unknown character: keep it as a one-char operator token
            tokens.append(Token(ch, line, TokenKind.OPERATOR))
            i += 1

    line_count = 0 if not source else source.count("\n") + (0 if source.endswith("\n") else 1)
    file = TokenizedFile(
        path=path,
        tokens=tuple(tokens),
        line_count=line_count,
        line_types={},
        errors=tuple(errors),
    )
    line_types = {ln: _classify(tokens_on, profile) for ln, tokens_on in _group_by_line(file).items()}
    return TokenizedFile(path, file.tokens, line_count, line_types, tuple(errors))


def _group_by_line(file: TokenizedFile) -> dict[int, list[Token]]:
    by_line: dict[int, list[Token]] = {}
    for tok in file.tokens:
        by_line.setdefault(tok.line, []).append(tok)
    return by_line


def classify_line_type(file: TokenizedFile, line: int) -> LineType:
    """Return the syntactic type of ``line``; error if the line owns no tokens."""
    if line in file.line_types:
        return file.line_types[line]
    raise ValueError(f"no tokens on line {line} of {file.path}")


# Classification is per physical line: first significant token plus a few
# token-shape patterns. Rule order matters; first match wins.
_STMT_KEYWORDS = {
    "import": LineType.IMPORT_DECL,
    "package": LineType.PACKAGE_DECL,
    "if": LineType.IF_STMT,
    "else": LineType.IF_STMT,
    "for": LineType.FOR_STMT,
    "while": LineType.WHILE_STMT,
    "do": LineType.WHILE_STMT,
    "switch": LineType.SWITCH_CASE,
    "case": LineType.SWITCH_CASE,
    "default": LineType.SWITCH_CASE,
    "try": LineType.TRY_STMT,
    "finally": LineType.TRY_STMT,
    "catch": LineType.CATCH_CLAUSE,
    "return": LineType.RETURN_STMT,
    "throw": LineType.THROW_STMT,
}

_TYPE_KEYWORDS = frozenset(
    "boolean byte char short int long float double void var auto struct unsigned signed bool".split()
)

_ASSIGN_OPS = frozenset(
    ("=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=")
)


def _classify(tokens: list[Token], profile: LanguageProfile) -> LineType:
    significant = [t for t in tokens if t.kind is not TokenKind.PUNCTUATION]
    if not significant:
        return LineType.BRACE_ONLY
    # skip a leading closing brace: "} catch (...) {" classifies by "catch"
    head_idx = 0
    while head_idx < len(tokens) and tokens[head_idx].text in "}){":
        head_idx += 1
    head = tokens[head_idx] if head_idx < len(tokens) else tokens[0]

    if head.text == "@":
        return LineType.ANNOTATION
    if head.text == "#" and head_idx + 1 < len(tokens) \
            and tokens[head_idx + 1].text in ("include", "import"):
        return LineType.IMPORT_DECL

    if head.kind is TokenKind.KEYWORD:
        if head.text in ("class", "interface", "enum", "record"):
            return LineType.CLASS_DECL
        if head.text == "synchronized" and head_idx + 1 < len(tokens) \
                and tokens[head_idx + 1].text == "(":
            return LineType.OTHER
        if head.text == "default":
            # switch label only when the line is "default ... :"
            if tokens[-1].text == ":":
                return LineType.SWITCH_CASE
        elif head.text in _STMT_KEYWORDS:
            return _STMT_KEYWORDS[head.text]

    rest = tokens[head_idx:]
    rest_texts = [t.text for t in rest]
    if any(t in ("class", "interface", "enum") for t in rest_texts):
        return LineType.CLASS_DECL

    # strip leading modifiers before shape matching
    body = list(rest)
    has_modifier = False
    while body and body[0].text in profile.modifiers:
        has_modifier = True
        body = body[1:]
    if body and body[0].kind is TokenKind.KEYWORD and body[0].text in _STMT_KEYWORDS:
        return _STMT_KEYWORDS[body[0].text]

    def is_type_start(tok: Token) -> bool:
        return tok.text in _TYPE_KEYWORDS or (
            tok.kind is TokenKind.IDENTIFIER and tok.text[0].isupper()
        )

    has_assign = any(t in _ASSIGN_OPS for t in rest_texts)
    if body:
        # Type name (   -> method or constructor declaration
        # name (        -> call
        # Type name ... -> field/variable declaration
        names = [t for t in body if t.kind in (TokenKind.IDENTIFIER, TokenKind.KEYWORD)]
        paren = next((k for k, t in enumerate(body) if t.text == "("), None)
        if paren is not None and not any(t.text in _ASSIGN_OPS for t in body[:paren]):
            before = [t for t in body[:paren] if t.kind in (TokenKind.IDENTIFIER, TokenKind.KEYWORD)]
            dotted = any(t.text == "." for t in body[:paren])
            if len(before) >= 2 and not dotted and is_type_start(before[0]):
                return LineType.METHOD_DECL
            if len(before) == 1 and has_modifier and before[0].kind is TokenKind.IDENTIFIER \
                    and before[0].text[0].isupper():
                return LineType.METHOD_DECL  # constructor: "public Foo(..."
            if before and not has_assign:
                return LineType.CALL_STMT

        if len(names) >= 2 and is_type_start(body[0]):
            # skip a generic argument list between the type and the name;
            # ">>" / ">>>" lex as single shift operators and close 2 / 3 levels
            k = 1
            if k < len(body) and body[k].text == "<":
                depth = 1
                k += 1
                while k < len(body) and depth > 0:
                    depth += {"<": 1, ">": -1, ">>": -2, ">>>": -3}.get(body[k].text, 0)
                    k += 1
            while k < len(body) and body[k].text in ("[", "]"):
                k += 1
            if k < len(body) and body[k].kind is TokenKind.IDENTIFIER:
                return LineType.FIELD_DECL if has_modifier else LineType.VARIABLE_DECL

    if has_assign:
        return LineType.ASSIGNMENT
    if "(" in rest_texts:
        return LineType.CALL_STMT
    return LineType.OTHER
