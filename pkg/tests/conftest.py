from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from linetropy.lexer import LineType, Token, TokenizedFile, TokenKind

DATA_DIR = Path(__file__).parent / "data"


def make_file(texts, path="f.java", line=None):
    """TokenizedFile from bare token texts; one line unless ``line`` lists them."""
    lines = line if line is not None else [1] * len(texts)
    toks = tuple(Token(t, ln, TokenKind.IDENTIFIER) for t, ln in zip(texts, lines))
    line_types = {ln: LineType.OTHER for ln in lines}
    return TokenizedFile(path, toks, max(lines, default=0), line_types)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR
