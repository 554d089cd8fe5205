"""Tokenizer shared by the model, rule, and sequence parsers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SourceError

# Longest symbols first so maximal munch picks "-->" over "->" over "-".
SYMBOLS = [
    "-->", ";>", "::", "==", "!=", "<=", ">=", "&&", "||", "->",
    "{", "}", "(", ")", "[", "]", "<", ">", ";", ":", ",", ".",
    "=", "+", "-", "*", "/", "%", "!", "&", "|",
]

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Loc:
    """Position in a source file; line/col are 1-based."""

    file: str | None = None
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        prefix = f"{self.file}:" if self.file else ""
        return f"{prefix}{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | FLOAT | STRING | SYM | EOF
    text: str
    value: object = field(compare=False)
    loc: Loc = field(compare=False)


def tokenize(text: str, filename: str | None = None,
             origin: list[tuple[str, int]] | None = None) -> list[Token]:
    """Turn source text into a token list ending in EOF.

    `origin`, when given, maps each 0-based physical line of `text` to a
    (filename, line) pair; used for spliced #include bodies.
    """
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def loc_at(ln: int, cl: int) -> Loc:
        if origin is not None and 0 <= ln - 1 < len(origin):
            fn, real = origin[ln - 1]
            return Loc(fn, real, cl)
        return Loc(filename, ln, cl)

    def fail(msg: str, ln: int, cl: int):
        at = loc_at(ln, cl)
        raise SourceError(msg, at.line, at.col, at.file)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                fail("unterminated block comment", line, col)
            for k in range(i, j + 2):
                if text[k] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = j + 2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token("IDENT", word, word, loc_at(line, col)))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tok = text[i:j]
                tokens.append(Token("FLOAT", tok, float(tok), loc_at(line, col)))
            else:
                tok = text[i:j]
                tokens.append(Token("INT", tok, int(tok), loc_at(line, col)))
            col += j - i
            i = j
            continue
        if c == '"':
            start_line, start_col = line, col
            j = i + 1
            out = []
            while True:
                if j >= n or text[j] == "\n":
                    fail("unterminated string literal", start_line, start_col)
                ch = text[j]
                if ch == "\\":
                    if j + 1 >= n or text[j + 1] not in _ESCAPES:
                        fail("unknown string escape", line, col + (j - i))
                    out.append(_ESCAPES[text[j + 1]])
                    j += 2
                    continue
                if ch == '"':
                    j += 1
                    break
                out.append(ch)
                j += 1
            tokens.append(Token("STRING", text[i:j], "".join(out),
                                loc_at(start_line, start_col)))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, sym, loc_at(line, col)))
                i += len(sym)
                col += len(sym)
                break
        else:
            fail(f"unexpected character {c!r}", line, col)
    tokens.append(Token("EOF", "", None, loc_at(line, col)))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual peek/expect helpers."""

    def __init__(self, tokens: list[Token],
                 error_cls: type[SourceError] = SourceError):
        self._toks = tokens
        self._pos = 0
        self._error_cls = error_cls

    def peek(self, ahead: int = 0) -> Token:
        return self._toks[min(self._pos + ahead, len(self._toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self._pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_sym(self, text: str) -> bool:
        return self.at("SYM", text)

    def at_word(self, word: str) -> bool:
        return self.at("IDENT", word)

    def accept_sym(self, text: str) -> bool:
        if self.at_sym(text):
            self.next()
            return True
        return False

    def accept_word(self, word: str) -> bool:
        if self.at_word(word):
            self.next()
            return True
        return False

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            wanted = text if text is not None else kind.lower()
            got = tok.text or "end of input"
            self.error(f"expected {wanted!r}, got {got!r}", tok)
        return self.next()

    def expect_sym(self, text: str) -> Token:
        return self.expect("SYM", text)

    def expect_word(self, word: str) -> Token:
        return self.expect("IDENT", word)

    def expect_ident(self) -> Token:
        return self.expect("IDENT")

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise self._error_cls(message, tok.loc.line, tok.loc.col, tok.loc.file)
