"""Reader and printer for the parenthesized surface syntax of language
definitions.  Square brackets are interchangeable with parentheses and
``;`` starts a comment running to end of line."""

from __future__ import annotations

from dataclasses import dataclass


class ReadError(Exception):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Symbol:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Char:
    value: str

    def __repr__(self):
        return f"#\\{self.value}"


# An s-expression is one of: Symbol, Char, str, int, bool, or SList.


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = 0
    col: int = 0

    def __repr__(self):
        return "(" + " ".join(repr(i) for i in self.items) + ")"

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]


SExpr = object

_DELIMS = "()[]"
_NAMED_CHARS = {"space": " ", "newline": "\n", "tab": "\t"}


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def error(self, msg, line=None, col=None):
        raise ReadError(msg, line if line is not None else self.line, col if col is not None else self.col)

    def peek(self):
        return self.text[self.i] if self.i < len(self.text) else ""

    def advance(self):
        c = self.text[self.i]
        self.i += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_blank(self):
        while self.i < len(self.text):
            c = self.peek()
            if c == ";":
                while self.i < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif c.isspace():
                self.advance()
            else:
                return

    def read_all(self):
        forms = []
        while True:
            self.skip_blank()
            if self.i >= len(self.text):
                return forms
            forms.append(self.read())

    def read(self):
        self.skip_blank()
        if self.i >= len(self.text):
            self.error("unexpected end of input")
        c = self.peek()
        if c in "([":
            return self.read_list()
        if c in ")]":
            self.error(f"unbalanced {c!r}")
        if c == '"':
            return self.read_string()
        if c == "#":
            return self.read_hash()
        return self.read_token()

    def read_list(self):
        line, col = self.line, self.col
        opener = self.advance()
        closer = ")" if opener == "(" else "]"
        items = []
        while True:
            self.skip_blank()
            if self.i >= len(self.text):
                self.error(f"unclosed {opener!r}", line, col)
            c = self.peek()
            if c in ")]":
                if c != closer:
                    self.error(f"mismatched {c!r} closing {opener!r}")
                self.advance()
                return SList(tuple(items), line, col)
            items.append(self.read())

    def read_string(self):
        line, col = self.line, self.col
        self.advance()
        out = []
        while True:
            if self.i >= len(self.text):
                self.error("unterminated string", line, col)
            c = self.advance()
            if c == '"':
                return "".join(out)
            if c == "\\":
                if self.i >= len(self.text):
                    self.error("unterminated string", line, col)
                esc = self.advance()
                out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
            else:
                out.append(c)

    def read_hash(self):
        line, col = self.line, self.col
        self.advance()
        c = self.peek()
        if c == "\\":
            self.advance()
            if self.i >= len(self.text):
                self.error("bad character literal", line, col)
            first = self.advance()
            name = first
            while self.peek() and not self.peek().isspace() and self.peek() not in _DELIMS:
                name += self.advance()
            if len(name) == 1:
                return Char(name)
            if name in _NAMED_CHARS:
                return Char(_NAMED_CHARS[name])
            self.error(f"bad character literal #\\{name}", line, col)
        if c in ("t", "f"):
            self.advance()
            if self.peek() and not self.peek().isspace() and self.peek() not in _DELIMS:
                self.error("bad # literal", line, col)
            return c == "t"
        self.error("bad # literal", line, col)

    def read_token(self):
        tok = ""
        while self.i < len(self.text):
            c = self.peek()
            if c.isspace() or c in _DELIMS or c == ";":
                break
            tok += self.advance()
        try:
            return int(tok)
        except ValueError:
            return Symbol(tok)


def read_sexpr(text: str) -> list:
    """Read every form in ``text``."""
    return _Reader(text).read_all()


def read_one(text: str):
    forms = read_sexpr(text)
    if len(forms) != 1:
        raise ReadError(f"expected one form, got {len(forms)}", 1, 1)
    return forms[0]


def _escape_string(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def print_sexpr(form) -> str:
    if isinstance(form, SList):
        return "(" + " ".join(print_sexpr(i) for i in form.items) + ")"
    if isinstance(form, Symbol):
        return form.name
    if isinstance(form, Char):
        inverse = {v: k for k, v in _NAMED_CHARS.items()}
        if form.value in inverse:
            return f"#\\{inverse[form.value]}"
        return f"#\\{form.value}"
    if isinstance(form, bool):
        return "#t" if form else "#f"
    if isinstance(form, int):
        return str(form)
    if isinstance(form, str):
        return f'"{_escape_string(form)}"'
    raise TypeError(f"not an s-expression: {form!r}")
