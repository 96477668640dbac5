"""Text form of polynomial tuples: "(t1*t2 + 2, t2)", "3/2*b1*t1 - i*t2"."""
import re
from fractions import Fraction
from typing import Optional

from .errors import ParseError, UnknownLetter
from .ncalg import GeneratorSystem, NCPoly
from .scalars import QQi

_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)(?P<imag>i(?![0-9A-Za-z]))?
  | (?P<letter>[tb])(?P<index>\d+)
  | (?P<unit>i(?![0-9A-Za-z]))
  | (?P<op>[-+*(),])
""", re.VERBOSE)


class _Token:
    __slots__ = ("kind", "text", "value", "position")

    def __init__(self, kind, text, value, position):
        self.kind = kind
        self.text = text
        self.value = value
        self.position = position


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError("unexpected character", pos, text[pos])
        if match.group("number"):
            value = QQi(Fraction(match.group("number")))
            if match.group("imag"):
                value = value * QQi(0, 1)
            tokens.append(_Token("scalar", match.group(0), value, pos))
        elif match.group("letter"):
            tokens.append(_Token(match.group("letter"), match.group(0), int(match.group("index")), pos))
        elif match.group("unit"):
            tokens.append(_Token("scalar", "i", QQi(0, 1), pos))
        elif match.group("op"):
            tokens.append(_Token(match.group("op"), match.group("op"), None, pos))
        pos = match.end()
    tokens.append(_Token("end", "", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, system: GeneratorSystem):
        self.tokens = tokenize(text)
        self.system = system
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, kind: str) -> _Token:
        token = self.current
        if token.kind != kind:
            raise ParseError(f"expected {kind!r}", token.position, token.text)
        return self.advance()

    def parse_tuple(self) -> tuple[NCPoly, ...]:
        start = self.index
        if self.current.kind == "(":
            attempt = self._try_parenthesized_tuple()
            if attempt is not None:
                return attempt
            self.index = start
        expr = self.parse_expr()
        self.expect("end")
        return (expr,)

    def _try_parenthesized_tuple(self) -> Optional[tuple[NCPoly, ...]]:
        self.advance()
        items = [self.parse_expr()]
        while self.current.kind == ",":
            self.advance()
            items.append(self.parse_expr())
        self.expect(")")
        if self.current.kind != "end":
            if len(items) > 1:
                raise ParseError("trailing input after tuple", self.current.position, self.current.text)
            return None
        return tuple(items)

    def parse_expr(self) -> NCPoly:
        sign = 1
        if self.current.kind in ("+", "-"):
            sign = -1 if self.advance().kind == "-" else 1
        total = self.parse_term() * sign
        while self.current.kind in ("+", "-"):
            negative = self.advance().kind == "-"
            term = self.parse_term()
            total = total - term if negative else total + term
        return total

    def parse_term(self) -> NCPoly:
        value = self.parse_factor()
        while self.current.kind == "*":
            self.advance()
            value = value * self.parse_factor()
        return value

    def parse_factor(self) -> NCPoly:
        token = self.current
        if token.kind == "scalar":
            self.advance()
            return NCPoly.constant(self.system, token.value)
        if token.kind == "t":
            self.advance()
            try:
                return NCPoly.variable(self.system, token.value - 1)
            except UnknownLetter as exc:
                raise ParseError(str(exc), token.position, token.text) from None
        if token.kind == "b":
            self.advance()
            try:
                return NCPoly.b_element(self.system, token.value - 1)
            except UnknownLetter as exc:
                raise ParseError(str(exc), token.position, token.text) from None
        if token.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise ParseError("expected a scalar, letter or '('", token.position, token.text or "<end>")


def parse_poly(text: str, system: GeneratorSystem) -> tuple[NCPoly, ...]:
    """Parse a polynomial or a parenthesized, comma-separated tuple of them."""
    return _Parser(text, system).parse_tuple()
