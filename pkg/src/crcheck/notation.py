"""Parsing and printing for the tensor expression language.

Grammar:

    expr    := ['-'] term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := INT | 'i' | DIM | '(' expr ')'
             | 'conj' '(' expr ')' | 'Re' '(' expr ')' | atom
    atom    := HEAD ('^' ['-'] INT)? ('[' idxlist? (';' idxlist)? ']')?
    idx     := LETTER '~'? | '0'
    rule    := expr '=>' expr

The dimension symbol is ``m`` in cr mode and ``n`` in riemannian mode;
``i``, ``m`` and ``n`` are reserved and may not be used as index
letters.  Indices before the ';' are a tensor's own slots, indices
after it form the covariant derivative tail.  '~' marks a conjugate
(antiholomorphic) index and is meaningless in riemannian mode.  The
divisor of '/' must be a pure coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .coeff import COEFF_I, COEFF_ONE, Coeff
from .errors import CatalogError, SourceSyntaxError
from .expr import (
    REEB,
    Atom,
    Expression,
    Index,
    License,
    Monomial,
    antihol,
    build_expression,
    conjugate,
    heads_for,
    hol,
    multiply,
    real,
    real_part,
    scale,
)

_RESERVED_LETTERS = frozenset("imn")
_WORD_SYMBOLS = ("=>",)
_SYMBOLS = frozenset("+-*/^()[];,~")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "int" | "ident" | "sym" | "end"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    k = 0
    n = len(text)
    while k < n:
        ch = text[k]
        if ch == "\n":
            line += 1
            col = 1
            k += 1
            continue
        if ch in " \t\r":
            k += 1
            col += 1
            continue
        start_col = col
        two = text[k : k + 2]
        if two in _WORD_SYMBOLS:
            toks.append(Token("sym", two, line, start_col))
            k += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            toks.append(Token("sym", ch, line, start_col))
            k += 1
            col += 1
            continue
        if ch.isdigit():
            j = k
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[k:j], line, start_col))
            col += j - k
            k = j
            continue
        if ch.isalpha():
            j = k
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[k:j], line, start_col))
            col += j - k
            k = j
            continue
        raise SourceSyntaxError(f"unexpected character {ch!r}", line, start_col)
    toks.append(Token("end", "", line, col))
    return toks


class _Parser:
    def __init__(self, mode: str, tokens: list[Token], licenses: frozenset[License]):
        self.mode = mode
        self.toks = tokens
        self.k = 0
        self.licenses = licenses
        self.heads = heads_for(mode)
        self.dim_symbol = "m" if mode == "cr" else "n"

    def peek(self) -> Token:
        return self.toks[self.k]

    def advance(self) -> Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def at_sym(self, s: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == s

    def expect_sym(self, s: str) -> Token:
        if not self.at_sym(s):
            t = self.peek()
            raise SourceSyntaxError(f"expected {s!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def fail(self, message: str) -> SourceSyntaxError:
        t = self.peek()
        return SourceSyntaxError(message, t.line, t.col)

    # ---- grammar ----

    def expression(self) -> Expression:
        negate = False
        if self.at_sym("-"):
            self.advance()
            negate = True
        e = self.term()
        if negate:
            e = scale(e, Coeff.rational(-1))
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> Expression:
        e = self.factor()
        while self.at_sym("*") or self.at_sym("/"):
            op = self.advance()
            f = self.factor()
            if op.text == "*":
                e = multiply(e, f, self.licenses)
            else:
                c = as_coefficient(f)
                if c is None or c.is_zero():
                    raise SourceSyntaxError(
                        "divisor must be a nonzero pure coefficient", op.line, op.col
                    )
                e = scale(e, COEFF_ONE / c)
        return e

    def factor(self) -> Expression:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return _const(self.mode, Coeff.rational(int(t.text)))
        if t.kind == "sym" and t.text == "(":
            self.advance()
            e = self.expression()
            self.expect_sym(")")
            return e
        if t.kind == "ident":
            if t.text == "conj":
                self.advance()
                self.expect_sym("(")
                e = self.expression()
                self.expect_sym(")")
                return conjugate(e, self.licenses)
            if t.text == "Re":
                self.advance()
                self.expect_sym("(")
                e = self.expression()
                self.expect_sym(")")
                return real_part(e, self.licenses)
            if t.text == "i":
                self.advance()
                return _const(self.mode, COEFF_I)
            if t.text == self.dim_symbol:
                self.advance()
                return _const(self.mode, Coeff.dim())
            if t.text in self.heads:
                return self.atom()
            raise self.fail(f"unknown head {t.text!r} in {self.mode} mode")
        raise self.fail(f"unexpected {t.text or 'end of input'!r}")

    def atom(self) -> Expression:
        head_tok = self.advance()
        power = 1
        if self.at_sym("^"):
            self.advance()
            sign = 1
            if self.at_sym("-"):
                self.advance()
                sign = -1
            p = self.peek()
            if p.kind != "int":
                raise self.fail("expected an integer exponent")
            self.advance()
            power = sign * int(p.text)
        primary: tuple[Index, ...] = ()
        deriv: tuple[Index, ...] = ()
        if self.at_sym("["):
            self.advance()
            primary = self.index_list()
            if self.at_sym(";"):
                self.advance()
                deriv = self.index_list()
            self.expect_sym("]")
        atom = Atom(head_tok.text, primary, deriv, power)
        return build_expression(self.mode, [(COEFF_ONE, (atom,))], self.licenses)

    def index_list(self) -> tuple[Index, ...]:
        out: list[Index] = []
        while not (self.at_sym("]") or self.at_sym(";")):
            out.append(self.index())
            if self.at_sym(","):
                self.advance()
            else:
                break
        return tuple(out)

    def index(self) -> Index:
        t = self.peek()
        if t.kind == "int" and t.text == "0":
            self.advance()
            return REEB
        if t.kind != "ident" or len(t.text) != 1 or not t.text.islower():
            raise self.fail(f"expected an index letter or 0, found {t.text or 'end of input'!r}")
        if t.text in _RESERVED_LETTERS:
            raise self.fail(f"{t.text!r} is reserved and cannot be an index letter")
        self.advance()
        if self.at_sym("~"):
            self.advance()
            if self.mode != "cr":
                raise self.fail("'~' indices only exist in cr mode")
            return antihol(t.text)
        return hol(t.text) if self.mode == "cr" else real(t.text)


def _const(mode: str, c: Coeff) -> Expression:
    if c.is_zero():
        return Expression(mode, ())
    return Expression(mode, (Monomial(c, ()),))


def as_coefficient(e: Expression) -> Coeff | None:
    """The expression's value as a pure coefficient, or None."""
    if not e.terms:
        return Coeff.rational(0)
    if len(e.terms) == 1 and not e.terms[0].atoms:
        return e.terms[0].coeff
    return None


def parse_expression(
    mode: str, text: str, licenses: frozenset[License] = frozenset()
) -> Expression:
    parser = _Parser(mode, tokenize(text), licenses)
    e = parser.expression()
    t = parser.peek()
    if t.kind != "end":
        raise SourceSyntaxError(f"trailing input starting at {t.text!r}", t.line, t.col)
    return e


def parse_coefficient(mode: str, text: str) -> Coeff:
    c = as_coefficient(parse_expression(mode, text))
    if c is None:
        raise SourceSyntaxError(f"{text!r} is not a pure coefficient", 1, 1)
    return c


def parse_rule(
    mode: str, text: str, licenses: frozenset[License] = frozenset()
) -> tuple[Expression, Expression]:
    toks = tokenize(text)
    split = [k for k, t in enumerate(toks) if t.kind == "sym" and t.text == "=>"]
    if len(split) != 1:
        raise SourceSyntaxError("a rule needs exactly one '=>'", 1, 1)
    k = split[0]
    lhs_toks = toks[:k] + [Token("end", "", toks[k].line, toks[k].col)]
    left = _Parser(mode, lhs_toks, licenses)
    lhs = left.expression()
    if left.peek().kind != "end":
        t = left.peek()
        raise SourceSyntaxError(f"trailing input before '=>' at {t.text!r}", t.line, t.col)
    right = _Parser(mode, toks, licenses)
    right.k = k + 1
    rhs = right.expression()
    t = right.peek()
    if t.kind != "end":
        raise SourceSyntaxError(f"trailing input starting at {t.text!r}", t.line, t.col)
    return lhs, rhs


# ---- printing ----


def _format_index(ix: Index) -> str:
    if ix.cls == "0":
        return "0"
    if ix.cls == "a":
        return ix.name + "~"
    return ix.name


def format_atom(a: Atom) -> str:
    s = a.head
    if a.power != 1:
        s += f"^{a.power}"
    if a.primary or a.deriv:
        s += "["
        s += ",".join(_format_index(ix) for ix in a.primary)
        if a.deriv:
            s += ";" + ",".join(_format_index(ix) for ix in a.deriv)
        s += "]"
    return s


def _wrap_coefficient(s: str) -> str:
    depth = 0
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == " " and depth == 0:
            return "(" + s + ")"
    return s


def _term_body(mode: str, coeff: Coeff, atoms: tuple[Atom, ...]) -> str:
    symbol = "m" if mode == "cr" else "n"
    if not atoms:
        return coeff.format(symbol)
    astr = "*".join(format_atom(a) for a in atoms)
    if coeff.is_one():
        return astr
    return _wrap_coefficient(coeff.format(symbol)) + "*" + astr


def format_expression(e: Expression) -> str:
    if not e.terms:
        return "0"
    minus_one = Coeff.rational(-1)
    parts: list[str] = []
    for k, t in enumerate(e.terms):
        neg = t.coeff.negates_leading()
        mag = t.coeff * minus_one if neg else t.coeff
        body = _term_body(e.mode, mag, t.atoms)
        if k == 0:
            parts.append("-" + body if neg else body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def format_rule(lhs: Expression, rhs: Expression) -> str:
    return f"{format_expression(lhs)} => {format_expression(rhs)}"


# ---- data files ----

_MODE_HEADER = {"cr": "cr", "riemannian": "riem"}


def read_data_file(path: str | Path) -> tuple[str, list[tuple[int, list[str]]]]:
    """Read a catalog or identity file.

    Returns the internal mode name and the non-comment entries as
    (line number, pipe-separated fields).  A trailing backslash joins
    the next physical line.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as err:
        raise CatalogError(f"cannot read {path}: {err}") from err
    mode: str | None = None
    entries: list[tuple[int, list[str]]] = []
    pending = ""
    pending_line = 0
    for lineno, physical in enumerate(raw.splitlines(), 1):
        line = physical.split("#", 1)[0].rstrip()
        if pending:
            line = pending + " " + line.strip()
            lineno = pending_line
            pending = ""
        if line.endswith("\\"):
            pending = line[:-1].rstrip()
            pending_line = lineno
            continue
        line = line.strip()
        if not line:
            continue
        if mode is None:
            if not line.startswith("mode:"):
                raise CatalogError(f"{path}:{lineno}: expected a 'mode:' header first")
            name = line[len("mode:") :].strip()
            if name not in _MODE_HEADER:
                raise CatalogError(f"{path}:{lineno}: unknown mode {name!r}")
            mode = _MODE_HEADER[name]
            continue
        entries.append((lineno, [f.strip() for f in line.split("|")]))
    if pending:
        raise CatalogError(f"{path}:{pending_line}: dangling line continuation")
    if mode is None:
        raise CatalogError(f"{path}: missing 'mode:' header")
    return mode, entries
