"""Scalar expression DSL over chart coordinates.

Expressions define metric and structure components inside manifold spec
files. They are parsed once into an immutable AST and evaluated at chart
points in IEEE double precision; no symbolic differentiation is done here
(derivatives are taken numerically downstream).

Grammar (EBNF):

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;
    atom    = NUMBER | call | name | "(" expr ")" ;
    call    = FUNC "(" expr ")" ;
    NUMBER  = digits [ "." [digits] ] [ ("e"|"E") ["+"|"-"] digits ] ;

Precedence: "^" binds tightest and associates to the right, unary minus
binds above "*" and "/", which bind above "+" and "-".

Names: coordinates are x0 .. x{n-1}; the aliases x, y, z, w map to
x0 .. x3. Constants: pi, e. Functions (one argument each): sin, cos, tan,
exp, ln, sqrt, sinh, cosh.

"^" accepts non-integer exponents only for positive bases; anything else
(and ln/sqrt of a negative number, division by zero) raises a domain
error naming the offending sub-expression. All offsets reported in errors
are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Expr",
    "ParseError",
    "EvalDomainError",
    "parse",
    "FUNCTIONS",
    "CONSTANTS",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "sinh", "cosh")
CONSTANTS = {"pi": math.pi, "e": math.e}
COORD_ALIASES = {"x": 0, "y": 1, "z": 2, "w": 3}


class ParseError(ValueError):
    """Syntax error with a 1-based offset and a description of what was expected."""

    def __init__(self, offset: int, expected: str):
        self.offset = offset
        self.expected = expected
        super().__init__(f"parse error at offset {offset}: expected {expected}")


class EvalDomainError(ArithmeticError):
    """Evaluation left the real domain; carries the offending sub-expression."""

    def __init__(self, message: str, subexpr: str):
        self.subexpr = subexpr
        super().__init__(f"{message} in sub-expression {subexpr!r}")


# --- AST nodes -------------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    def eval(self, point):  # pragma: no cover - overridden
        raise NotImplementedError

    def render(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def max_coord(self) -> int:
        """Largest coordinate index referenced, -1 if none."""
        return -1


@dataclass(frozen=True)
class Lit(_Node):
    value: float

    def eval(self, point):
        return self.value

    def render(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Const(_Node):
    name: str

    def eval(self, point):
        return CONSTANTS[self.name]

    def render(self):
        return self.name


@dataclass(frozen=True)
class Coord(_Node):
    index: int

    def eval(self, point):
        return float(point[self.index])

    def render(self):
        return f"x{self.index}"

    def max_coord(self):
        return self.index


@dataclass(frozen=True)
class Neg(_Node):
    operand: _Node

    def eval(self, point):
        return -self.operand.eval(point)

    def render(self):
        return f"(-{self.operand.render()})"

    def max_coord(self):
        return self.operand.max_coord()


@dataclass(frozen=True)
class Bin(_Node):
    op: str
    left: _Node
    right: _Node

    def eval(self, point):
        a = self.left.eval(point)
        b = self.right.eval(point)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if b == 0.0:
                raise EvalDomainError("division by zero", self.render())
            return a / b
        # "^"
        if a < 0.0 and b != math.floor(b):
            raise EvalDomainError("non-integer power of a negative base", self.render())
        if a == 0.0 and b < 0.0:
            raise EvalDomainError("negative power of zero", self.render())
        return math.pow(a, b)

    def render(self):
        return f"({self.left.render()} {self.op} {self.right.render()})"

    def max_coord(self):
        return max(self.left.max_coord(), self.right.max_coord())


@dataclass(frozen=True)
class Call(_Node):
    func: str
    arg: _Node

    def eval(self, point):
        x = self.arg.eval(point)
        if self.func == "ln":
            if x <= 0.0:
                raise EvalDomainError("logarithm of a non-positive number", self.render())
            return math.log(x)
        if self.func == "sqrt":
            if x < 0.0:
                raise EvalDomainError("square root of a negative number", self.render())
            return math.sqrt(x)
        try:
            return getattr(math, self.func)(x)
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(str(exc), self.render()) from exc

    def render(self):
        return f"{self.func}({self.arg.render()})"

    def max_coord(self):
        return self.arg.max_coord()


class Expr:
    """An immutable parsed expression.

    Pure value object: evaluation has no side effects, so one Expr may be
    evaluated from many threads concurrently.
    """

    __slots__ = ("root", "source")

    def __init__(self, root: _Node, source: str = ""):
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "source", source)

    def __setattr__(self, *_):
        raise AttributeError("Expr is immutable")

    def eval(self, point=()) -> float:
        """Evaluate at a coordinate vector (indexable of floats)."""
        n = self.max_coord() + 1
        if len(point) < n:
            raise ValueError(
                f"expression references x{n - 1} but the point has only"
                f" {len(point)} coordinate(s)"
            )
        return float(self.root.eval(point))

    def render(self) -> str:
        """Fully parenthesized text form; parse(render()) evaluates identically."""
        return self.root.render()

    def max_coord(self) -> int:
        return self.root.max_coord()

    def __repr__(self):
        return f"Expr({self.render()})"


# --- tokenizer -------------------------------------------------------------

_OPS = "+-*/^()"


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op", "eof"
    text: str
    offset: int  # 1-based


def _tokenize(src: str):
    toks = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            toks.append(_Tok("op", c, i + 1))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n and src[j] == ".":
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            toks.append(_Tok("num", src[i:j], i + 1))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(_Tok("name", src[i:j], i + 1))
            i = j
            continue
        raise ParseError(i + 1, f"a valid token, not {c!r}")
    toks.append(_Tok("eof", "", n + 1))
    return toks


# --- recursive descent parser ----------------------------------------------


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def advance(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op: str):
        t = self.peek()
        if t.kind != "op" or t.text != op:
            raise ParseError(t.offset, f"'{op}'")
        return self.advance()

    def parse(self) -> _Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(t.offset, "end of input or an operator")
        return node

    def expr(self) -> _Node:
        node = self.term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in "+-":
                self.advance()
                node = Bin(t.text, node, self.term())
            else:
                return node

    def term(self) -> _Node:
        node = self.unary()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in "*/":
                self.advance()
                node = Bin(t.text, node, self.unary())
            else:
                return node

    def unary(self) -> _Node:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.advance()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> _Node:
        t = self.peek()
        if t.kind == "num":
            self.advance()
            return Lit(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        if t.kind == "name":
            self.advance()
            return self.name_atom(t)
        raise ParseError(t.offset, "a number, name or '('")

    def name_atom(self, t: _Tok) -> _Node:
        name = t.text
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "(":
            if name not in FUNCTIONS:
                raise ParseError(t.offset, f"a function name, not {name!r}")
            self.advance()
            arg = self.expr()
            after = self.peek()
            if after.kind == "op" and after.text == ",":  # pragma: no cover
                raise ParseError(after.offset, "')' (functions take one argument)")
            self.expect_op(")")
            return Call(name, arg)
        if name in CONSTANTS:
            return Const(name)
        if name in COORD_ALIASES:
            return Coord(COORD_ALIASES[name])
        if name[0] == "x" and name[1:].isdigit():
            return Coord(int(name[1:]))
        if name in FUNCTIONS:
            raise ParseError(self.peek().offset, f"'(' after function {name!r}")
        raise ParseError(t.offset, f"a known symbol, not {name!r}")


def parse(src: str) -> Expr:
    """Parse DSL text into an Expr; raises ParseError with a 1-based offset."""
    return Expr(_Parser(src).parse(), src)
