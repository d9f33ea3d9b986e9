"""Prescribed curvature families ``H_eps(x, y, z)`` given as expressions.

Grammar (recursive descent, ``^`` binds tighter than unary minus and is right
associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are the variables ``x``, ``y``, ``z``, ``eps`` and the constant ``pi``;
functions are ``cos``, ``sin`` and ``exp``. Error positions are 1-based
character columns.
"""
from dataclasses import dataclass
import re

import numpy as np

from .errors import FieldError
from .quadrature import gl_nodes

VARIABLES = ("x", "y", "z", "eps")
FUNCTIONS = ("cos", "sin", "exp")
CONSTANTS = {"pi": np.pi}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Num:
    value: float

    def evaluate(self, env):
        return self.value

    def diff(self, var):
        return ZERO

    def names(self):
        return frozenset()

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def evaluate(self, env):
        return env[self.name]

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def names(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: object

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def diff(self, var):
        return neg(self.arg.diff(var))

    def names(self):
        return self.arg.names()

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object

    def evaluate(self, env):
        a, b = self.left.evaluate(env), self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return np.power(a, b)

    def diff(self, var):
        l, r = self.left, self.right
        dl, dr = l.diff(var), r.diff(var)
        if self.op == "+":
            return add(dl, dr)
        if self.op == "-":
            return sub(dl, dr)
        if self.op == "*":
            return add(mul(dl, r), mul(l, dr))
        if self.op == "/":
            return div(sub(mul(dl, r), mul(l, dr)), power(r, Num(2.0)))
        if not r.names():
            return mul(mul(r, power(l, sub(r, ONE))), dl)
        # d(l^r) = l^r (r' log l + r l'/l)
        return mul(self, add(mul(dr, Call("log", l)), div(mul(r, dl), l)))

    def names(self):
        return self.left.names() | self.right.names()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp, "log": np.log}


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object

    def evaluate(self, env):
        return _FUNCS[self.fn](self.arg.evaluate(env))

    def diff(self, var):
        du = self.arg.diff(var)
        if du == ZERO:
            return ZERO
        if self.fn == "cos":
            outer = neg(Call("sin", self.arg))
        elif self.fn == "sin":
            outer = Call("cos", self.arg)
        elif self.fn == "exp":
            outer = self
        else:
            outer = div(ONE, self.arg)
        return mul(outer, du)

    def names(self):
        return self.arg.names()

    def __str__(self):
        return f"{self.fn}({self.arg})"


ZERO = Num(0.0)
ONE = Num(1.0)


def _const(node):
    return isinstance(node, Num)


def neg(a):
    return Num(-a.value) if _const(a) else Neg(a)


def add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if _const(a) and _const(b):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def sub(a, b):
    if b == ZERO:
        return a
    if a == ZERO:
        return neg(b)
    if _const(a) and _const(b):
        return Num(a.value - b.value)
    return Bin("-", a, b)


def mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if _const(a) and _const(b):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def div(a, b):
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return Bin("/", a, b)


def power(a, b):
    if b == ONE:
        return a
    if b == ZERO:
        return ONE
    return Bin("^", a, b)


def substitute(node, var, value):
    """Replace variable ``var`` by the constant ``value`` and fold constants."""
    if isinstance(node, Var):
        return Num(float(value)) if node.name == var else node
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return neg(substitute(node.arg, var, value))
    if isinstance(node, Call):
        arg = substitute(node.arg, var, value)
        if _const(arg):
            return Num(float(_FUNCS[node.fn](arg.value)))
        return Call(node.fn, arg)
    left, right = substitute(node.left, var, value), substitute(node.right, var, value)
    if _const(left) and _const(right):
        return Num(float(Bin(node.op, left, right).evaluate({})))
    return {"+": add, "-": sub, "*": mul, "/": div, "^": power}[node.op](left, right)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            match = _TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise FieldError(f"unexpected character {text[bad]!r} at position {bad + 1}", bad + 1)
            kind = match.lastgroup
            start = match.start(kind)
            self.tokens.append((kind, match.group(kind), start + 1))
            pos = match.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text) + 1)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        where = "end of input" if tok[0] == "end" else repr(tok[1])
        raise FieldError(f"{message} at position {tok[2]} (found {where})", tok[2])

    def parse(self):
        if not self.tokens:
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            arg = self.unary()
            return arg if tok[1] == "+" else Neg(arg)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                if self.peek()[1] != "(":
                    self.fail(f"function {text!r} needs a parenthesized argument")
                self.take()
                arg = self.expr()
                if self.peek()[1] != ")":
                    self.fail("expected ')'")
                self.take()
                return Call(text, arg)
            if text in VARIABLES:
                return Var(text)
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            self.fail(f"undefined symbol {text!r}", tok)
        if kind == "op" and text == "(":
            node = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.take()
            return node
        self.fail("expected a number, name or '('", tok)


def parse_expression(text):
    """Parse ``text`` into an expression tree; raises ``FieldError`` with a position."""
    return _Parser(text).parse()


_CHECK_BOX = 2.0
_CHECK_POINTS = 100


def _check_points(seed=20240611):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-_CHECK_BOX, _CHECK_BOX, size=(3, _CHECK_POINTS))
    eps = rng.uniform(-1.0, 1.0, size=_CHECK_POINTS)
    return pts, eps


@dataclass(frozen=True)
class CurvatureField:
    """A family ``H_eps(x, y, z)`` with ``H_0 = 1``.

    Attributes
    ----------
    text : str
        The source expression.
    tree : expression node
    htilde_tree : expression node
        ``dH/deps`` at ``eps = 0``, a function of ``(x, y, z)``.
    form : str
        ``"perturbative"`` when ``H_eps = 1 + eps * htilde`` exactly,
        ``"general"`` otherwise.
    even_in_z : bool
        ``H(x, y, -z) = H(x, y, z)`` on the sample set.
    """

    text: str
    tree: object
    htilde_tree: object
    form: str
    even_in_z: bool

    def __call__(self, eps, x, y, z):
        env = {"eps": eps, "x": x, "y": y, "z": z}
        out = self.tree.evaluate(env)
        return np.broadcast_to(out, np.broadcast(eps, x, y, z).shape) * 1.0

    def htilde(self, x, y, z):
        env = {"eps": 0.0, "x": x, "y": y, "z": z}
        out = self.htilde_tree.evaluate(env)
        return np.broadcast_to(out, np.broadcast(x, y, z).shape) * 1.0

    def depends_on(self, var):
        """Whether the expression tree mentions ``var``."""
        return var in self.tree.names()

    @property
    def perturbative(self):
        return self.form == "perturbative"

    def scaled(self, factor):
        """The field ``1 + eps * factor * htilde`` (perturbative fields only)."""
        require_perturbative(self)
        return parse_field(f"1 + eps*({factor!r})*({self.htilde_tree})")

    def htilde_nonvanishing(self, points):
        """Check ``htilde != 0`` at the given points (shape ``(3, ...)``)."""
        return bool(np.all(self.htilde(*points) != 0.0))


def parse_field(expr, even_in_z=False):
    """Parse and validate a prescribed curvature family.

    Parameters
    ----------
    expr : str
        Expression in ``x, y, z, eps``.
    even_in_z : bool
        Declare ``H`` even in ``z``; verified by sampling.

    Raises
    ------
    FieldError
        On syntax errors (with position), if ``H_0 != 1`` somewhere on the
        sample set, or if a declared evenness fails.
    """
    tree = parse_expression(expr)
    pts, eps = _check_points()
    with np.errstate(all="ignore"):
        h0 = np.broadcast_to(tree.evaluate({"eps": 0.0, "x": pts[0], "y": pts[1], "z": pts[2]}), eps.shape)
        if not np.allclose(h0, 1.0, rtol=0.0, atol=1e-12):
            raise FieldError(f"field {expr!r} violates H_0 = 1 (max deviation {np.max(np.abs(h0 - 1)):.3g})")
        htilde_tree = substitute(tree.diff("eps"), "eps", 0.0)
        env = {"eps": eps, "x": pts[0], "y": pts[1], "z": pts[2]}
        full = np.broadcast_to(tree.evaluate(env), eps.shape)
        linear = 1.0 + eps * np.broadcast_to(htilde_tree.evaluate(env), eps.shape)
        scale = max(1.0, float(np.max(np.abs(full))))
        form = "perturbative" if np.max(np.abs(full - linear)) <= 1e-12 * scale else "general"
        mirrored = np.broadcast_to(tree.evaluate({**env, "z": -pts[2]}), eps.shape)
        even = bool(np.max(np.abs(full - mirrored)) <= 1e-12 * scale)
    if even_in_z and not even:
        raise FieldError(f"field {expr!r} was declared even in z but H(x,y,-z) != H(x,y,z)")
    return CurvatureField(expr, tree, htilde_tree, form, even)


def require_perturbative(field):
    if not field.perturbative:
        raise FieldError(
            f"field {field.text!r} is not of the form 1 + eps*htilde; "
            "Melnikov analysis and Q need a perturbative field"
        )


def eval_Q(field, x, y, z, tol=1e-12, order=16, max_pieces=256):
    """Divergence potential ``Q = (int_0^x h(s,y,z) ds, int_0^y h(x,s,z) ds, 0) / 2``.

    ``h`` is ``htilde``; ``div Q = htilde`` and ``Q . e3 = 0``. Both integrals
    use composite Gauss–Legendre on ``[0, 1]`` after scaling, with the number
    of pieces doubling until the change is below ``tol`` (relative to
    ``max(1, |Q|)``).

    Returns
    -------
    ndarray
        Shape ``broadcast(x, y, z).shape + (3,)``.
    """
    require_perturbative(field)
    x, y, z = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(x, y, z))
    nodes, weights = gl_nodes(order)

    def level(pieces):
        u = ((np.arange(pieces)[:, None] + 0.5 * (nodes[None, :] + 1.0)) / pieces).ravel()
        w = np.tile(weights, pieces) * (0.5 / pieces)
        xs = x[..., None] * u
        ys = y[..., None] * u
        q1 = 0.5 * x * (field.htilde(xs, y[..., None], z[..., None]) @ w)
        q2 = 0.5 * y * (field.htilde(x[..., None], ys, z[..., None]) @ w)
        return np.stack([q1, q2, np.zeros_like(q1)], axis=-1)

    pieces = 1
    prev = level(pieces)
    while pieces < max_pieces:
        pieces *= 2
        cur = level(pieces)
        if np.max(np.abs(cur - prev) / np.maximum(1.0, np.abs(cur)), initial=0.0) <= tol:
            return cur
        prev = cur
    return prev
