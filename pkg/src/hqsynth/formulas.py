"""Multi-valued linear temporal formulas over [0, 1].

The satisfaction value of a formula on an infinite word is a rational in
[0, 1].  Atoms are crisp (0 or 1 depending on letter membership) and the
quality operators mix values: `Min`/`Max` generalize conjunction and
disjunction, `Not` is complementation to 1, `Factor` rescales by a constant
in [0, 1], and `WAvg` takes a convex combination of two subformulas.
`Next` and `Until` keep their usual shapes, with `Until` taking the best
split position (the supremum is attained because only finitely many values
arise).

Surface conveniences (`&`, `|`, `->`, `F`, `G`) are desugared at
construction time, so the core AST has exactly ten node kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .common import parse_fraction


class Formula:
    """Base class for all core AST nodes."""

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children())

    def children(self) -> tuple["Formula", ...]:
        return ()

    def atoms(self) -> frozenset:
        out = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Atom):
                out.add(node.name)
            stack.extend(node.children())
        return frozenset(out)


@dataclass(frozen=True)
class TrueFormula(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FalseFormula(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"!{paren(self.child)}"


@dataclass(frozen=True)
class Min(Formula):
    args: tuple

    def children(self):
        return self.args

    def __str__(self):
        return "min(" + ", ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Max(Formula):
    args: tuple

    def children(self):
        return self.args

    def __str__(self):
        return "max(" + ", ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Factor(Formula):
    lam: Fraction
    child: Formula

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"factor{{{self.lam}}} {paren(self.child)}"


@dataclass(frozen=True)
class WAvg(Formula):
    lam: Fraction
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"wavg{{{self.lam}}}({self.left}, {self.right})"


@dataclass(frozen=True)
class Next(Formula):
    child: Formula

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"X {paren(self.child)}"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left} U {self.right})"


TRUE = TrueFormula()
FALSE = FalseFormula()


def paren(f: Formula) -> str:
    if isinstance(f, (Atom, TrueFormula, FalseFormula, Min, Max, WAvg)):
        return str(f)
    return f"({f})"


def conj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else Min(tuple(args))


def disj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else Max(tuple(args))


def implies(a: Formula, b: Formula) -> Formula:
    return Max((Not(a), b))


def eventually(f: Formula) -> Formula:
    return Until(TRUE, f)


def globally(f: Formula) -> Formula:
    return Not(Until(TRUE, Not(f)))


def next_n(f: Formula, n: int) -> Formula:
    for _ in range(n):
        f = Next(f)
    return f


def is_boolean(f: Formula) -> bool:
    """Syntactic check that only classical connectives appear (no scaling,
    no weighted averaging), which keeps the value in {0,1} on every word."""
    if isinstance(f, (Factor, WAvg)):
        return False
    return all(is_boolean(c) for c in f.children())


# --- parser ---------------------------------------------------------------
#
# Precedence, loosest first: ->  |  &  U  unary.  `->` and `U` associate to
# the right, `&` and `|` flatten into n-ary Min/Max.

_UNARY_WORDS = {"X", "F", "G"}


class ParseError(ValueError):
    pass


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ParseError(f"{msg} at position {self.pos} in {self.text!r}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def try_symbol(self, sym: str) -> bool:
        self.skip_ws()
        if self.text.startswith(sym, self.pos):
            self.pos += len(sym)
            return True
        return False

    def expect(self, sym: str):
        if not self.try_symbol(sym):
            self.error(f"expected {sym!r}")

    def try_word(self, word: str) -> bool:
        self.skip_ws()
        end = self.pos + len(word)
        if self.text.startswith(word, self.pos):
            if end >= len(self.text) or not (self.text[end].isalnum() or self.text[end] == "_"):
                self.pos = end
                return True
        return False

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if start == self.pos:
            self.error("expected an identifier")
        return self.text[start:self.pos]

    def rational(self) -> Fraction:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "/"):
            self.pos += 1
        if start == self.pos:
            self.error("expected a rational literal")
        try:
            return parse_fraction(self.text[start:self.pos])
        except ValueError as exc:
            self.error(str(exc))


def parse(text: str) -> Formula:
    toks = _Tokens(text)
    f = _parse_implies(toks)
    toks.skip_ws()
    if toks.pos != len(toks.text):
        toks.error("trailing input")
    return f


def _parse_implies(toks: _Tokens) -> Formula:
    left = _parse_or(toks)
    if toks.try_symbol("->"):
        return implies(left, _parse_implies(toks))
    return left


def _parse_or(toks: _Tokens) -> Formula:
    parts = [_parse_and(toks)]
    while toks.try_symbol("|"):
        parts.append(_parse_and(toks))
    return disj(*parts)


def _parse_and(toks: _Tokens) -> Formula:
    parts = [_parse_until(toks)]
    while toks.try_symbol("&"):
        parts.append(_parse_until(toks))
    return conj(*parts)


def _parse_until(toks: _Tokens) -> Formula:
    left = _parse_unary(toks)
    if toks.try_word("U"):
        return Until(left, _parse_until(toks))
    return left


def _parse_unary(toks: _Tokens) -> Formula:
    if toks.try_symbol("!"):
        return Not(_parse_unary(toks))
    if toks.try_word("X"):
        return Next(_parse_unary(toks))
    if toks.try_word("F"):
        return eventually(_parse_unary(toks))
    if toks.try_word("G"):
        return globally(_parse_unary(toks))
    if toks.try_word("factor"):
        toks.expect("{")
        lam = toks.rational()
        toks.expect("}")
        _check_lambda(toks, lam)
        return Factor(lam, _parse_unary(toks))
    return _parse_atomic(toks)


def _parse_atomic(toks: _Tokens) -> Formula:
    if toks.try_symbol("("):
        f = _parse_implies(toks)
        toks.expect(")")
        return f
    if toks.try_word("true"):
        return TRUE
    if toks.try_word("false"):
        return FALSE
    if toks.try_word("wavg"):
        toks.expect("{")
        lam = toks.rational()
        toks.expect("}")
        _check_lambda(toks, lam)
        toks.expect("(")
        a = _parse_implies(toks)
        toks.expect(",")
        b = _parse_implies(toks)
        toks.expect(")")
        return WAvg(lam, a, b)
    if toks.try_word("min"):
        return Min(tuple(_parse_args(toks)))
    if toks.try_word("max"):
        return Max(tuple(_parse_args(toks)))
    name = toks.ident()
    if name in _UNARY_WORDS or name in ("U", "factor", "wavg", "min", "max"):
        toks.error(f"operator {name!r} used as an atom")
    return Atom(name)


def _parse_args(toks: _Tokens) -> list:
    toks.expect("(")
    args = [_parse_implies(toks)]
    while toks.try_symbol(","):
        args.append(_parse_implies(toks))
    toks.expect(")")
    if len(args) < 2:
        toks.error("min/max need at least two arguments")
    return args


def _check_lambda(toks: _Tokens, lam: Fraction):
    if not 0 <= lam <= 1:
        toks.error(f"coefficient {lam} outside [0, 1]")


# --- lasso words ----------------------------------------------------------


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word prefix . period^omega."""

    prefix: tuple
    period: tuple
    atoms: frozenset

    def __post_init__(self):
        if not self.period:
            raise ValueError("lasso period must be nonempty")
        for letter in self.prefix + self.period:
            if not letter <= self.atoms:
                raise ValueError(f"letter {set(letter)} uses atoms outside {set(self.atoms)}")

    @staticmethod
    def make(prefix, period, atoms=None) -> "LassoWord":
        prefix = tuple(frozenset(p) for p in prefix)
        period = tuple(frozenset(p) for p in period)
        if atoms is None:
            atoms = frozenset().union(*prefix, *period) if (prefix or period) else frozenset()
        return LassoWord(prefix, period, frozenset(atoms))

    def positions(self) -> int:
        return len(self.prefix) + len(self.period)

    def letter(self, j: int) -> frozenset:
        if j < len(self.prefix):
            return self.prefix[j]
        return self.period[(j - len(self.prefix)) % len(self.period)]

    def succ(self, j: int) -> int:
        """Successor among the finitely many distinct suffix positions."""
        j += 1
        if j >= self.positions():
            return len(self.prefix)
        return j

    def shift(self) -> "LassoWord":
        """The suffix word dropping the first letter."""
        if self.prefix:
            return LassoWord(self.prefix[1:], self.period, self.atoms)
        return LassoWord((), self.period[1:] + self.period[:1], self.atoms)


def eval_lasso(formula: Formula, word: LassoWord) -> Fraction:
    """Exact satisfaction value of `formula` on the lasso word."""
    if not formula.atoms() <= word.atoms:
        missing = set(formula.atoms() - word.atoms)
        raise ValueError(f"word alphabet is missing atoms {missing}")
    n = word.positions()
    memo: dict[Formula, list[Fraction]] = {}

    def vals(f: Formula) -> list[Fraction]:
        got = memo.get(f)
        if got is not None:
            return got
        one, zero = Fraction(1), Fraction(0)
        if isinstance(f, TrueFormula):
            v = [one] * n
        elif isinstance(f, FalseFormula):
            v = [zero] * n
        elif isinstance(f, Atom):
            v = [one if f.name in word.letter(j) else zero for j in range(n)]
        elif isinstance(f, Not):
            v = [1 - x for x in vals(f.child)]
        elif isinstance(f, Min):
            cols = [vals(a) for a in f.args]
            v = [min(c[j] for c in cols) for j in range(n)]
        elif isinstance(f, Max):
            cols = [vals(a) for a in f.args]
            v = [max(c[j] for c in cols) for j in range(n)]
        elif isinstance(f, Factor):
            v = [f.lam * x for x in vals(f.child)]
        elif isinstance(f, WAvg):
            lv, rv = vals(f.left), vals(f.right)
            v = [f.lam * lv[j] + (1 - f.lam) * rv[j] for j in range(n)]
        elif isinstance(f, Next):
            cv = vals(f.child)
            v = [cv[word.succ(j)] for j in range(n)]
        elif isinstance(f, Until):
            v = _until_values(vals(f.left), vals(f.right), word)
        else:
            raise TypeError(f"unknown node {type(f).__name__}")
        memo[f] = v
        return v

    return vals(formula)[0]


def _until_values(left: list, right: list, word: LassoWord) -> list:
    # Iterate v(j) <- max(right(j), min(left(j), v(succ j))) to the fixpoint.
    # Starting from `right` this grows through the finite value lattice and
    # stabilizes once every split position within one wrap has been seen.
    n = word.positions()
    cur = list(right)
    for _ in range(n + len(word.period) + 1):
        nxt = [max(right[j], min(left[j], cur[word.succ(j)])) for j in range(n)]
        if nxt == cur:
            break
        cur = nxt
    return cur


def candidate_values(formula: Formula) -> list[Fraction]:
    """A finite superset of the attainable satisfaction values, sorted.

    Computed structurally: scalar images for pointwise operators, unions for
    the temporal ones (min/max over a set of scalars stays inside the set).
    """
    memo: dict[Formula, frozenset] = {}

    def go(f: Formula) -> frozenset:
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, TrueFormula):
            s = frozenset({Fraction(1)})
        elif isinstance(f, FalseFormula):
            s = frozenset({Fraction(0)})
        elif isinstance(f, Atom):
            s = frozenset({Fraction(0), Fraction(1)})
        elif isinstance(f, Not):
            s = frozenset(1 - v for v in go(f.child))
        elif isinstance(f, Min):
            s = frozenset({Fraction(1)})
            for a in f.args:
                s = frozenset(min(x, y) for x in s for y in go(a))
        elif isinstance(f, Max):
            s = frozenset({Fraction(0)})
            for a in f.args:
                s = frozenset(max(x, y) for x in s for y in go(a))
        elif isinstance(f, Factor):
            s = frozenset(f.lam * v for v in go(f.child))
        elif isinstance(f, WAvg):
            s = frozenset(f.lam * x + (1 - f.lam) * y
                          for x in go(f.left) for y in go(f.right))
        elif isinstance(f, Next):
            s = go(f.child)
        elif isinstance(f, Until):
            s = go(f.left) | go(f.right)
        else:
            raise TypeError(f"unknown node {type(f).__name__}")
        memo[f] = s
        return s

    return sorted(go(formula))


def values(formula: Formula, atoms=None, ceiling: int | None = None) -> list[Fraction]:
    """The attainable satisfaction values, sorted ascending.

    Candidates that no word can realize are pruned with an emptiness check
    on the value automaton for each candidate.
    """
    from . import automata
    from .booleanize import EqualTo

    if atoms is None:
        atoms = formula.atoms()
    out = []
    for v in candidate_values(formula):
        dpw = automata.dpw_for(formula, EqualTo(v), atoms, ceiling=ceiling)
        if automata.dpw_nonempty_from(dpw, dpw.initial):
            out.append(v)
    return out
