"""Reduction of value predicates on quality formulas to Boolean LTL.

`booleanize(f, AtLeast(v))` builds a crisp formula that holds on exactly
the words where f's satisfaction value reaches v.  The two threshold
recursions are mutually recursive because complementation to 1 swaps
"at least" with the dual "strictly above".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import formulas
from .formulas import (
    Atom,
    FalseFormula,
    Factor,
    Formula,
    Max,
    Min,
    Next,
    Not,
    TrueFormula,
    Until,
    WAvg,
    candidate_values,
)


# --- Boolean expression nodes --------------------------------------------


class BExpr:
    def children(self) -> tuple["BExpr", ...]:
        return ()


@dataclass(frozen=True)
class BTrue(BExpr):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class BFalse(BExpr):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class BAtom(BExpr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BNot(BExpr):
    child: BExpr

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"!({self.child})"


@dataclass(frozen=True)
class BAnd(BExpr):
    args: tuple

    def children(self):
        return self.args

    def __str__(self):
        return "(" + " & ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class BOr(BExpr):
    args: tuple

    def children(self):
        return self.args

    def __str__(self):
        return "(" + " | ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class BNext(BExpr):
    child: BExpr

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"X ({self.child})"


@dataclass(frozen=True)
class BUntil(BExpr):
    left: BExpr
    right: BExpr

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left} U {self.right})"


B_TRUE = BTrue()
B_FALSE = BFalse()


def bnot(e: BExpr) -> BExpr:
    if isinstance(e, BTrue):
        return B_FALSE
    if isinstance(e, BFalse):
        return B_TRUE
    if isinstance(e, BNot):
        return e.child
    return BNot(e)


def band(*parts: BExpr) -> BExpr:
    flat: list[BExpr] = []
    for p in parts:
        if isinstance(p, BFalse):
            return B_FALSE
        if isinstance(p, BTrue):
            continue
        if isinstance(p, BAnd):
            flat.extend(p.args)
        else:
            flat.append(p)
    seen: list[BExpr] = []
    for p in flat:
        if p not in seen:
            seen.append(p)
    if not seen:
        return B_TRUE
    if len(seen) == 1:
        return seen[0]
    return BAnd(tuple(seen))


def bor(*parts: BExpr) -> BExpr:
    flat: list[BExpr] = []
    for p in parts:
        if isinstance(p, BTrue):
            return B_TRUE
        if isinstance(p, BFalse):
            continue
        if isinstance(p, BOr):
            flat.extend(p.args)
        else:
            flat.append(p)
    seen: list[BExpr] = []
    for p in flat:
        if p not in seen:
            seen.append(p)
    if not seen:
        return B_FALSE
    if len(seen) == 1:
        return seen[0]
    return BOr(tuple(seen))


def bnext(e: BExpr) -> BExpr:
    if isinstance(e, (BTrue, BFalse)):
        return e
    return BNext(e)


def buntil(left: BExpr, right: BExpr) -> BExpr:
    if isinstance(right, (BTrue, BFalse)):
        return right
    if isinstance(left, BFalse):
        return right
    return BUntil(left, right)


def to_formula(e: BExpr) -> Formula:
    """Embed a Boolean expression back into the quality syntax.

    The image only takes values 0 and 1, so a lasso evaluation equal to 1
    is the same as Boolean satisfaction.  Used by tests as an oracle.
    """
    if isinstance(e, BTrue):
        return formulas.TRUE
    if isinstance(e, BFalse):
        return formulas.FALSE
    if isinstance(e, BAtom):
        return Atom(e.name)
    if isinstance(e, BNot):
        return Not(to_formula(e.child))
    if isinstance(e, BAnd):
        return formulas.conj(*[to_formula(a) for a in e.args])
    if isinstance(e, BOr):
        return formulas.disj(*[to_formula(a) for a in e.args])
    if isinstance(e, BNext):
        return Next(to_formula(e.child))
    if isinstance(e, BUntil):
        return Until(to_formula(e.left), to_formula(e.right))
    raise TypeError(f"unknown node {type(e).__name__}")


# --- value predicates ----------------------------------------------------


@dataclass(frozen=True)
class AtLeast:
    bound: Fraction

    def holds(self, x: Fraction) -> bool:
        return x >= self.bound

    def __str__(self):
        return f">={self.bound}"


@dataclass(frozen=True)
class GreaterThan:
    bound: Fraction

    def holds(self, x: Fraction) -> bool:
        return x > self.bound

    def __str__(self):
        return f">{self.bound}"


@dataclass(frozen=True)
class EqualTo:
    bound: Fraction

    def holds(self, x: Fraction) -> bool:
        return x == self.bound

    def __str__(self):
        return f"={self.bound}"


def booleanize(f: Formula, predicate) -> BExpr:
    if isinstance(predicate, AtLeast):
        return _at_least(f, Fraction(predicate.bound))
    if isinstance(predicate, GreaterThan):
        return _greater(f, Fraction(predicate.bound))
    if isinstance(predicate, EqualTo):
        v = Fraction(predicate.bound)
        return band(_at_least(f, v), bnot(_greater(f, v)))
    raise TypeError(f"unknown predicate {predicate!r}")


def _at_least(f: Formula, v: Fraction) -> BExpr:
    if v <= 0:
        return B_TRUE
    if v > 1:
        return B_FALSE
    # 0 < v <= 1 from here on.
    if isinstance(f, TrueFormula):
        return B_TRUE
    if isinstance(f, FalseFormula):
        return B_FALSE
    if isinstance(f, Atom):
        return BAtom(f.name)
    if isinstance(f, Not):
        return bnot(_greater(f.child, 1 - v))
    if isinstance(f, Min):
        return band(*[_at_least(a, v) for a in f.args])
    if isinstance(f, Max):
        return bor(*[_at_least(a, v) for a in f.args])
    if isinstance(f, Factor):
        if f.lam == 0:
            return B_FALSE
        return _at_least(f.child, v / f.lam)
    if isinstance(f, WAvg):
        return _avg_threshold(f, v, strict=False)
    if isinstance(f, Next):
        return bnext(_at_least(f.child, v))
    if isinstance(f, Until):
        return buntil(_at_least(f.left, v), _at_least(f.right, v))
    raise TypeError(f"unknown node {type(f).__name__}")


def _greater(f: Formula, v: Fraction) -> BExpr:
    if v < 0:
        return B_TRUE
    if v >= 1:
        return B_FALSE
    # 0 <= v < 1 from here on.
    if isinstance(f, TrueFormula):
        return B_TRUE
    if isinstance(f, FalseFormula):
        return B_FALSE
    if isinstance(f, Atom):
        return BAtom(f.name)
    if isinstance(f, Not):
        return bnot(_at_least(f.child, 1 - v))
    if isinstance(f, Min):
        return band(*[_greater(a, v) for a in f.args])
    if isinstance(f, Max):
        return bor(*[_greater(a, v) for a in f.args])
    if isinstance(f, Factor):
        if f.lam == 0:
            return B_FALSE
        return _greater(f.child, v / f.lam)
    if isinstance(f, WAvg):
        return _avg_threshold(f, v, strict=True)
    if isinstance(f, Next):
        return bnext(_greater(f.child, v))
    if isinstance(f, Until):
        return buntil(_greater(f.left, v), _greater(f.right, v))
    raise TypeError(f"unknown node {type(f).__name__}")


def _avg_threshold(f: WAvg, v: Fraction, strict: bool) -> BExpr:
    # The average clears the bound iff some pair of attainable child values
    # does, and both children reach their half of that pair.  Enumerating a
    # superset of the attainable values is still sound: extra pairs only
    # add disjuncts that imply one already present.
    if f.lam == 1:
        return _greater(f.left, v) if strict else _at_least(f.left, v)
    if f.lam == 0:
        return _greater(f.right, v) if strict else _at_least(f.right, v)
    pairs = []
    for x in candidate_values(f.left):
        for y in candidate_values(f.right):
            mixed = f.lam * x + (1 - f.lam) * y
            if mixed > v or (not strict and mixed == v):
                pairs.append((x, y))
    minimal = [p for p in pairs
               if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in pairs)]
    return bor(*[band(_at_least(f.left, x), _at_least(f.right, y))
                 for x, y in sorted(minimal)])
