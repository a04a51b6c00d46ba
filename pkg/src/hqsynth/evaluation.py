"""Exact evaluation of transducers against quantitative temporal formulas.

The workhorse is a product Markov chain: the transducer driven by the input
process, tracked by one deterministic parity automaton per attainable value
(plus one for the assumption, when conditioning).  Every run is absorbed
into an ergodic component, each ergodic component is accepted by exactly
one value automaton, and absorption probabilities are computed by an exact
linear solve.  Expected, conditional, and almost-sure values all read off
that decomposition with Fraction arithmetic throughout.

Worst-case evaluation is adversarial instead of stochastic: a parity lasso
search over the product of the transducer with each value automaton, in
ascending value order.

Input processes are output-dependent in general, which creates a chicken
and egg problem: the process needs the current output letter before the
input is drawn, but a transducer's output may depend on the input just
read.  Evaluation therefore requires either a process whose rows ignore
the output or a transducer whose successors of each state share one label;
anything else is rejected rather than silently approximated.
"""

from __future__ import annotations

from fractions import Fraction

from .booleanize import AtLeast, EqualTo
from .common import (
    InternalConsistencyError,
    StateLimitExceeded,
    all_letters,
    state_ceiling,
    strongly_connected_components,
)
from .automata import dpw_for
from .formulas import Formula, LassoWord, eval_lasso, is_boolean, values
from .mdp import DistributionMDP, MarkovChain, mc_ergodic_analysis
from .transducers import Transducer, computation_lasso


class AssumptionHasZeroProbability(ValueError):
    """Conditioning on a probability-zero assumption is undefined."""


def _check_alphabets(T: Transducer, formula: Formula, dist):
    if not formula.atoms() <= T.inputs | T.outputs:
        raise ValueError("formula uses atoms the transducer does not carry")
    if dist is not None:
        if dist.inputs != T.inputs or dist.outputs != T.outputs:
            raise ValueError("input process and transducer disagree on alphabets")


def _branches(T: Transducer, dist, t, sd):
    """One step of the driven transducer: (t', sd', full letter, probability).

    Uniform inputs when dist is None.  Otherwise the process must be told
    the output letter before the draw; see the module docstring.
    """
    if dist is None:
        letters = all_letters(T.inputs)
        p = Fraction(1, len(letters))
        out = []
        for i in letters:
            t2 = T.delta[(t, i)]
            out.append((t2, None, i | T.labels[t2], p))
        return out
    committed = {T.labels[T.delta[(t, i)]] for i in all_letters(T.inputs)}
    if len(committed) == 1:
        rows = dist.rows(sd, next(iter(committed)))
    else:
        base = dist.rows(sd, frozenset())
        for o in all_letters(T.outputs):
            if dist.rows(sd, o) != base:
                raise ValueError(
                    "output-sensitive input process needs outputs committed one "
                    "step ahead: all successors of a transducer state must share "
                    "a label")
        rows = base
    out = []
    for sd2, p in rows:
        if p == 0:
            continue
        i = dist.label(sd2)
        t2 = T.delta[(t, i)]
        out.append((t2, sd2, i | T.labels[t2], p))
    return out


def product_chain(T: Transducer, automata, dist=None, ceiling=None) -> MarkovChain:
    """The chain over (transducer state, automaton state tuple, process state);
    the last entry is None under uniform inputs."""
    limit = state_ceiling(ceiling)
    init = (T.initial,
            tuple(a.initial for a in automata),
            dist.initial if dist is not None else None)
    states = [init]
    index = {init: 0}
    rows = []
    k = 0
    while k < len(states):
        t, qs, sd = states[k]
        acc: dict[int, Fraction] = {}
        for t2, sd2, letter, p in _branches(T, dist, t, sd):
            succ = (t2, tuple(a.step(q, letter) for a, q in zip(automata, qs)), sd2)
            j = index.get(succ)
            if j is None:
                j = index[succ] = len(states)
                states.append(succ)
                if len(states) > limit:
                    raise StateLimitExceeded("evaluation product", limit)
            acc[j] = acc.get(j, Fraction(0)) + p
        rows.append(tuple(sorted(acc.items())))
        k += 1
    return MarkovChain(states, 0, rows)


def _component_accepts(chain: MarkovChain, comp, pos: int, dpw) -> bool:
    # the automaton's states visited infinitely often are exactly its
    # projections of the ergodic component
    top = max(dpw.rank[chain.labels[s][1][pos]] for s in comp)
    return top % 2 == 0


def _classify(chain: MarkovChain, bottoms, dpws, vals):
    out = []
    for comp in bottoms:
        hits = [v for pos, (dpw, v) in enumerate(zip(dpws, vals))
                if _component_accepts(chain, comp, pos, dpw)]
        if len(hits) != 1:
            raise InternalConsistencyError(
                f"ergodic component accepted by {len(hits)} value automata")
        out.append(hits[0])
    return out


def _setup(T: Transducer, formula: Formula, extras=(), dist=None, ceiling=None):
    _check_alphabets(T, formula, dist)
    atoms = T.inputs | T.outputs
    vals = values(formula, atoms, ceiling=ceiling)
    dpws = [dpw_for(formula, EqualTo(v), atoms, ceiling=ceiling) for v in vals]
    extra_dpws = [dpw_for(g, AtLeast(Fraction(1)), atoms, ceiling=ceiling)
                  for g in extras]
    chain = product_chain(T, dpws + extra_dpws, dist, ceiling)
    bottoms, rho = mc_ergodic_analysis(chain)
    comp_values = _classify(chain, bottoms, dpws, vals)
    return chain, bottoms, rho, comp_values, len(dpws)


def _check_assumption(T: Transducer, assumption: Formula):
    if not is_boolean(assumption):
        raise ValueError("assumption must be a classical formula")
    if not assumption.atoms() <= T.inputs:
        raise ValueError("assumption must range over inputs only")


def expected_value(T: Transducer, formula: Formula, dist=None, ceiling=None) -> Fraction:
    _, _, rho, comp_values, _ = _setup(T, formula, (), dist, ceiling)
    return sum((p * v for p, v in zip(rho, comp_values)), Fraction(0))


def conditional_expected_value(T: Transducer, formula: Formula, assumption: Formula,
                               dist=None, ceiling=None) -> Fraction:
    _check_assumption(T, assumption)
    chain, bottoms, rho, comp_values, n_vals = _setup(
        T, formula, (assumption,), dist, ceiling)
    psi_dpw = dpw_for(assumption, AtLeast(Fraction(1)), T.inputs | T.outputs,
                      ceiling=ceiling)
    mass = Fraction(0)
    gain = Fraction(0)
    for comp, p, v in zip(bottoms, rho, comp_values):
        if _component_accepts(chain, comp, n_vals, psi_dpw):
            mass += p
            gain += p * v
    if mass == 0:
        raise AssumptionHasZeroProbability("the assumption holds with probability 0")
    return gain / mass


def almost_sure_value(T: Transducer, formula: Formula, dist=None, ceiling=None) -> Fraction:
    """The largest value the computation reaches with probability one, i.e.
    the smallest value among ergodic components that carry mass."""
    _, _, rho, comp_values, _ = _setup(T, formula, (), dist, ceiling)
    return min(v for p, v in zip(rho, comp_values) if p > 0)


def conditional_almost_sure_floor(T: Transducer, formula: Formula, assumption: Formula,
                                  dist=None, ceiling=None) -> Fraction:
    """The largest value reached with conditional probability one, given
    the assumption."""
    _check_assumption(T, assumption)
    chain, bottoms, rho, comp_values, n_vals = _setup(
        T, formula, (assumption,), dist, ceiling)
    psi_dpw = dpw_for(assumption, AtLeast(Fraction(1)), T.inputs | T.outputs,
                      ceiling=ceiling)
    floor = None
    mass = Fraction(0)
    for comp, p, v in zip(bottoms, rho, comp_values):
        if p > 0 and _component_accepts(chain, comp, n_vals, psi_dpw):
            mass += p
            floor = v if floor is None else min(floor, v)
    if mass == 0:
        raise AssumptionHasZeroProbability("the assumption holds with probability 0")
    return floor


# --- worst case ----------------------------------------------------------


def worst_case_witness(T: Transducer, formula: Formula, ceiling=None):
    """(value, input lasso word) attaining the minimum over all input words.

    Works through the attainable values in ascending order and stops at the
    first with an accepting lasso in the product of the transducer and that
    value's automaton.  The witness is replayed through the transducer and
    re-evaluated before being returned.
    """
    _check_alphabets(T, formula, None)
    atoms = T.inputs | T.outputs
    in_letters = all_letters(T.inputs)
    pos = {q: k for k, q in enumerate(T.states)}
    for v in values(formula, atoms, ceiling=ceiling):
        dpw = dpw_for(formula, EqualTo(v), atoms, ceiling=ceiling)

        def succ(node):
            tk, q = node
            out = []
            for i in in_letters:
                t2 = T.delta[(T.states[tk], i)]
                q2 = dpw.step(q, i | T.labels[t2])
                out.append((i, (pos[t2], q2)))
            return out

        found = _parity_lasso((pos[T.initial], dpw.initial), succ,
                              lambda node: dpw.rank[node[1]])
        if found is None:
            continue
        prefix, cycle = found
        witness = LassoWord.make(prefix, cycle, T.inputs)
        if eval_lasso(formula, computation_lasso(T, witness)) != v:
            raise InternalConsistencyError("worst-case witness replay disagrees")
        return v, witness
    raise InternalConsistencyError("no attainable value has an accepting lasso")


def worst_case_value(T: Transducer, formula: Formula, ceiling=None) -> Fraction:
    return worst_case_witness(T, formula, ceiling)[0]


def _parity_lasso(init, succ, rank):
    """(prefix labels, cycle labels) of a lasso maximizing-rank-even, or None.

    Stratified search: within the states of rank at most d, any cycle
    through a rank-d state has even maximal rank.
    """
    reach = {init}
    stack = [init]
    while stack:
        x = stack.pop()
        for _, y in succ(x):
            if y not in reach:
                reach.add(y)
                stack.append(y)
    for d in sorted({rank(x) for x in reach if rank(x) % 2 == 0}):
        sub = {x for x in reach if rank(x) <= d}
        for comp in strongly_connected_components(
                sorted(sub), lambda x: [y for _, y in succ(x) if y in sub]):
            if all(rank(x) != d for x in comp):
                continue
            if len(comp) == 1 and all(y != comp[0] for _, y in succ(comp[0])):
                continue
            u = min(x for x in comp if rank(x) == d)
            prefix = _label_path(init, u, reach, succ)
            cycle = _label_cycle(u, set(comp), succ)
            return prefix, cycle
    return None


def _label_path(src, goal, allowed, succ):
    if src == goal:
        return []
    back = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for x in frontier:
            for lab, y in succ(x):
                if y in allowed and y not in back:
                    back[y] = (x, lab)
                    if y == goal:
                        return _unwind(back, y)
                    nxt.append(y)
        frontier = nxt
    raise InternalConsistencyError("lasso prefix target unreachable")


def _label_cycle(u, compset, succ):
    back = {}
    frontier = []
    for lab, y in succ(u):
        if y in compset and y not in back:
            if y == u:
                return [lab]
            back[y] = (u, lab)
            frontier.append(y)
    while frontier:
        nxt = []
        for x in frontier:
            for lab, y in succ(x):
                if y == u:
                    out = [lab]
                    while back.get(x) is not None:
                        x2, l2 = back[x]
                        out.append(l2)
                        if x2 == u:
                            break
                        x = x2
                    return list(reversed(out))
                if y in compset and y not in back:
                    back[y] = (x, lab)
                    nxt.append(y)
        frontier = nxt
    raise InternalConsistencyError("no cycle through the chosen lasso top")


def _unwind(back, node):
    out = []
    while back[node] is not None:
        prev, lab = back[node]
        out.append(lab)
        node = prev
    return list(reversed(out))


# --- simulation ----------------------------------------------------------


def simulate(T: Transducer, formula: Formula, samples: int, seed: int,
             dist=None, ceiling=None):
    """Monte-Carlo check of the exact pipeline: (mean, per-sample values).

    Walks the same product chain with a seeded generator until absorption;
    the sample's value is the value of the component entered.  Bit-for-bit
    reproducible for a fixed seed.
    """
    import random

    chain, bottoms, _, comp_values, _ = _setup(T, formula, (), dist, ceiling)
    value_at = {}
    for comp, v in zip(bottoms, comp_values):
        for s in comp:
            value_at[s] = v
    rng = random.Random(seed)
    scale = 1 << 53
    out = []
    for _ in range(samples):
        s = chain.initial
        steps = 0
        while s not in value_at:
            u = Fraction(rng.getrandbits(53), scale)
            acc = Fraction(0)
            nxt = None
            for t, p in chain.rows[s]:
                acc += p
                if u < acc:
                    nxt = t
                    break
            s = nxt if nxt is not None else chain.rows[s][-1][0]
            steps += 1
            if steps > 1_000_000:
                raise InternalConsistencyError("simulation failed to absorb")
        out.append(value_at[s])
    mean = sum(out, Fraction(0)) / samples if samples else Fraction(0)
    return mean, out
