"""Boolean LTL to deterministic parity automata.

The pipeline is classic: negation normal form, a tableau-built Buchi
automaton, then a Safra-style determinization into a parity automaton.
Two local conventions keep the two halves compatible:

* The intermediate Buchi automaton carries acceptance on transitions, one
  fairness index per until subformula (a transition is fair for an until
  when that until was not postponed across it), degeneralized with a
  round-robin counter.  Transition acceptance is what the determinization
  consumes, so no state-based translation step is needed.

* Determinization uses compact ordered trees of Buchi state sets.  Node
  names are kept compact after every step by an order-preserving rename;
  the priority of a step is derived from the smallest name removed and the
  smallest name marked before renaming.  Priorities are turned into ranks
  on the target state, so the result is a state-ranked automaton accepting
  when the maximal rank seen infinitely often is even.

Everything downstream (products, runs, emptiness) works on the ranked
deterministic form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .booleanize import (
    BAnd,
    BAtom,
    BExpr,
    BFalse,
    BNext,
    BNot,
    BOr,
    BTrue,
    BUntil,
    booleanize,
)
from .common import (
    StateLimitExceeded,
    all_letters,
    state_ceiling,
    strongly_connected_components,
)
from .formulas import Formula, LassoWord


# --- negation normal form ------------------------------------------------


class NF:
    pass


@dataclass(frozen=True)
class NTrue(NF):
    pass


@dataclass(frozen=True)
class NFalse(NF):
    pass


@dataclass(frozen=True)
class NLit(NF):
    name: str
    negated: bool


@dataclass(frozen=True)
class NAnd(NF):
    args: tuple


@dataclass(frozen=True)
class NOr(NF):
    args: tuple


@dataclass(frozen=True)
class NNext(NF):
    child: NF


@dataclass(frozen=True)
class NUntil(NF):
    left: NF
    right: NF


@dataclass(frozen=True)
class NRelease(NF):
    left: NF
    right: NF


N_TRUE = NTrue()
N_FALSE = NFalse()


def _nand(args) -> NF:
    flat = []
    for a in args:
        if isinstance(a, NFalse):
            return N_FALSE
        if isinstance(a, NTrue):
            continue
        if isinstance(a, NAnd):
            flat.extend(a.args)
        elif a not in flat:
            flat.append(a)
    if not flat:
        return N_TRUE
    return flat[0] if len(flat) == 1 else NAnd(tuple(flat))


def _nor(args) -> NF:
    flat = []
    for a in args:
        if isinstance(a, NTrue):
            return N_TRUE
        if isinstance(a, NFalse):
            continue
        if isinstance(a, NOr):
            flat.extend(a.args)
        elif a not in flat:
            flat.append(a)
    if not flat:
        return N_FALSE
    return flat[0] if len(flat) == 1 else NOr(tuple(flat))


def to_nnf(e: BExpr, negate: bool = False) -> NF:
    if isinstance(e, BTrue):
        return N_FALSE if negate else N_TRUE
    if isinstance(e, BFalse):
        return N_TRUE if negate else N_FALSE
    if isinstance(e, BAtom):
        return NLit(e.name, negate)
    if isinstance(e, BNot):
        return to_nnf(e.child, not negate)
    if isinstance(e, BAnd):
        parts = [to_nnf(a, negate) for a in e.args]
        return _nor(parts) if negate else _nand(parts)
    if isinstance(e, BOr):
        parts = [to_nnf(a, negate) for a in e.args]
        return _nand(parts) if negate else _nor(parts)
    if isinstance(e, BNext):
        return NNext(to_nnf(e.child, negate))
    if isinstance(e, BUntil):
        left, right = to_nnf(e.left, negate), to_nnf(e.right, negate)
        return NRelease(left, right) if negate else NUntil(left, right)
    raise TypeError(f"unknown node {type(e).__name__}")


# --- tableau construction ------------------------------------------------


class NBW:
    """Nondeterministic Buchi automaton with acceptance on transitions.

    `trans[(state, letter)]` lists (successor, fair) pairs where `fair`
    means the transition counts toward acceptance.  A run is accepting when
    it takes fair transitions infinitely often.
    """

    def __init__(self, atoms, states, initial, trans):
        self.atoms = frozenset(atoms)
        self.states = list(states)
        self.initial = initial
        self.trans = trans

    def __len__(self):
        return len(self.states)


def ltl_to_nbw(beta: BExpr, atoms=None, ceiling: int | None = None) -> NBW:
    limit = state_ceiling(ceiling)
    if atoms is None:
        atoms = _bexpr_atoms(beta)
    atoms = frozenset(atoms)
    root = to_nnf(beta)
    untils = _collect_untils(root)
    m = len(untils)
    letters = all_letters(atoms)

    cover_memo: dict[frozenset, list] = {}

    def cover(obls: frozenset) -> list:
        got = cover_memo.get(obls)
        if got is not None:
            return got
        branches = []

        def go(pending, done, pos, neg, nxt, post):
            while pending:
                f = pending[-1]
                pending = pending[:-1]
                if f in done:
                    continue
                done = done | {f}
                if isinstance(f, NTrue):
                    continue
                if isinstance(f, NFalse):
                    return
                if isinstance(f, NLit):
                    if f.name in (pos if f.negated else neg):
                        return
                    if f.negated:
                        neg = neg | {f.name}
                    else:
                        pos = pos | {f.name}
                    continue
                if isinstance(f, NAnd):
                    pending = pending + tuple(reversed(f.args))
                    continue
                if isinstance(f, NOr):
                    for a in f.args:
                        go(pending + (a,), done, pos, neg, nxt, post)
                    return
                if isinstance(f, NNext):
                    nxt = nxt | {f.child}
                    continue
                if isinstance(f, NUntil):
                    go(pending + (f.right,), done, pos, neg, nxt, post)
                    go(pending + (f.left,), done, pos, neg, nxt | {f}, post | {f})
                    return
                if isinstance(f, NRelease):
                    go(pending + (f.right, f.left), done, pos, neg, nxt, post)
                    go(pending + (f.right,), done, pos, neg, nxt | {f}, post)
                    return
                raise TypeError(f"unknown node {type(f).__name__}")
            branch = (frozenset(pos), frozenset(neg), frozenset(nxt), frozenset(post))
            if branch not in branches:
                branches.append(branch)

        ordered = tuple(sorted(obls, key=repr))
        go(tuple(reversed(ordered)), frozenset(), frozenset(), frozenset(),
           frozenset(), frozenset())
        cover_memo[obls] = branches
        return branches

    # States pair an obligation set with the degeneralization counter.
    initial = (frozenset({root}), 0)
    index: dict = {initial: 0}
    states = [initial]
    trans: dict = {}
    queue = [initial]
    while queue:
        state = queue.pop()
        obls, k = state
        src = index[state]
        branches = cover(obls)
        for letter in letters:
            edges = []
            for pos, neg, nxt, post in branches:
                if not pos <= letter or neg & letter:
                    continue
                if m == 0:
                    k2, fair = 0, True
                elif untils[k] not in post:
                    k2 = (k + 1) % m
                    fair = k == m - 1
                else:
                    k2, fair = k, False
                succ = (frozenset(nxt), k2)
                tgt = index.get(succ)
                if tgt is None:
                    tgt = index[succ] = len(states)
                    states.append(succ)
                    if len(states) > limit:
                        raise StateLimitExceeded("tableau automaton", limit)
                    queue.append(succ)
                if (tgt, fair) not in edges:
                    edges.append((tgt, fair))
            trans[(src, letter)] = tuple(edges)
    return NBW(atoms, states, 0, trans)


def _bexpr_atoms(e: BExpr) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, BAtom):
            out.add(node.name)
        stack.extend(node.children())
    return frozenset(out)


def _collect_untils(root: NF) -> list:
    out = []
    stack = [root]
    while stack:
        f = stack.pop(0)
        if isinstance(f, NUntil) and f not in out:
            out.append(f)
        if isinstance(f, (NAnd, NOr)):
            stack.extend(f.args)
        elif isinstance(f, NNext):
            stack.append(f.child)
        elif isinstance(f, (NUntil, NRelease)):
            stack.extend((f.left, f.right))
    return out


# --- determinization -----------------------------------------------------


class DPW:
    """Deterministic parity automaton; accepts when the maximal rank seen
    infinitely often is even."""

    def __init__(self, atoms, n_states, initial, trans, rank):
        self.atoms = frozenset(atoms)
        self.n_states = n_states
        self.initial = initial
        self.trans = trans
        self.rank = rank
        letters = all_letters(self.atoms)
        for q in range(n_states):
            if not 1 <= rank[q]:
                raise ValueError(f"state {q} has rank {rank[q]} below 1")
            for letter in letters:
                if (q, letter) not in trans:
                    raise ValueError(f"missing transition from {q} on {set(letter)}")

    def step(self, q: int, letter: frozenset) -> int:
        return self.trans[(q, letter)]

    def __len__(self):
        return self.n_states


def determinize(nbw: NBW, ceiling: int | None = None) -> DPW:
    limit = state_ceiling(ceiling)
    letters = all_letters(nbw.atoms)
    n = max(1, len(nbw.states))
    top_name = 2 * n + 2
    neutral = 2 * top_name + 1
    ceil_prio = 2 * top_name + 2

    succmap = {}
    for q in range(len(nbw.states)):
        for letter in letters:
            alls, accs = set(), set()
            for tgt, fair in nbw.trans[(q, letter)]:
                alls.add(tgt)
                if fair:
                    accs.add(tgt)
            succmap[(q, letter)] = (frozenset(alls), frozenset(accs))

    def tree_step(tree, letter):
        if not tree:
            return tree, 1
        k = len(tree)
        parent: dict[int, int] = {}
        label: dict[int, set] = {}
        for pos, (par, lab) in enumerate(tree):
            name = pos + 1
            parent[name] = par
            new, acc = set(), set()
            for q in lab:
                alls, accs = succmap[(q, letter)]
                new |= alls
                acc |= accs
            label[name] = new
            if acc:
                parent[k + name] = name
                label[k + name] = acc
        children: dict[int, list] = {}
        for name in sorted(label):
            children.setdefault(parent[name], []).append(name)

        def subtree(name):
            stack = [name]
            while stack:
                v = stack.pop()
                yield v
                stack.extend(children.get(v, ()))

        # Horizontal merge: a state stays with the oldest sibling holding it.
        for par in sorted(children):
            seen: set = set()
            for c in children[par]:
                clash = label[c] & seen
                if clash:
                    for d in subtree(c):
                        label[d] -= clash
                seen |= label[c]

        removed: set = set()
        for name in label:
            if not label[name]:
                removed.add(name)
        if 1 in removed:
            return (), 1

        # Vertical merge: a node whose children cover it absorbs them.
        marked: set = set()

        def alive_children(name):
            return [c for c in children.get(name, ()) if c not in removed]

        stack = [1]
        while stack:
            v = stack.pop()
            ch = alive_children(v)
            cover = set()
            for c in ch:
                cover |= label[c]
            if ch and label[v] == cover:
                marked.add(v)
                cull = []
                for c in ch:
                    cull.extend(subtree(c))
                removed.update(c for c in cull if c not in removed)
            else:
                stack.extend(ch)

        cands = []
        if removed:
            cands.append(2 * min(removed) - 1)
        if marked:
            cands.append(2 * min(marked))
        prio = min(cands) if cands else neutral

        alive = sorted(set(label) - removed)
        rename = {old: new + 1 for new, old in enumerate(alive)}
        newtree = tuple(
            (rename.get(parent[name], 0), frozenset(label[name])) for name in alive
        )
        return newtree, prio

    init_tree = ((0, frozenset({nbw.initial})),)
    initial = (init_tree, neutral)
    index = {initial: 0}
    states = [initial]
    trans = {}
    queue = [initial]
    while queue:
        state = queue.pop()
        src = index[state]
        for letter in letters:
            tree, prio = tree_step(state[0], letter)
            succ = (tree, prio)
            tgt = index.get(succ)
            if tgt is None:
                tgt = index[succ] = len(states)
                states.append(succ)
                if len(states) > limit:
                    raise StateLimitExceeded("determinized automaton", limit)
                queue.append(succ)
            trans[(src, letter)] = tgt
    rank = [ceil_prio - prio for (_, prio) in states]
    return DPW(nbw.atoms, len(states), 0, trans, rank)


# --- value automata ------------------------------------------------------

_dpw_cache: dict = {}


def dpw_for(formula: Formula, predicate, atoms=None, ceiling: int | None = None) -> DPW:
    """The deterministic parity automaton of {words : predicate holds of the
    word's satisfaction value}."""
    if atoms is None:
        atoms = formula.atoms()
    atoms = frozenset(atoms)
    key = (formula, predicate, atoms, state_ceiling(ceiling))
    got = _dpw_cache.get(key)
    if got is None:
        beta = booleanize(formula, predicate)
        got = determinize(ltl_to_nbw(beta, atoms, ceiling), ceiling)
        _dpw_cache[key] = got
    return got


# --- products ------------------------------------------------------------


class ProductPreAutomaton:
    """Reachable synchronized product of deterministic components.

    States are tuples of component states; projection i is plain tuple
    indexing.  Components only need `initial` and `step`.
    """

    def __init__(self, components, ceiling: int | None = None):
        if not components:
            raise ValueError("product needs at least one component")
        atoms = components[0].atoms
        for c in components[1:]:
            if c.atoms != atoms:
                raise ValueError("product components disagree on the alphabet")
        limit = state_ceiling(ceiling)
        self.atoms = atoms
        self.components = list(components)
        self.initial = tuple(c.initial for c in components)
        letters = all_letters(atoms)
        states = [self.initial]
        seen = {self.initial}
        trans = {}
        queue = [self.initial]
        while queue:
            s = queue.pop()
            for letter in letters:
                t = tuple(c.step(q, letter) for c, q in zip(self.components, s))
                trans[(s, letter)] = t
                if t not in seen:
                    seen.add(t)
                    states.append(t)
                    if len(states) > limit:
                        raise StateLimitExceeded("product automaton", limit)
                    queue.append(t)
        self.states = states
        self.trans = trans

    def step(self, s: tuple, letter: frozenset) -> tuple:
        return self.trans[(s, letter)]

    def proj(self, i: int, s: tuple):
        return s[i]

    def __len__(self):
        return len(self.states)


def product(components, ceiling: int | None = None) -> ProductPreAutomaton:
    return ProductPreAutomaton(components, ceiling)


# --- runs and emptiness --------------------------------------------------


def run_lasso(dpw: DPW, word: LassoWord) -> bool:
    if not word.atoms <= dpw.atoms:
        raise ValueError("lasso alphabet is not covered by the automaton")

    def fit(letter):
        return frozenset(letter & dpw.atoms)

    q = dpw.initial
    for letter in word.prefix:
        q = dpw.step(q, fit(letter))
    starts = {}
    visits = []
    while q not in starts:
        starts[q] = len(visits)
        seen = []
        for letter in word.period:
            seen.append(q)
            q = dpw.step(q, fit(letter))
        visits.append(seen)
    cycle = [s for block in visits[starts[q]:] for s in block]
    return max(dpw.rank[s] for s in cycle) % 2 == 0


def dpw_nonempty_from(dpw: DPW, q: int) -> bool:
    return accepting_lasso_from(dpw, q) is not None


def accepting_lasso_from(dpw: DPW, q: int):
    """A lasso word accepted from q, or None.

    Looks for a reachable cycle of even maximal rank d, stratum by stratum:
    within the states of rank at most d, any cycle through a rank-d state
    has even maximal rank.
    """
    letters = all_letters(dpw.atoms)
    reach = {q}
    queue = [q]
    while queue:
        s = queue.pop()
        for letter in letters:
            t = dpw.step(s, letter)
            if t not in reach:
                reach.add(t)
                queue.append(t)

    even_ranks = sorted({dpw.rank[s] for s in reach if dpw.rank[s] % 2 == 0})
    for d in even_ranks:
        sub = {s for s in reach if dpw.rank[s] <= d}

        def succ(s):
            out = []
            for letter in letters:
                t = dpw.step(s, letter)
                if t in sub and t not in out:
                    out.append(t)
            return out

        for comp in strongly_connected_components(sorted(sub), succ):
            compset = set(comp)
            tops = [s for s in comp if dpw.rank[s] == d]
            if not tops:
                continue
            if len(comp) == 1:
                s = comp[0]
                if all(dpw.step(s, letter) != s for letter in letters):
                    continue
            u = min(tops)
            prefix = _dpw_path(dpw, q, {u}, reach)
            period = _dpw_cycle(dpw, u, compset)
            return LassoWord(tuple(prefix), tuple(period), dpw.atoms)
    return None


def _dpw_path(dpw: DPW, src: int, goal: set, allowed: set) -> list:
    if src in goal:
        return []
    letters = all_letters(dpw.atoms)
    back = {src: None}
    queue = [src]
    while queue:
        nxt = []
        for s in queue:
            for letter in letters:
                t = dpw.step(s, letter)
                if t in allowed and t not in back:
                    back[t] = (s, letter)
                    if t in goal:
                        out = []
                        while back[t] is not None:
                            s2, l2 = back[t]
                            out.append(l2)
                            t = s2
                        return list(reversed(out))
                    nxt.append(t)
        queue = nxt
    raise ValueError("goal not reachable")


def _dpw_cycle(dpw: DPW, u: int, compset: set) -> list:
    # Shortest nonempty path u -> u inside the component.
    letters = all_letters(dpw.atoms)
    back = {}
    queue = []
    for letter in letters:
        t = dpw.step(u, letter)
        if t in compset and t not in back:
            back[t] = (None, letter)
            queue.append(t)
    while queue:
        if u in back:
            break
        nxt = []
        for s in queue:
            for letter in letters:
                t = dpw.step(s, letter)
                if t in compset and t not in back:
                    back[t] = (s, letter)
                    nxt.append(t)
        queue = nxt
    out = []
    t = u
    while True:
        s2, l2 = back[t]
        out.append(l2)
        if s2 is None:
            break
        t = s2
    return list(reversed(out))


# --- oracles and export --------------------------------------------------


def nbw_accepts_lasso(nbw: NBW, word: LassoWord) -> bool:
    """Membership of an ultimately periodic word, decided on the finite
    position graph: accept iff some reachable cycle takes a fair edge."""
    n = word.positions()
    start = (0, nbw.initial)
    nodes = set()
    edges: dict = {}
    queue = [start]
    nodes.add(start)
    while queue:
        pos, q = queue.pop()
        letter = frozenset(word.letter(pos) & nbw.atoms)
        nxt = word.succ(pos)
        outs = []
        for tgt, fair in nbw.trans[(q, letter)]:
            node = (nxt, tgt)
            outs.append((node, fair))
            if node not in nodes:
                nodes.add(node)
                queue.append(node)
        edges[(pos, q)] = outs
    for comp in strongly_connected_components(sorted(nodes), lambda v: [w for w, _ in edges[v]]):
        compset = set(comp)
        for v in comp:
            for w, fair in edges[v]:
                if fair and w in compset:
                    return True
    return False


def dpw_to_dot(dpw: DPW, name: str = "dpw") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for q in range(dpw.n_states):
        shape = "doublecircle" if dpw.rank[q] % 2 == 0 else "circle"
        lines.append(f'  q{q} [shape={shape} label="q{q}\\nrank {dpw.rank[q]}"];')
    lines.append(f"  init [shape=point]; init -> q{dpw.initial};")
    grouped: dict = {}
    for letter in all_letters(dpw.atoms):
        for q in range(dpw.n_states):
            grouped.setdefault((q, dpw.step(q, letter)), []).append(letter)
    for (q, t), letts in sorted(grouped.items()):
        label = " | ".join("{" + ",".join(sorted(l)) + "}" for l in letts)
        lines.append(f'  q{q} -> q{t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines)


def dpw_to_hoa(dpw: DPW, name: str = "dpw") -> str:
    """Loose HOA-flavored dump for eyeballing; not a conformance target."""
    aps = sorted(dpw.atoms)
    lines = [
        "HOA: v1",
        f"name: \"{name}\"",
        f"States: {dpw.n_states}",
        f"Start: {dpw.initial}",
        f"AP: {len(aps)} " + " ".join(f'"{a}"' for a in aps),
        "acc-name: parity max even",
        "--BODY--",
    ]
    for q in range(dpw.n_states):
        lines.append(f"State: {q} {{{dpw.rank[q]}}}")
        for letter in all_letters(dpw.atoms):
            bits = "&".join(
                (a if a in letter else "!" + a) for a in aps) or "t"
            lines.append(f"  [{bits}] {dpw.step(q, letter)}")
    lines.append("--END--")
    return "\n".join(lines)
