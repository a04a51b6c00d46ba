"""Controller synthesis maximizing the expected satisfaction value.

The pipeline shared by all modes: build one parity automaton per attainable
value of the formula, take their synchronized product, turn it into an MDP
whose actions are output letters (chosen before the same step's input is
drawn), attach to every state the largest value achievable from it with
probability one, and solve for optimal mean payoff.  The optimal memoryless
choice is then refined into a two-phase strategy: once the induced chain is
absorbed into an end component carrying a positive reward, play switches to
the embedded parity-winning strategy of that value's automaton, which locks
the value in almost surely.

Mode extras:
  * threshold: also build the automaton for "value at least t", keep only
    output letters that stay inside its almost-surely-winning region, and
    redirect any run about to violate the floor to that region's winning
    strategy;
  * assumption: append the assumption automaton to the product, and analyze
    a copy of the MDP in which every state whose assumption component is
    doomed jumps back to the initial state.  Renewal makes the ordinary
    expectation of the copy equal the conditional expectation of the real
    chain, which is how the returned value is certified.

Extracted controllers commit each output one step ahead: the transducer
state entered on input i is labeled with the output decided before i was
read, so every state's successors share a label.  Controllers of this shape
are exactly the ones the MDP view can price, and they remain evaluable
under output-sensitive input processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .automata import ProductPreAutomaton, dpw_for
from .booleanize import AtLeast, EqualTo
from .common import (
    InternalConsistencyError,
    StateLimitExceeded,
    all_letters,
    state_ceiling,
)
from .evaluation import (
    AssumptionHasZeroProbability,
    almost_sure_value,
    conditional_almost_sure_floor,
    conditional_expected_value,
    expected_value,
)
from .formulas import Formula, implies, is_boolean, values
from .mdp import (
    DistributionMDP,
    MarkovChain,
    ParityMDP,
    PreMDP,
    RewardMDP,
    almost_sure_parity,
    induced_chain,
    induced_pre_mdp,
    induced_pre_mdp_dist,
    max_end_components,
    mc_ergodic_analysis,
    solve_mean_payoff,
)
from .transducers import Transducer


@dataclass
class SynthesisSpec:
    inputs: frozenset
    outputs: frozenset
    formula: Formula
    assumption: Formula | None = None
    threshold: Fraction | None = None
    hard_constraint: Formula | None = None
    distribution: DistributionMDP | None = None

    def __post_init__(self):
        self.inputs = frozenset(self.inputs)
        self.outputs = frozenset(self.outputs)
        if self.inputs & self.outputs:
            raise ValueError("inputs and outputs must be disjoint")
        if not self.formula.atoms() <= self.inputs | self.outputs:
            raise ValueError("formula uses atoms outside the declared alphabet")
        if self.assumption is not None:
            if not is_boolean(self.assumption):
                raise ValueError("assumption must be a classical formula")
            if not self.assumption.atoms() <= self.inputs:
                raise ValueError("assumption must range over inputs only")
        if self.threshold is not None:
            self.threshold = Fraction(self.threshold)
            if not 0 <= self.threshold <= 1:
                raise ValueError("threshold must lie in [0,1]")
        if self.hard_constraint is not None:
            if self.threshold is None:
                raise ValueError("a hard constraint needs a threshold")
            if self.assumption is not None:
                raise ValueError("hard constraint and assumption cannot be combined")
            if not self.hard_constraint.atoms() <= self.inputs | self.outputs:
                raise ValueError("hard constraint uses atoms outside the alphabet")
        if self.distribution is not None:
            d = self.distribution
            if d.inputs != self.inputs or d.outputs != self.outputs:
                raise ValueError("input process and spec disagree on alphabets")


@dataclass
class SynthesisResult:
    transducer: Transducer
    expected_value: Fraction
    almost_sure_floor: Fraction | None = None
    assumption_probability: Fraction | None = None
    stats: dict = field(default_factory=dict)


@dataclass
class Unrealizable:
    """No controller keeps the value above the threshold almost surely.

    Not an error: a legitimate outcome carrying the losing states of the
    threshold automaton's MDP as a diagnostic.
    """

    threshold: Fraction
    losing_region: tuple
    stats: dict = field(default_factory=dict)


# --- shared machinery ----------------------------------------------------


def _value_automata(formula, atoms, ceiling):
    vals = values(formula, atoms, ceiling=ceiling)
    dpws = [dpw_for(formula, EqualTo(v), atoms, ceiling=ceiling) for v in vals]
    return vals, dpws


def _induced(automaton, inputs, outputs, dist, ceiling):
    if dist is None:
        return induced_pre_mdp(automaton, inputs, outputs, ceiling=ceiling)
    return induced_pre_mdp_dist(automaton, dist, outputs, ceiling=ceiling)


def _proj_key(pos, label, dist):
    # MDP labels are product tuples, or (tuple, process state) pairs
    if dist is None:
        return label[pos]
    return (label[0][pos], label[1])


def _att_state(pos, label, dist):
    return label[pos] if dist is None else label[0][pos]


def _component_win(dpw, inputs, outputs, dist, ceiling):
    """Almost-sure parity winning region of one automaton's induced MDP,
    as (winning keys, key -> winning output letter)."""
    M = _induced(dpw, inputs, outputs, dist, ceiling)
    if dist is None:
        ranks = [dpw.rank[lab] for lab in M.labels]
    else:
        ranks = [dpw.rank[lab[0]] for lab in M.labels]
    PM = ParityMDP(M.labels, M.initial, M.actions, M.trans, ranks, validate=False)
    win, strat = almost_sure_parity(PM)
    out_letters = all_letters(outputs)
    keys = frozenset(M.labels[s] for s in win)
    letters = {M.labels[s]: out_letters[a] for s, a in strat.items()}
    return keys, letters


def _gamma_rewards(M, positions, vals_used, wins, dist):
    """Per-state reward: the largest value whose automaton projection is
    almost-surely winnable, for states inside some end component; 0 outside.
    Constant on every maximal end component, which is asserted."""
    gamma = [Fraction(0)] * M.n
    for states, _acts in max_end_components(M):
        for s in states:
            best = Fraction(0)
            for pos, v, w in zip(positions, vals_used, wins):
                if v > best and _proj_key(pos, M.labels[s], dist) in w:
                    best = v
            gamma[s] = best
        if len({gamma[s] for s in states}) != 1:
            raise InternalConsistencyError("end component mixes reward values")
    return gamma


def _induced_restricted(prod, att_pos, att_win, inputs, outputs, dist, ceiling):
    """Induced MDP keeping only output letters under which every possible
    input stays inside the threshold automaton's winning region."""
    limit = state_ceiling(ceiling)
    out_letters = all_letters(frozenset(outputs))
    in_letters = all_letters(frozenset(inputs))
    weight = Fraction(1, len(in_letters))
    start = prod.initial if dist is None else (prod.initial, dist.initial)
    labels = [start]
    index = {start: 0}
    actions = []
    trans = {}
    k = 0
    while k < len(labels):
        lab = labels[k]
        allowed = []
        branch_lists = []
        for o in out_letters:
            if dist is None:
                branches = [(prod.step(lab, i | o), None, weight) for i in in_letters]
            else:
                qs, sd = lab
                branches = [(prod.step(qs, dist.label(sd2) | o), sd2, p)
                            for sd2, p in dist.rows(sd, o) if p > 0]
            if all(_proj_key(att_pos, (q, sd2) if dist is not None else q, dist)
                   in att_win for q, sd2, _ in branches):
                allowed.append(o)
                branch_lists.append(branches)
        if not allowed:
            raise InternalConsistencyError("winning region is not action-closed")
        for a, branches in enumerate(branch_lists):
            acc: dict[int, Fraction] = {}
            for q, sd2, p in branches:
                succ = q if dist is None else (q, sd2)
                j = index.get(succ)
                if j is None:
                    j = index[succ] = len(labels)
                    labels.append(succ)
                    if len(labels) > limit:
                        raise StateLimitExceeded("restricted product MDP", limit)
                acc[j] = acc.get(j, Fraction(0)) + p
            trans[(k, a)] = tuple(sorted(acc.items()))
        actions.append(tuple(allowed))
        k += 1
    return PreMDP(labels, 0, actions, trans, validate=False)


def _install_triggers(M, gamma, primary, vals, att_pos, att_rank, t, dist):
    """Absorption analysis of the primary strategy's chain.

    Positive-reward components switch to the matching value's winning
    strategy.  Zero-reward components whose threshold component would
    reject switch to the floor strategy instead (only meaningful when a
    positive threshold is in force).  Returns the trigger map and the exact
    expected reward of the refined strategy.
    """
    chain = induced_chain(M, primary)
    bottoms, rho = mc_ergodic_analysis(chain)
    triggers = {}
    realized = Fraction(0)
    for comp, p in zip(bottoms, rho):
        g = gamma[min(comp)]
        realized += p * g
        if g > 0:
            key = ("win", vals.index(g))
            for s in comp:
                triggers[s] = key
        elif t is not None and t > 0 and att_pos is not None:
            top = max(att_rank[_att_state(att_pos, chain.labels[s], dist)]
                      for s in comp)
            if top % 2 == 1:
                for s in comp:
                    triggers[s] = ("floor",)
    return triggers, realized


_DEAD = ("dead",)


def _extract(prod, M, primary, triggers, phase_letters, inputs, outputs, dist,
             ceiling=None) -> Transducer:
    """Turn a two-phase MDP strategy into a transducer.

    Output commitment is off by one against the letter semantics: the
    output appearing at a position belongs to the state entered on that
    position's input.  Transducer states therefore carry the output chosen
    one step earlier, and every state's successors share their label.
    Memory is the current phase; triggers fire on entry.  Under an input
    process, the process state is tracked from the observed inputs, and
    impossible inputs lead to an absorbing unlabeled state.
    """
    limit = state_ceiling(ceiling)
    in_letters = all_letters(frozenset(inputs))
    index_of = {lab: s for s, lab in enumerate(M.labels)}
    trigger_by_label = {M.labels[s]: key for s, key in triggers.items()}

    def act(m, lab):
        if m is None:
            s = index_of.get(lab)
            if s is None:
                raise InternalConsistencyError("primary play left the analyzed region")
            return M.actions[s][primary[s]]
        pos, letters = phase_letters[m]
        letter = letters.get(_proj_key(pos, lab, dist))
        if letter is None:
            raise InternalConsistencyError("phase play left its winning region")
        return letter

    def upd(m, lab):
        return trigger_by_label.get(lab) if m is None else m

    def step(lab, i, o):
        if dist is None:
            return prod.step(lab, i | o)
        qs, sd = lab
        cand = [sd2 for sd2, p in dist.rows(sd, o) if p > 0 and dist.label(sd2) == i]
        if not cand:
            return None
        if len(cand) > 1:
            raise InternalConsistencyError("input process tracking is ambiguous")
        return (prod.step(qs, i | o), cand[0])

    start = M.labels[M.initial]
    m0 = upd(None, start)
    first = (start, m0, act(m0, start))
    nodes = [first]
    index = {first: 0}
    delta = {}
    labels = {}
    k = 0
    while k < len(nodes):
        node = nodes[k]
        if node == _DEAD:
            labels[k] = frozenset()
            for i in in_letters:
                delta[(k, i)] = k
            k += 1
            continue
        lab, m, stored = node
        labels[k] = stored
        out = act(m, lab)
        for i in in_letters:
            lab2 = step(lab, i, out)
            succ = _DEAD if lab2 is None else (lab2, upd(m, lab2), out)
            j = index.get(succ)
            if j is None:
                j = index[succ] = len(nodes)
                nodes.append(succ)
                if len(nodes) > limit:
                    raise StateLimitExceeded("transducer extraction", limit)
            delta[(k, i)] = j
        k += 1
    return Transducer(inputs, outputs, list(range(len(nodes))), 0, delta, labels)


def _stats(vals, dpws, prod, M, T=None, extra=None):
    out = {
        "values": [str(v) for v in vals],
        "automaton_states": [d.n_states for d in dpws],
        "product_states": len(prod) if prod is not None else 0,
        "mdp_states": M.n if M is not None else 0,
    }
    if T is not None:
        out["transducer_states"] = len(T)
    if extra:
        out.update(extra)
    return out


def _require_trackable(dist):
    if dist is not None and not dist.label_deterministic():
        raise ValueError(
            "controller extraction needs an input process whose next state "
            "is determined by the observed input letter")


def _output_insensitive(dist) -> bool:
    if dist is None:
        return True
    base_letters = all_letters(dist.outputs)
    for s in range(dist.n):
        rows = dist.rows(s, frozenset())
        if any(dist.rows(s, o) != rows for o in base_letters):
            return False
    return True


# --- assumption probability ----------------------------------------------


def _input_chain(step_fn, initial, inputs, dist, ceiling):
    """Chain of an input-driven automaton under the input process (outputs
    fixed to the empty letter, legitimate only for insensitive processes)."""
    limit = state_ceiling(ceiling)
    in_letters = all_letters(frozenset(inputs))
    weight = Fraction(1, len(in_letters))
    start = initial if dist is None else (initial, dist.initial)
    labels = [start]
    index = {start: 0}
    rows = []
    k = 0
    while k < len(labels):
        lab = labels[k]
        acc: dict[int, Fraction] = {}
        if dist is None:
            branches = [(step_fn(lab, i), weight) for i in in_letters]
        else:
            q, sd = lab
            branches = [((step_fn(q, dist.label(sd2)), sd2), p)
                        for sd2, p in dist.rows(sd, frozenset()) if p > 0]
        for succ, p in branches:
            j = index.get(succ)
            if j is None:
                j = index[succ] = len(labels)
                labels.append(succ)
                if len(labels) > limit:
                    raise StateLimitExceeded("assumption chain", limit)
            acc[j] = acc.get(j, Fraction(0)) + p
        rows.append(tuple(sorted(acc.items())))
        k += 1
    return MarkovChain(labels, 0, rows, validate=False)


def prob_of_assumption(assumption: Formula, inputs, dist=None, ceiling=None) -> Fraction:
    """Probability that the input word satisfies a classical formula."""
    if not is_boolean(assumption):
        raise ValueError("assumption must be a classical formula")
    inputs = frozenset(inputs)
    if not assumption.atoms() <= inputs:
        raise ValueError("assumption must range over inputs only")
    if not _output_insensitive(dist):
        raise ValueError("assumption probability needs an output-insensitive input process")
    dpw = dpw_for(assumption, AtLeast(Fraction(1)), inputs, ceiling=ceiling)
    chain = _input_chain(dpw.step, dpw.initial, inputs, dist, ceiling)
    bottoms, rho = mc_ergodic_analysis(chain)
    total = Fraction(0)
    for comp, p in zip(bottoms, rho):
        qs = [chain.labels[s] if dist is None else chain.labels[s][0] for s in comp]
        if max(dpw.rank[q] for q in qs) % 2 == 0:
            total += p
    return total


def _rejecting_keys(psi_dpw, inputs, dist, ceiling):
    """Assumption-automaton states (paired with the process state when one
    is given) inside rejecting ergodic components of the input chain: once
    there, the assumption fails surely."""
    chain = _input_chain(psi_dpw.step, psi_dpw.initial, inputs, dist, ceiling)
    bottoms, _ = mc_ergodic_analysis(chain)
    rej = set()
    for comp in bottoms:
        labs = [chain.labels[s] for s in comp]
        qs = [lab if dist is None else lab[0] for lab in labs]
        if max(psi_dpw.rank[q] for q in qs) % 2 == 1:
            rej.update(labs)
    return rej


# --- pipelines -----------------------------------------------------------


def achievability_mdp(formula: Formula, inputs, outputs, dist=None, ceiling=None):
    """(reward MDP, metadata) for the plain expected-value problem."""
    inputs = frozenset(inputs)
    outputs = frozenset(outputs)
    atoms = inputs | outputs
    vals, dpws = _value_automata(formula, atoms, ceiling)
    prod = ProductPreAutomaton(dpws, ceiling=ceiling)
    M = _induced(prod, inputs, outputs, dist, ceiling)
    wins = []
    sigma = []
    for dpw in dpws:
        w, s = _component_win(dpw, inputs, outputs, dist, ceiling)
        wins.append(w)
        sigma.append(s)
    positions = list(range(len(dpws)))
    gamma = _gamma_rewards(M, positions, vals, wins, dist)
    RM = RewardMDP(M.labels, M.initial, M.actions, M.trans, gamma, validate=False)
    meta = {
        "values": vals,
        "dpws": dpws,
        "product": prod,
        "positions": positions,
        "wins": wins,
        "sigma": sigma,
    }
    return RM, meta


def synth(spec: SynthesisSpec, ceiling=None) -> SynthesisResult:
    """Optimal expected satisfaction value, no side constraints."""
    _require_trackable(spec.distribution)
    dist = spec.distribution
    RM, meta = achievability_mdp(spec.formula, spec.inputs, spec.outputs, dist, ceiling)
    value, strat = solve_mean_payoff(RM)
    triggers, realized = _install_triggers(
        RM, RM.reward, strat.primary, meta["values"], None, None, None, dist)
    if realized != value:
        raise InternalConsistencyError("refined strategy changes the expected reward")
    phase_letters = {("win", i): (meta["positions"][i], meta["sigma"][i])
                     for i in range(len(meta["values"]))}
    T = _extract(meta["product"], RM, strat.primary, triggers, phase_letters,
                 spec.inputs, spec.outputs, dist, ceiling)
    check = expected_value(T, spec.formula, dist, ceiling)
    if check != value:
        raise InternalConsistencyError(
            f"certificate mismatch: reported {value}, re-evaluated {check}")
    return SynthesisResult(
        transducer=T,
        expected_value=value,
        stats=_stats(meta["values"], meta["dpws"], meta["product"], RM, T),
    )


def synth_threshold(spec: SynthesisSpec, ceiling=None):
    """Maximal expected value subject to an almost-sure floor of t.

    The floor is on the formula itself, or on the hard constraint when one
    is given (then the expectation is still over the formula's value).
    """
    _require_trackable(spec.distribution)
    dist = spec.distribution
    t = spec.threshold
    atoms = spec.inputs | spec.outputs
    floor_formula = spec.hard_constraint if spec.hard_constraint is not None else spec.formula
    att = dpw_for(floor_formula, AtLeast(t), atoms, ceiling=ceiling)
    att_win, att_sigma = _component_win(att, spec.inputs, spec.outputs, dist, ceiling)
    att_M = _induced(att, spec.inputs, spec.outputs, dist, ceiling)
    if att_M.labels[att_M.initial] not in att_win:
        losing = tuple(lab for lab in att_M.labels if lab not in att_win)
        return Unrealizable(t, losing, {"mdp_states": att_M.n})

    vals, dpws = _value_automata(spec.formula, atoms, ceiling)
    if spec.hard_constraint is not None:
        low = 0
    else:
        low = next((i for i, v in enumerate(vals) if v >= t), None)
        if low is None:
            raise InternalConsistencyError(
                "threshold automaton is winnable but no value reaches it")
    used_vals = vals[low:]
    used_dpws = dpws[low:]
    prod = ProductPreAutomaton(used_dpws + [att], ceiling=ceiling)
    att_pos = len(used_dpws)
    M = _induced_restricted(prod, att_pos, att_win, spec.inputs, spec.outputs,
                            dist, ceiling)
    wins = []
    sigma = []
    for dpw in used_dpws:
        w, s = _component_win(dpw, spec.inputs, spec.outputs, dist, ceiling)
        wins.append(w)
        sigma.append(s)
    positions = list(range(len(used_dpws)))
    gamma = _gamma_rewards(M, positions, used_vals, wins, dist)
    RM = RewardMDP(M.labels, M.initial, M.actions, M.trans, gamma, validate=False)
    value, strat = solve_mean_payoff(RM)
    triggers, realized = _install_triggers(
        RM, gamma, strat.primary, used_vals, att_pos, att.rank, t, dist)
    phase_letters = {("win", i): (positions[i], sigma[i])
                     for i in range(len(used_vals))}
    phase_letters[("floor",)] = (att_pos, att_sigma)
    T = _extract(prod, RM, strat.primary, triggers, phase_letters,
                 spec.inputs, spec.outputs, dist, ceiling)
    check = expected_value(T, spec.formula, dist, ceiling)
    if spec.hard_constraint is None:
        if realized != value or check != value:
            raise InternalConsistencyError(
                f"certificate mismatch: reported {value}, re-evaluated {check}")
    else:
        # floor redirects may add value on top of the reward lower bound
        if check < value:
            raise InternalConsistencyError("re-evaluation below the solved value")
        value = check
    floor = almost_sure_value(T, floor_formula, dist, ceiling)
    if floor < t:
        raise InternalConsistencyError(
            f"almost-sure floor {floor} fails the threshold {t}")
    return SynthesisResult(
        transducer=T,
        expected_value=value,
        almost_sure_floor=floor,
        stats=_stats(used_vals, used_dpws, prod, RM, T,
                     {"threshold": str(t)}),
    )


def synth_assume(spec: SynthesisSpec, ceiling=None) -> SynthesisResult:
    """Maximal conditional expected value given the assumption."""
    _require_trackable(spec.distribution)
    dist = spec.distribution
    if not _output_insensitive(dist):
        raise ValueError("conditional synthesis needs an output-insensitive input process")
    pr = prob_of_assumption(spec.assumption, spec.inputs, dist, ceiling)
    if pr == 0:
        raise AssumptionHasZeroProbability("the assumption holds with probability 0")
    if pr == 1:
        base = SynthesisSpec(spec.inputs, spec.outputs, spec.formula,
                             distribution=dist)
        res = synth(base, ceiling)
        res.assumption_probability = pr
        return res

    atoms = spec.inputs | spec.outputs
    vals, dpws = _value_automata(spec.formula, atoms, ceiling)
    psi = dpw_for(spec.assumption, AtLeast(Fraction(1)), atoms, ceiling=ceiling)
    prod = ProductPreAutomaton(dpws + [psi], ceiling=ceiling)
    psi_pos = len(dpws)
    M = _induced(prod, spec.inputs, spec.outputs, dist, ceiling)
    rej = _rejecting_keys(psi, spec.inputs, dist, ceiling)
    reset = [s for s in range(M.n) if _proj_key(psi_pos, M.labels[s], dist) in rej]
    trans2 = dict(M.trans)
    for s in reset:
        for a in range(len(M.actions[s])):
            trans2[(s, a)] = ((M.initial, Fraction(1)),)
    M2 = PreMDP(M.labels, M.initial, M.actions, trans2, validate=False)

    wins = []
    sigma = []
    for dpw in dpws:
        w, s = _component_win(dpw, spec.inputs, spec.outputs, dist, ceiling)
        wins.append(w)
        sigma.append(s)
    positions = list(range(len(dpws)))
    gamma = _gamma_rewards(M2, positions, vals, wins, dist)
    RM2 = RewardMDP(M2.labels, M2.initial, M2.actions, M2.trans, gamma, validate=False)
    value, strat = solve_mean_payoff(RM2)
    triggers, realized = _install_triggers(
        RM2, gamma, strat.primary, vals, None, None, None, dist)
    if realized != value:
        raise InternalConsistencyError("refined strategy changes the expected reward")
    primary = dict(strat.primary)
    for s in reset:
        primary[s] = 0
    phase_letters = {("win", i): (positions[i], sigma[i]) for i in range(len(vals))}
    T = _extract(prod, M, primary, triggers, phase_letters,
                 spec.inputs, spec.outputs, dist, ceiling)
    check = conditional_expected_value(T, spec.formula, spec.assumption, dist, ceiling)
    if check != value:
        raise InternalConsistencyError(
            f"certificate mismatch: reported {value}, re-evaluated {check}")
    return SynthesisResult(
        transducer=T,
        expected_value=value,
        assumption_probability=pr,
        stats=_stats(vals, dpws, prod, RM2, T, {"reset_states": len(reset)}),
    )


def synth_assume_threshold(spec: SynthesisSpec, ceiling=None):
    """Maximal conditional expected value subject to a conditional floor.

    The conditional floor "value at least t whenever the assumption holds"
    equals the unconditional floor on (assumption implies formula), which
    is what the threshold automaton tracks.
    """
    _require_trackable(spec.distribution)
    dist = spec.distribution
    if not _output_insensitive(dist):
        raise ValueError("conditional synthesis needs an output-insensitive input process")
    t = spec.threshold
    pr = prob_of_assumption(spec.assumption, spec.inputs, dist, ceiling)
    if pr == 0:
        raise AssumptionHasZeroProbability("the assumption holds with probability 0")
    if pr == 1:
        base = SynthesisSpec(spec.inputs, spec.outputs, spec.formula,
                             threshold=t, distribution=dist)
        res = synth_threshold(base, ceiling)
        if isinstance(res, SynthesisResult):
            res.assumption_probability = pr
        return res

    atoms = spec.inputs | spec.outputs
    guarded = implies(spec.assumption, spec.formula)
    att = dpw_for(guarded, AtLeast(t), atoms, ceiling=ceiling)
    att_win, att_sigma = _component_win(att, spec.inputs, spec.outputs, dist, ceiling)
    att_M = _induced(att, spec.inputs, spec.outputs, dist, ceiling)
    if att_M.labels[att_M.initial] not in att_win:
        losing = tuple(lab for lab in att_M.labels if lab not in att_win)
        return Unrealizable(t, losing, {"mdp_states": att_M.n})

    vals, dpws = _value_automata(spec.formula, atoms, ceiling)
    low = next((i for i, v in enumerate(vals) if v >= t), 0) if t > 0 else 0
    used_vals = vals[low:]
    used_dpws = dpws[low:]
    psi = dpw_for(spec.assumption, AtLeast(Fraction(1)), atoms, ceiling=ceiling)
    prod = ProductPreAutomaton(used_dpws + [att, psi], ceiling=ceiling)
    att_pos = len(used_dpws)
    psi_pos = att_pos + 1
    M = _induced_restricted(prod, att_pos, att_win, spec.inputs, spec.outputs,
                            dist, ceiling)
    rej = _rejecting_keys(psi, spec.inputs, dist, ceiling)
    reset = [s for s in range(M.n) if _proj_key(psi_pos, M.labels[s], dist) in rej]
    trans2 = dict(M.trans)
    for s in reset:
        for a in range(len(M.actions[s])):
            trans2[(s, a)] = ((M.initial, Fraction(1)),)
    M2 = PreMDP(M.labels, M.initial, M.actions, trans2, validate=False)

    wins = []
    sigma = []
    for dpw in used_dpws:
        w, s = _component_win(dpw, spec.inputs, spec.outputs, dist, ceiling)
        wins.append(w)
        sigma.append(s)
    positions = list(range(len(used_dpws)))
    gamma = _gamma_rewards(M2, positions, used_vals, wins, dist)
    RM2 = RewardMDP(M2.labels, M2.initial, M2.actions, M2.trans, gamma, validate=False)
    value, strat = solve_mean_payoff(RM2)
    triggers, realized = _install_triggers(
        RM2, gamma, strat.primary, used_vals, att_pos, att.rank, t, dist)
    if realized != value:
        raise InternalConsistencyError("refined strategy changes the expected reward")
    primary = dict(strat.primary)
    for s in reset:
        primary[s] = 0
    phase_letters = {("win", i): (positions[i], sigma[i])
                     for i in range(len(used_vals))}
    phase_letters[("floor",)] = (att_pos, att_sigma)
    T = _extract(prod, M, primary, triggers, phase_letters,
                 spec.inputs, spec.outputs, dist, ceiling)
    check = conditional_expected_value(T, spec.formula, spec.assumption, dist, ceiling)
    if check != value:
        raise InternalConsistencyError(
            f"certificate mismatch: reported {value}, re-evaluated {check}")
    floor = conditional_almost_sure_floor(T, spec.formula, spec.assumption, dist, ceiling)
    if floor < t:
        raise InternalConsistencyError(
            f"conditional floor {floor} fails the threshold {t}")
    return SynthesisResult(
        transducer=T,
        expected_value=value,
        almost_sure_floor=floor,
        assumption_probability=pr,
        stats=_stats(used_vals, used_dpws, prod, RM2, T,
                     {"threshold": str(t), "reset_states": len(reset)}),
    )


def synthesize(spec: SynthesisSpec, ceiling=None):
    """Dispatch on which optional constraints the spec carries."""
    if spec.assumption is not None and spec.threshold is not None:
        return synth_assume_threshold(spec, ceiling)
    if spec.assumption is not None:
        return synth_assume(spec, ceiling)
    if spec.threshold is not None:
        return synth_threshold(spec, ceiling)
    return synth(spec, ceiling)
