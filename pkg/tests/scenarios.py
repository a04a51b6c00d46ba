"""Worked scenarios shared by the evaluation, synthesis, and acceptance tests.

Each scenario is a small control problem with hand-built candidate
transducers whose exact values are known in closed form.  Output timing
follows the computation semantics: the letter at position j joins the
input read at j with the label of the state entered on reading it.
"""

from fractions import Fraction

from hqsynth.formulas import parse
from hqsynth.transducers import Transducer

E = frozenset()


def _total(inputs, moves):
    """moves: {state: successor | {letter: successor}} over 1 input atom."""
    from hqsynth.common import all_letters
    delta = {}
    for q, m in moves.items():
        for i in all_letters(inputs):
            delta[(q, i)] = m[i] if isinstance(m, dict) else m
    return delta


# --- hard drive: close the connection, data may still arrive -------------

HD_INPUTS = frozenset({"data"})
HD_OUTPUTS = frozenset({"close"})


def hard_drive_formula():
    return parse("((X data) -> !close)"
                 " & (((!(X data)) -> close) | factor{1/2} (X close))")


def close_first_cycle() -> Transducer:
    moves = {0: 1, 1: 2, 2: 2}
    labels = {0: E, 1: frozenset({"close"}), 2: E}
    return Transducer(HD_INPUTS, HD_OUTPUTS, [0, 1, 2], 0,
                      _total(HD_INPUTS, moves), labels)


def close_second_cycle() -> Transducer:
    moves = {0: 1, 1: 2, 2: 3, 3: 3}
    labels = {0: E, 1: E, 2: frozenset({"close"}), 3: E}
    return Transducer(HD_INPUTS, HD_OUTPUTS, [0, 1, 2, 3], 0,
                      _total(HD_INPUTS, moves), labels)


# --- message sending over a possibly noisy channel -----------------------

MSG_INPUTS = frozenset({"noise"})
MSG_OUTPUTS = frozenset({"encode"})


def message_formula():
    cycle = "((!noise & !encode) | factor{3/4} encode)"
    shifted = ["(" + "X " * j + cycle + ")" for j in range(4)]
    return parse(f"wavg{{1/2}}(wavg{{1/2}}({shifted[0]}, {shifted[1]}),"
                 f" wavg{{1/2}}({shifted[2]}, {shifted[3]}))")


def encode_cycles(cycles) -> Transducer:
    """Encode unconditionally in the given cycles (of the first four)."""
    enc = frozenset({"encode"})
    labels = {j + 1: (enc if j in cycles else E) for j in range(4)}
    labels[0] = E
    labels[5] = E
    moves = {j: min(j + 1, 5) for j in range(6)}
    return Transducer(MSG_INPUTS, MSG_OUTPUTS, list(range(6)), 0,
                      _total(MSG_INPUTS, moves), labels)


# --- channel status frozen in pairs of cycles ----------------------------


def pair_constant_noise_assumption():
    same = "((noise -> X noise) & ((X noise) -> noise))"
    return parse(f"{same} & X X {same}")


def reactive_encoder(encode_odd_unconditionally: bool) -> Transducer:
    """Never encodes blindly in cycles 0 and 2 (or always does), and encodes
    in cycles 1 and 3 exactly when the preceding cycle was noisy."""
    enc = frozenset({"encode"})
    noise = frozenset({"noise"})
    base = enc if encode_odd_unconditionally else E
    labels = {0: E, 1: base, 2: base, 3: enc, 4: E,
              5: base, 6: base, 7: enc, 8: E}
    # states 1/2 remember the cycle-0 input, 5/6 the cycle-2 input
    moves = {
        0: {E: 1, noise: 2},
        1: {E: 4, noise: 4},
        2: {E: 3, noise: 3},
        3: {E: 5, noise: 6},
        4: {E: 5, noise: 6},
        5: {E: 8, noise: 8},
        6: {E: 7, noise: 7},
        7: {E: 8, noise: 8},
        8: {E: 8, noise: 8},
    }
    return Transducer(MSG_INPUTS, MSG_OUTPUTS, list(range(9)), 0,
                      _total(MSG_INPUTS, moves), labels)


# --- battery replacement at charging stations ----------------------------

BAT_INPUTS = frozenset({"station"})
BAT_OUTPUTS = frozenset({"replace"})


def battery_formula(k=4):
    only_at_stations = "G (replace -> station)"
    ante = " | ".join("X " * t + "station" for t in range(1, k + 1))
    cons = " | ".join("X " * t + "replace" for t in range(1, k + 1))
    must_replace = f"(({ante}) -> ({cons}))"
    fresh = " & ".join(f"({'X ' * t}(!replace | factor{{{t}/{k}}} replace))"
                       for t in range(1, k + 1))
    return parse(f"({only_at_stations}) & {must_replace} & ({fresh})")


def battery_replace_from(t=2, k=4) -> Transducer:
    """Replace at the first station seen at positions t..k, then idle."""
    st = frozenset({"station"})
    rep = frozenset({"replace"})
    watch = list(range(t, k + 1))
    states = list(range(t))            # counting up to the watch window
    states += [("w", j) for j in watch]  # watching at position j
    states += ["r", "done"]
    labels = {q: E for q in states}
    labels["r"] = rep
    moves = {}
    for j in range(t - 1):
        moves[j] = j + 1
    moves[t - 1] = ("w", t)
    for j in watch:
        nxt = ("w", j + 1) if j < k else "done"
        moves[("w", j)] = {E: nxt, st: "r"}
    moves["r"] = "done"
    moves["done"] = "done"
    return Transducer(BAT_INPUTS, BAT_OUTPUTS, states, 0,
                      _total(BAT_INPUTS, moves), labels)


def battery_closed_form(k, t, p) -> Fraction:
    """Expected value of battery_replace_from(t, k) with station chance p:
    no station ever (full battery credit) plus one term per position at
    which the first watched station can fall."""
    p = Fraction(p)
    total = (1 - p) ** k
    for i in range(0, k - t + 1):
        total += (1 - p) ** i * p * Fraction(t + i, k)
    return total
