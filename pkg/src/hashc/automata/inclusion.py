"""Language inclusion between guide automata.

The check is exact for semaphore-free behaviors under a fixed stream-length
assignment: both automata are expanded into finite letter graphs (flags are a
function of activation counts, so the expansion is faithful), the target is
projected onto the image of the port mapping, determinized, complemented,
and searched against the source in product.
"""

from __future__ import annotations

from hashc.automata import runtime as rt
from hashc.automata.language import DEFAULT_STREAM_LENGTH, _bump, _flags_for, default_lengths
from hashc.automata.model import GuideAutomaton
from hashc.errors import NonRegular, StateSpaceBudgetExceeded

EXPAND_BUDGET = 10**5


def _expand(aut: GuideAutomaton, lengths: dict[str, int], budget: int):
    """Deterministic letter graph: nodes are (alternatives, capped counts)."""
    init_st = rt.initial_state(aut, _flags_for({}, lengths))
    init = (init_st.alts, ())
    ids = {init: 0}
    order = [init]
    edges: list[dict[str, int]] = []
    finals: set[int] = set()
    i = 0
    while i < len(order):
        alts, counts_t = order[i]
        counts = dict(counts_t)
        me = i
        i += 1
        flags = _flags_for(counts, lengths)
        st = rt.AutomatonState(alts, flags)
        if rt.accepting(aut, st):
            finals.add(me)
        row: dict[str, int] = {}
        for letter in sorted(rt.enabled_letters(aut, st)):
            port = letter[:-1]
            ncounts = _bump(counts, port, lengths)
            nflags = _flags_for(ncounts, lengths)
            nxt = rt.advance(aut, rt.AutomatonState(alts, nflags), letter)
            key = (nxt.alts, tuple(sorted(ncounts.items())))
            if key not in ids:
                if len(ids) >= budget:
                    raise StateSpaceBudgetExceeded(
                        f"automaton expansion exceeded {budget} nodes"
                    )
                ids[key] = len(order)
                order.append(key)
            row[letter] = ids[key]
        edges.append(row)
    return edges, finals


def _map_letter(letter: str, mapping: dict[str, str | None] | None) -> str | None:
    """Rename a letter through the port mapping.

    Keys may be bare port names or full letters (name plus ! or ?); the
    letter form wins, and is the precise one when a name is mapped
    differently per direction. A None value erases the letter: the word is
    compared as if that activation never happened.
    """
    if mapping is None:
        return letter
    port, mark = letter[:-1], letter[-1]
    if letter in mapping:
        target = mapping[letter]
    elif port in mapping:
        target = mapping[port]
    else:
        return letter
    if target is None:
        return None
    return target if target[-1] in "!?" else target + mark


def _mapped_port(port: str, mapping: dict[str, str | None] | None) -> str | None:
    """Target-side name of a port, for carrying stream lengths across the
    mapping. None when the port is erased."""
    if mapping is None:
        return port
    for key in (port + "?", port + "!", port):
        if key in mapping:
            target = mapping[key]
            if target is None:
                return None
            return target[:-1] if target[-1] in "!?" else target
    return port


def invert_mapping(mapping: dict[str, str | None]) -> dict[str, str] | None:
    """Letter-aware inverse of a port mapping, or None when the mapping
    erases letters or is not injective at the letter level."""
    inv: dict[str, str] = {}
    for k, v in mapping.items():
        if v is None:
            return None
        if k[-1] in "!?" or v[-1] in "!?":
            if k[-1] in "!?" and v[-1] in "!?" and k[-1] != v[-1]:
                return None  # a direction-flipping rename has no language reading
            mark = k[-1] if k[-1] in "!?" else v[-1]
            ik = v if v[-1] in "!?" else v + mark
            iv = k if k[-1] in "!?" else k + mark
        else:
            ik, iv = v, k
        if ik in inv and inv[ik] != iv:
            return None
        inv[ik] = iv
    # a bare entry covers both directions, so it may still collide with a
    # letter entry of the same name
    bare = {k for k in inv if k[-1] not in "!?"}
    for k in inv:
        if k[-1] in "!?" and k[:-1] in bare:
            return None
    return inv


def check_inclusion(
    a1: GuideAutomaton,
    a2: GuideAutomaton,
    mapping: dict[str, str] | None = None,
    stream_lengths: dict[str, int] | None = None,
    budget: int = EXPAND_BUDGET,
) -> bool:
    """True iff every word of a1, mapped through `mapping`, is a word of a2
    projected onto the mapping's image."""
    if a1.semaphores or a2.semaphores:
        raise NonRegular("inclusion is undecidable here: semaphores present")

    lengths2 = default_lengths(a2)
    if stream_lengths:
        lengths2.update(stream_lengths)
    lengths1 = {}
    for p in sorted(a1.condition_ports()):
        t = _mapped_port(p, mapping)
        lengths1[p] = DEFAULT_STREAM_LENGTH if t is None else lengths2.get(t, DEFAULT_STREAM_LENGTH)

    edges1, finals1 = _expand(a1, lengths1, budget)
    edges2, finals2 = _expand(a2, lengths2, budget)

    image = {m for m in (_map_letter(letter, mapping) for letter in a1.alphabet) if m is not None}

    # project a2 onto the image alphabet: other letters become silent
    silent2: list[list[int]] = [[] for _ in edges2]
    letter2: list[dict[str, set[int]]] = [{} for _ in edges2]
    for q, row in enumerate(edges2):
        for letter, target in row.items():
            if letter in image:
                letter2[q].setdefault(letter, set()).add(target)
            else:
                silent2[q].append(target)

    def closure(states: frozenset[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            q = stack.pop()
            for target in silent2[q]:
                if target not in seen:
                    seen.add(target)
                    stack.append(target)
        return frozenset(seen)

    # product of a1 (letters mapped) with the determinized projection of a2;
    # a violating node is accepting in a1 but not in a2's subset
    start = (0, closure(frozenset([0])))
    seen = {start}
    stack = [start]
    while stack:
        q1, set2 = stack.pop()
        if q1 in finals1 and not (set2 & finals2):
            return False
        for letter, t1 in edges1[q1].items():
            mapped = _map_letter(letter, mapping)
            if mapped is None:
                nxt = (t1, set2)  # erased: a1 moves alone
            else:
                step: set[int] = set()
                for q2 in set2:
                    step.update(letter2[q2].get(mapped, ()))
                nxt = (t1, closure(frozenset(step)))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def compare_languages(
    a1: GuideAutomaton,
    a2: GuideAutomaton,
    mapping: dict[str, str] | None = None,
    stream_lengths: dict[str, int] | None = None,
) -> str:
    """Both-ways inclusion: Equivalent, Subsumed (a1 below a2), Subsumes, or
    Neither. The mapping is read as a1-port -> a2-port and inverted for the
    reverse direction when letter-injective and erasure-free."""
    forward = check_inclusion(a1, a2, mapping, stream_lengths)
    inverse = None
    if mapping is not None:
        inverse = invert_mapping(mapping)
        if inverse is None:
            return "Subsumed" if forward else "Neither"
    backward = check_inclusion(a2, a1, inverse, stream_lengths)
    if forward and backward:
        return "Equivalent"
    if forward:
        return "Subsumed"
    if backward:
        return "Subsumes"
    return "Neither"
