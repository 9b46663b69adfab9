"""Independent word-level oracles for behavior semantics.

These deliberately avoid the compiler/runtime/automaton path: the language of
a behavior is enumerated by walking the expression tree with a small-step
interpreter. Configurations evolve by letter steps (port activations) and by
silent steps (semaphore moves, loop/if boundary decisions, alt commitment).
Boundary conditions are evaluated when their silent step fires, and the
search interleaves silent steps freely with other threads' letters, so both
the eager and the late reading of a condition appear as runs - mirroring the
alternative-keeping closure of the runtime without sharing any code with it.

Also here: plain shuffle and synchronized-shuffle oracles, used to check
par and interface-composition languages against a second, even simpler
derivation.
"""

from __future__ import annotations

from itertools import product as iproduct

from hashc.behavior import (
    BAct,
    BAlt,
    BIf,
    BPar,
    BRepeat,
    BSeq,
    BSignal,
    BSkip,
    BSyncUnion,
    BWait,
    BehaviorSpec,
    CCounter,
    CPending,
    CUntil,
    alphabet,
)

ORACLE_BUDGET = 2 * 10**6

DONE = ("done",)


def _cfg(node):
    """Initial configuration of a behavior node."""
    if isinstance(node, BSkip):
        return DONE
    if isinstance(node, BAct):
        return ("act", node.letter)
    if isinstance(node, BSignal):
        return ("sig", node.sem)
    if isinstance(node, BWait):
        return ("wait", node.sem)
    if isinstance(node, BSeq):
        return _seq([_cfg(it) for it in node.items])
    if isinstance(node, BPar):
        return _par([_cfg(it) for it in node.items])
    if isinstance(node, BAlt):
        return ("alt", tuple(_cfg(it) for it in node.items))
    if isinstance(node, BRepeat):
        return ("bound", node, 0)
    if isinstance(node, BIf):
        return ("ifb", node)
    if isinstance(node, BSyncUnion):
        return (
            "sync",
            tuple(_cfg(p) for p in node.parts),
            tuple(alphabet(p) for p in node.parts),
        )
    raise TypeError(f"oracle cannot interpret {node!r}")


def _seq(items):
    items = list(items)
    while items and items[0] == DONE:
        items.pop(0)
    if not items:
        return DONE
    if len(items) == 1:
        return items[0]
    return ("seq", tuple(items))


def _par(items):
    items = [c for c in items if c != DONE]
    if not items:
        return DONE
    if len(items) == 1:
        return items[0]
    return ("par", tuple(items))


def _eval_cond(cond, k, flags):
    if isinstance(cond, CCounter):
        return k >= cond.count
    if isinstance(cond, CUntil):
        return any(all(p in flags for p in conj) for conj in cond.groups)
    if isinstance(cond, CPending):
        return not any(all(p in flags for p in conj) for conj in cond.groups)
    raise TypeError(f"unresolved condition {cond!r}")


def _steps(cfg, flags, sems):
    """All one-step successors: (marked_letter_or_None, cfg', sems')."""
    kind = cfg[0]
    if kind == "done":
        return []
    if kind == "act":
        return [(cfg[1], DONE, sems)]
    if kind == "sig":
        d = dict(sems)
        d[cfg[1]] = d.get(cfg[1], 0) + 1
        return [(None, DONE, tuple(sorted(d.items())))]
    if kind == "wait":
        d = dict(sems)
        if d.get(cfg[1], 0) < 1:
            return []
        d[cfg[1]] -= 1
        return [(None, DONE, tuple(sorted(d.items())))]
    if kind == "seq":
        items = cfg[1]
        return [
            (lt, _seq([c2, *items[1:]]), s2)
            for lt, c2, s2 in _steps(items[0], flags, sems)
        ]
    if kind == "par":
        out = []
        for i, child in enumerate(cfg[1]):
            for lt, c2, s2 in _steps(child, flags, sems):
                rest = list(cfg[1])
                rest[i] = c2
                out.append((lt, _par(rest), s2))
        return out
    if kind == "alt":
        out = [(lt, c2, s2) for c in cfg[1] for lt, c2, s2 in _steps(c, flags, sems)]
        if any(c == DONE for c in cfg[1]):
            out.append((None, DONE, sems))
        return out
    if kind == "bound":
        node, k = cfg[1], cfg[2]
        if _eval_cond(node.cond, k, flags):
            return [(None, DONE, sems)]
        return [(None, ("loop", node, _cfg(node.body), k + 1), sems)]
    if kind == "loop":
        node, inner, k = cfg[1], cfg[2], cfg[3]
        out = []
        for lt, c2, s2 in _steps(inner, flags, sems):
            nxt = ("bound", node, k) if c2 == DONE else ("loop", node, c2, k)
            out.append((lt, nxt, s2))
        return out
    if kind == "ifb":
        node = cfg[1]
        branch = node.then if _eval_cond(node.cond, 0, flags) else node.els
        return [(None, _cfg(branch), sems)]
    if kind == "sync":
        children, alphas = cfg[1], cfg[2]
        out = []
        for i, child in enumerate(children):
            for lt, c2, s2 in _steps(child, flags, sems):
                if lt is None:
                    rest = list(children)
                    rest[i] = c2
                    out.append((None, _sync(rest, alphas), s2))
                    continue
                # letter steps never move semaphores, so the shared state is
                # simply carried through the synchronized move
                owners = [j for j, a in enumerate(alphas) if lt in a]
                moves = []
                ok = True
                for j in owners:
                    if j == i:
                        moves.append([c2])
                        continue
                    sub = [
                        cj
                        for l2, cj, _ in _steps(children[j], flags, sems)
                        if l2 == lt
                    ]
                    if not sub:
                        ok = False
                        break
                    moves.append(sub)
                if not ok:
                    continue
                for pick in iproduct(*moves):
                    rest = list(children)
                    for j, cj in zip(owners, pick):
                        rest[j] = cj
                    out.append((lt, _sync(rest, alphas), sems))
        return out
    raise TypeError(f"bad config {cfg!r}")


def _sync(children, alphas):
    if all(c == DONE for c in children):
        return DONE
    return ("sync", tuple(children), alphas)


def _flags_for(counts, lengths):
    return frozenset(p for p, n in counts if n >= lengths[p] + 1)


def _bump(counts, port, lengths):
    if port not in lengths:
        return counts
    d = dict(counts)
    d[port] = min(lengths[port] + 1, d.get(port, 0) + 1)
    return tuple(sorted(d.items()))


def oracle_language(behavior, n, stream_lengths=None, budget=ORACLE_BUDGET):
    """All accepted activation sequences of length <= n as bare-name tuples."""
    if isinstance(behavior, BehaviorSpec):
        behavior = behavior.expr
    lengths = dict(stream_lengths or {})
    cfg0 = _cfg(behavior)
    start = (cfg0, (), ())
    words = set()
    frontier = [(start, ())]
    visited = {(start, ())}
    ticks = 0
    while frontier:
        (cfg, counts, sems), word = frontier.pop()
        ticks += 1
        if ticks > budget:
            raise RuntimeError(f"oracle exceeded {budget} configurations")
        if cfg == DONE:
            words.add(word)
            continue
        flags = _flags_for(counts, lengths)
        for lt, c2, s2 in _steps(cfg, flags, sems):
            if lt is None:
                node = ((c2, counts, s2), word)
            else:
                if len(word) >= n:
                    continue
                port = lt[:-1]
                node = ((c2, _bump(counts, port, lengths), s2), word + (port,))
            if node not in visited:
                visited.add(node)
                frontier.append(node)
    return words


def default_condition_lengths(behavior, length=1):
    """Length `length` for every port a condition watches (the runtime default)."""
    from hashc.behavior import condition_ports

    if isinstance(behavior, BehaviorSpec):
        behavior = behavior.expr
    return {p: length for p in condition_ports(behavior)}


# second-derivation oracles


def shuffle(w1, w2):
    """All interleavings of two words."""
    if not w1:
        return {tuple(w2)}
    if not w2:
        return {tuple(w1)}
    return {(w1[0],) + rest for rest in shuffle(w1[1:], w2)} | {
        (w2[0],) + rest for rest in shuffle(w1, w2[1:])
    }


def shuffle_sets(ws1, ws2):
    out = set()
    for a in ws1:
        for b in ws2:
            out |= shuffle(a, b)
    return out


def sync_shuffle(w1, w2, shared):
    """Interleavings of two words where letters in `shared` must step
    together (and must appear in compatible orders)."""

    def go(a, b):
        out = set()
        if not a and not b:
            return {()}
        if a:
            if a[0] in shared:
                if b and b[0] == a[0]:
                    out |= {(a[0],) + r for r in go(a[1:], b[1:])}
            else:
                out |= {(a[0],) + r for r in go(a[1:], b)}
        if b:
            if b[0] in shared:
                pass  # handled from a's side
            else:
                out |= {(b[0],) + r for r in go(a, b[1:])}
        return out

    return go(tuple(w1), tuple(w2))


def sync_shuffle_sets(ws1, ws2, shared):
    out = set()
    for a in ws1:
        for b in ws2:
            out |= sync_shuffle(a, b, shared)
    return out
