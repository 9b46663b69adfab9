"""Compile behavior expressions into guide automata.

seq chains fragments, par opens a fork/join pair, alt branches from a plain
forward state, repeat and if become choice states. SyncUnion nodes (the `#`
operator) are compiled by flattening each operand into a forward/choice
automaton over its reachable configurations and taking a synchronized
product: shared letters step both sides, everything else interleaves.

The product serializes choice evaluation (left operand first). That is exact
as long as a side's until-condition only watches ports of its own operand,
which holds for every interface the corpus composes; pending choices are kept
unresolved by the runtime closure, so a flag arriving through the other
side's ports still re-resolves them.
"""

from __future__ import annotations

from dataclasses import replace as dc_replace

from hashc.automata import runtime as rt
from hashc.automata.model import (
    CHOICE,
    FORK,
    FORWARD,
    JOIN,
    CondCounter,
    CondUntil,
    GuideAutomaton,
    Transition,
    compute_kappa,
    renumber,
)
from hashc.behavior import (
    BAct,
    BAlt,
    BDo,
    BIf,
    BPar,
    BRepeat,
    BSeq,
    BSignal,
    BSkip,
    BSyncUnion,
    BWait,
    Behavior,
    BehaviorSpec,
    CCounter,
    CPending,
    CUntil,
    inline_do,
)
from hashc.errors import (
    StateSpaceBudgetExceeded,
    UnknownInterface,
    UnknownPort,
    UnknownSemaphore,
)

FLATTEN_BUDGET = 10**5


class _Builder:
    def __init__(self) -> None:
        self.kinds: list[str] = []
        self.transitions: list[Transition] = []
        self.sigma: dict[int, tuple[tuple[str, int], ...]] = {}
        self.gamma: dict[int, CondUntil | CondCounter] = {}
        self.branches: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        self.fork_join: dict[int, int] = {}

    def state(self, kind: str = FORWARD) -> int:
        self.kinds.append(kind)
        return len(self.kinds) - 1

    def edge(self, origin: int, target: int, label: str | None = None, guard: str | None = None):
        self.transitions.append(Transition(origin, target, label, guard))


def _cond_descriptor(cond) -> CondUntil | CondCounter:
    if isinstance(cond, CUntil):
        return CondUntil(cond.groups, cond.sync_marked, negated=False)
    if isinstance(cond, CPending):
        return CondUntil(cond.groups, sync_marked=False, negated=True)
    if isinstance(cond, CCounter):
        return CondCounter(cond.count)
    raise TypeError(f"unresolved condition {cond!r}")


def _frag(b: _Builder, node: Behavior, entry: int | None = None) -> tuple[int, int]:
    """Build states for one node; `entry` reuses an existing state (the
    previous fragment's exit, always a bare forward state) so sequencing does
    not burn an epsilon hop per element."""

    def ensure(kind: str) -> int:
        if entry is None:
            return b.state(kind)
        if kind != FORWARD:
            b.kinds[entry] = kind
        return entry

    if isinstance(node, BAct):
        s = ensure(FORWARD)
        e = b.state()
        b.edge(s, e, node.letter)
        return s, e
    if isinstance(node, BSkip):
        s = ensure(FORWARD)
        return s, s
    if isinstance(node, BSignal):
        s = ensure(FORWARD)
        e = b.state()
        b.sigma[e] = ((node.sem, 1),)
        b.edge(s, e)
        return s, e
    if isinstance(node, BWait):
        s = ensure(FORWARD)
        e = b.state()
        b.sigma[e] = ((node.sem, -1),)
        b.edge(s, e, guard=node.sem)
        return s, e
    if isinstance(node, BSeq):
        if not node.items:
            return _frag(b, BSkip(), entry)
        first, exit_ = _frag(b, node.items[0], entry)
        for item in node.items[1:]:
            _, exit_ = _frag(b, item, exit_)
        return first, exit_
    if isinstance(node, BPar):
        if len(node.items) == 1:
            return _frag(b, node.items[0], entry)
        fork = ensure(FORK)
        join = b.state(JOIN)
        b.fork_join[fork] = join
        for item in node.items:
            s, e = _frag(b, item)
            b.edge(fork, s)
            b.edge(e, join)
        return fork, join
    if isinstance(node, BAlt):
        if len(node.items) == 1:
            return _frag(b, node.items[0], entry)
        head = ensure(FORWARD)
        exit_ = b.state()
        for item in node.items:
            s, e = _frag(b, item)
            b.edge(head, s)
            b.edge(e, exit_)
        return head, exit_
    if isinstance(node, BRepeat):
        choice = ensure(CHOICE)
        exit_ = b.state()
        s, e = _frag(b, node.body)
        b.gamma[choice] = _cond_descriptor(node.cond)
        b.branches[choice] = ((exit_,), (s,))
        b.edge(choice, exit_)
        b.edge(choice, s)
        b.edge(e, choice)
        return choice, exit_
    if isinstance(node, BIf):
        choice = ensure(CHOICE)
        exit_ = b.state()
        ts, te = _frag(b, node.then)
        es, ee = _frag(b, node.els)
        b.gamma[choice] = _cond_descriptor(node.cond)
        b.branches[choice] = ((ts,), (es,))
        b.edge(choice, ts)
        b.edge(choice, es)
        b.edge(te, exit_)
        b.edge(ee, exit_)
        return choice, exit_
    if isinstance(node, BSyncUnion):
        parts = [_flatten(_compile_raw(p), FLATTEN_BUDGET) for p in node.parts]
        prod = parts[0]
        for part in parts[1:]:
            prod = _product(prod, part)
        spliced_entry, exit_ = _splice(b, prod)
        if entry is not None:
            b.edge(entry, spliced_entry)
            return entry, exit_
        return spliced_entry, exit_
    if isinstance(node, BDo):
        raise UnknownInterface(f"unresolved slice reference: do {node.slice_name}")
    raise TypeError(f"unknown behavior node {node!r}")


def _collect_sems(node: Behavior, out: set[str]) -> None:
    if isinstance(node, (BSignal, BWait)):
        out.add(node.sem)
    elif isinstance(node, (BSeq, BPar, BAlt)):
        for it in node.items:
            _collect_sems(it, out)
    elif isinstance(node, BSyncUnion):
        for it in node.parts:
            _collect_sems(it, out)
    elif isinstance(node, BRepeat):
        _collect_sems(node.body, out)
    elif isinstance(node, BIf):
        _collect_sems(node.then, out)
        _collect_sems(node.els, out)


def _compile_raw(expr: Behavior, semaphores: tuple[str, ...] = ()) -> GuideAutomaton:
    b = _Builder()
    entry, exit_ = _frag(b, expr)
    if entry != 0:
        raise AssertionError("fragment entry must be the first state")
    letters = sorted({t.label for t in b.transitions if t.label is not None})
    sems = set(semaphores)
    _collect_sems(expr, sems)
    return GuideAutomaton(
        alphabet=tuple(letters),
        n_states=len(b.kinds),
        transitions=tuple(b.transitions),
        finals=frozenset([exit_]),
        semaphores=tuple(sorted(sems)),
        sigma=b.sigma,
        kinds=tuple(b.kinds),
        gamma=b.gamma,
        branches=b.branches,
        fork_join=b.fork_join,
    )


def compile_behavior(behavior, interface=None) -> GuideAutomaton:
    """Compile a BehaviorSpec (or bare expression) into a guide automaton.

    When an interface is given, `do` slices are inlined from it and every
    port and semaphore reference is validated against it.
    """
    if isinstance(behavior, BehaviorSpec):
        spec = behavior
    else:
        spec = BehaviorSpec((), behavior)
    expr = spec.expr
    if interface is not None and interface.slices:
        bodies = {
            name: sb.behavior.expr
            for name, sb in interface.slices.items()
            if sb.behavior is not None
        }
        try:
            expr = inline_do(expr, bodies)
        except KeyError as exc:
            raise UnknownInterface(f"unknown slice {exc.args[0]!r} in do") from None

    declared = set(spec.sems)
    used: set[str] = set()
    _collect_sems(expr, used)
    if isinstance(behavior, BehaviorSpec):
        extra = used - declared
        if extra:
            raise UnknownSemaphore(f"undeclared semaphore {sorted(extra)[0]!r}")

    if interface is not None:
        _validate_ports(expr, interface)

    raw = _compile_raw(expr, tuple(sorted(declared | used)))
    out = renumber(raw)
    return dc_replace(out, kappa=compute_kappa(out))


def _validate_ports(expr: Behavior, interface) -> None:
    by_name: dict[str, set[str]] = {}
    for p in interface.ports:
        by_name.setdefault(p.name, set()).add(p.direction)

    def walk(node: Behavior) -> None:
        if isinstance(node, BAct):
            dirs = by_name.get(node.port)
            if dirs is None:
                raise UnknownPort(f"behavior references unknown port {node.port!r}")
            if node.direction not in dirs:
                raise UnknownPort(
                    f"port {node.port!r} has no {node.direction} direction in "
                    f"{interface.name}"
                )
        elif isinstance(node, (BSeq, BPar, BAlt)):
            for it in node.items:
                walk(it)
        elif isinstance(node, BSyncUnion):
            for it in node.parts:
                walk(it)
        elif isinstance(node, BRepeat):
            _check_cond(node.cond)
            walk(node.body)
        elif isinstance(node, BIf):
            _check_cond(node.cond)
            walk(node.then)
            walk(node.els)

    def _check_cond(cond) -> None:
        if isinstance(cond, (CUntil, CPending)):
            for conj in cond.groups:
                for port in conj:
                    if port not in by_name:
                        raise UnknownPort(f"condition references unknown port {port!r}")

    walk(expr)


# SyncUnion support: flattening and synchronized product


def _flatten(aut: GuideAutomaton, budget: int) -> GuideAutomaton:
    """Expand a guide automaton into its configuration graph.

    Threads, semaphore values, and loop counters are baked into the states;
    until-conditions stay symbolic as choice states, since they depend on
    runtime stream flags. Port moves of sibling threads are kept available
    at choice states so pending conditions do not block unrelated traffic.
    """
    expected = {}
    for f, j in aut.fork_join.items():
        expected[j] = sum(1 for t in aut.transitions if t.origin == f)

    init = rt.Config(threads=(0,), sems=tuple((s, 0) for s in sorted(aut.semaphores)))
    init = rt._enter(aut, init, 0)
    if init is None:
        raise StateSpaceBudgetExceeded("initial semaphore update is invalid")

    ids: dict[rt.Config, int] = {init: 0}
    order: list[rt.Config] = [init]
    kinds: list[str] = []
    transitions: list[Transition] = []
    gamma: dict[int, CondUntil] = {}
    branches: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
    finals: set[int] = set()

    def intern(cfg: rt.Config) -> int:
        if cfg not in ids:
            if len(ids) >= budget:
                raise StateSpaceBudgetExceeded(
                    f"behavior flattening exceeded {budget} configurations"
                )
            ids[cfg] = len(order)
            order.append(cfg)
        return ids[cfg]

    i = 0
    while i < len(order):
        cfg = order[i]
        me = i
        i += 1
        if all(s in aut.finals for s in cfg.threads):
            finals.add(me)

        until_threads = [
            (state, idx)
            for idx, state in enumerate(cfg.threads)
            if aut.kind(state) == CHOICE and isinstance(aut.gamma.get(state), CondUntil)
        ]
        if until_threads:
            state, idx = min(until_threads)
            kinds.append(CHOICE)
            gamma[me] = aut.gamma[state]
            true_side, false_side = aut.branches.get(state, ((), ()))
            resolved: tuple[list[int], list[int]] = ([], [])
            for side, targets in ((0, true_side), (1, false_side)):
                for target in targets:
                    nxt = rt._move(aut, cfg, idx, [target])
                    if nxt is not None:
                        resolved[side].append(intern(nxt))
            branches[me] = (tuple(resolved[0]), tuple(resolved[1]))
            for t_true in branches[me][0]:
                transitions.append(Transition(me, t_true))
            for t_false in branches[me][1]:
                transitions.append(Transition(me, t_false))
            _flatten_port_moves(aut, cfg, me, intern, transitions, skip_thread=idx)
            continue

        kinds.append(FORWARD)
        for nxt in _flatten_silent(aut, cfg, expected):
            transitions.append(Transition(me, intern(nxt)))
        _flatten_port_moves(aut, cfg, me, intern, transitions, skip_thread=None)

    return GuideAutomaton(
        alphabet=aut.alphabet,
        n_states=len(order),
        transitions=tuple(transitions),
        finals=frozenset(finals),
        semaphores=(),
        kinds=tuple(kinds),
        gamma=gamma,
        branches=branches,
    )


def _flatten_silent(aut: GuideAutomaton, cfg: rt.Config, expected: dict[int, int]):
    out = []
    for idx, state in enumerate(cfg.threads):
        kind = aut.kind(state)
        if kind == FORWARD:
            for t in aut.out_transitions(state):
                if t.label is not None:
                    continue
                if t.guard is not None and cfg.sem(t.guard) < 1:
                    continue
                nxt = rt._move(aut, cfg, idx, [t.target])
                if nxt is not None:
                    out.append(nxt)
        elif kind == CHOICE:
            cond = aut.gamma.get(state)
            if not isinstance(cond, CondCounter):
                continue  # until-choices are handled symbolically
            taken = cfg.counter(state) >= cond.count
            true_side, false_side = aut.branches.get(state, ((), ()))
            for target in true_side if taken else false_side:
                nxt = rt._move(aut, cfg, idx, [target])
                if nxt is None:
                    continue
                counters = dict(nxt.counters)
                if taken:
                    counters.pop(state, None)
                else:
                    counters[state] = cfg.counter(state) + 1
                out.append(rt.Config(nxt.threads, nxt.sems, tuple(sorted(counters.items()))))
        elif kind == FORK:
            kids = [t.target for t in aut.out_transitions(state)]
            nxt = rt._move(aut, cfg, idx, kids)
            if nxt is not None:
                out.append(nxt)
        elif kind == JOIN:
            need = expected.get(state, 1)
            if sum(1 for s in cfg.threads if s == state) >= need:
                threads = list(cfg.threads)
                for _ in range(need):
                    threads.remove(state)
                conts = [t.target for t in aut.out_transitions(state) if t.label is None]
                if conts:
                    for target in conts:
                        merged = rt._with_threads(cfg, threads + [target])
                        entered = rt._enter(aut, merged, target)
                        if entered is not None:
                            out.append(entered)
    return out


def _flatten_port_moves(aut, cfg, me, intern, transitions, skip_thread) -> None:
    for idx, state in enumerate(cfg.threads):
        if idx == skip_thread:
            continue
        for t in aut.out_transitions(state):
            if t.label is None:
                continue
            nxt = rt._move(aut, cfg, idx, [t.target])
            if nxt is not None:
                transitions.append(Transition(me, intern(nxt), t.label))


def _product(a: GuideAutomaton, b: GuideAutomaton) -> GuideAutomaton:
    """Synchronized product of two flattened automata (Eq. 10 semantics)."""
    shared = set(a.alphabet) & set(b.alphabet)

    ids: dict[tuple[int, int], int] = {(0, 0): 0}
    order: list[tuple[int, int]] = [(0, 0)]
    kinds: list[str] = []
    transitions: list[Transition] = []
    gamma: dict[int, CondUntil] = {}
    branches: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
    finals: set[int] = set()

    def intern(pair: tuple[int, int]) -> int:
        if pair not in ids:
            ids[pair] = len(order)
            order.append(pair)
        return ids[pair]

    i = 0
    while i < len(order):
        qa, qb = order[i]
        me = i
        i += 1
        if qa in a.finals and qb in b.finals:
            finals.add(me)

        choosing = None
        if a.kind(qa) == CHOICE:
            choosing = ("a", qa)
        elif b.kind(qb) == CHOICE:
            choosing = ("b", qb)

        if choosing is not None:
            side, q = choosing
            src = a if side == "a" else b
            kinds.append(CHOICE)
            gamma[me] = src.gamma[q]
            true_side, false_side = src.branches.get(q, ((), ()))
            mk = (lambda t: (t, qb)) if side == "a" else (lambda t: (qa, t))
            bt = tuple(intern(mk(t)) for t in true_side)
            bf = tuple(intern(mk(t)) for t in false_side)
            branches[me] = (bt, bf)
            for target in (*bt, *bf):
                transitions.append(Transition(me, target))
            # private port traffic of the other side keeps flowing while the
            # condition is pending
            other, qo = (b, qb) if side == "a" else (a, qa)
            for t in other.out_transitions(qo):
                if t.label is None or t.label in shared:
                    continue
                pair = (qa, t.target) if side == "a" else (t.target, qb)
                transitions.append(Transition(me, intern(pair), t.label))
            continue

        kinds.append(FORWARD)
        for t in a.out_transitions(qa):
            if t.label is None:
                transitions.append(Transition(me, intern((t.target, qb))))
            elif t.label in shared:
                for u in b.out_transitions(qb):
                    if u.label == t.label:
                        transitions.append(
                            Transition(me, intern((t.target, u.target)), t.label)
                        )
            else:
                transitions.append(Transition(me, intern((t.target, qb)), t.label))
        for u in b.out_transitions(qb):
            if u.label is None:
                transitions.append(Transition(me, intern((qa, u.target))))
            elif u.label not in shared:
                transitions.append(Transition(me, intern((qa, u.target)), u.label))

    return GuideAutomaton(
        alphabet=tuple(sorted(set(a.alphabet) | set(b.alphabet))),
        n_states=len(order),
        transitions=tuple(transitions),
        finals=frozenset(finals),
        semaphores=(),
        kinds=tuple(kinds),
        gamma=gamma,
        branches=branches,
    )


def _splice(b: _Builder, aut: GuideAutomaton) -> tuple[int, int]:
    offset = len(b.kinds)
    for kind in aut.kinds:
        b.state(kind)
    for t in aut.transitions:
        b.edge(t.origin + offset, t.target + offset, t.label, t.guard)
    for q, cond in aut.gamma.items():
        b.gamma[q + offset] = cond
    for q, (bt, bf) in aut.branches.items():
        b.branches[q + offset] = (
            tuple(x + offset for x in bt),
            tuple(x + offset for x in bf),
        )
    exit_ = b.state()
    for f in aut.finals:
        b.edge(f + offset, exit_)
    return offset, exit_
