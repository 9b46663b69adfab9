"""Operational stepping of guide automata.

An AutomatonState is a set of alternatives, one per nondeterministic reading
of the run so far. Each alternative tracks its live threads (a multiset of
states), one counter per semaphore, and one counter per counting choice
state. Port-stream termination flags live beside the alternatives and are fed
in by the caller: the simulator sets a flag when an end-of-stream frame
crosses the port, the language oracle derives flags from activation counts.

Choices are resolved eagerly during stabilization, but the unresolved
alternative is kept too, so a flag that arrives later can still re-resolve
them; both evaluation timings are legitimate runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from hashc.automata.model import (
    CHOICE,
    FORK,
    FORWARD,
    JOIN,
    CondCounter,
    CondUntil,
    GuideAutomaton,
    Transition,
)
from hashc.errors import InvalidActivation, SemaphoreUnderflow, StateSpaceBudgetExceeded

STABILIZE_BUDGET = 10**6


@dataclass(frozen=True)
class Config:
    threads: tuple[int, ...]  # sorted multiset of states
    sems: tuple[tuple[str, int], ...] = ()
    counters: tuple[tuple[int, int], ...] = ()  # choice state -> iterations done

    def sem(self, name: str) -> int:
        for s, v in self.sems:
            if s == name:
                return v
        return 0

    def counter(self, q: int) -> int:
        for s, v in self.counters:
            if s == q:
                return v
        return 0


@dataclass(frozen=True)
class AutomatonState:
    alts: frozenset[Config]
    flags: frozenset[str] = frozenset()


def _with_threads(cfg: Config, threads: list[int]) -> Config:
    return Config(tuple(sorted(threads)), cfg.sems, cfg.counters)


def _set_sem(cfg: Config, name: str, value: int) -> Config:
    sems = tuple(sorted({**dict(cfg.sems), name: value}.items()))
    return Config(cfg.threads, sems, cfg.counters)


def _enter(aut: GuideAutomaton, cfg: Config, state: int, probe: bool = False) -> Config | None:
    """Apply sigma updates of an entered state; None when a semaphore would
    drop below zero (the negative value is discarded with the alternative).
    In probe mode the value is floored at zero instead, so reachability
    behind unsatisfied waits can still be detected."""
    for sem, delta in aut.sigma.get(state, ()):
        value = cfg.sem(sem) + delta
        if value < 0:
            if not probe:
                return None
            value = 0
        cfg = _set_sem(cfg, sem, value)
    return cfg


def _move(
    aut: GuideAutomaton, cfg: Config, idx: int, targets: list[int], probe: bool = False
) -> Config | None:
    threads = list(cfg.threads)
    threads.pop(idx)
    threads.extend(targets)
    out = _with_threads(cfg, threads)
    for st in targets:
        entered = _enter(aut, out, st, probe)
        if entered is None:
            return None
        out = entered
    return out


def _eval_condition(cond, cfg: Config, q: int, flags: frozenset[str]) -> bool:
    if isinstance(cond, CondCounter):
        return cfg.counter(q) >= cond.count
    if isinstance(cond, CondUntil):
        done = any(all(p in flags for p in conj) for conj in cond.groups)
        return (not done) if cond.negated else done
    return True


def _join_expectations(aut: GuideAutomaton) -> dict[int, int]:
    out: dict[int, int] = {}
    for f, j in aut.fork_join.items():
        out[j] = sum(1 for t in aut.transitions if t.origin == f)
    return out


def _silent_successors(
    aut: GuideAutomaton,
    cfg: Config,
    flags: frozenset[str],
    expected: dict[int, int],
    probe: bool = False,
) -> list[Config]:
    out: list[Config] = []
    for idx, state in enumerate(cfg.threads):
        kind = aut.kind(state)
        if kind == FORWARD:
            for t in aut.out_transitions(state):
                if t.label is not None:
                    continue
                if t.guard is not None and not probe and cfg.sem(t.guard) < 1:
                    continue
                nxt = _move(aut, cfg, idx, [t.target], probe)
                if nxt is not None:
                    out.append(nxt)
        elif kind == CHOICE:
            cond = aut.gamma.get(state)
            true_side, false_side = aut.branches.get(state, ((), ()))
            taken = _eval_condition(cond, cfg, state, flags)
            targets = true_side if taken else false_side
            for target in targets:
                nxt = _move(aut, cfg, idx, [target])
                if nxt is None:
                    continue
                if isinstance(cond, CondCounter):
                    new_count = 0 if taken else cfg.counter(state) + 1
                    counters = dict(nxt.counters)
                    if new_count == 0:
                        counters.pop(state, None)
                    else:
                        counters[state] = new_count
                    nxt = Config(nxt.threads, nxt.sems, tuple(sorted(counters.items())))
                out.append(nxt)
        elif kind == FORK:
            kids = [t.target for t in aut.out_transitions(state)]
            nxt = _move(aut, cfg, idx, kids)
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
                        merged = _with_threads(cfg, threads + [target])
                        entered = _enter(aut, merged, target)
                        if entered is not None:
                            out.append(entered)
                else:
                    out.append(_with_threads(cfg, threads + [state]))
    return out


def stabilize(
    aut: GuideAutomaton,
    alts: frozenset[Config],
    flags: frozenset[str],
    probe: bool = False,
) -> frozenset[Config]:
    expected = _join_expectations(aut)
    seen: set[Config] = set(alts)
    stack = list(alts)
    while stack:
        if len(seen) > STABILIZE_BUDGET:
            raise StateSpaceBudgetExceeded(
                f"automaton closure exceeded {STABILIZE_BUDGET} configurations"
            )
        cfg = stack.pop()
        for nxt in _silent_successors(aut, cfg, flags, expected, probe):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def initial_state(aut: GuideAutomaton, flags: frozenset[str] = frozenset()) -> AutomatonState:
    cfg = Config(threads=(0,), sems=tuple((s, 0) for s in sorted(aut.semaphores)))
    entered = _enter(aut, cfg, 0)
    alts = frozenset() if entered is None else frozenset([entered])
    return AutomatonState(stabilize(aut, alts, flags), flags)


def set_flag(aut: GuideAutomaton, st: AutomatonState, port: str) -> AutomatonState:
    flags = st.flags | {port}
    return AutomatonState(stabilize(aut, st.alts, flags), flags)


def enabled_letters(aut: GuideAutomaton, st: AutomatonState) -> frozenset[str]:
    out: set[str] = set()
    for cfg in st.alts:
        for state in cfg.threads:
            for t in aut.out_transitions(state):
                if t.label is not None:
                    out.add(t.label)
    return frozenset(out)


def enabled_ports(aut: GuideAutomaton, st: AutomatonState) -> frozenset[tuple[str, str]]:
    """The (thread, port) pairs ready to communicate; threads are labeled by
    their position in the sorted thread tuple of the alternative."""
    out: set[tuple[str, str]] = set()
    for cfg in st.alts:
        for idx, state in enumerate(cfg.threads):
            for t in aut.out_transitions(state):
                if t.label is not None:
                    out.add((f"t{idx}", t.label[:-1]))
    return frozenset(out)


def _matches(label: str, activation: str) -> bool:
    return label == activation or label[:-1] == activation


def advance(aut: GuideAutomaton, st: AutomatonState, activation: str) -> AutomatonState:
    moved: set[Config] = set()
    structurally_present = False
    for cfg in st.alts:
        for idx, state in enumerate(cfg.threads):
            for t in aut.out_transitions(state):
                if t.label is None or not _matches(t.label, activation):
                    continue
                structurally_present = True
                nxt = _move(aut, cfg, idx, [t.target])
                if nxt is not None:
                    moved.add(nxt)
    if not moved:
        if not structurally_present and _blocked_on_semaphore(aut, st, activation):
            raise SemaphoreUnderflow(
                f"activation {activation!r} is only reachable through a semaphore "
                "wait that cannot be satisfied"
            )
        raise InvalidActivation(
            f"no transition for activation {activation!r}", activation=activation
        )
    return AutomatonState(stabilize(aut, frozenset(moved), st.flags), st.flags)


def _blocked_on_semaphore(aut: GuideAutomaton, st: AutomatonState, activation: str) -> bool:
    if not aut.semaphores:
        return False
    unguarded = stabilize(aut, st.alts, st.flags, probe=True)
    for cfg in unguarded:
        for state in cfg.threads:
            for t in aut.out_transitions(state):
                if t.label is not None and _matches(t.label, activation):
                    return True
    return False


def accepting(aut: GuideAutomaton, st: AutomatonState) -> bool:
    return any(all(s in aut.finals for s in cfg.threads) for cfg in st.alts)
