"""Guide automata: the structural form behaviors compile into.

States are naturals with the initial state fixed at 0. Transitions carry a
letter (a port activation like ``job?``) or None for epsilon moves. Fork and
join states implement ``par``; choice states carry the condition of a
``repeat`` or ``if``. Semaphore updates hang off states and are applied on
entry; wait moves are epsilon transitions guarded by a semaphore.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

FORWARD = "forward"
CHOICE = "choice"
FORK = "fork"
JOIN = "join"

STATE_KINDS = (FORWARD, CHOICE, FORK, JOIN)


@dataclass(frozen=True)
class CondUntil:
    """Disjunction of conjunctions over port names, true when some conjunct
    has every port's stream terminated. `negated` flips the result (used for
    bare if-conditions that test for pending data)."""

    groups: tuple[tuple[str, ...], ...]
    sync_marked: bool = False
    negated: bool = False


@dataclass(frozen=True)
class CondCounter:
    count: int


ConditionDescriptor = CondUntil | CondCounter | None


@dataclass(frozen=True)
class Transition:
    origin: int
    target: int
    label: str | None = None  # None = epsilon
    guard: str | None = None  # semaphore that must be positive to cross


@dataclass(frozen=True)
class GuideAutomaton:
    alphabet: tuple[str, ...]  # sorted letters
    n_states: int
    transitions: tuple[Transition, ...]
    finals: frozenset[int]
    semaphores: tuple[str, ...] = ()
    sigma: dict[int, tuple[tuple[str, int], ...]] = field(default_factory=dict)
    kinds: tuple[str, ...] = ()  # kind per state
    gamma: dict[int, ConditionDescriptor] = field(default_factory=dict)
    # choice branch targets: state -> (true targets, false targets)
    branches: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=dict)
    fork_join: dict[int, int] = field(default_factory=dict)
    kappa: dict[int, tuple[frozenset[int], frozenset[int]]] = field(default_factory=dict)

    def kind(self, q: int) -> str:
        return self.kinds[q] if q < len(self.kinds) else FORWARD

    def out_transitions(self, q: int) -> list[Transition]:
        return [t for t in self.transitions if t.origin == q]

    def ports(self) -> tuple[str, ...]:
        return tuple(sorted({letter[:-1] for letter in self.alphabet}))

    def condition_ports(self) -> frozenset[str]:
        out: set[str] = set()
        for cond in self.gamma.values():
            if isinstance(cond, CondUntil):
                for conj in cond.groups:
                    out.update(conj)
        return frozenset(out)

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "n_states": self.n_states,
            "transitions": [
                {
                    "origin": t.origin,
                    "target": t.target,
                    **({"label": t.label} if t.label is not None else {}),
                    **({"guard": t.guard} if t.guard is not None else {}),
                }
                for t in self.transitions
            ],
            "finals": sorted(self.finals),
            "semaphores": list(self.semaphores),
            "sigma": {str(q): [[s, d] for s, d in ups] for q, ups in sorted(self.sigma.items())},
            "kinds": list(self.kinds),
            "gamma": {str(q): _cond_json(c) for q, c in sorted(self.gamma.items())},
            "branches": {
                str(q): [list(t), list(f)] for q, (t, f) in sorted(self.branches.items())
            },
            "fork_join": {str(f): j for f, j in sorted(self.fork_join.items())},
            "kappa": {
                str(q): [sorted(l), sorted(r)] for q, (l, r) in sorted(self.kappa.items())
            },
        }

    @staticmethod
    def from_json(data: dict) -> "GuideAutomaton":
        return GuideAutomaton(
            alphabet=tuple(data["alphabet"]),
            n_states=data["n_states"],
            transitions=tuple(
                Transition(t["origin"], t["target"], t.get("label"), t.get("guard"))
                for t in data["transitions"]
            ),
            finals=frozenset(data["finals"]),
            semaphores=tuple(data.get("semaphores", ())),
            sigma={
                int(q): tuple((s, d) for s, d in ups)
                for q, ups in data.get("sigma", {}).items()
            },
            kinds=tuple(data.get("kinds", ())),
            gamma={int(q): _cond_from_json(c) for q, c in data.get("gamma", {}).items()},
            branches={
                int(q): (tuple(t), tuple(f))
                for q, (t, f) in data.get("branches", {}).items()
            },
            fork_join={int(f): j for f, j in data.get("fork_join", {}).items()},
            kappa={
                int(q): (frozenset(l), frozenset(r))
                for q, (l, r) in data.get("kappa", {}).items()
            },
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _cond_json(c: ConditionDescriptor) -> dict | None:
    if c is None:
        return None
    if isinstance(c, CondCounter):
        return {"counter": c.count}
    return {
        "until": [list(g) for g in c.groups],
        "sync_marked": c.sync_marked,
        "negated": c.negated,
    }


def _cond_from_json(data: dict | None) -> ConditionDescriptor:
    if data is None:
        return None
    if "counter" in data:
        return CondCounter(data["counter"])
    return CondUntil(
        tuple(tuple(g) for g in data["until"]),
        data.get("sync_marked", False),
        data.get("negated", False),
    )


def check_structure(aut: GuideAutomaton) -> list[str]:
    """Structural invariants; empty list when the automaton is well-formed."""
    problems: list[str] = []
    if aut.n_states == 0:
        return ["automaton has no states"]
    if len(aut.kinds) != aut.n_states:
        problems.append("kind vector length disagrees with state count")
    for t in aut.transitions:
        if not (0 <= t.origin < aut.n_states and 0 <= t.target < aut.n_states):
            problems.append(f"transition {t} leaves the state set")
        if t.label is not None and t.label not in aut.alphabet:
            problems.append(f"transition label {t.label!r} outside the alphabet")

    succ: dict[int, list[Transition]] = {}
    for t in aut.transitions:
        succ.setdefault(t.origin, []).append(t)

    for q in range(aut.n_states):
        kind = aut.kind(q)
        outs = succ.get(q, [])
        if kind == FORK:
            if any(t.label is not None for t in outs):
                problems.append(f"fork state {q} has a labeled outgoing transition")
            left, right = aut.kappa.get(q, (frozenset(), frozenset()))
            if right:
                problems.append(f"fork state {q} has a non-empty false continuation")
            if left != {t.target for t in outs}:
                problems.append(f"fork state {q}: kappa does not list its branch targets")
            if q not in aut.fork_join:
                problems.append(f"fork state {q} has no recorded join")
        elif kind == JOIN:
            if aut.kappa.get(q, (frozenset(), frozenset())) != (frozenset(), frozenset()):
                problems.append(f"join state {q} must have empty continuations")
        elif kind == FORWARD:
            left, right = aut.kappa.get(q, (frozenset(), frozenset()))
            if right:
                problems.append(f"forward state {q} has a non-empty false continuation")
            reach = _reachable_from(aut, q)
            for goal in left:
                if goal not in reach:
                    problems.append(f"state {goal} in kappa({q}) is unreachable from {q}")
        elif kind == CHOICE:
            if q not in aut.gamma or aut.gamma[q] is None:
                problems.append(f"choice state {q} carries no condition")
            if q not in aut.branches:
                problems.append(f"choice state {q} has no branch targets")

    for f, j in aut.fork_join.items():
        if aut.kind(f) != FORK or aut.kind(j) != JOIN:
            problems.append(f"fork/join pair ({f}, {j}) has wrong kinds")
            continue
        for t in succ.get(f, []):
            if not _thread_reaches(aut, t.target, j):
                problems.append(
                    f"thread of fork {f} starting at {t.target} cannot reach join {j}"
                )
    return problems


def _reachable_from(aut: GuideAutomaton, q: int) -> set[int]:
    seen = {q}
    stack = [q]
    while stack:
        cur = stack.pop()
        for t in aut.transitions:
            if t.origin == cur and t.target not in seen:
                seen.add(t.target)
                stack.append(t.target)
    return seen


def _thread_reaches(aut: GuideAutomaton, start: int, join: int) -> bool:
    """True when every maximal path from `start` can end up at `join`,
    balancing nested fork/join pairs."""
    return join in _reachable_from(aut, start)


def compute_kappa(aut: GuideAutomaton) -> dict[int, tuple[frozenset[int], frozenset[int]]]:
    """Continuation map: for each state the goal states a thread heads for.

    Goals are the states entered right after the next port activation; for
    choice states the two branch sides are seeded separately.
    """
    succ: dict[int, list[Transition]] = {}
    for t in aut.transitions:
        succ.setdefault(t.origin, []).append(t)

    def goals(seeds: tuple[int, ...]) -> frozenset[int]:
        out: set[int] = set()
        seen: set[int] = set()
        stack = list(seeds)
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen.add(q)
            kind = aut.kind(q)
            if kind in (FORK, JOIN, CHOICE):
                out.add(q)
                continue
            for t in succ.get(q, []):
                if t.label is not None:
                    out.add(t.target)
                else:
                    stack.append(t.target)
        return frozenset(out)

    kappa: dict[int, tuple[frozenset[int], frozenset[int]]] = {}
    for q in range(aut.n_states):
        kind = aut.kind(q)
        if kind == FORK:
            kappa[q] = (frozenset(t.target for t in succ.get(q, [])), frozenset())
        elif kind == JOIN:
            kappa[q] = (frozenset(), frozenset())
        elif kind == CHOICE:
            true_side, false_side = aut.branches.get(q, ((), ()))
            kappa[q] = (goals(true_side), goals(false_side))
        else:
            seeds = tuple(t.target for t in succ.get(q, []) if t.label is None)
            direct = frozenset(t.target for t in succ.get(q, []) if t.label is not None)
            kappa[q] = (goals(seeds) | direct, frozenset())
    return kappa


def renumber(aut: GuideAutomaton) -> GuideAutomaton:
    """Deterministic numbering: breadth-first from the initial state, ties
    broken by transition insertion order; unreachable states dropped."""
    succ: dict[int, list[Transition]] = {}
    for t in aut.transitions:
        succ.setdefault(t.origin, []).append(t)
    order: list[int] = [0]
    mapping: dict[int, int] = {0: 0}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for t in succ.get(q, []):
            if t.target not in mapping:
                mapping[t.target] = len(order)
                order.append(t.target)
    n = len(order)

    def m(q: int) -> int:
        return mapping[q]

    return GuideAutomaton(
        alphabet=aut.alphabet,
        n_states=n,
        transitions=tuple(
            Transition(m(t.origin), m(t.target), t.label, t.guard)
            for t in sorted(
                (t for t in aut.transitions if t.origin in mapping and t.target in mapping),
                key=lambda t: (mapping[t.origin], mapping[t.target], t.label or ""),
            )
        ),
        finals=frozenset(m(q) for q in aut.finals if q in mapping),
        semaphores=aut.semaphores,
        sigma={m(q): ups for q, ups in aut.sigma.items() if q in mapping},
        kinds=tuple(aut.kind(q) for q in order),
        gamma={m(q): c for q, c in aut.gamma.items() if q in mapping},
        branches={
            m(q): (
                tuple(m(x) for x in true if x in mapping),
                tuple(m(x) for x in false if x in mapping),
            )
            for q, (true, false) in aut.branches.items()
            if q in mapping
        },
        fork_join={m(f): m(j) for f, j in aut.fork_join.items() if f in mapping and j in mapping},
        kappa={},
    )
