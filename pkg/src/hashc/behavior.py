"""Behavior expression trees.

The frontend parses unit/interface behaviors into these nodes; interface
composition adds SyncUnion nodes; the automata compiler consumes them.

Letters: a port activation is written `name!` (output) or `name?` (input).
Conditions refer to port groups by bare name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


def letter(port: str, direction: str) -> str:
    assert direction in ("in", "out")
    return port + ("?" if direction == "in" else "!")


def letter_port(lt: str) -> str:
    return lt[:-1]


def letter_direction(lt: str) -> str:
    return "in" if lt.endswith("?") else "out"


# conditions


@dataclass(frozen=True)
class CUntil:
    """Disjunction of conjunctions over port names; true when every port of
    some conjunct has seen its stream end."""

    groups: tuple[tuple[str, ...], ...]
    sync_marked: bool = False


@dataclass(frozen=True)
class CPending:
    """Bare condition (if without `until`): true while some conjunct still has
    every port unterminated."""

    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class CCounter:
    count: int  # resolved by unfolding; symbolic while still an Expr elsewhere


Condition = Union[CUntil, CPending, CCounter]


# behavior nodes


@dataclass(frozen=True)
class BAct:
    port: str
    direction: str  # "in" | "out"

    @property
    def letter(self) -> str:
        return letter(self.port, self.direction)


@dataclass(frozen=True)
class BSkip:
    pass


@dataclass(frozen=True)
class BSignal:
    sem: str


@dataclass(frozen=True)
class BWait:
    sem: str


@dataclass(frozen=True)
class BDo:
    slice_name: str


@dataclass(frozen=True)
class BSeq:
    items: tuple["Behavior", ...]


@dataclass(frozen=True)
class BPar:
    items: tuple["Behavior", ...]


@dataclass(frozen=True)
class BAlt:
    items: tuple["Behavior", ...]


@dataclass(frozen=True)
class BRepeat:
    body: "Behavior"
    cond: Condition


@dataclass(frozen=True)
class BIf:
    cond: Condition
    then: "Behavior"
    els: "Behavior"


@dataclass(frozen=True)
class BSyncUnion:
    """Synchronized union: shared letters step together, the rest interleave."""

    parts: tuple["Behavior", ...]


Behavior = Union[BAct, BSkip, BSignal, BWait, BDo, BSeq, BPar, BAlt, BRepeat, BIf, BSyncUnion]


@dataclass(frozen=True)
class BehaviorSpec:
    """A behavior clause: optional semaphore declarations plus the expression."""

    sems: tuple[str, ...]
    expr: Behavior


def alphabet(b: Behavior) -> frozenset[str]:
    """All letters activated anywhere in the tree (Do nodes must be inlined)."""
    out: set[str] = set()

    def walk(n: Behavior) -> None:
        if isinstance(n, BAct):
            out.add(n.letter)
        elif isinstance(n, (BSeq, BPar, BAlt, BSyncUnion)):
            for it in n.items if not isinstance(n, BSyncUnion) else n.parts:
                walk(it)
        elif isinstance(n, BRepeat):
            walk(n.body)
        elif isinstance(n, BIf):
            walk(n.then)
            walk(n.els)
        elif isinstance(n, BDo):
            raise ValueError(f"unresolved slice reference: do {n.slice_name}")

    walk(b)
    return frozenset(out)


def condition_ports(b: Behavior) -> frozenset[str]:
    """Port names referenced by until/pending conditions (stream-flag users)."""
    out: set[str] = set()

    def take(c: Condition) -> None:
        if isinstance(c, (CUntil, CPending)):
            for conj in c.groups:
                out.update(conj)

    def walk(n: Behavior) -> None:
        if isinstance(n, (BSeq, BPar, BAlt)):
            for it in n.items:
                walk(it)
        elif isinstance(n, BSyncUnion):
            for it in n.parts:
                walk(it)
        elif isinstance(n, BRepeat):
            take(n.cond)
            walk(n.body)
        elif isinstance(n, BIf):
            take(n.cond)
            walk(n.then)
            walk(n.els)

    walk(b)
    return frozenset(out)


def uses_semaphores(b: Behavior) -> bool:
    def walk(n: Behavior) -> bool:
        if isinstance(n, (BSignal, BWait)):
            return True
        if isinstance(n, (BSeq, BPar, BAlt)):
            return any(walk(it) for it in n.items)
        if isinstance(n, BSyncUnion):
            return any(walk(it) for it in n.parts)
        if isinstance(n, BRepeat):
            return walk(n.body)
        if isinstance(n, BIf):
            return walk(n.then) or walk(n.els)
        return False

    return walk(b)


def rename_ports(b: Behavior, mapping: dict[str, str]) -> Behavior:
    """Rename port names (not letters) throughout, conditions included."""

    def m(name: str) -> str:
        return mapping.get(name, name)

    def mc(c: Condition) -> Condition:
        if isinstance(c, CUntil):
            return CUntil(tuple(tuple(m(p) for p in conj) for conj in c.groups), c.sync_marked)
        if isinstance(c, CPending):
            return CPending(tuple(tuple(m(p) for p in conj) for conj in c.groups))
        return c

    def walk(n: Behavior) -> Behavior:
        if isinstance(n, BAct):
            return BAct(m(n.port), n.direction)
        if isinstance(n, BSeq):
            return BSeq(tuple(walk(it) for it in n.items))
        if isinstance(n, BPar):
            return BPar(tuple(walk(it) for it in n.items))
        if isinstance(n, BAlt):
            return BAlt(tuple(walk(it) for it in n.items))
        if isinstance(n, BSyncUnion):
            return BSyncUnion(tuple(walk(it) for it in n.parts))
        if isinstance(n, BRepeat):
            return BRepeat(walk(n.body), mc(n.cond))
        if isinstance(n, BIf):
            return BIf(mc(n.cond), walk(n.then), walk(n.els))
        return n

    return walk(b)


def inline_do(b: Behavior, slices: dict[str, Behavior]) -> Behavior:
    """Replace `do name` with the named slice behavior (already renamed)."""

    def walk(n: Behavior) -> Behavior:
        if isinstance(n, BDo):
            if n.slice_name not in slices:
                raise KeyError(n.slice_name)
            return slices[n.slice_name]
        if isinstance(n, BSeq):
            return BSeq(tuple(walk(it) for it in n.items))
        if isinstance(n, BPar):
            return BPar(tuple(walk(it) for it in n.items))
        if isinstance(n, BAlt):
            return BAlt(tuple(walk(it) for it in n.items))
        if isinstance(n, BSyncUnion):
            return BSyncUnion(tuple(walk(it) for it in n.parts))
        if isinstance(n, BRepeat):
            return BRepeat(walk(n.body), n.cond)
        if isinstance(n, BIf):
            return BIf(n.cond, walk(n.then), walk(n.els))
        return n

    return walk(b)
