"""Interface subsumption via behavior-language inclusion.

A mapping associates each source port with a destination port or with None
(the `_` wildcard in replace clauses: traffic the destination never sees).
Subsumption is decided against the destination's language projected onto the
mapped letters:

  Subsumed  - every mapped source word is a projected destination word;
              needs every source port really mapped, since an erased letter
              is behavior the destination cannot account for.
  Subsumes  - the source covers the destination: every destination word is a
              projected-and-renamed source word; needs the real part of the
              mapping to be injective and to cover the destination's ports.
"""

from __future__ import annotations

from dataclasses import dataclass

from hashc.algebra.interfaces import InterfaceValue, default_behavior
from hashc.automata.compiler import compile_behavior
from hashc.automata.inclusion import check_inclusion
from hashc.automata.language import DEFAULT_STREAM_LENGTH, default_lengths, language_upto
from hashc.automata.model import GuideAutomaton
from hashc.errors import DirectionClash, NonRegular, UnknownPort, UnmappedPort

DEFAULT_BOUND = 8


class Verdict(str):
    """One of Subsumes / Subsumed / Equivalent / Neither; `approximate` is set
    when semaphores forced the bounded fallback."""

    approximate: bool

    def __new__(cls, value: str, approximate: bool = False):
        obj = super().__new__(cls, value)
        obj.approximate = approximate
        return obj


def interface_automaton(iv: InterfaceValue) -> GuideAutomaton:
    spec = iv.resolved_behavior()
    if spec is None:
        spec = default_behavior(iv)
    return compile_behavior(spec)


@dataclass(frozen=True)
class _Mapping:
    full: dict[str, str | None]
    real: dict[str, str]

    @property
    def erases(self) -> bool:
        return len(self.real) < len(self.full)

    def injective(self) -> bool:
        return len(set(self.real.values())) == len(self.real)


def _normalize(src: InterfaceValue, dst: InterfaceValue, m) -> _Mapping:
    if m is None:
        m = {p: p for p in src.port_names()}
    missing = [p for p in src.port_names() if p not in m]
    if missing:
        raise UnmappedPort(
            f"mapping does not cover ports of {src.name}: {', '.join(missing)}",
            ports=missing,
        )
    for name, target in m.items():
        if src.port(name) is None:
            raise UnknownPort(f"interface {src.name} has no port {name}", port=name)
        if target is not None and dst.port(target) is None:
            raise UnknownPort(f"interface {dst.name} has no port {target}", port=target)
    for p in src.ports:
        target = m.get(p.name)
        if target is None:
            continue
        if not any(q.name == target and q.direction == p.direction for q in dst.ports):
            raise DirectionClash(
                f"port {p.name} ({p.direction}) of {src.name} maps to {target}, "
                f"which {dst.name} declares only in the opposite direction"
            )
    real = {k: v for k, v in m.items() if v is not None}
    return _Mapping(full=dict(m), real=real)


def _bounded_inclusion(
    a1: GuideAutomaton, a2: GuideAutomaton, mapping: dict[str, str], bound: int
) -> bool:
    """Word-set fallback for semaphore-bearing behaviors, up to length `bound`."""
    lengths2 = default_lengths(a2)
    lengths1 = {
        p: lengths2.get(mapping.get(p, p), DEFAULT_STREAM_LENGTH)
        for p in sorted(a1.condition_ports())
    }
    image = {mapping.get(p, p) for p in a1.ports()}
    mapped = {
        tuple(mapping.get(p, p) for p in w) for w in language_upto(a1, bound, lengths1)
    }
    projected = {
        tuple(p for p in w if p in image) for w in language_upto(a2, bound, lengths2)
    }
    return mapped <= projected


def _iface_letters(iv: InterfaceValue) -> set[str]:
    return {p.name + ("!" if p.direction == "out" else "?") for p in iv.ports}


def _letter_real(src: InterfaceValue, full: dict[str, str | None]) -> dict[str, str]:
    """The real (non-erasing) part of the mapping, one entry per letter.

    Injectivity and coverage are letter questions, not name questions: a
    mapping may fold two opposite-direction ports onto one name and still be
    invertible, because the direction mark keeps the letters apart.
    """
    out: dict[str, str] = {}
    for p in src.ports:
        target = full.get(p.name)
        if target is None:
            continue
        mark = "!" if p.direction == "out" else "?"
        out[p.name + mark] = target + mark
    return out


def check_homomorphism(
    src: InterfaceValue,
    dst: InterfaceValue,
    m: dict[str, str | None] | None = None,
    bound: int = DEFAULT_BOUND,
) -> Verdict:
    mapping = _normalize(src, dst, m)
    a_src = interface_automaton(src)
    a_dst = interface_automaton(dst)

    letters = _letter_real(src, mapping.full)
    injective = len(set(letters.values())) == len(letters)
    can_fwd = not mapping.erases
    can_bwd = injective and set(letters.values()) >= _iface_letters(dst)
    inverse = {v: k for k, v in letters.items()} if injective else {}

    approximate = False
    try:
        fwd = can_fwd and check_inclusion(a_src, a_dst, letters)
        bwd = can_bwd and check_inclusion(a_dst, a_src, inverse)
    except NonRegular:
        approximate = True
        fwd = can_fwd and _bounded_inclusion(a_src, a_dst, mapping.real, bound)
        bwd = can_bwd and _bounded_inclusion(a_dst, a_src, {v: k for k, v in mapping.real.items()}, bound)

    if fwd and bwd:
        return Verdict("Equivalent", approximate)
    if fwd:
        return Verdict("Subsumed", approximate)
    if bwd:
        return Verdict("Subsumes", approximate)
    return Verdict("Neither", approximate)
