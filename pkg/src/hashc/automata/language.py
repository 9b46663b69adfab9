"""Word-level semantics: bounded language enumeration.

Until-conditions depend on streams ending, so a language is only defined
relative to an assignment of stream lengths. A stream of length L terminates
on its (L+1)-th activation: L values cross the port, then the end marker.
Ports without an assigned length never terminate. The default assigns length
1 to every port mentioned by a condition.
"""

from __future__ import annotations

from hashc.automata import runtime as rt
from hashc.automata.model import GuideAutomaton
from hashc.errors import StateSpaceBudgetExceeded

LANGUAGE_BUDGET = 10**6
DEFAULT_STREAM_LENGTH = 1


def default_lengths(aut: GuideAutomaton) -> dict[str, int]:
    return {port: DEFAULT_STREAM_LENGTH for port in sorted(aut.condition_ports())}


def _flags_for(counts: dict[str, int], lengths: dict[str, int]) -> frozenset[str]:
    out = set()
    for port, length in lengths.items():
        if counts.get(port, 0) >= length + 1:
            out.add(port)
    return frozenset(out)


def _bump(counts: dict[str, int], port: str, lengths: dict[str, int]) -> dict[str, int]:
    if port not in lengths:
        return counts
    cap = lengths[port] + 1
    out = dict(counts)
    out[port] = min(cap, out.get(port, 0) + 1)
    return out


def language_upto(
    aut: GuideAutomaton,
    n: int,
    stream_lengths: dict[str, int] | None = None,
    budget: int = LANGUAGE_BUDGET,
) -> set[tuple[str, ...]]:
    """All accepted activation sequences of length <= n, as port-name tuples."""
    lengths = default_lengths(aut) if stream_lengths is None else dict(stream_lengths)
    words: set[tuple[str, ...]] = set()
    counts0: dict[str, int] = {}
    st0 = rt.initial_state(aut, _flags_for(counts0, lengths))
    frontier: list[tuple[rt.AutomatonState, dict[str, int], tuple[str, ...]]] = [
        (st0, counts0, ())
    ]
    visited = 0
    while frontier:
        st, counts, word = frontier.pop()
        visited += 1
        if visited > budget:
            raise StateSpaceBudgetExceeded(
                f"language enumeration exceeded {budget} configurations"
            )
        if rt.accepting(aut, st):
            words.add(word)
        if len(word) >= n:
            continue
        for letter in sorted(rt.enabled_letters(aut, st)):
            port = letter[:-1]
            ncounts = _bump(counts, port, lengths)
            nflags = _flags_for(ncounts, lengths)
            # the activation that carries an end-of-stream marker must be
            # visible to the conditions it satisfies, so flags go first
            nxt = rt.advance(aut, rt.AutomatonState(st.alts, nflags), letter)
            frontier.append((nxt, ncounts, word + (port,)))
    return words


def words_as_strings(words: set[tuple[str, ...]], sep: str = " ") -> set[str]:
    return {sep.join(w) for w in words}
