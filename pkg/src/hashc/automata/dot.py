"""Graphviz rendering of guide automata."""

from __future__ import annotations

from hashc.automata.model import (
    CHOICE,
    FORK,
    FORWARD,
    JOIN,
    CondCounter,
    CondUntil,
    GuideAutomaton,
)

_SHAPES = {FORWARD: "circle", CHOICE: "diamond", FORK: "box", JOIN: "box"}


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _cond_label(cond) -> str:
    if isinstance(cond, CondCounter):
        return f"#{cond.count}"
    if isinstance(cond, CondUntil):
        body = " | ".join("&".join(group) for group in cond.groups)
        if cond.sync_marked:
            body += " !"
        return ("pending " if cond.negated else "until ") + body
    return "?"


def _state_label(aut: GuideAutomaton, q: int) -> str:
    parts = [str(q)]
    for sem, delta in aut.sigma.get(q, ()):
        parts.append(f"{sem}{delta:+d}")
    if aut.kind(q) == CHOICE and q in aut.gamma:
        parts.append(_cond_label(aut.gamma[q]))
    return "\\n".join(_escape(p) for p in parts)


def to_dot(aut: GuideAutomaton, name: str = "guide") -> str:
    lines = [f'digraph "{_escape(name)}" {{', "  rankdir=LR;", '  node [fontsize=11];']
    lines.append('  __init [shape=point, style=invis];')
    for q in range(aut.n_states):
        shape = _SHAPES[aut.kind(q)]
        attrs = [f"shape={shape}", f'label="{_state_label(aut, q)}"']
        if q in aut.finals:
            attrs.append("peripheries=2")
        lines.append(f"  q{q} [{', '.join(attrs)}];")
    lines.append("  __init -> q0;")
    for tr in aut.transitions:
        attrs = []
        if tr.label is not None:
            attrs.append(f'label="{_escape(tr.label)}"')
        else:
            style = ["style=dashed"]
            if tr.guard is not None:
                style.append(f'label="wait {_escape(tr.guard)}"')
            attrs.extend(style)
        lines.append(f"  q{tr.origin} -> q{tr.target} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
