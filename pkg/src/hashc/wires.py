"""Registry of built-in wire functions, structural side.

A wire function mediates between a logical port and the members of its
group. How a group fires is a structural property: 'all' groups activate
every member in one step, 'any' groups pick a single member per activation.
The executable counterparts live with the simulator kernels; this table only
records the firing discipline each built-in implies, so transformations can
default a grown group's kind from its wire.
"""

from __future__ import annotations

WIRE_GROUP_KINDS: dict[str, str | None] = {
    "identity": None,
    "broadcast": "all",
    "distribute": "any",
    "concat-combine": "all",
    "sum_arrays": "all",
    "split_and_scatter": "all",
    "transpose-sum": "all",
}

KNOWN_WIRES = frozenset(WIRE_GROUP_KINDS)


def default_kind(wire_name: str | None) -> str | None:
    if wire_name is None:
        return None
    return WIRE_GROUP_KINDS.get(wire_name)
