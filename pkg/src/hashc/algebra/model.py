"""The component algebra: generator sets, relations, and derived lookups.

A ComponentAlgebra holds the full state of one elaborated configuration:
units with their ports and port groups, channels, io bindings, and the
assignment maps tying units to kernels or composed sub-components. All
transformation operators produce new values; nothing mutates in place
across call boundaries.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace as dc_replace

from hashc.behavior import BehaviorSpec

PortId = tuple[str, str, str]  # (unit, port, direction)
GroupId = tuple[str, str, str]  # (unit, group name, direction)

# A unit may own an input and an output of the same name (an interface can
# pull both directions of a sliced interface under one name), so every port
# and group key carries its direction.

DIRECTIONS = ("in", "out")
GROUP_KINDS = (None, "any", "all")
CHANNEL_MODES = ("synchronous", "buffered", "ready")

DEFAULT_BUFFER_CAPACITY = 64


@dataclass(frozen=True)
class WireSpec:
    """A wire-function reference: registry name plus static arguments."""

    name: str | None = None
    args: tuple = ()
    host: str | None = None

    def key(self) -> str:
        if self.host is not None:
            return f"{{#{self.host}#}}"
        if self.name is None:
            return "?"
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class CollectiveTag:
    op: str
    role: str
    cluster: str


@dataclass
class PortInfo:
    unit: str
    name: str
    direction: str
    type_tag: str | None = None

    @property
    def id(self) -> PortId:
        return (self.unit, self.name, self.direction)


@dataclass
class GroupInfo:
    unit: str
    name: str
    direction: str
    members: tuple[str, ...]
    kind: str | None = None
    nesting: int = 0
    wire: WireSpec | None = None
    collective: CollectiveTag | None = None
    shadowed: tuple[WireSpec, ...] = ()

    @property
    def id(self) -> GroupId:
        return (self.unit, self.name, self.direction)

    def member_ids(self) -> tuple[PortId, ...]:
        return tuple((self.unit, m, self.direction) for m in self.members)


@dataclass
class KernelBinding:
    kernel: str
    in_slots: tuple[str | None, ...] = ()  # unit port per argument slot, None = fixed
    out_slots: tuple[str | None, ...] = ()  # unit port per return slot, None = dropped
    fixed_args: dict = field(default_factory=dict)


@dataclass
class UnitInfo:
    name: str
    repetitive: bool = False
    assigned: str | None = None  # component or kernel name; None = virtual
    cluster: bool = False
    behavior: BehaviorSpec | None = None
    iface_name: str | None = None
    kernel: KernelBinding | None = None

    @property
    def virtual(self) -> bool:
        return self.assigned is None


@dataclass
class Channel:
    src: PortId
    dst: PortId
    mode: str = "synchronous"
    capacity: int | None = None

    def effective_capacity(self) -> int | None:
        if self.mode != "buffered":
            return None
        return self.capacity if self.capacity is not None else DEFAULT_BUFFER_CAPACITY


@dataclass
class IoBind:
    io_name: str
    direction: str  # 'in': component input feeds the port; 'out': port feeds output
    target: PortId


@dataclass
class IoPort:
    name: str
    direction: str
    nesting: int
    type_tag: str | None = None


@dataclass
class ComponentAlgebra:
    name: str
    units: dict[str, UnitInfo] = field(default_factory=dict)
    ports: dict[PortId, PortInfo] = field(default_factory=dict)
    groups: dict[GroupId, GroupInfo] = field(default_factory=dict)
    channels: list[Channel] = field(default_factory=list)
    io: list[IoPort] = field(default_factory=list)
    binds: list[IoBind] = field(default_factory=list)
    composed: set[str] = field(default_factory=set)  # names assignable as clusters
    simple: set[str] = field(default_factory=set)  # kernel names
    comprising: dict[str, tuple[str, ...]] = field(default_factory=dict)  # cluster -> inner units
    psi: dict[PortId, PortId] = field(default_factory=dict)  # cluster port -> inner port
    iota_override: dict[str, tuple[tuple[str, ...], object]] | None = None

    # derived lookups

    def port_group(self, pid: PortId) -> GroupInfo | None:
        """The single group containing the port (total when R4-R6 hold)."""
        for group in self.unit_groups(pid[0]):
            if group.direction == pid[2] and pid[1] in group.members:
                return group
        return None

    def unit_groups(self, unit: str) -> list[GroupInfo]:
        return [g for gid, g in sorted(self.groups.items()) if gid[0] == unit]

    def unit_ports(self, unit: str) -> list[PortInfo]:
        return [p for pid, p in sorted(self.ports.items()) if pid[0] == unit]

    def iota(self, unit: str) -> tuple[tuple[str, ...], object]:
        """Derived interface of a unit: its group letters plus its behavior.

        Letters are direction-marked (name! / name?) so a same-named in/out
        pair stays distinguishable.
        """
        names = tuple(
            g.name + ("!" if g.direction == "out" else "?") for g in self.unit_groups(unit)
        )
        beh = self.units[unit].behavior
        return (names, beh)

    def channels_at(self, pid: PortId) -> list[Channel]:
        return [c for c in self.channels if c.src == pid or c.dst == pid]

    def clone(self) -> "ComponentAlgebra":
        return copy.deepcopy(self)

    # construction helpers used by elaboration and the operators

    def add_unit(self, info: UnitInfo) -> None:
        self.units[info.name] = info

    def add_port(self, info: PortInfo) -> None:
        self.ports[info.id] = info

    def add_group(self, info: GroupInfo) -> None:
        self.groups[info.id] = info

    def remove_unit(self, name: str) -> None:
        del self.units[name]
        for pid in [p for p in self.ports if p[0] == name]:
            del self.ports[pid]
        for gid in [g for g in self.groups if g[0] == name]:
            del self.groups[gid]
        self.channels = [c for c in self.channels if c.src[0] != name and c.dst[0] != name]
        self.binds = [b for b in self.binds if b.target[0] != name]
        self.psi = {k: v for k, v in self.psi.items() if k[0] != name and v[0] != name}
        self.comprising.pop(name, None)

    def rename_unit(self, old: str, new: str) -> None:
        if old == new:
            return
        unit = self.units.pop(old)
        unit.name = new
        self.units[new] = unit
        for pid in [p for p in self.ports if p[0] == old]:
            info = self.ports.pop(pid)
            info.unit = new
            self.ports[info.id] = info
        for gid in [g for g in self.groups if g[0] == old]:
            info = self.groups.pop(gid)
            info.unit = new
            self.groups[info.id] = info

        def fix(pid: PortId) -> PortId:
            return (new, *pid[1:]) if pid[0] == old else pid

        for ch in self.channels:
            ch.src = fix(ch.src)
            ch.dst = fix(ch.dst)
        for b in self.binds:
            b.target = fix(b.target)
        self.psi = {fix(k): fix(v) for k, v in self.psi.items()}
        if old in self.comprising:
            self.comprising[new] = self.comprising.pop(old)
        self.comprising = {
            k: tuple(new if u == old else u for u in v) for k, v in self.comprising.items()
        }
