"""Interface values: port signatures plus behavior, with slice composition.

A where-clause composes interfaces two ways. A named slice (`ab@IBCast`)
renames every port of the sliced interface to the slice name, so one slice
contributes at most one input and one output; its renamed behavior stays
available for `do ab`. A positional slice (`IPipeStage particles -> events`)
associates the slice's ports with existing ports pairwise and is what the
replace-legality homomorphism checks run against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from hashc.behavior import (
    BDo,
    BPar,
    BSyncUnion,
    BehaviorSpec,
    inline_do,
    rename_ports,
)
from hashc.errors import DirectionClash, NestingMismatch, UnknownInterface, UnknownPort
from hashc.frontend.ast_nodes import InterfaceDecl, MName, MWild, PortsSpec


@dataclass(frozen=True)
class PortSig:
    name: str
    direction: str
    nesting: int
    type_tag: str | None = None


@dataclass
class SliceBinding:
    iface: str
    rename: dict[str, str]
    behavior: BehaviorSpec | None


@dataclass
class InterfaceValue:
    name: str
    ports: tuple[PortSig, ...] = ()
    behavior: BehaviorSpec | None = None
    slices: dict[str, SliceBinding] = field(default_factory=dict)

    def port(self, name: str) -> PortSig | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def port_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.ports)

    def inputs(self) -> tuple[PortSig, ...]:
        return tuple(p for p in self.ports if p.direction == "in")

    def outputs(self) -> tuple[PortSig, ...]:
        return tuple(p for p in self.ports if p.direction == "out")

    def resolved_behavior(self) -> BehaviorSpec | None:
        """Behavior with `do` slices inlined."""
        if self.behavior is None:
            return None
        bodies = {
            name: sb.behavior.expr for name, sb in self.slices.items() if sb.behavior is not None
        }
        return BehaviorSpec(self.behavior.sems, inline_do(self.behavior.expr, bodies))


def _ports_from_spec(spec: PortsSpec) -> list[PortSig]:
    out = []
    for decl in spec.inputs:
        out.append(PortSig(decl.name, "in", decl.nesting, decl.type_tag))
    for decl in spec.outputs:
        out.append(PortSig(decl.name, "out", decl.nesting, decl.type_tag))
    return out


def _merge_port(ports: list[PortSig], new: PortSig, origin: str) -> None:
    """Ports are keyed by (name, direction); an in/out pair may share a name."""
    for i, p in enumerate(ports):
        if p.name != new.name or p.direction != new.direction:
            continue
        if p.nesting == new.nesting:
            if p.type_tag is None and new.type_tag is not None:
                ports[i] = PortSig(p.name, p.direction, p.nesting, new.type_tag)
            return
        if p.nesting == 0:
            # header left the depth implicit; the slice refines it
            ports[i] = PortSig(p.name, p.direction, new.nesting, new.type_tag or p.type_tag)
            return
        raise NestingMismatch(
            f"port {new.name!r} has nesting {p.nesting} but {origin} requires {new.nesting}"
        )
    ports.append(new)


def build_interface(decl: InterfaceDecl, registry: dict[str, InterfaceValue]) -> InterfaceValue:
    ports: list[PortSig] = []
    slices: dict[str, SliceBinding] = {}
    behavior = decl.behavior

    if decl.specializes is not None:
        base = registry.get(decl.specializes)
        if base is None:
            raise UnknownInterface(f"{decl.name} specializes unknown interface {decl.specializes!r}")
        ports.extend(base.ports)
        slices.update(base.slices)
        if behavior is None:
            behavior = base.behavior

    if decl.ports is not None:
        for sig in _ports_from_spec(decl.ports):
            _merge_port(ports, sig, decl.name)

    for sref in decl.slices:
        src = registry.get(sref.iface)
        if src is None:
            raise UnknownInterface(f"unknown interface {sref.iface!r} in where-clause of {decl.name}")
        tag = sref.type_args[0] if sref.type_args else None
        if sref.slice_name is not None and sref.naming is None:
            # bare named slice: every port of the sliced interface takes the
            # slice's name (direction keeps input and output apart)
            rename = {p.name: sref.slice_name for p in src.ports}
            key = sref.slice_name
        else:
            rename = _positional_rename(src, sref.naming, decl.name)
            key = sref.slice_name if sref.slice_name is not None else sref.iface
        for p in src.ports:
            _merge_port(
                ports,
                PortSig(rename[p.name], p.direction, p.nesting, tag or p.type_tag),
                f"slice {key}@{sref.iface}" if key != sref.iface else f"slice {sref.iface}",
            )
        renamed_behavior = None
        if src.behavior is not None:
            resolved = src.resolved_behavior()
            renamed_behavior = BehaviorSpec(resolved.sems, rename_ports(resolved.expr, rename))
        slices[key] = SliceBinding(iface=sref.iface, rename=rename, behavior=renamed_behavior)

    iv = InterfaceValue(name=decl.name, ports=tuple(ports), behavior=behavior, slices=slices)
    _check_behavior_ports(iv)
    return iv


def _positional_rename(src: InterfaceValue, naming, owner: str) -> dict[str, str]:
    if naming is None:
        return {p.name: p.name for p in src.ports}
    rename: dict[str, str] = {}
    for side, elems in (("in", naming.ins), ("out", naming.outs)):
        formals = [p for p in src.ports if p.direction == side]
        if len(elems) != len(formals):
            raise UnknownPort(
                f"slice {src.name} in {owner}: {len(formals)} {side}-ports, "
                f"{len(elems)} names given"
            )
        for formal, elem in zip(formals, elems):
            if isinstance(elem, MWild):
                rename[formal.name] = formal.name
            elif isinstance(elem, MName):
                rename[formal.name] = elem.seg.base
            else:
                raise UnknownPort(f"slice {src.name} in {owner}: unsupported naming element")
    return rename


def _check_behavior_ports(iv: InterfaceValue) -> None:
    if iv.behavior is None:
        return
    resolved = iv.resolved_behavior()
    from hashc.behavior import alphabet, condition_ports, letter_port

    names = set(iv.port_names())
    for letter in alphabet(resolved.expr):
        if letter_port(letter) not in names:
            raise UnknownPort(
                f"behavior of {iv.name} references unknown port {letter_port(letter)!r}"
            )
    for port in condition_ports(resolved.expr):
        if port not in names:
            raise UnknownPort(f"condition in {iv.name} references unknown port {port!r}")


def compose_interfaces(i1: InterfaceValue, i2: InterfaceValue) -> InterfaceValue:
    """The `#` operator: port union, behaviors joined by synchronized union.

    A name both sides use only in opposite directions cannot synchronize and
    cannot coexist, so it is rejected.
    """
    dirs1: dict[str, set[str]] = {}
    for p in i1.ports:
        dirs1.setdefault(p.name, set()).add(p.direction)
    for p in i2.ports:
        here = {q.direction for q in i2.ports if q.name == p.name}
        if p.name in dirs1 and dirs1[p.name].isdisjoint(here):
            raise DirectionClash(
                f"port {p.name!r} has opposite directions in {i1.name} and {i2.name}"
            )
    ports = list(i1.ports)
    for p in i2.ports:
        _merge_port(ports, p, f"{i1.name} # {i2.name}")
    if i1.behavior is not None and i2.behavior is not None:
        b1 = i1.resolved_behavior()
        b2 = i2.resolved_behavior()
        behavior = BehaviorSpec(
            tuple(dict.fromkeys((*b1.sems, *b2.sems))),
            BSyncUnion((b1.expr, b2.expr)),
        )
    else:
        behavior = i1.resolved_behavior() or i2.resolved_behavior()
    slices = {**i1.slices, **i2.slices}
    return InterfaceValue(
        name=f"{i1.name}#{i2.name}", ports=tuple(ports), behavior=behavior, slices=slices
    )


def default_behavior(iv: InterfaceValue) -> BehaviorSpec:
    """Behavior for units declared without one: one action per port.

    Stream ports loop until their stream ends; plain ports fire once. All
    actions interleave.
    """
    from hashc.behavior import BAct, BRepeat, CUntil

    items = []
    for p in iv.ports:
        act = BAct(p.name, p.direction)
        if p.nesting > 0:
            items.append(BRepeat(act, CUntil(((p.name,),))))
        else:
            items.append(act)
    if len(items) == 1:
        return BehaviorSpec((), items[0])
    return BehaviorSpec((), BPar(tuple(items)))


def interface_of_ports(name: str, ports: list[PortSig]) -> InterfaceValue:
    return InterfaceValue(name=name, ports=tuple(ports))
