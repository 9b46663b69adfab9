"""Transformation operators over elaborated configurations.

unify merges process units into one unit presenting a shared interface;
factorize splits a virtual unit along a partition of its ports; replicate
clones units (clusters included) and fans out the groups facing them. Every
operator works on a clone and returns (algebra, diagnostics); violations of
an operator's preconditions raise.

Group renamings are positional at the syntax level; here they arrive as
plain dicts from group name to target port name. Behavior checks compare the
new unit's language, projected onto what an operand (or the source) can see,
against that operand's own language; letters are direction-marked, so a unit
may end up with an input and an output sharing one name.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass

from hashc.algebra.interfaces import InterfaceValue, PortSig, default_behavior
from hashc.algebra.model import (
    Channel,
    ComponentAlgebra,
    GroupId,
    GroupInfo,
    KernelBinding,
    PortId,
    PortInfo,
    UnitInfo,
    WireSpec,
)
from hashc.automata.compiler import compile_behavior
from hashc.automata.inclusion import check_inclusion
from hashc.behavior import BSyncUnion, BehaviorSpec, rename_ports
from hashc.errors import (
    BadReplicationFactor,
    BehaviorNotPreserved,
    Diagnostic,
    DirectionClash,
    DuplicateUnit,
    MissingWireAdjust,
    NestingMismatch,
    NonRegular,
    NotVirtual,
    StateSpaceBudgetExceeded,
    TauHatViolation,
    UnknownPort,
    UnknownUnit,
)
from hashc.wires import default_kind


def _mark(direction: str) -> str:
    return "!" if direction == "out" else "?"


def ordered_groups(alg: ComponentAlgebra, unit: str) -> list[GroupInfo]:
    """Groups of a unit in declaration order. Positional renamings and member
    indexing depend on this order, so it must not be sorted."""
    return [g for gid, g in alg.groups.items() if gid[0] == unit]


def group_interface(alg: ComponentAlgebra, unit: str) -> InterfaceValue:
    """The group-level signature a unit presents to behavior checks."""
    info = alg.units[unit]
    ports = tuple(
        PortSig(g.name, g.direction, g.nesting, None) for g in ordered_groups(alg, unit)
    )
    return InterfaceValue(name=info.iface_name or unit, ports=ports, behavior=info.behavior)


def unit_behavior(alg: ComponentAlgebra, unit: str) -> BehaviorSpec:
    info = alg.units[unit]
    if info.behavior is not None:
        return info.behavior
    return default_behavior(group_interface(alg, unit))


@dataclass(frozen=True)
class OperandSpec:
    """One unify operand: the unit plus its group renaming (None = identity)."""

    unit: str
    rename: dict[str, str] | None = None


@dataclass(frozen=True)
class TargetSpec:
    name: str
    repetitive: bool = False
    iface: InterfaceValue | None = None
    iface_name: str | None = None


@dataclass(frozen=True)
class FactorTarget:
    name: str
    iface: InterfaceValue
    iface_name: str | None = None
    repetitive: bool = False


@dataclass(frozen=True)
class AdjustSetup:
    """A resolved `adjust` wire setup: port name, firing kind, expected size
    or explicit member list, and the wire to install."""

    port: str
    kind: str | None = None
    size: int | None = None
    members: tuple[str, ...] | None = None
    wire: WireSpec | None = None


def _total_rename(alg: ComponentAlgebra, unit: str, rename: dict[str, str] | None, op: str):
    groups = ordered_groups(alg, unit)
    names = {g.name for g in groups}
    r = dict(rename or {})
    unknown = sorted(set(r) - names)
    if unknown:
        raise UnknownPort(
            f"{op} of {unit!r}: the renaming names no such port(s) {', '.join(unknown)}",
            unit=unit,
            ports=unknown,
        )
    for g in groups:
        r.setdefault(g.name, g.name)
    return r


def _group_tag(alg: ComponentAlgebra, g: GroupInfo) -> str | None:
    for pid in g.member_ids():
        info = alg.ports.get(pid)
        if info is not None and info.type_tag is not None:
            return info.type_tag
    return None


def _canonical_members(members: tuple[str, ...], old: str, new: str) -> tuple[str, ...]:
    """Carry member names across a group rename: the bare group name and
    indexed forms follow the new name, custom names stay."""
    out = []
    for m in members:
        if m == old:
            out.append(new)
        elif m.startswith(old + "[") and m.endswith("]"):
            out.append(new + m[len(old):])
        else:
            out.append(m)
    return tuple(out)


def _remap_references(alg: ComponentAlgebra, pid_map: dict[PortId, PortId]) -> None:
    if not pid_map:
        return
    for ch in alg.channels:
        ch.src = pid_map.get(ch.src, ch.src)
        ch.dst = pid_map.get(ch.dst, ch.dst)
    for b in alg.binds:
        b.target = pid_map.get(b.target, b.target)
    alg.psi = {pid_map.get(k, k): pid_map.get(v, v) for k, v in alg.psi.items()}


def _delete_unit_shallow(alg: ComponentAlgebra, unit: str) -> None:
    """Drop a unit with its ports and groups but leave channels, binds and
    psi alone; the caller has already remapped them."""
    del alg.units[unit]
    for pid in [p for p in alg.ports if p[0] == unit]:
        del alg.ports[pid]
    for gid in [g for g in alg.groups if g[0] == unit]:
        del alg.groups[gid]
    if alg.iota_override:
        alg.iota_override.pop(unit, None)


def _set_iota_override(alg: ComponentAlgebra, unit: str, iface: InterfaceValue, beh) -> None:
    if alg.iota_override is None:
        alg.iota_override = {}
    letters = tuple(p.name + _mark(p.direction) for p in iface.ports)
    alg.iota_override[unit] = (letters, beh)


# unify


def unify(
    alg: ComponentAlgebra,
    operands: list[OperandSpec],
    target: TargetSpec,
    *,
    check_behavior: bool = True,
) -> tuple[ComponentAlgebra, list[Diagnostic]]:
    out = alg.clone()
    diags: list[Diagnostic] = []

    op_names: list[str] = []
    for op in operands:
        if op.unit not in out.units:
            raise UnknownUnit(f"unify names unknown unit {op.unit!r}", unit=op.unit)
        if op.unit in op_names:
            raise DuplicateUnit(f"unify lists unit {op.unit!r} twice", unit=op.unit)
        if out.units[op.unit].cluster:
            raise NotVirtual(
                f"unit {op.unit!r} is a cluster; only process units can be unified",
                unit=op.unit,
            )
        op_names.append(op.unit)
    assigned = [u for u in op_names if not out.units[u].virtual]
    if len(assigned) > 1:
        raise NotVirtual(
            f"units {', '.join(assigned)} all carry assignments; "
            "at most one unify operand may be assigned",
            units=assigned,
        )
    if target.name in out.units and target.name not in op_names:
        raise DuplicateUnit(
            f"unify target {target.name!r} already names a unit", unit=target.name
        )

    renames = {op.unit: _total_rename(out, op.unit, op.rename, "unify") for op in operands}

    # the target's ports: from its interface when given, else the union of
    # the renamed operand groups in first-seen order
    if target.iface is not None:
        tports = list(target.iface.ports)
        tindex = {(p.name, p.direction): p for p in tports}
        for u in op_names:
            for g in ordered_groups(out, u):
                name = renames[u][g.name]
                sig = tindex.get((name, g.direction))
                if sig is None:
                    if any(p.name == name for p in tports):
                        raise DirectionClash(
                            f"unify: {u}.{g.name} maps to {name!r}, which "
                            f"{target.iface.name} declares only in the opposite direction",
                            unit=u,
                            port=g.name,
                        )
                    raise UnknownPort(
                        f"unify: {u}.{g.name} maps to {name!r}, "
                        f"not a port of {target.iface.name}",
                        unit=u,
                        port=name,
                    )
                if sig.nesting != g.nesting:
                    raise NestingMismatch(
                        f"unify: port {name!r} of {target.iface.name} has nesting "
                        f"{sig.nesting} but {u}.{g.name} has nesting {g.nesting}",
                        port=name,
                    )
        declared = target.iface.resolved_behavior()
        beh = declared if declared is not None else _synth_behavior(out, op_names, renames)
    else:
        tports = []
        tindex = {}
        for u in op_names:
            for g in ordered_groups(out, u):
                name = renames[u][g.name]
                key = (name, g.direction)
                prev = tindex.get(key)
                if prev is None:
                    sig = PortSig(name, g.direction, g.nesting, _group_tag(out, g))
                    tindex[key] = sig
                    tports.append(sig)
                elif prev.nesting != g.nesting:
                    raise NestingMismatch(
                        f"unify: groups folded onto {name!r} disagree on nesting "
                        f"({prev.nesting} vs {g.nesting})",
                        port=name,
                    )
        declared = None
        beh = _synth_behavior(out, op_names, renames)

    # behavior preservation: the declared target, projected onto what one
    # operand can see, must stay within that operand's own language; a
    # synthesized union passes by construction
    if check_behavior and declared is not None:
        t_aut = compile_behavior(declared)
        for u in op_names:
            r = renames[u]
            image = {r[g.name] + _mark(g.direction) for g in ordered_groups(out, u)}
            spec = unit_behavior(out, u)
            mapping = {letter: None for letter in t_aut.alphabet if letter not in image}
            op_aut = compile_behavior(BehaviorSpec(spec.sems, rename_ports(spec.expr, r)))
            try:
                ok = check_inclusion(t_aut, op_aut, mapping)
            except (NonRegular, StateSpaceBudgetExceeded) as exc:
                diags.append(
                    Diagnostic(
                        rule="BehaviorNotPreserved",
                        severity="warning",
                        message=f"behavior preservation for {u!r} left unchecked: {exc}",
                        subject=u,
                    )
                )
                continue
            if not ok:
                raise BehaviorNotPreserved(
                    f"the behavior of {target.name!r} projected onto "
                    f"{', '.join(sorted(image))} steps outside what {u!r} allows",
                    unit=u,
                )

    # stage member contributions per target group
    contrib: dict[tuple[str, str], list[tuple[PortId, PortInfo, str]]] = {}
    gmeta: dict[tuple[str, str], dict] = {}
    for u in op_names:
        r = renames[u]
        for g in ordered_groups(out, u):
            key = (r[g.name], g.direction)
            entries = contrib.setdefault(key, [])
            for pid in g.member_ids():
                entries.append((pid, out.ports[pid], u))
            meta = gmeta.setdefault(
                key, {"kind": None, "wire": None, "collective": None, "shadowed": []}
            )
            for attr in ("kind", "wire", "collective"):
                val = getattr(g, attr)
                if val is None:
                    continue
                if meta[attr] is None:
                    meta[attr] = val
                elif meta[attr] != val:
                    if attr == "wire":
                        meta["shadowed"].append(val)
                    diags.append(
                        Diagnostic(
                            rule="unify",
                            severity="warning",
                            message=f"group {key[0]!r} of {target.name!r} inherits "
                            f"conflicting {attr} settings; keeping the first",
                            subject=f"{target.name}.{key[0]}",
                        )
                    )
            meta["shadowed"].extend(g.shadowed)

    t = target.name
    pid_map: dict[PortId, PortId] = {}
    new_ports: list[PortInfo] = []
    new_groups: list[GroupInfo] = []
    referenced = {c.src for c in out.channels} | {c.dst for c in out.channels}
    referenced |= {b.target for b in out.binds}
    referenced |= set(out.psi) | set(out.psi.values())
    for sig in tports:
        key = (sig.name, sig.direction)
        entries = contrib.get(key, [])
        if len({u for _, _, u in entries}) > 1:
            # a group merged from several operands only keeps members that
            # terminate something; the rest were fan slots of nothing
            live = [e for e in entries if e[0] in referenced]
            entries = live or entries[:1]
        if len(entries) == 1:
            names = [sig.name]
        else:
            names = [f"{sig.name}[{k}]" for k in range(len(entries))]
        for (pid, pinfo, _), member in zip(entries, names):
            pid_map[pid] = (t, member, sig.direction)
            new_ports.append(PortInfo(t, member, sig.direction, pinfo.type_tag or sig.type_tag))
        if not entries:
            diags.append(
                Diagnostic(
                    rule="R6",
                    severity="warning",
                    message=f"no operand port maps onto {t}.{sig.name}; the group starts empty",
                    subject=f"{t}.{sig.name}",
                )
            )
        meta = gmeta.get(key) or {"kind": None, "wire": None, "collective": None, "shadowed": []}
        new_groups.append(
            GroupInfo(
                unit=t,
                name=sig.name,
                direction=sig.direction,
                members=tuple(names),
                kind=meta["kind"],
                nesting=sig.nesting,
                wire=meta["wire"],
                collective=meta["collective"],
                shadowed=tuple(meta["shadowed"]),
            )
        )

    _remap_references(out, pid_map)
    inherited = next((out.units[u] for u in op_names if not out.units[u].virtual), None)
    inherited_rename = renames[inherited.name] if inherited is not None else {}
    for u in op_names:
        _delete_unit_shallow(out, u)
    out.comprising = {
        c: tuple(x for x in inner if x not in op_names) for c, inner in out.comprising.items()
    }

    unit = UnitInfo(
        name=t,
        repetitive=target.repetitive,
        cluster=False,
        behavior=beh,
        iface_name=target.iface_name or (target.iface.name if target.iface else None),
    )
    if inherited is not None:
        unit.assigned = inherited.assigned
        if inherited.kernel is not None:
            k = inherited.kernel
            unit.kernel = KernelBinding(
                k.kernel,
                in_slots=tuple(
                    inherited_rename.get(s, s) if s is not None else None for s in k.in_slots
                ),
                out_slots=tuple(
                    inherited_rename.get(s, s) if s is not None else None for s in k.out_slots
                ),
                fixed_args=dict(k.fixed_args),
            )
    out.add_unit(unit)
    for p in new_ports:
        out.add_port(p)
    for g in new_groups:
        out.add_group(g)
    if target.iface is not None:
        _set_iota_override(out, t, target.iface, beh)

    _merge_duplicate_pairs(out, diags)
    _drop_empty_clusters(out)
    return out, diags


def _synth_behavior(
    alg: ComponentAlgebra, op_names: list[str], renames: dict[str, dict[str, str]]
) -> BehaviorSpec | None:
    parts = []
    sems: list[str] = []
    for u in op_names:
        spec = alg.units[u].behavior
        if spec is None:
            continue
        for s in spec.sems:
            if s not in sems:
                sems.append(s)
        parts.append(rename_ports(spec.expr, renames[u]))
    if not parts:
        return None
    if len(parts) == 1:
        return BehaviorSpec(tuple(sems), parts[0])
    return BehaviorSpec(tuple(sems), BSyncUnion(tuple(parts)))


_INDEXED = re.compile(r"^(?P<base>.*)\[\d+\]$")


def _renamable(members: tuple[str, ...], gname: str) -> bool:
    for m in members:
        if m == gname:
            continue
        idx = _INDEXED.match(m)
        if idx is None or idx.group("base") != gname:
            return False
    return True


def _merge_duplicate_pairs(alg: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    """R12 as a rewrite: two channels joining the same pair of groups mean
    the member ports coincide; collapse them to a single port pair and keep
    one channel, to fixpoint."""
    while True:
        seen: dict[tuple[GroupId, GroupId], Channel] = {}
        victim = None
        for ch in alg.channels:
            gs = alg.port_group(ch.src)
            gd = alg.port_group(ch.dst)
            if gs is None or gd is None:
                continue
            key = (gs.id, gd.id)
            prev = seen.get(key)
            if prev is None:
                seen[key] = ch
                continue
            victim = (prev, ch, gs, gd)
            break
        if victim is None:
            return
        keep, drop, gs, gd = victim
        if keep.mode != drop.mode:
            diags.append(
                Diagnostic(
                    rule="R12",
                    severity="warning",
                    message=f"merged channels between {gs.unit}.{gs.name} and "
                    f"{gd.unit}.{gd.name} disagree on mode; keeping {keep.mode!r}",
                    subject=f"{gs.unit}.{gs.name}",
                )
            )
        alg.channels.remove(drop)
        pid_map: dict[PortId, PortId] = {}
        if drop.src != keep.src:
            pid_map[drop.src] = keep.src
        if drop.dst != keep.dst:
            pid_map[drop.dst] = keep.dst
        for old, new in pid_map.items():
            group = alg.port_group(old)
            group.members = tuple(m for m in group.members if m != old[1])
            alg.ports.pop(old, None)
        _remap_references(alg, pid_map)
        for group in (gs, gd):
            _renumber_members(alg, group)


def _renumber_members(alg: ComponentAlgebra, group: GroupInfo) -> None:
    """Close index gaps after a merge; only canonical member names move."""
    if not _renamable(group.members, group.name):
        return
    if len(group.members) == 1:
        wanted = (group.name,)
    else:
        wanted = tuple(f"{group.name}[{i}]" for i in range(len(group.members)))
    if wanted == group.members:
        return
    pid_map: dict[PortId, PortId] = {}
    for old, new in zip(group.members, wanted):
        if old == new:
            continue
        old_pid = (group.unit, old, group.direction)
        new_pid = (group.unit, new, group.direction)
        info = alg.ports.pop(old_pid)
        info.name = new
        alg.ports[new_pid] = info
        pid_map[old_pid] = new_pid
    group.members = wanted
    _remap_references(alg, pid_map)


def _drop_empty_clusters(alg: ComponentAlgebra) -> None:
    for name in [c for c, inner in alg.comprising.items() if not inner]:
        info = alg.units.get(name)
        if info is None or not info.cluster:
            alg.comprising.pop(name, None)
            continue
        busy = (
            any(pid[0] == name for pid in alg.ports)
            or any(c.src[0] == name or c.dst[0] == name for c in alg.channels)
            or any(b.target[0] == name for b in alg.binds)
        )
        if not busy:
            alg.remove_unit(name)


# factorize


def factorize(
    alg: ComponentAlgebra,
    source: str,
    rename: dict[str, str] | None,
    targets: list[FactorTarget],
    adjust: list[AdjustSetup] | None = None,
    *,
    check_behavior: bool = True,
) -> tuple[ComponentAlgebra, list[Diagnostic]]:
    out = alg.clone()
    diags: list[Diagnostic] = []

    info = out.units.get(source)
    if info is None:
        raise UnknownUnit(f"factorize names unknown unit {source!r}", unit=source)
    if not info.virtual or info.cluster:
        raise NotVirtual(
            f"unit {source!r} must be virtual and not a cluster to factorize", unit=source
        )
    if not targets:
        raise TauHatViolation("factorize needs at least one target", unit=source)
    tnames: list[str] = []
    for ft in targets:
        if ft.name in tnames or (ft.name in out.units and ft.name != source):
            raise DuplicateUnit(f"factorize target {ft.name!r} already names a unit", unit=ft.name)
        tnames.append(ft.name)

    r = _total_rename(out, source, rename, "factorize")
    sgroups = ordered_groups(out, source)
    pattern: dict[tuple[str, str], GroupInfo] = {}
    for g in sgroups:
        key = (r[g.name], g.direction)
        if key in pattern:
            raise TauHatViolation(
                f"factorize pattern folds two groups of {source!r} onto {key[0]!r}",
                unit=source,
                port=key[0],
            )
        pattern[key] = g

    # targets claim source groups by name
    claims: dict[tuple[str, str], list[FactorTarget]] = {key: [] for key in pattern}
    for ft in targets:
        if not ft.iface.ports:
            raise TauHatViolation(f"factorize target {ft.name!r} claims no ports", unit=ft.name)
        for p in ft.iface.ports:
            key = (p.name, p.direction)
            g = pattern.get(key)
            if g is None:
                raise TauHatViolation(
                    f"target {ft.name!r} claims port {p.name!r} ({p.direction}), "
                    f"which {source!r} does not offer",
                    unit=ft.name,
                    port=p.name,
                )
            if p.nesting != g.nesting:
                raise NestingMismatch(
                    f"target {ft.name!r} claims {p.name!r} at nesting {p.nesting}, "
                    f"but {source!r} carries it at {g.nesting}",
                    port=p.name,
                )
            claims[key].append(ft)
    unclaimed = sorted(f"{k[0]} ({k[1]})" for k, v in claims.items() if not v)
    if unclaimed:
        raise TauHatViolation(
            f"factorize leaves ports of {source!r} unclaimed: {', '.join(unclaimed)}",
            unit=source,
            ports=unclaimed,
        )

    if check_behavior:
        s_aut = compile_behavior(unit_behavior(out, source))
        inverse = {(r[g.name], g.direction): g.name for g in sgroups}
        for ft in targets:
            t_spec = ft.iface.resolved_behavior() or default_behavior(ft.iface)
            mapping = {
                p.name + _mark(p.direction): inverse[(p.name, p.direction)] + _mark(p.direction)
                for p in ft.iface.ports
            }
            try:
                ok = check_inclusion(compile_behavior(t_spec), s_aut, mapping)
            except (NonRegular, StateSpaceBudgetExceeded) as exc:
                diags.append(
                    Diagnostic(
                        rule="BehaviorNotPreserved",
                        severity="warning",
                        message=f"behavior of target {ft.name!r} left unchecked: {exc}",
                        subject=ft.name,
                    )
                )
                continue
            if not ok:
                raise BehaviorNotPreserved(
                    f"target {ft.name!r} steps outside what {source!r} allows on the "
                    "ports it claims",
                    unit=ft.name,
                )

    # build target units and copy the claimed groups onto them
    for ft in targets:
        beh = ft.iface.resolved_behavior()
        out.add_unit(
            UnitInfo(
                name=ft.name,
                repetitive=ft.repetitive or info.repetitive,
                cluster=False,
                behavior=beh,
                iface_name=ft.iface_name or ft.iface.name,
            )
        )
        _set_iota_override(out, ft.name, ft.iface, beh)

    pid_single: dict[PortId, PortId] = {}
    pid_multi: dict[PortId, list[PortId]] = {}
    for key, g in pattern.items():
        claimers = claims[key]
        members = _canonical_members(g.members, g.name, key[0])
        for ft in claimers:
            out.add_group(
                GroupInfo(
                    unit=ft.name,
                    name=key[0],
                    direction=g.direction,
                    members=members,
                    kind=g.kind,
                    nesting=g.nesting,
                    wire=g.wire,
                    collective=g.collective,
                    shadowed=g.shadowed,
                )
            )
        for old_m, new_m in zip(g.members, members):
            old_pid = (source, old_m, g.direction)
            tag = out.ports[old_pid].type_tag
            new_pids = [(ft.name, new_m, g.direction) for ft in claimers]
            for ft, np in zip(claimers, new_pids):
                out.add_port(PortInfo(ft.name, new_m, g.direction, tag))
            if len(new_pids) == 1:
                pid_single[old_pid] = new_pids[0]
            else:
                pid_multi[old_pid] = new_pids

    # channels: single claims move, multi claims fan the peer out
    fan_plan: dict[GroupId, list[tuple[str, list[PortId], Channel, str]]] = {}
    kept: list[Channel] = []
    for ch in out.channels:
        s_m, d_m = pid_multi.get(ch.src), pid_multi.get(ch.dst)
        if s_m and d_m:
            raise TauHatViolation(
                f"channel {ch.src[0]}.{ch.src[1]} -> {ch.dst[0]}.{ch.dst[1]} joins two "
                "multiply-claimed ports; factorize cannot split it",
                unit=source,
            )
        if s_m or d_m:
            peer = pid_single.get(ch.dst, ch.dst) if s_m else pid_single.get(ch.src, ch.src)
            side = "dst" if s_m else "src"
            pg = out.port_group(peer)
            if pg is None:
                raise UnknownPort(
                    f"channel endpoint {peer[0]}.{peer[1]} has no group", port=peer[1]
                )
            if out.units[pg.unit].cluster:
                raise MissingWireAdjust(
                    f"factorize would fan out cluster port {pg.unit}.{pg.name}; route the "
                    "channel through a process unit instead",
                    unit=pg.unit,
                )
            fan_plan.setdefault(pg.id, []).append((peer[1], s_m or d_m, ch, side))
            continue
        ch.src = pid_single.get(ch.src, ch.src)
        ch.dst = pid_single.get(ch.dst, ch.dst)
        kept.append(ch)
    out.channels = kept

    grown = _apply_fan_plan(out, fan_plan)

    for b in out.binds:
        if b.target in pid_multi:
            raise TauHatViolation(
                f"io bind to {b.target[0]}.{b.target[1]} cannot follow a multiply-claimed port",
                port=b.target[1],
            )
        b.target = pid_single.get(b.target, b.target)
    for k, v in list(out.psi.items()):
        if v in pid_multi:
            raise TauHatViolation(
                f"cluster port {k[0]}.{k[1]} resolves to a multiply-claimed port",
                port=k[1],
            )
    out.psi = {k: pid_single.get(v, v) for k, v in out.psi.items()}

    _delete_unit_shallow(out, source)
    out.comprising = {
        c: tuple(x for u in inner for x in (tnames if u == source else [u]))
        for c, inner in out.comprising.items()
    }

    _apply_adjust(out, grown, adjust or [], diags, op="factorize")
    return out, diags


def _apply_fan_plan(
    alg: ComponentAlgebra,
    fan_plan: dict[GroupId, list[tuple[str, list[PortId], Channel, str]]],
) -> list[GroupId]:
    """Fan peer-group members out to several counterparts. Each plan entry
    says: this member's single channel is replaced by one channel per
    counterpart, in order. Returns the groups that grew."""
    grown: list[GroupId] = []
    for gid, entries in fan_plan.items():
        group = alg.groups[gid]
        per_member: dict[str, tuple[list[PortId], Channel, str]] = {}
        for member, counterparts, ch, side in entries:
            if member in per_member:
                raise TauHatViolation(
                    f"port {group.unit}.{member} faces two fanned channels at once",
                    port=member,
                )
            per_member[member] = (counterparts, ch, side)

        canonical = _renamable(group.members, group.name)
        slots: list[str] = []
        slot_of: dict[str, list[str]] = {}
        if canonical:
            total = sum(
                len(per_member[m][0]) if m in per_member else 1 for m in group.members
            )
            names = (
                [group.name]
                if total == 1
                else [f"{group.name}[{i}]" for i in range(total)]
            )
            i = 0
            for m in group.members:
                width = len(per_member[m][0]) if m in per_member else 1
                slot_of[m] = names[i : i + width]
                i += width
            slots = names
        else:
            taken = set(group.members)
            for m in group.members:
                slot_of[m] = [m]
                slots.append(m)
            for m in group.members:
                if m not in per_member:
                    continue
                extra = len(per_member[m][0]) - 1
                j = len(slots)
                while extra > 0:
                    cand = f"{group.name}[{j}]"
                    j += 1
                    if cand in taken:
                        continue
                    taken.add(cand)
                    slot_of[m].append(cand)
                    slots.append(cand)
                    extra -= 1

        # pop every old member first: a widened slot's fresh name may equal a
        # later member's old name, and installing it early would clobber that
        pid_map: dict[PortId, PortId] = {}
        old_infos = {
            m: alg.ports.pop((group.unit, m, group.direction)) for m in group.members
        }
        for m in group.members:
            info = old_infos[m]
            first = slot_of[m][0]
            if first != m:
                pid_map[(group.unit, m, group.direction)] = (
                    group.unit,
                    first,
                    group.direction,
                )
            info.name = first
            alg.ports[info.id] = info
            for extra in slot_of[m][1:]:
                alg.add_port(PortInfo(group.unit, extra, group.direction, info.type_tag))
        group.members = tuple(slots)
        _remap_references(alg, pid_map)

        for m, (counterparts, ch, side) in per_member.items():
            for slot, cp in zip(slot_of[m], counterparts):
                pid = (group.unit, slot, group.direction)
                if side == "dst":
                    alg.channels.append(Channel(cp, pid, ch.mode, ch.capacity))
                else:
                    alg.channels.append(Channel(pid, cp, ch.mode, ch.capacity))
        if len(group.members) > 1:
            grown.append(gid)
    return grown


def _apply_adjust(
    alg: ComponentAlgebra,
    grown: list[GroupId],
    adjust: list[AdjustSetup],
    diags: list[Diagnostic],
    op: str,
) -> None:
    """Wire setups from an adjust clause apply to the groups the operation
    grew; every grown group must end up with a wire and a firing kind."""
    used: set[int] = set()
    for gid in grown:
        group = alg.groups[gid]
        setup = None
        for i, s in enumerate(adjust):
            if s.port == group.name:
                setup = s
                used.add(i)
                break
        if setup is not None:
            if setup.members is not None and set(setup.members) != set(group.members):
                raise UnknownPort(
                    f"adjust for {group.unit}.{group.name} lists members "
                    f"{', '.join(setup.members)}, but the group has "
                    f"{', '.join(group.members)}",
                    port=group.name,
                )
            if setup.size is not None and setup.size != len(group.members):
                diags.append(
                    Diagnostic(
                        rule="MissingWireAdjust",
                        severity="warning",
                        message=f"adjust sizes {group.unit}.{group.name} at {setup.size}, "
                        f"but it grew to {len(group.members)} members",
                        subject=f"{group.unit}.{group.name}",
                    )
                )
            if setup.kind is not None:
                group.kind = setup.kind
            if setup.wire is not None:
                if group.wire is not None and group.wire != setup.wire:
                    group.shadowed = (*group.shadowed, group.wire)
                group.wire = setup.wire
        if group.wire is None:
            raise MissingWireAdjust(
                f"{op} grew {group.unit}.{group.name} to {len(group.members)} members; "
                "an adjust clause must give it a wire",
                unit=group.unit,
                port=group.name,
            )
        if group.kind is None:
            group.kind = default_kind(group.wire.name)
        if group.kind is None:
            raise MissingWireAdjust(
                f"{op} grew {group.unit}.{group.name}, but neither the adjust clause nor "
                f"the wire {group.wire.key()!r} decides how the group fires (any/all)",
                unit=group.unit,
                port=group.name,
            )
        if group.wire.name is None:
            diags.append(
                Diagnostic(
                    rule="MissingWireAdjust",
                    severity="warning",
                    message=f"group {group.unit}.{group.name} keeps an unresolved wire (?)",
                    subject=f"{group.unit}.{group.name}",
                )
            )
    for i, s in enumerate(adjust):
        if i not in used:
            raise UnknownPort(
                f"adjust names port {s.port!r}, which no grown group matches", port=s.port
            )


# replicate


def replicate(
    alg: ComponentAlgebra,
    units: list[str],
    factor: int,
    adjust: list[AdjustSetup] | None = None,
) -> tuple[ComponentAlgebra, list[Diagnostic]]:
    if factor < 1:
        raise BadReplicationFactor(
            f"replication factor must be at least 1, got {factor}", factor=factor
        )
    out = alg.clone()
    diags: list[Diagnostic] = []
    if factor == 1:
        diags.append(
            Diagnostic(
                rule="BadReplicationFactor",
                severity="warning",
                message="replication factor 1 renames the units without copying them",
            )
        )

    roots: list[str] = []
    for u in units:
        if u not in out.units:
            raise UnknownUnit(f"replicate names unknown unit {u!r}", unit=u)
        if u in roots:
            raise DuplicateUnit(f"replicate lists unit {u!r} twice", unit=u)
        roots.append(u)

    def descendants(u: str):
        for inner in out.comprising.get(u, ()):
            yield inner
            yield from descendants(inner)

    owner: dict[str, str] = {}
    closure: list[str] = []
    for u in roots:
        for n in (u, *descendants(u)):
            if n in owner:
                raise DuplicateUnit(
                    f"unit {n!r} is covered twice by the replicate list", unit=n
                )
            owner[n] = u
            closure.append(n)

    def copy_name(name: str, k: int) -> str:
        root = owner[name]
        return f"{root}[{k}]" + name[len(root):]

    for u in closure:
        for k in range(1, factor + 1):
            if copy_name(u, k) in out.units:
                raise DuplicateUnit(
                    f"replicate would create {copy_name(u, k)!r}, which already exists",
                    unit=copy_name(u, k),
                )

    inside = set(closure)
    for k in range(1, factor + 1):
        for u in closure:
            src = alg.units[u]  # read the pristine original, not the evolving clone
            out.add_unit(
                UnitInfo(
                    name=copy_name(u, k),
                    repetitive=src.repetitive,
                    assigned=src.assigned,
                    cluster=src.cluster,
                    behavior=src.behavior,
                    iface_name=src.iface_name,
                    kernel=copy.deepcopy(src.kernel),
                )
            )
            for pid, p in alg.ports.items():
                if pid[0] == u:
                    out.add_port(PortInfo(copy_name(u, k), p.name, p.direction, p.type_tag))
            for gid, g in alg.groups.items():
                if gid[0] == u:
                    ng = copy.deepcopy(g)
                    ng.unit = copy_name(u, k)
                    out.add_group(ng)
            if u in alg.comprising:
                out.comprising[copy_name(u, k)] = tuple(
                    copy_name(i, k) for i in alg.comprising[u]
                )
            if alg.iota_override and u in alg.iota_override:
                out.iota_override = out.iota_override or {}
                out.iota_override[copy_name(u, k)] = alg.iota_override[u]

    def copy_pid(pid: PortId, k: int) -> PortId:
        return (copy_name(pid[0], k), pid[1], pid[2]) if pid[0] in inside else pid

    # psi entries of copied clusters follow each copy; outside psi pointing
    # in cannot fan, so it follows copy 1 with a warning
    for key, val in list(out.psi.items()):
        if key[0] in inside:
            for k in range(1, factor + 1):
                out.psi[copy_pid(key, k)] = copy_pid(val, k)
            del out.psi[key]
        elif val[0] in inside:
            out.psi[key] = copy_pid(val, 1)
            diags.append(
                Diagnostic(
                    rule="R10",
                    severity="warning",
                    message=f"cluster port {key[0]}.{key[1]} now resolves to the first "
                    f"copy {copy_pid(val, 1)[0]!r} only",
                    subject=f"{key[0]}.{key[1]}",
                )
            )

    for b in out.binds:
        if b.target[0] in inside:
            first = copy_pid(b.target, 1)
            diags.append(
                Diagnostic(
                    rule="replicate",
                    severity="warning",
                    message=f"io bind to {b.target[0]}.{b.target[1]} follows the first "
                    f"copy {first[0]!r} only",
                    subject=f"{b.target[0]}.{b.target[1]}",
                )
            )
            b.target = first

    fan_plan: dict[GroupId, list[tuple[str, list[PortId], Channel, str]]] = {}
    kept = []
    for ch in out.channels:
        s_in, d_in = ch.src[0] in inside, ch.dst[0] in inside
        if s_in and d_in:
            for k in range(1, factor + 1):
                kept.append(Channel(copy_pid(ch.src, k), copy_pid(ch.dst, k), ch.mode, ch.capacity))
        elif s_in or d_in:
            peer = ch.dst if s_in else ch.src
            moved = ch.src if s_in else ch.dst
            pg = out.port_group(peer)
            if pg is None:
                raise UnknownPort(
                    f"channel endpoint {peer[0]}.{peer[1]} has no group", port=peer[1]
                )
            if out.units[pg.unit].cluster:
                raise MissingWireAdjust(
                    f"replicate would fan out cluster port {pg.unit}.{pg.name}; route the "
                    "channel through a process unit instead",
                    unit=pg.unit,
                )
            counterparts = [copy_pid(moved, k) for k in range(1, factor + 1)]
            side = "dst" if s_in else "src"
            fan_plan.setdefault(pg.id, []).append((peer[1], counterparts, ch, side))
        else:
            kept.append(ch)
    out.channels = kept

    grown = _apply_fan_plan(out, fan_plan)

    for u in closure:
        _delete_unit_shallow(out, u)
        out.comprising.pop(u, None)
    out.comprising = {
        c: tuple(
            x
            for u in inner
            for x in ([f"{u}[{k}]" for k in range(1, factor + 1)] if u in roots else [u])
        )
        for c, inner in out.comprising.items()
        if c not in inside
    }

    _apply_adjust(out, grown, adjust or [], diags, op="replicate")
    return out, diags
