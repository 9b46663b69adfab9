"""Well-formedness restrictions R1-R12 over a ComponentAlgebra.

Each check appends Diagnostic values instead of raising, so a caller gets
every violation at once. Severities: everything is an error except the
converse reading of R3 (a cluster marked repetitive above non-repetitive
inner units), which is a warning.
"""

from __future__ import annotations

from hashc.algebra.model import ComponentAlgebra, GroupInfo, PortId
from hashc.errors import Diagnostic


def check_restrictions(model: ComponentAlgebra) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    _r1_no_unit_owns_main(model, diags)
    _r2_acyclic_hierarchy(model, diags)
    _r3_repetitive_clusters(model, diags)
    _r4_r6_group_partition(model, diags)
    _r7_r9_channel_formation(model, diags)
    _r10_cluster_port_resolution(model, diags)
    _r11_interface_consistency(model, diags)
    _r12_duplicate_pairs(model, diags)
    return diags


def _r1_no_unit_owns_main(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    for unit in model.units.values():
        if unit.assigned == model.name:
            diags.append(
                Diagnostic(
                    rule="R1",
                    message=f"the main component {model.name!r} is assigned to unit {unit.name!r}; "
                    "it must stay unassigned",
                    subject=unit.name,
                )
            )


def _cluster_descendants(model: ComponentAlgebra, unit: str) -> set[str]:
    """Transitive closure of the comprising relation, cycle-tolerant."""
    seen: set[str] = set()
    stack = list(model.comprising.get(unit, ()))
    while stack:
        inner = stack.pop()
        if inner in seen:
            continue
        seen.add(inner)
        stack.extend(model.comprising.get(inner, ()))
    return seen


def _r2_acyclic_hierarchy(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    for name in model.comprising:
        if name in _cluster_descendants(model, name):
            diags.append(
                Diagnostic(
                    rule="R2",
                    message=f"cluster {name!r} transitively comprises itself",
                    subject=name,
                )
            )


def _r3_repetitive_clusters(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    for name, inner in model.comprising.items():
        unit = model.units.get(name)
        if unit is None or not inner:
            continue
        inner_units = [model.units[u] for u in inner if u in model.units]
        if not inner_units:
            continue
        all_rep = all(u.repetitive for u in inner_units)
        if all_rep and not unit.repetitive:
            diags.append(
                Diagnostic(
                    rule="R3",
                    message=f"cluster {name!r} must be repetitive: every inner unit is",
                    subject=name,
                )
            )
        elif unit.repetitive and not all_rep:
            lazy = sorted(u.name for u in inner_units if not u.repetitive)
            diags.append(
                Diagnostic(
                    rule="R3",
                    message=f"cluster {name!r} is marked repetitive but "
                    f"{', '.join(lazy)} are not",
                    severity="warning",
                    subject=name,
                )
            )


def _r4_r6_group_partition(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    owner: dict[PortId, GroupInfo] = {}
    for group in model.groups.values():
        if not group.members:
            diags.append(
                Diagnostic(
                    rule="R6",
                    message=f"group {group.name!r} of unit {group.unit!r} is empty",
                    subject=f"{group.unit}.{group.name}",
                )
            )
        for pid in group.member_ids():
            if pid in owner and owner[pid] is not group:
                other = owner[pid]
                diags.append(
                    Diagnostic(
                        rule="R4",
                        message=f"port {pid[1]!r} of unit {pid[0]!r} belongs to groups "
                        f"{other.name!r} and {group.name!r}",
                        subject=f"{pid[0]}.{pid[1]}",
                    )
                )
            else:
                owner[pid] = group
    for pid in model.ports:
        if pid not in owner:
            diags.append(
                Diagnostic(
                    rule="R5",
                    message=f"port {pid[1]!r} of unit {pid[0]!r} belongs to no group",
                    subject=f"{pid[0]}.{pid[1]}",
                )
            )


def _port_label(pid: PortId) -> str:
    return f"{pid[0]}.{pid[1]}"


def _r7_r9_channel_formation(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    by_pair: dict[tuple[PortId, PortId], set[str]] = {}
    per_mode_src: dict[tuple[str, PortId], PortId] = {}
    per_mode_dst: dict[tuple[str, PortId], PortId] = {}
    for ch in model.channels:
        by_pair.setdefault((ch.src, ch.dst), set()).add(ch.mode)
        key_s = (ch.mode, ch.src)
        if key_s in per_mode_src and per_mode_src[key_s] != ch.dst:
            diags.append(
                Diagnostic(
                    rule="R7",
                    message=f"output {_port_label(ch.src)} feeds both "
                    f"{_port_label(per_mode_src[key_s])} and {_port_label(ch.dst)}",
                    subject=_port_label(ch.src),
                )
            )
        per_mode_src[key_s] = ch.dst
        key_d = (ch.mode, ch.dst)
        if key_d in per_mode_dst and per_mode_dst[key_d] != ch.src:
            diags.append(
                Diagnostic(
                    rule="R7",
                    message=f"input {_port_label(ch.dst)} is fed by both "
                    f"{_port_label(per_mode_dst[key_d])} and {_port_label(ch.src)}",
                    subject=_port_label(ch.dst),
                )
            )
        per_mode_dst[key_d] = ch.src

        src_port = model.ports.get(ch.src)
        dst_port = model.ports.get(ch.dst)
        if src_port is None or dst_port is None:
            missing = ch.src if src_port is None else ch.dst
            diags.append(
                Diagnostic(
                    rule="R8",
                    message=f"channel endpoint {_port_label(missing)} does not exist",
                    subject=_port_label(missing),
                )
            )
            continue
        if src_port.direction != "out" or dst_port.direction != "in":
            diags.append(
                Diagnostic(
                    rule="R8",
                    message=f"channel {_port_label(ch.src)} -> {_port_label(ch.dst)} must run "
                    f"output to input (got {src_port.direction} -> {dst_port.direction})",
                    subject=_port_label(ch.src),
                )
            )
        _check_r9(model, ch.src, ch.dst, diags)

    for (src, dst), modes in by_pair.items():
        if len(modes) > 1:
            diags.append(
                Diagnostic(
                    rule="R7",
                    message=f"channel {_port_label(src)} -> {_port_label(dst)} is declared "
                    f"with conflicting modes {sorted(modes)}",
                    subject=_port_label(src),
                )
            )


def _check_r9(model: ComponentAlgebra, src: PortId, dst: PortId, diags: list[Diagnostic]) -> None:
    gs = model.port_group(src)
    gd = model.port_group(dst)
    if gs is None or gd is None:
        return  # R5 already reports the missing group
    if gs.nesting == gd.nesting:
        return
    # one extra nesting level may be bridged by a repetitive unit on the
    # shallow end: it consumes or produces one stream element per repetition
    lo_unit = src[0] if gs.nesting < gd.nesting else dst[0]
    if abs(gs.nesting - gd.nesting) == 1 and model.units[lo_unit].repetitive:
        return
    diags.append(
        Diagnostic(
            rule="R9",
            message=f"channel {_port_label(src)} -> {_port_label(dst)} joins nesting "
            f"{gs.nesting} to nesting {gd.nesting}",
            subject=_port_label(src),
            detail={"src_nesting": gs.nesting, "dst_nesting": gd.nesting},
        )
    )


def _r10_cluster_port_resolution(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    for unit in model.units.values():
        if not unit.cluster:
            continue
        inner = set(model.comprising.get(unit.name, ()))
        for port in model.unit_ports(unit.name):
            target = model.psi.get(port.id)
            if target is None:
                diags.append(
                    Diagnostic(
                        rule="R10",
                        message=f"cluster port {_port_label(port.id)} resolves to no inner port",
                        subject=_port_label(port.id),
                    )
                )
                continue
            resolved = model.psi.get(target, target)
            tinfo = model.ports.get(resolved)
            if tinfo is None:
                diags.append(
                    Diagnostic(
                        rule="R10",
                        message=f"cluster port {_port_label(port.id)} resolves to missing "
                        f"port {_port_label(resolved)}",
                        subject=_port_label(port.id),
                    )
                )
                continue
            if tinfo.direction != port.direction:
                diags.append(
                    Diagnostic(
                        rule="R10",
                        message=f"cluster port {_port_label(port.id)} ({port.direction}) "
                        f"resolves to {_port_label(resolved)} ({tinfo.direction})",
                        subject=_port_label(port.id),
                    )
                )
            if target[0] not in inner and resolved[0] not in inner:
                diags.append(
                    Diagnostic(
                        rule="R10",
                        message=f"cluster port {_port_label(port.id)} resolves outside the "
                        f"cluster, to unit {target[0]!r}",
                        subject=_port_label(port.id),
                    )
                )


def _r11_interface_consistency(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    if not model.iota_override:
        return
    for unit, declared in model.iota_override.items():
        if unit not in model.units:
            continue
        derived = model.iota(unit)
        if tuple(sorted(declared[0])) != tuple(sorted(derived[0])) or declared[1] != derived[1]:
            diags.append(
                Diagnostic(
                    rule="R11",
                    message=f"stored interface of unit {unit!r} disagrees with the one derived "
                    "from its groups and behavior",
                    subject=unit,
                )
            )


def _r12_duplicate_pairs(model: ComponentAlgebra, diags: list[Diagnostic]) -> None:
    seen: dict[tuple, tuple[PortId, PortId]] = {}
    for ch in model.channels:
        gs = model.port_group(ch.src)
        gd = model.port_group(ch.dst)
        if gs is None or gd is None:
            continue
        key = (gs.id, gd.id)
        if key in seen and seen[key] != (ch.src, ch.dst):
            prev = seen[key]
            diags.append(
                Diagnostic(
                    rule="R12",
                    message=f"channels {_port_label(prev[0])} -> {_port_label(prev[1])} and "
                    f"{_port_label(ch.src)} -> {_port_label(ch.dst)} connect the same group "
                    "pair; the ports are essentially the same and must be merged",
                    subject=f"{gs.unit}.{gs.name}",
                )
            )
        else:
            seen[key] = (ch.src, ch.dst)
    return
