"""Canonical source rendering of configuration ASTs.

The output re-parses to an equal tree, which the round-trip tests rely on.
Rendering is deterministic: no layout depends on dict ordering.
"""

from __future__ import annotations

from hashc.behavior import (
    BAct,
    BAlt,
    BDo,
    BIf,
    BPar,
    BRepeat,
    BSeq,
    BSignal,
    BSkip,
    BWait,
    BehaviorSpec,
    CCounter,
    CPending,
    CUntil,
)
from hashc.frontend.ast_nodes import (
    AssignDecl,
    BindDecl,
    ConfigAst,
    ConnectDecl,
    EBin,
    ECall,
    EInt,
    EName,
    ENeg,
    FactorizeDecl,
    HostDecl,
    ImportDecl,
    InlineIface,
    InterfaceDecl,
    IteratorDecl,
    MAt,
    MExpr,
    MHost,
    MName,
    MWild,
    NamedIface,
    PortDecl,
    PortsNaming,
    PortsSpec,
    QName,
    RawCounter,
    ReplaceDecl,
    ReplicateDecl,
    ScopeDecl,
    Seg,
    SliceRef,
    TargetScope,
    UnifyDecl,
    UnitDecl,
    UseDecl,
    WireRef,
    WireSetup,
)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def pretty_expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, EInt):
        return str(e.value)
    if isinstance(e, EName):
        return e.name
    if isinstance(e, ENeg):
        return f"-{pretty_expr(e.operand, 3)}"
    if isinstance(e, ECall):
        return f"{e.fn}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, EBin):
        prec = _PREC[e.op]
        left = pretty_expr(e.left, prec)
        right = pretty_expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression: {e!r}")


def pretty_seg(seg: Seg) -> str:
    return seg.base + "".join(f"[{pretty_expr(ix)}]" for ix in seg.indices)


def pretty_qname(q: QName) -> str:
    return ".".join(pretty_seg(s) for s in q.segments)


def _port_decl(p: PortDecl) -> str:
    text = p.name + "*" * p.nesting
    if p.type_tag:
        text += f"::{p.type_tag}"
    return text


def pretty_ports_spec(spec: PortsSpec) -> str:
    ins = ", ".join(_port_decl(p) for p in spec.inputs)
    outs = ", ".join(_port_decl(p) for p in spec.outputs)
    return f"({ins}) -> ({outs})"


def _map_elem(m) -> str:
    if isinstance(m, MName):
        return pretty_seg(m.seg)
    if isinstance(m, MWild):
        return "__" if m.double else "_"
    if isinstance(m, MExpr):
        return pretty_expr(m.expr)
    if isinstance(m, MHost):
        return f"{{# {m.text} #}}"
    if isinstance(m, MAt):
        return f"@{pretty_qname(m.qname)}"
    raise TypeError(f"not a mapping element: {m!r}")


def pretty_naming(naming: PortsNaming) -> str:
    ins = ", ".join(_map_elem(m) for m in naming.ins)
    outs = ", ".join(_map_elem(m) for m in naming.outs)
    return f"({ins}) -> ({outs})"


def _wire_ref(w: WireRef) -> str:
    if w.host is not None:
        return f"{{# {w.host} #}}"
    if w.name is None:
        return "?"
    if not w.args:
        return w.name
    parts = [a if isinstance(a, str) else pretty_expr(a) for a in w.args]
    return f"{w.name}({', '.join(parts)})"


def _wire_setup(w: WireSetup) -> str:
    text = pretty_seg(w.port)
    if w.kind:
        if w.size is not None:
            text += f" {w.kind}*{pretty_expr(w.size)}"
        else:
            text += f" {w.kind}{{{', '.join(w.members)}}}"
    if w.wire is not None:
        text += f" : {_wire_ref(w.wire)}"
    return text


def _wire_clause(setups, keyword: str = "wire") -> str:
    if not setups:
        return ""
    return f" {keyword} " + ", ".join(_wire_setup(w) for w in setups)


def pretty_condition(cond) -> str:
    if isinstance(cond, CUntil):
        groups = []
        for names in cond.groups:
            body = " & ".join(names)
            groups.append(f"<{body}>" if cond.sync_marked else body)
        return " | ".join(groups)
    if isinstance(cond, CPending):
        return " | ".join(" & ".join(names) for names in cond.groups)
    if isinstance(cond, CCounter):
        return str(cond.count)
    if isinstance(cond, RawCounter):
        return pretty_expr(cond.expr)
    raise TypeError(f"not a condition: {cond!r}")


def pretty_behavior(b) -> str:
    if isinstance(b, BAct):
        return b.port + ("!" if b.direction == "out" else "?")
    if isinstance(b, BSkip):
        return "skip"
    if isinstance(b, BSignal):
        return f"signal {b.sem}"
    if isinstance(b, BWait):
        return f"wait {b.sem}"
    if isinstance(b, BDo):
        return f"do {b.slice_name}"
    if isinstance(b, BSeq):
        return "seq {" + "; ".join(pretty_behavior(x) for x in b.items) + "}"
    if isinstance(b, BPar):
        return "par {" + "; ".join(pretty_behavior(x) for x in b.items) + "}"
    if isinstance(b, BAlt):
        return "alt {" + "; ".join(pretty_behavior(x) for x in b.items) + "}"
    if isinstance(b, BRepeat):
        kw = "counter" if isinstance(b.cond, (CCounter, RawCounter)) else "until"
        return f"repeat {pretty_behavior(b.body)} {kw} {pretty_condition(b.cond)}"
    if isinstance(b, BIf):
        cond = b.cond
        if isinstance(cond, (CCounter, RawCounter)):
            head = f"counter {pretty_condition(cond)}"
        elif isinstance(cond, CUntil):
            head = f"until {pretty_condition(cond)}"
        else:
            head = pretty_condition(cond)
        return f"if {head} then {pretty_behavior(b.then)} else {pretty_behavior(b.els)}"
    raise TypeError(f"not a behavior: {b!r}")


def pretty_behavior_spec(spec: BehaviorSpec) -> str:
    prefix = f"sem {', '.join(spec.sems)}; " if spec.sems else ""
    return prefix + pretty_behavior(spec.expr)


def _slice_ref(s: SliceRef) -> str:
    if s.slice_name is not None:
        text = f"{s.slice_name}@{s.iface}"
    else:
        text = s.iface
    if s.type_args:
        text += " " + " ".join(s.type_args)
    if s.naming is not None:
        text += f" {pretty_naming(s.naming)}"
    return text


def _unit_iface(iface) -> str:
    if isinstance(iface, NamedIface):
        text = iface.name
        if iface.type_args:
            text += " " + " ".join(iface.type_args)
        if iface.naming is not None:
            text += f" {pretty_naming(iface.naming)}"
        return text
    if isinstance(iface, InlineIface):
        text = pretty_ports_spec(iface.ports)
        if iface.behavior is not None:
            text += f" behavior: {pretty_behavior_spec(iface.behavior)}"
        return text
    raise TypeError(f"not a unit interface: {iface!r}")


def _unit_spec_target(t) -> str:
    text = ("*" if t.repetitive else "") + pretty_seg(t.name)
    if t.iface is not None:
        text += f" # {_unit_iface(t.iface)}"
    text += _wire_clause(t.wires)
    return text


def _actual(a) -> str:
    if isinstance(a, str):
        # symbolic tag or host code; host text never collides with a bare name
        return a if a.isidentifier() else f"{{# {a} #}}"
    return pretty_expr(a)


def pretty_decl(decl) -> str:
    if isinstance(decl, UseDecl):
        return "use " + ".".join(decl.path)
    if isinstance(decl, ImportDecl):
        return f"import {decl.text}"
    if isinstance(decl, IteratorDecl):
        names = ", ".join(decl.names)
        return f"iterator {names} range [{pretty_expr(decl.lo)}, {pretty_expr(decl.hi)}]"
    if isinstance(decl, InterfaceDecl):
        parts = ["interface"]
        if decl.generalization:
            parts.append("generalization")
        if decl.context:
            parts.append(f"{decl.context} =>")
        name = decl.name
        if decl.specializes:
            name += f" specializes {decl.specializes}"
        parts.append(name)
        text = " ".join(parts)
        if decl.ports is not None:
            text += f" {pretty_ports_spec(decl.ports)}"
        if decl.slices:
            text += " where: " + " # ".join(_slice_ref(s) for s in decl.slices)
        if decl.behavior is not None:
            text += f" behavior: {pretty_behavior_spec(decl.behavior)}"
        return text
    if isinstance(decl, UnitDecl):
        text = "unit " + ("*" if decl.repetitive else "") + pretty_seg(decl.name)
        if decl.iface is not None:
            text += f" # {_unit_iface(decl.iface)}"
        text += _wire_clause(decl.wires)
        return text
    if isinstance(decl, AssignDecl):
        text = f"assign {decl.component}"
        if decl.actuals:
            text += f"<{', '.join(_actual(a) for a in decl.actuals)}>"
        if decl.mapping is not None:
            text += f" {pretty_naming(decl.mapping)}"
        text += f" to {pretty_qname(decl.unit)}"
        if decl.unit_naming is not None:
            if all(isinstance(m, MName) for m in decl.unit_naming.ins) and not decl.unit_naming.outs:
                text += " # " + " # ".join(_map_elem(m) for m in decl.unit_naming.ins)
            else:
                text += f" # {pretty_naming(decl.unit_naming)}"
        return text
    if isinstance(decl, ConnectDecl):
        text = (
            f"connect {pretty_qname(decl.src_unit)} -> {pretty_seg(decl.src_port)}"
            f" to {pretty_qname(decl.dst_unit)} <- {pretty_seg(decl.dst_port)}"
        )
        if decl.mode != "synchronous":
            text += f", {decl.mode}"
            if decl.capacity is not None:
                text += f" {pretty_expr(decl.capacity)}"
        return text
    if isinstance(decl, UnifyDecl):
        ops = []
        for op in decl.operands:
            part = pretty_qname(op.unit)
            if op.mass_rename:
                part += f" # {op.mass_rename}"
            elif op.naming is not None:
                part += f" # {pretty_naming(op.naming)}"
            ops.append(part)
        text = "unify " + ", ".join(ops) + f" to {_unit_spec_target(decl.target)}"
        text += _wire_clause(decl.adjust, "adjust wire")
        return text
    if isinstance(decl, FactorizeDecl):
        text = f"factorize {pretty_qname(decl.source)}"
        if decl.pattern is not None:
            text += f" # {pretty_naming(decl.pattern)}"
        targets = []
        for t in decl.targets:
            if isinstance(t, TargetScope):
                targets.append("[/ " + ", ".join(_unit_spec_target(u) for u in t.targets) + " /]")
            else:
                targets.append(_unit_spec_target(t))
        text += " to " + ", ".join(targets)
        text += _wire_clause(decl.adjust, "adjust wire")
        return text
    if isinstance(decl, ReplicateDecl):
        units = ", ".join(pretty_qname(u) for u in decl.units)
        text = f"replicate {units} into {pretty_expr(decl.factor)}"
        text += _wire_clause(decl.adjust, "adjust wire")
        return text
    if isinstance(decl, ReplaceDecl):
        text = f"replace {pretty_qname(decl.skeleton)}"
        if decl.skeleton_pattern is not None:
            text += f" # {pretty_naming(decl.skeleton_pattern)}"
        text += f" by {pretty_qname(decl.new_unit)}"
        if decl.new_pattern is not None:
            text += f" # {pretty_naming(decl.new_pattern)}"
        return text
    if isinstance(decl, BindDecl):
        arrow = "->" if decl.direction == "out" else "<-"
        return (
            f"bind {pretty_qname(decl.unit)} {arrow} {pretty_seg(decl.port)}"
            f" to {arrow} {decl.io_name}"
        )
    if isinstance(decl, HostDecl):
        return f"{{# {decl.text} #}}"
    if isinstance(decl, ScopeDecl):
        return "[/ " + "; ".join(pretty_decl(d) for d in decl.decls) + " /]"
    raise TypeError(f"not a declaration: {decl!r}")


def pretty_config(cfg: ConfigAst) -> str:
    header = f"{cfg.header_kw} {cfg.name}"
    if cfg.params:
        header += f"<{', '.join(cfg.params)}>"
    if cfg.io is not None:
        header += f" # {pretty_ports_spec(cfg.io)}"
    header += " with"
    lines = [header]
    for decl in cfg.decls:
        lines.append("  " + pretty_decl(decl))
    return "\n".join(lines) + "\n"
