"""Source preprocessing: #define expansion and indexed-notation unfolding.

Macro expansion happens on raw text before lexing. Unfolding happens on the
parsed tree once the configuration's parameters are bound to actual values:
iterator scopes are spliced out as explicit clones and every index expression
is folded to a literal.
"""

from __future__ import annotations

import re
from dataclasses import replace as dc_replace

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
from hashc.errors import EmptyRange, NonIntegerIndexExpression, UnboundIndex
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
    Expr,
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
    PortsNaming,
    QName,
    RawCounter,
    ReplaceDecl,
    ReplicateDecl,
    ScopeDecl,
    Seg,
    SliceRef,
    TargetScope,
    UnifyDecl,
    UnifyOperand,
    UnitDecl,
    UnitSpecTarget,
    UseDecl,
    WireRef,
    WireSetup,
)

_DEFINE_RE = re.compile(r"^\s*#define\s+([A-Za-z_][A-Za-z0-9_']*)\s+(.*)$")


def expand_macros(source: str) -> str:
    """Expand #define macros textually.

    Bodies are expanded against earlier macros at collection time, so later
    definitions may build on earlier ones without rescan loops.
    """
    macros: dict[str, str] = {}
    out_lines = []
    for line in source.splitlines():
        m = _DEFINE_RE.match(line)
        if m:
            name, body = m.group(1), m.group(2).strip()
            macros[name] = _apply_macros(body, macros)
            out_lines.append("")  # keep line numbers stable
        else:
            out_lines.append(_apply_macros(line, macros))
    return "\n".join(out_lines) + ("\n" if source.endswith("\n") else "")


def _apply_macros(text: str, macros: dict[str, str]) -> str:
    if not macros:
        return text
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(k) for k in sorted(macros, key=len, reverse=True)) + r")\b"
    )
    return pattern.sub(lambda m: macros[m.group(1)], text)


# expression folding


def fold_expr(e: Expr, env: dict) -> Expr:
    if isinstance(e, EInt):
        return e
    if isinstance(e, EName):
        if e.name in env:
            val = env[e.name]
            if isinstance(val, bool):
                raise NonIntegerIndexExpression(f"{e.name} is not an integer")
            if isinstance(val, int):
                return EInt(val)
            return EName(str(val))
        return e
    if isinstance(e, ENeg):
        inner = fold_expr(e.operand, env)
        if isinstance(inner, EInt):
            return EInt(-inner.value)
        return ENeg(inner)
    if isinstance(e, EBin):
        left = fold_expr(e.left, env)
        right = fold_expr(e.right, env)
        if isinstance(left, EInt) and isinstance(right, EInt):
            return EInt(_apply_op(e.op, left.value, right.value))
        return EBin(e.op, left, right)
    if isinstance(e, ECall):
        args = tuple(fold_expr(a, env) for a in e.args)
        if all(isinstance(a, EInt) for a in args):
            return EInt(_apply_call(e.fn, [a.value for a in args]))
        return ECall(e.fn, args)
    raise TypeError(f"not an expression: {e!r}")


def _apply_op(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise NonIntegerIndexExpression("division by zero in index expression")
        return a // b
    if op == "%":
        if b == 0:
            raise NonIntegerIndexExpression("modulo by zero in index expression")
        return a % b
    raise NonIntegerIndexExpression(f"unknown operator {op!r}")


def _apply_call(fn: str, args: list[int]) -> int:
    if fn == "ilog2" and len(args) == 1:
        if args[0] < 1:
            raise NonIntegerIndexExpression(f"ilog2({args[0]}) is undefined")
        return args[0].bit_length() - 1
    if fn == "ipow2" and len(args) == 1:
        if args[0] < 0:
            raise NonIntegerIndexExpression(f"ipow2({args[0]}) is undefined")
        return 1 << args[0]
    raise NonIntegerIndexExpression(f"unknown function {fn!r}")


def fold_int(e: Expr, env: dict, what: str) -> int:
    folded = fold_expr(e, env)
    if isinstance(folded, EInt):
        return folded.value
    unbound = sorted(n for n in _free_names(e) if n not in env)
    if unbound:
        raise UnboundIndex(f"unbound name {unbound[0]!r} in {what}")
    raise NonIntegerIndexExpression(f"{what} does not reduce to an integer")


def _free_names(e: Expr) -> set[str]:
    if isinstance(e, EName):
        return {e.name}
    if isinstance(e, ENeg):
        return _free_names(e.operand)
    if isinstance(e, EBin):
        return _free_names(e.left) | _free_names(e.right)
    if isinstance(e, ECall):
        out: set[str] = set()
        for a in e.args:
            out |= _free_names(a)
        return out
    return set()


# substitution over declarations


def _sub_host(text: str, env: dict) -> str:
    scalars = {k: v for k, v in env.items() if isinstance(v, (int, str))}
    if not scalars:
        return text
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(k) for k in sorted(scalars, key=len, reverse=True)) + r")\b"
    )
    return pattern.sub(lambda m: str(scalars[m.group(1)]), text)


def _sub_seg(seg: Seg, env: dict) -> Seg:
    if not seg.indices:
        return seg
    return Seg(seg.base, tuple(EInt(fold_int(ix, env, f"index of {seg.base!r}")) for ix in seg.indices))


def _sub_seg_loose(seg: Seg, env: dict) -> Seg:
    """Fold indices without demanding they close; used under partial envs."""
    if not seg.indices:
        return seg
    return Seg(seg.base, tuple(fold_expr(ix, env) for ix in seg.indices))


def _sub_qname(q: QName, env: dict, loose: bool = False) -> QName:
    fn = _sub_seg_loose if loose else _sub_seg
    return QName(tuple(fn(s, env) for s in q.segments))


def _sub_map_elem(m, env: dict, loose: bool):
    if isinstance(m, MName):
        return MName(_sub_seg_loose(m.seg, env) if loose else _sub_seg(m.seg, env))
    if isinstance(m, MExpr):
        return MExpr(fold_expr(m.expr, env))
    if isinstance(m, MHost):
        return MHost(_sub_host(m.text, env))
    if isinstance(m, MAt):
        return MAt(_sub_qname(m.qname, env, loose))
    return m


def _sub_naming(n: PortsNaming | None, env: dict, loose: bool = False):
    if n is None:
        return None
    return PortsNaming(
        tuple(_sub_map_elem(m, env, loose) for m in n.ins),
        tuple(_sub_map_elem(m, env, loose) for m in n.outs),
    )


def _sub_str_actual(a: str, env: dict) -> str:
    if a in env:
        return str(env[a])
    return _sub_host(a, env)


def _sub_wire_ref(w: WireRef | None, env: dict):
    if w is None:
        return None
    if w.host is not None:
        return WireRef(host=_sub_host(w.host, env))
    args = tuple(
        _sub_str_actual(a, env) if isinstance(a, str) else fold_expr(a, env)
        for a in (w.args or ())
    )
    return WireRef(name=w.name, args=args)


def _sub_wire_setup(w: WireSetup, env: dict) -> WireSetup:
    size = None
    if w.size is not None:
        size = EInt(fold_int(w.size, env, f"group size of {w.port.base!r}"))
    return WireSetup(
        port=_sub_seg(w.port, env),
        kind=w.kind,
        size=size,
        members=w.members,
        wire=_sub_wire_ref(w.wire, env),
    )


def _sub_condition(cond, env: dict):
    if isinstance(cond, RawCounter):
        return CCounter(fold_int(cond.expr, env, "counter bound"))
    return cond


def _sub_behavior(b, env: dict):
    if isinstance(b, (BAct, BSkip, BSignal, BWait, BDo)):
        return b
    if isinstance(b, BSeq):
        return BSeq(tuple(_sub_behavior(x, env) for x in b.items))
    if isinstance(b, BPar):
        return BPar(tuple(_sub_behavior(x, env) for x in b.items))
    if isinstance(b, BAlt):
        return BAlt(tuple(_sub_behavior(x, env) for x in b.items))
    if isinstance(b, BRepeat):
        return BRepeat(_sub_behavior(b.body, env), _sub_condition(b.cond, env))
    if isinstance(b, BIf):
        return BIf(_sub_condition(b.cond, env), _sub_behavior(b.then, env), _sub_behavior(b.els, env))
    raise TypeError(f"not a behavior: {b!r}")


def _sub_behavior_spec(spec: BehaviorSpec | None, env: dict):
    if spec is None:
        return None
    return BehaviorSpec(spec.sems, _sub_behavior(spec.expr, env))


def _sub_unit_iface(iface, env: dict):
    if iface is None:
        return None
    if isinstance(iface, NamedIface):
        return NamedIface(iface.name, _sub_naming(iface.naming, env), iface.type_args)
    if isinstance(iface, InlineIface):
        return InlineIface(iface.ports, _sub_behavior_spec(iface.behavior, env))
    raise TypeError(f"not a unit interface: {iface!r}")


def _sub_target(t: UnitSpecTarget, env: dict) -> UnitSpecTarget:
    return UnitSpecTarget(
        name=_sub_seg(t.name, env),
        repetitive=t.repetitive,
        iface=_sub_unit_iface(t.iface, env),
        wires=tuple(_sub_wire_setup(w, env) for w in t.wires),
    )


def _sub_decl(decl, env: dict):
    if isinstance(decl, (UseDecl, HostDecl)):
        if isinstance(decl, HostDecl):
            return HostDecl(_sub_host(decl.text, env))
        return decl
    if isinstance(decl, ImportDecl):
        return ImportDecl(_sub_host(decl.text, env))
    if isinstance(decl, InterfaceDecl):
        return InterfaceDecl(
            name=decl.name,
            ports=decl.ports,
            context=decl.context,
            slices=tuple(
                SliceRef(s.iface, s.slice_name, s.type_args, _sub_naming(s.naming, env, loose=True))
                for s in decl.slices
            ),
            behavior=_sub_behavior_spec(decl.behavior, env),
            specializes=decl.specializes,
            generalization=decl.generalization,
        )
    if isinstance(decl, UnitDecl):
        return UnitDecl(
            name=_sub_seg(decl.name, env),
            repetitive=decl.repetitive,
            iface=_sub_unit_iface(decl.iface, env),
            wires=tuple(_sub_wire_setup(w, env) for w in decl.wires),
        )
    if isinstance(decl, AssignDecl):
        actuals = tuple(
            _sub_str_actual(a, env) if isinstance(a, str) else fold_expr(a, env)
            for a in decl.actuals
        )
        return AssignDecl(
            component=decl.component,
            actuals=actuals,
            mapping=_sub_naming(decl.mapping, env),
            unit=_sub_qname(decl.unit, env),
            unit_naming=_sub_naming(decl.unit_naming, env),
        )
    if isinstance(decl, ConnectDecl):
        capacity = None
        if decl.capacity is not None:
            capacity = EInt(fold_int(decl.capacity, env, "buffer capacity"))
        return ConnectDecl(
            src_unit=_sub_qname(decl.src_unit, env),
            src_port=_sub_seg(decl.src_port, env),
            dst_unit=_sub_qname(decl.dst_unit, env),
            dst_port=_sub_seg(decl.dst_port, env),
            mode=decl.mode,
            capacity=capacity,
        )
    if isinstance(decl, UnifyDecl):
        return UnifyDecl(
            operands=tuple(
                UnifyOperand(_sub_qname(op.unit, env), op.mass_rename, _sub_naming(op.naming, env))
                for op in decl.operands
            ),
            target=_sub_target(decl.target, env),
            adjust=tuple(_sub_wire_setup(w, env) for w in decl.adjust),
        )
    if isinstance(decl, FactorizeDecl):
        targets = tuple(
            TargetScope(tuple(_sub_target(u, env) for u in t.targets))
            if isinstance(t, TargetScope)
            else _sub_target(t, env)
            for t in decl.targets
        )
        return FactorizeDecl(
            source=_sub_qname(decl.source, env),
            pattern=_sub_naming(decl.pattern, env),
            targets=targets,
            adjust=tuple(_sub_wire_setup(w, env) for w in decl.adjust),
        )
    if isinstance(decl, ReplicateDecl):
        return ReplicateDecl(
            units=tuple(_sub_qname(u, env) for u in decl.units),
            factor=EInt(fold_int(decl.factor, env, "replication factor")),
            adjust=tuple(_sub_wire_setup(w, env) for w in decl.adjust),
        )
    if isinstance(decl, ReplaceDecl):
        return ReplaceDecl(
            skeleton=_sub_qname(decl.skeleton, env),
            skeleton_pattern=_sub_naming(decl.skeleton_pattern, env),
            new_unit=_sub_qname(decl.new_unit, env),
            new_pattern=_sub_naming(decl.new_pattern, env),
        )
    if isinstance(decl, BindDecl):
        return BindDecl(
            unit=_sub_qname(decl.unit, env),
            port=_sub_seg(decl.port, env),
            direction=decl.direction,
            io_name=decl.io_name,
        )
    if isinstance(decl, ScopeDecl):
        # handled by the unfold driver; reached only for already-closed scopes
        return decl
    if isinstance(decl, IteratorDecl):
        return decl
    raise TypeError(f"not a declaration: {decl!r}")


# free iterator occurrence detection


def _decl_mentions(decl, name: str) -> bool:
    """True when `name` occurs as a free expression name or host span word."""
    hits: list[bool] = []

    def expr_has(e) -> bool:
        return name in _free_names(e)

    def seg_has(seg: Seg) -> bool:
        return any(expr_has(ix) for ix in seg.indices)

    def qname_has(q: QName) -> bool:
        return any(seg_has(s) for s in q.segments)

    def host_has(text: str) -> bool:
        return re.search(rf"\b{re.escape(name)}\b", text) is not None

    def naming_has(n) -> bool:
        if n is None:
            return False
        for m in (*n.ins, *n.outs):
            if isinstance(m, MName) and seg_has(m.seg):
                return True
            if isinstance(m, MExpr) and expr_has(m.expr):
                return True
            if isinstance(m, MHost) and host_has(m.text):
                return True
            if isinstance(m, MAt) and qname_has(m.qname):
                return True
        return False

    def wire_has(w) -> bool:
        if w is None:
            return False
        if w.host is not None:
            return host_has(w.host)
        return any(expr_has(a) for a in w.args if not isinstance(a, str))

    def setup_has(ws: WireSetup) -> bool:
        if seg_has(ws.port):
            return True
        if ws.size is not None and expr_has(ws.size):
            return True
        return wire_has(ws.wire)

    def iface_has(iface) -> bool:
        if isinstance(iface, NamedIface):
            return naming_has(iface.naming)
        return False

    def target_has(t: UnitSpecTarget) -> bool:
        return seg_has(t.name) or iface_has(t.iface) or any(setup_has(w) for w in t.wires)

    if isinstance(decl, UnitDecl):
        hits.append(seg_has(decl.name) or iface_has(decl.iface))
        hits.append(any(setup_has(w) for w in decl.wires))
    elif isinstance(decl, AssignDecl):
        hits.append(any(expr_has(a) for a in decl.actuals if not isinstance(a, str)))
        hits.append(any(host_has(a) for a in decl.actuals if isinstance(a, str)))
        hits.append(naming_has(decl.mapping) or naming_has(decl.unit_naming))
        hits.append(qname_has(decl.unit))
    elif isinstance(decl, ConnectDecl):
        hits.append(qname_has(decl.src_unit) or seg_has(decl.src_port))
        hits.append(qname_has(decl.dst_unit) or seg_has(decl.dst_port))
        hits.append(decl.capacity is not None and expr_has(decl.capacity))
    elif isinstance(decl, UnifyDecl):
        hits.append(any(qname_has(op.unit) or naming_has(op.naming) for op in decl.operands))
        hits.append(target_has(decl.target))
        hits.append(any(setup_has(w) for w in decl.adjust))
    elif isinstance(decl, FactorizeDecl):
        hits.append(qname_has(decl.source) or naming_has(decl.pattern))
        for t in decl.targets:
            if isinstance(t, TargetScope):
                hits.append(any(target_has(u) for u in t.targets))
            else:
                hits.append(target_has(t))
        hits.append(any(setup_has(w) for w in decl.adjust))
    elif isinstance(decl, ReplicateDecl):
        hits.append(any(qname_has(u) for u in decl.units))
        hits.append(expr_has(decl.factor))
        hits.append(any(setup_has(w) for w in decl.adjust))
    elif isinstance(decl, ReplaceDecl):
        hits.append(qname_has(decl.skeleton) or qname_has(decl.new_unit))
        hits.append(naming_has(decl.skeleton_pattern) or naming_has(decl.new_pattern))
    elif isinstance(decl, BindDecl):
        hits.append(qname_has(decl.unit) or seg_has(decl.port))
    elif isinstance(decl, HostDecl):
        hits.append(host_has(decl.text))
    elif isinstance(decl, ScopeDecl):
        hits.append(any(_decl_mentions(d, name) for d in decl.decls))
    return any(hits)


def _iter_range(it: IteratorDecl, env: dict) -> tuple[int, int]:
    lo = fold_int(it.lo, env, f"lower bound of iterator {it.names[0]!r}")
    hi = fold_int(it.hi, env, f"upper bound of iterator {it.names[0]!r}")
    if lo > hi:
        raise EmptyRange(f"iterator range [{lo}, {hi}] is empty")
    return lo, hi


def _unfold_scope(scope: ScopeDecl, iterators: dict[str, tuple[int, int]], env: dict) -> list:
    """Unroll one scope: cross product of its free iterators, declaration order."""
    local_iters = dict(iterators)
    body = []
    for d in scope.decls:
        if isinstance(d, IteratorDecl):
            lo, hi = _iter_range(d, env)
            for nm in d.names:
                local_iters[nm] = (lo, hi)
        else:
            body.append(d)

    free = [nm for nm in local_iters if any(_decl_mentions(d, nm) for d in body)]
    out: list = []

    def emit(bound: dict) -> None:
        inner_env = {**env, **bound}
        for d in body:
            if isinstance(d, ScopeDecl):
                out.extend(_unfold_scope(d, local_iters, inner_env))
            else:
                out.append(_sub_decl(d, inner_env))

    def product(idx: int, bound: dict) -> None:
        if idx == len(free):
            emit(bound)
            return
        nm = free[idx]
        lo, hi = local_iters[nm]
        for val in range(lo, hi + 1):
            product(idx + 1, {**bound, nm: val})

    product(0, {})
    return out


def unfold_indexed(cfg: ConfigAst, actuals: dict) -> ConfigAst:
    """Resolve parameters and iterator scopes, returning a closed configuration.

    `actuals` maps each configuration parameter to an int or an opaque string
    (symbolic tags, host-code spans). Missing parameters raise UnboundIndex.
    """
    missing = [p for p in cfg.params if p not in actuals]
    if missing:
        raise UnboundIndex(f"parameter {missing[0]!r} of {cfg.name!r} is unbound")
    env = dict(actuals)
    iterators: dict[str, tuple[int, int]] = {}
    decls: list = []
    for decl in cfg.decls:
        if isinstance(decl, IteratorDecl):
            lo, hi = _iter_range(decl, env)
            for nm in decl.names:
                iterators[nm] = (lo, hi)
        elif isinstance(decl, ScopeDecl):
            decls.extend(_unfold_scope(decl, iterators, env))
        else:
            # a bare declaration mentioning live iterators unrolls on its own
            free = [nm for nm in iterators if _decl_mentions(decl, nm)]
            if free:
                decls.extend(_unfold_scope(ScopeDecl((decl,)), iterators, env))
            else:
                decls.append(_sub_decl(decl, env))
    return dc_replace(
        cfg,
        params=(),
        decls=decls,
        pragmas=list(cfg.pragmas),
        warnings=list(cfg.warnings),
    )
