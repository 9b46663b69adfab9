"""Recursive-descent parser for configuration sources.

One token of lookahead everywhere; `->` disambiguates naming tuples from
other constructs. `;` is an optional separator between declarations and a
required one inside behavior braces.
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
from hashc.errors import ParseError
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
    MapElem,
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
    UnifyOperand,
    UnitDecl,
    UnitIface,
    UnitSpecTarget,
    UseDecl,
    WireRef,
    WireSetup,
)
from hashc.frontend.lexer import LexResult, lex
from hashc.frontend.tokens import NONSTANDARD, Token, TokenKind

_MODES = ("synchronous", "buffered", "ready")

_DECL_STARTS = {
    "use",
    "import",
    "iterator",
    "interface",
    "unit",
    "assign",
    "connect",
    "unify",
    "factorize",
    "replicate",
    "replace",
    "bind",
}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.warnings: list[str] = []

    # cursor helpers

    def _current(self) -> Token:
        return self.tokens[self.pos]

    def _peek(self, n: int = 1) -> Token:
        return self.tokens[min(self.pos + n, len(self.tokens) - 1)]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def _fail(self, msg: str) -> ParseError:
        tok = self._current()
        return ParseError(f"{msg} (got {tok!r})", line=tok.line, col=tok.col)

    def _expect_sym(self, text: str) -> Token:
        tok = self._current()
        if not tok.is_sym(text):
            raise self._fail(f"expected {text!r}")
        return self._advance()

    def _expect_kw(self, *names: str) -> Token:
        tok = self._current()
        if not tok.is_kw(*names):
            raise self._fail(f"expected keyword {'/'.join(names)}")
        if tok.text in NONSTANDARD:
            self.warnings.append(f"nonstandard keyword {tok.text!r} at line {tok.line}")
        return self._advance()

    def _expect_ident(self) -> str:
        tok = self._current()
        if tok.kind is not TokenKind.IDENT:
            raise self._fail("expected identifier")
        self._advance()
        return tok.text

    def _eat_sym(self, text: str) -> bool:
        if self._current().is_sym(text):
            self._advance()
            return True
        return False

    def _eat_kw(self, *names: str) -> bool:
        if self._current().is_kw(*names):
            tok = self._advance()
            if tok.text in NONSTANDARD:
                self.warnings.append(f"nonstandard keyword {tok.text!r} at line {tok.line}")
            return True
        return False

    def _skip_separators(self) -> None:
        while self._current().is_sym(";"):
            self._advance()

    # configurations

    def parse_all(self) -> list[ConfigAst]:
        configs = []
        self._skip_separators()
        while self._current().kind is not TokenKind.EOF:
            configs.append(self.parse_configuration())
            self._skip_separators()
        return configs

    def parse_configuration(self) -> ConfigAst:
        kw = self._expect_kw("component", "configuration")
        name = self._expect_ident()
        params: tuple[str, ...] = ()
        if self._eat_sym("<"):
            names = [self._expect_ident()]
            while self._eat_sym(","):
                names.append(self._expect_ident())
            self._expect_sym(">")
            params = tuple(names)
        io = None
        if self._eat_sym("#"):
            io = self._ports_spec()
        self._expect_kw("with", "where")
        decls = []
        while True:
            self._skip_separators()
            tok = self._current()
            if tok.kind is TokenKind.EOF or tok.is_kw("component", "configuration"):
                break
            decl = self._declaration()
            if isinstance(decl, list):
                decls.extend(decl)
            else:
                decls.append(decl)
        return ConfigAst(
            name=name,
            params=params,
            io=io,
            decls=decls,
            header_kw=kw.text,
            warnings=list(self.warnings),
        )

    # declarations

    def _declaration(self):
        tok = self._current()
        if tok.is_sym("[/"):
            return self._scope()
        if tok.kind is TokenKind.KEYWORD and tok.text in _DECL_STARTS:
            handler = getattr(self, f"_decl_{tok.text}")
            return handler()
        if tok.kind is TokenKind.HOSTCODE:
            self._advance()
            return HostDecl(tok.text)
        if tok.is_kw("interface") or tok.is_kw("generalization"):
            return self._decl_interface()
        raise self._fail("expected a declaration")

    def _scope(self) -> ScopeDecl:
        self._expect_sym("[/")
        decls: list = []
        while not self._current().is_sym("/]"):
            self._skip_separators()
            if self._current().is_sym("/]"):
                break
            decl = self._declaration()
            if isinstance(decl, list):
                decls.extend(decl)
            else:
                decls.append(decl)
            self._skip_separators()
        self._expect_sym("/]")
        return ScopeDecl(tuple(decls))

    def _decl_use(self) -> list | UseDecl:
        self._expect_kw("use")
        paths = [self._use_path()]
        while self._eat_sym(","):
            paths.append(self._use_path())
        prefix: tuple[str, ...] = ()
        nonstd = False
        if self._current().is_kw("from"):
            self._expect_kw("from")
            nonstd = True
            prefix = tuple(self._dotted())
        out = []
        for path_group in paths:
            for p in path_group:
                out.append(UseDecl(prefix + p, nonstandard_from=nonstd))
        return out if len(out) > 1 else out[0]

    def _dotted(self) -> list[str]:
        parts = [self._expect_ident()]
        while self._current().is_sym(".") and self._peek().kind is TokenKind.IDENT:
            self._advance()
            parts.append(self._expect_ident())
        return parts

    def _use_path(self) -> list[tuple[str, ...]]:
        """One use_spec; braces fan out: A.{B,C} -> [(A,B),(A,C)]."""
        parts: list[str] = [self._expect_ident()]
        while self._eat_sym("."):
            if self._eat_sym("{"):
                tails = [tuple(self._dotted())]
                while self._eat_sym(","):
                    tails.append(tuple(self._dotted()))
                self._expect_sym("}")
                return [tuple(parts) + t for t in tails]
            parts.append(self._expect_ident())
        return [tuple(parts)]

    def _decl_import(self) -> ImportDecl:
        start = self._expect_kw("import")
        # verbatim to end of line: host-language import
        pieces = []
        while self._current().kind is not TokenKind.EOF and self._current().line == start.line:
            pieces.append(self._advance().text)
        return ImportDecl(" ".join(pieces))

    def _decl_iterator(self) -> IteratorDecl:
        self._expect_kw("iterator")
        names = [self._expect_ident()]
        while self._eat_sym(","):
            names.append(self._expect_ident())
        self._expect_kw("range")
        self._expect_sym("[")
        lo = self._expr()
        if not (self._eat_sym(",") or self._eat_sym("..")):
            raise self._fail("expected ',' or '..' in range")
        hi = self._expr()
        self._expect_sym("]")
        return IteratorDecl(tuple(names), lo, hi)

    def _decl_interface(self) -> InterfaceDecl:
        self._expect_kw("interface")
        generalization = False
        if self._current().is_kw("generalization"):
            self._expect_kw("generalization")
            generalization = True
        context = None
        if (
            self._current().kind is TokenKind.IDENT
            and self._current().text[0].isupper()
            and self._peek().is_sym("=>")
        ):
            context = self._expect_ident()
            self._expect_sym("=>")
        name = self._expect_ident()
        specializes = None
        if self._current().is_kw("specializes"):
            self._expect_kw("specializes")
            specializes = self._expect_ident()
        self._eat_sym("#")  # tolerated separator before the ports spec
        ports = None
        if self._current().is_sym("(") or self._looks_like_port_list():
            ports = self._ports_spec()
        slices: tuple[SliceRef, ...] = ()
        if self._current().is_kw("where"):
            self._expect_kw("where")
            self._eat_sym(":")
            slices = self._slice_refs()
        behavior = None
        if self._current().is_kw("behavior", "behaviour"):
            self._advance()
            self._expect_sym(":")
            behavior = self._behavior_spec()
        return InterfaceDecl(
            name=name,
            ports=ports,
            context=context,
            slices=slices,
            behavior=behavior,
            specializes=specializes,
            generalization=generalization,
        )

    def _looks_like_port_list(self) -> bool:
        # unparenthesized single-port spec: `id -> ...` or `id* -> ...`
        if self._current().kind is not TokenKind.IDENT:
            return False
        i = self.pos
        while self.tokens[i].kind is TokenKind.IDENT or self.tokens[i].is_sym("*", "::"):
            i += 1
            if self.tokens[i - 1].is_sym("::"):
                i += 1  # the type tag
        return self.tokens[i].is_sym("->")

    def _slice_refs(self) -> tuple[SliceRef, ...]:
        parens = self._eat_sym("(")
        parts: list[SliceRef] = list(self._slice_ref())
        while self._eat_sym("#"):
            parts.extend(self._slice_ref())
        if parens:
            self._expect_sym(")")
        return tuple(parts)

    def _named_slice_ahead(self) -> bool:
        # ident (, ident)* @ ...
        i = self.pos
        while self.tokens[i].kind is TokenKind.IDENT:
            i += 1
            if self.tokens[i].is_sym("@"):
                return True
            if not self.tokens[i].is_sym(","):
                return False
            i += 1
        return False

    def _slice_ref(self) -> list[SliceRef]:
        if self._named_slice_ahead():
            names = [self._expect_ident()]
            while self._eat_sym(","):
                names.append(self._expect_ident())
            self._expect_sym("@")
            iface = self._expect_ident()
            type_args = self._type_args()
            naming = None
            if self._current().is_sym("(") or self._naming_ahead():
                naming = self._ports_naming()
            return [
                SliceRef(iface=iface, slice_name=n, type_args=type_args, naming=naming)
                for n in names
            ]
        iface = self._expect_ident()
        type_args = self._type_args()
        naming = None
        if self._current().is_sym("(") or self._naming_ahead():
            naming = self._ports_naming()
        return [SliceRef(iface=iface, type_args=type_args, naming=naming)]

    def _type_args(self) -> tuple[str, ...]:
        args = []
        while (
            self._current().kind is TokenKind.IDENT
            and self._current().text[0].isupper()
            and not self._peek().is_sym("@", "=>")
        ):
            args.append(self._expect_ident())
        return tuple(args)

    def _decl_unit(self) -> UnitDecl:
        self._expect_kw("unit")
        repetitive = self._eat_sym("*")
        name = self._seg()
        iface = None
        if self._eat_sym("#"):
            iface = self._unit_iface()
        wires = self._wire_clause()
        return UnitDecl(name=name, repetitive=repetitive, iface=iface, wires=wires)

    def _unit_iface(self) -> UnitIface:
        tok = self._current()
        if tok.is_sym("("):
            ports = self._ports_spec()
            behavior = None
            if self._current().is_kw("behavior", "behaviour"):
                self._advance()
                self._expect_sym(":")
                behavior = self._behavior_spec()
            return InlineIface(ports, behavior)
        if tok.kind is TokenKind.IDENT and tok.text[0].isupper():
            name = self._expect_ident()
            type_args = self._type_args()
            naming = None
            if self._current().is_sym("(") or self._naming_ahead():
                naming = self._ports_naming()
            return NamedIface(name, naming, type_args)
        if self._looks_like_port_list():
            return InlineIface(self._ports_spec(), None)
        raise self._fail("expected interface reference or ports")

    def _wire_clause(self) -> tuple[WireSetup, ...]:
        if not (self._current().is_kw("wire") or self._current().is_kw("groups")):
            return ()
        self._advance()
        setups = [self._wire_setup()]
        while self._eat_sym(","):
            setups.append(self._wire_setup())
        return tuple(setups)

    def _wire_setup(self) -> WireSetup:
        port = self._seg()
        kind = None
        size = None
        members: tuple[str, ...] = ()
        if self._current().is_kw("any", "all"):
            kind = self._advance().text
            if self._eat_sym("*"):
                size = self._expr()
            elif self._eat_sym("{"):
                names = [self._expect_ident()]
                while self._eat_sym(","):
                    names.append(self._expect_ident())
                self._expect_sym("}")
                members = tuple(names)
            else:
                raise self._fail("expected '*n' or '{members}' after group kind")
        wire = None
        if self._eat_sym(":"):
            wire = self._wire_ref()
        return WireSetup(port=port, kind=kind, size=size, members=members, wire=wire)

    def _wire_ref(self) -> WireRef:
        tok = self._current()
        if tok.is_sym("?"):
            self._advance()
            return WireRef()
        if tok.kind is TokenKind.HOSTCODE:
            self._advance()
            return WireRef(host=tok.text)
        name = self._expect_ident()
        args: list = []
        if self._eat_sym("("):
            if not self._current().is_sym(")"):
                args.append(self._wire_arg())
                while self._eat_sym(","):
                    args.append(self._wire_arg())
            self._expect_sym(")")
        return WireRef(name=name, args=tuple(args))

    def _wire_arg(self):
        tok = self._current()
        if tok.kind is TokenKind.IDENT and tok.text[0].isupper():
            self._advance()
            return tok.text  # symbolic tag like MPI_SUM
        return self._expr()

    def _decl_assign(self) -> AssignDecl:
        self._expect_kw("assign")
        component = self._expect_ident()
        actuals: list = []
        if self._eat_sym("<"):
            if not self._current().is_sym(">"):
                actuals.append(self._actual())
                while self._eat_sym(","):
                    actuals.append(self._actual())
            self._expect_sym(">")
        mapping = None
        if not self._current().is_kw("to"):
            mapping = self._ports_naming()
        self._expect_kw("to")
        unit = self._qname()
        unit_naming = None
        if self._eat_sym("#"):
            unit_naming = self._ports_naming_or_slices()
        return AssignDecl(
            component=component,
            actuals=tuple(actuals),
            mapping=mapping,
            unit=unit,
            unit_naming=unit_naming,
        )

    def _actual(self):
        tok = self._current()
        if tok.kind is TokenKind.IDENT and tok.text[0].isupper():
            self._advance()
            return tok.text
        if tok.kind is TokenKind.HOSTCODE:
            self._advance()
            return tok.text
        return self._expr()

    def _ports_naming_or_slices(self):
        """Unit-side `# sx # sy # q` lists are tolerated and ignored."""
        if self._current().kind is TokenKind.IDENT and (
            self._peek().is_sym("#") or not self._naming_ahead()
        ):
            names = [self._expect_ident()]
            while self._eat_sym("#"):
                names.append(self._expect_ident())
            return PortsNaming(tuple(MName(Seg(n)) for n in names), ())
        return self._ports_naming()

    def _decl_connect(self) -> ConnectDecl:
        self._expect_kw("connect")
        src_unit, src_port = self._port_ref("->")
        self._expect_kw("to")
        dst_unit, dst_port = self._port_ref("<-")
        mode = "synchronous"
        capacity = None
        if self._eat_sym(","):
            tok = self._current()
            if not tok.is_kw(*_MODES):
                raise self._fail("expected communication mode")
            mode = self._advance().text
            if mode == "buffered" and (
                self._current().kind is TokenKind.INT or self._current().kind is TokenKind.IDENT
            ):
                capacity = self._expr()
        return ConnectDecl(src_unit, src_port, dst_unit, dst_port, mode, capacity)

    def _port_ref(self, arrow: str) -> tuple[QName, Seg]:
        unit = self._qname()
        self._expect_sym(arrow)
        port = self._seg()
        return unit, port

    def _decl_unify(self) -> UnifyDecl:
        self._expect_kw("unify")
        operands = [self._unify_operand()]
        while self._eat_sym(","):
            operands.append(self._unify_operand())
        self._expect_kw("to")
        target = self._unit_spec_target()
        adjust = self._adjust_clause()
        return UnifyDecl(tuple(operands), target, adjust)

    def _unify_operand(self) -> UnifyOperand:
        unit = self._qname()
        mass = None
        naming = None
        if self._eat_sym("#"):
            tok = self._current()
            if tok.kind is TokenKind.IDENT and not self._naming_ahead() and not tok.is_sym("("):
                mass = self._expect_ident()
            else:
                naming = self._ports_naming()
        return UnifyOperand(unit, mass, naming)

    def _naming_ahead(self) -> bool:
        """True when the upcoming tokens form `elem(-tuple)? ->`."""
        i = self.pos
        depth = 0
        limit = min(len(self.tokens) - 1, i + 64)
        while i < limit:
            tok = self.tokens[i]
            if tok.is_sym("("):
                depth += 1
            elif tok.is_sym(")"):
                depth -= 1
                if depth < 0:
                    return False
            elif tok.is_sym("->") and depth <= 0:
                return True
            elif depth == 0 and not (
                tok.kind in (TokenKind.IDENT, TokenKind.INT, TokenKind.HOSTCODE)
                or tok.is_sym(",", "[", "]", "*", "::", ".", "@", "_")
                or tok.is_kw("mod")
            ):
                return False
            i += 1
        return False

    def _unit_spec_target(self) -> UnitSpecTarget:
        repetitive = self._eat_sym("*")
        name = self._seg()
        iface = None
        if self._eat_sym("#"):
            iface = self._unit_iface()
        wires = self._wire_clause()
        return UnitSpecTarget(name=name, repetitive=repetitive, iface=iface, wires=wires)

    def _adjust_clause(self) -> tuple[WireSetup, ...]:
        if not self._current().is_kw("adjust"):
            return ()
        self._expect_kw("adjust")
        if not (self._eat_kw("wire") or self._eat_kw("groups")):
            raise self._fail("expected 'wire' after 'adjust'")
        # tolerate plural marker `wires` as ident -- not needed, keyword is `wire`
        setups = [self._wire_setup()]
        while self._eat_sym(","):
            setups.append(self._wire_setup())
        return tuple(setups)

    def _decl_factorize(self) -> FactorizeDecl:
        self._expect_kw("factorize")
        source = self._qname()
        pattern = None
        if self._eat_sym("#"):
            pattern = self._ports_naming()
        elif not self._current().is_kw("to"):
            pattern = self._ports_naming()
        self._expect_kw("to")
        targets: list = []
        targets.append(self._factor_target())
        while self._eat_sym(","):
            targets.append(self._factor_target())
        adjust = self._adjust_clause()
        return FactorizeDecl(source, pattern, tuple(targets), adjust)

    def _factor_target(self):
        if self._current().is_sym("[/"):
            self._expect_sym("[/")
            specs = [self._unit_spec_target()]
            while self._eat_sym(","):
                specs.append(self._unit_spec_target())
            self._expect_sym("/]")
            return TargetScope(tuple(specs))
        return self._unit_spec_target()

    def _decl_replicate(self) -> ReplicateDecl:
        self._expect_kw("replicate")
        units = [self._qname()]
        while self._eat_sym(","):
            units.append(self._qname())
        self._expect_kw("into")
        factor = self._expr()
        adjust = self._adjust_clause()
        return ReplicateDecl(tuple(units), factor, adjust)

    def _decl_replace(self) -> ReplaceDecl:
        self._expect_kw("replace")
        skeleton = self._qname()
        pattern = None
        if self._eat_sym("#"):
            pattern = self._ports_naming()
        self._expect_kw("by")
        new_unit = self._qname()
        new_pattern = None
        if self._eat_sym("#"):
            new_pattern = self._ports_naming()
        return ReplaceDecl(skeleton, pattern, new_unit, new_pattern)

    def _decl_bind(self) -> BindDecl:
        self._expect_kw("bind")
        unit = self._qname()
        tok = self._current()
        if tok.is_sym("->"):
            direction = "out"
        elif tok.is_sym("<-"):
            direction = "in"
        else:
            raise self._fail("expected '->' or '<-' in bind")
        self._advance()
        port = self._seg()
        self._expect_kw("to")
        self._expect_sym("->" if direction == "out" else "<-")
        io_name = self._expect_ident()
        return BindDecl(unit=unit, port=port, direction=direction, io_name=io_name)

    # names and expressions

    def _seg(self) -> Seg:
        base = self._expect_ident()
        indices = []
        while self._current().is_sym("[") and not self._peek().is_sym("/"):
            self._advance()
            indices.append(self._expr())
            self._expect_sym("]")
        return Seg(base, tuple(indices))

    def _qname(self) -> QName:
        segs = [self._seg()]
        while self._current().is_sym(".") and self._peek().kind is TokenKind.IDENT:
            self._advance()
            segs.append(self._seg())
        if len(segs) > 2:
            tok = self._current()
            raise ParseError("qualified names are at most two segments deep", line=tok.line)
        return QName(tuple(segs))

    def _expr(self) -> Expr:
        return self._expr_add()

    def _expr_add(self) -> Expr:
        left = self._expr_mul()
        while self._current().is_sym("+", "-"):
            op = self._advance().text
            left = EBin(op, left, self._expr_mul())
        return left

    def _expr_mul(self) -> Expr:
        left = self._expr_atom()
        while self._current().is_sym("*", "/", "%") or self._current().is_kw("mod"):
            op = self._advance().text
            if op == "mod":
                op = "%"
            left = EBin(op, left, self._expr_atom())
        return left

    def _expr_atom(self) -> Expr:
        tok = self._current()
        if tok.kind is TokenKind.INT:
            self._advance()
            return EInt(int(tok.text))
        if tok.is_sym("-"):
            self._advance()
            return ENeg(self._expr_atom())
        if tok.is_sym("("):
            self._advance()
            inner = self._expr()
            self._expect_sym(")")
            return inner
        if tok.is_sym("."):
            # `.i` -- explicit reference to an outer scope index
            self._advance()
            return EName(self._expect_ident())
        if tok.kind is TokenKind.IDENT:
            name = self._expect_ident()
            if self._current().is_sym("("):
                self._advance()
                args = [self._expr()]
                while self._eat_sym(","):
                    args.append(self._expr())
                self._expect_sym(")")
                return ECall(name, tuple(args))
            return EName(name)
        raise self._fail("expected expression")

    # ports specs and namings

    def _ports_spec(self) -> PortsSpec:
        ins = self._port_decl_side()
        self._expect_sym("->")
        outs = self._port_decl_side()
        return PortsSpec(tuple(ins), tuple(outs))

    def _port_decl_side(self) -> list[PortDecl]:
        if self._eat_sym("("):
            if self._eat_sym(")"):
                return []
            decls = [self._port_decl()]
            while self._eat_sym(","):
                decls.append(self._port_decl())
            self._expect_sym(")")
            return decls
        return [self._port_decl()]

    def _port_decl(self) -> PortDecl:
        name = self._expect_ident()
        nesting = 0
        while self._eat_sym("*"):
            nesting += 1
        type_tag = None
        if self._eat_sym("::"):
            type_tag = self._expect_ident()
        return PortDecl(name, nesting, type_tag)

    def _ports_naming(self) -> PortsNaming:
        ins = self._map_side()
        self._expect_sym("->")
        outs = self._map_side()
        return PortsNaming(tuple(ins), tuple(outs))

    def _map_side(self) -> list[MapElem]:
        if self._current().is_sym("("):
            # lookahead: a parenthesized group is a tuple unless it scans as
            # an arithmetic expression (fixed-argument position)
            self._advance()
            if self._eat_sym(")"):
                return []
            elems = [self._map_elem()]
            while self._eat_sym(","):
                elems.append(self._map_elem())
            self._expect_sym(")")
            return elems
        return [self._map_elem()]

    def _map_elem(self) -> MapElem:
        tok = self._current()
        if tok.kind is TokenKind.HOSTCODE:
            self._advance()
            return MHost(tok.text)
        if tok.kind is TokenKind.IDENT and tok.text in ("_", "__"):
            self._advance()
            return MWild(double=tok.text == "__")
        if tok.is_sym("@"):
            self._advance()
            return MAt(self._qname())
        if tok.kind is TokenKind.INT or tok.is_sym("("):
            return MExpr(self._expr())
        if tok.kind is TokenKind.IDENT:
            nxt = self._peek()
            if nxt.is_sym("+", "-", "/", "%") or nxt.is_kw("mod"):
                return MExpr(self._expr())
            seg = self._seg()
            self._eat_sym("*")  # tolerate stream marks inside namings
            while self._eat_sym("*"):
                pass
            if self._eat_sym("::"):
                self._expect_ident()
            return MName(seg)
        raise self._fail("expected mapping element")

    # behaviors

    def _behavior_spec(self) -> BehaviorSpec:
        sems: tuple[str, ...] = ()
        if self._current().is_kw("sem"):
            self._advance()
            names = [self._expect_ident()]
            while self._eat_sym(","):
                names.append(self._expect_ident())
            self._eat_sym(";")
            sems = tuple(names)
        return BehaviorSpec(sems, self._behavior_expr())

    def _behavior_expr(self):
        tok = self._current()
        if tok.is_kw("seq"):
            self._advance()
            return BSeq(tuple(self._behavior_block()))
        if tok.is_kw("par"):
            self._advance()
            return BPar(tuple(self._behavior_block()))
        if tok.is_kw("alt"):
            self._advance()
            return BAlt(tuple(self._behavior_block()))
        if tok.is_sym("{"):
            items = self._behavior_block()
            return items[0] if len(items) == 1 else BSeq(tuple(items))
        if tok.is_kw("repeat"):
            self._advance()
            body = self._behavior_expr()
            if self._current().is_kw("until"):
                self._advance()
                return BRepeat(body, self._condition_disjunction())
            if self._current().is_kw("counter"):
                self._advance()
                return BRepeat(body, RawCounter(self._expr()))
            raise self._fail("expected 'until' or 'counter' after repeat body")
        if tok.is_kw("if"):
            self._advance()
            cond = self._if_condition()
            self._expect_kw("then")
            then = self._behavior_expr()
            self._expect_kw("else")
            els = self._behavior_expr()
            return BIf(cond, then, els)
        if tok.is_kw("skip"):
            self._advance()
            return BSkip()
        if tok.is_kw("signal"):
            self._advance()
            return BSignal(self._expect_ident())
        if tok.is_kw("wait"):
            self._advance()
            return BWait(self._expect_ident())
        if tok.is_kw("do"):
            self._advance()
            return BDo(self._expect_ident())
        if tok.kind is TokenKind.IDENT:
            name = self._expect_ident()
            if self._eat_sym("!"):
                return BAct(name, "out")
            if self._eat_sym("?"):
                return BAct(name, "in")
            raise self._fail("expected '!' or '?' after port name")
        raise self._fail("expected behavior expression")

    def _behavior_block(self) -> list:
        self._expect_sym("{")
        items = [self._behavior_expr()]
        while self._eat_sym(";"):
            if self._current().is_sym("}"):
                break
            items.append(self._behavior_expr())
        self._expect_sym("}")
        return items

    def _condition_disjunction(self) -> CUntil:
        groups = [self._condition_conjunction()]
        while self._eat_sym("|"):
            groups.append(self._condition_conjunction())
        sync = any(marked for _, marked in groups)
        return CUntil(tuple(names for names, _ in groups), sync_marked=sync)

    def _condition_conjunction(self) -> tuple[tuple[str, ...], bool]:
        marked = self._eat_sym("<")
        names = [self._expect_ident()]
        while self._eat_sym("&"):
            names.append(self._expect_ident())
        if marked:
            self._expect_sym(">")
        return tuple(names), marked

    def _if_condition(self):
        if self._current().is_kw("until"):
            self._advance()
            return self._condition_disjunction()
        if self._current().is_kw("counter"):
            self._advance()
            return RawCounter(self._expr())
        cond = self._condition_disjunction()
        return CPending(cond.groups)


def parse(source: str) -> ConfigAst:
    """Parse a source holding exactly one configuration."""
    configs = parse_file(source)
    if len(configs) != 1:
        raise ParseError(f"expected one configuration, found {len(configs)}")
    return configs[0]


def parse_file(source: str, lex_result: LexResult | None = None) -> list[ConfigAst]:
    lr = lex_result if lex_result is not None else lex(source)
    parser = Parser(lr.tokens)
    configs = parser.parse_all()
    for cfg in configs:
        cfg.pragmas = list(lr.pragmas)
    return configs
