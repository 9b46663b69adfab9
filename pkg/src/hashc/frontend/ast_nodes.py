"""Syntax tree for configuration sources.

Index expressions stay symbolic until unfold_indexed evaluates them; names are
segment lists so `wp.worker[i]` survives the trip. Behavior bodies use the
shared nodes from hashc.behavior, except conditions/counters which keep Expr
payloads until unfolding (see RawCounter below).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from hashc.behavior import BehaviorSpec


# expressions


@dataclass(frozen=True)
class EInt:
    value: int


@dataclass(frozen=True)
class EName:
    name: str


@dataclass(frozen=True)
class EBin:
    op: str  # + - * / % (both `%` and `mod` normalize to "%")
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class ENeg:
    operand: "Expr"


@dataclass(frozen=True)
class ECall:
    fn: str  # ilog2 | ipow2
    args: tuple["Expr", ...]


Expr = Union[EInt, EName, EBin, ENeg, ECall]


@dataclass(frozen=True)
class Seg:
    """One name segment with optional index expressions: worker[i][j]."""

    base: str
    indices: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class QName:
    segments: tuple[Seg, ...]

    @property
    def depth(self) -> int:
        return len(self.segments)


# interface / port structure


@dataclass(frozen=True)
class PortDecl:
    name: str
    nesting: int = 0  # number of stream stars
    type_tag: Optional[str] = None


@dataclass(frozen=True)
class PortsSpec:
    inputs: tuple[PortDecl, ...]
    outputs: tuple[PortDecl, ...]


# mapping elements for unify/factorize/replace/assign patterns
@dataclass(frozen=True)
class MName:
    seg: Seg


@dataclass(frozen=True)
class MWild:
    double: bool = False  # `__`


@dataclass(frozen=True)
class MExpr:
    expr: Expr


@dataclass(frozen=True)
class MHost:
    text: str


@dataclass(frozen=True)
class MAt:
    qname: QName


MapElem = Union[MName, MWild, MExpr, MHost, MAt]


@dataclass(frozen=True)
class PortsNaming:
    ins: tuple[MapElem, ...]
    outs: tuple[MapElem, ...]


@dataclass(frozen=True)
class SliceRef:
    """One member of a where-composition.

    `ab@IBCast Double` -> named slice (slice_name="ab").
    `IPipeStage (particles) -> (events)` -> positional association.
    """

    iface: str
    slice_name: Optional[str] = None
    type_args: tuple[str, ...] = ()
    naming: Optional[PortsNaming] = None


@dataclass(frozen=True)
class WireRef:
    name: Optional[str] = None  # None means `?` (unspecified)
    args: tuple[Union[Expr, str], ...] = ()
    host: Optional[str] = None  # verbatim {# ... #} body


@dataclass(frozen=True)
class WireSetup:
    port: Seg
    kind: Optional[str] = None  # "any" | "all" | None
    size: Optional[Expr] = None
    members: tuple[str, ...] = ()
    wire: Optional[WireRef] = None


# declarations


@dataclass(frozen=True)
class UseDecl:
    path: tuple[str, ...]  # dotted path, last segment is the component name
    nonstandard_from: bool = False


@dataclass(frozen=True)
class ImportDecl:
    text: str


@dataclass(frozen=True)
class IteratorDecl:
    names: tuple[str, ...]
    lo: Expr
    hi: Expr


@dataclass(frozen=True)
class InterfaceDecl:
    name: str
    ports: Optional[PortsSpec]
    context: Optional[str] = None
    slices: tuple[SliceRef, ...] = ()
    behavior: Optional[BehaviorSpec] = None
    specializes: Optional[str] = None
    generalization: bool = False


@dataclass(frozen=True)
class NamedIface:
    name: str
    naming: Optional[PortsNaming] = None
    type_args: tuple[str, ...] = ()


@dataclass(frozen=True)
class InlineIface:
    ports: PortsSpec
    behavior: Optional[BehaviorSpec] = None


UnitIface = Union[NamedIface, InlineIface]


@dataclass(frozen=True)
class UnitDecl:
    name: Seg
    repetitive: bool = False
    iface: Optional[UnitIface] = None
    wires: tuple[WireSetup, ...] = ()


@dataclass(frozen=True)
class AssignDecl:
    component: str
    actuals: tuple[Union[Expr, str], ...] = ()  # str for symbolic tags (MPI_SUM)
    mapping: Optional[PortsNaming] = None
    unit: QName = QName(())
    unit_naming: Optional[PortsNaming] = None


@dataclass(frozen=True)
class ConnectDecl:
    src_unit: QName
    src_port: Seg
    dst_unit: QName
    dst_port: Seg
    mode: str = "synchronous"
    capacity: Optional[Expr] = None


@dataclass(frozen=True)
class UnifyOperand:
    unit: QName
    mass_rename: Optional[str] = None
    naming: Optional[PortsNaming] = None


@dataclass(frozen=True)
class UnitSpecTarget:
    name: Seg
    repetitive: bool = False
    iface: Optional[UnitIface] = None
    wires: tuple[WireSetup, ...] = ()


@dataclass(frozen=True)
class TargetScope:
    """Indexed family of targets inside a factorize list."""

    targets: tuple[UnitSpecTarget, ...]


@dataclass(frozen=True)
class UnifyDecl:
    operands: tuple[UnifyOperand, ...]
    target: UnitSpecTarget
    adjust: tuple[WireSetup, ...] = ()


@dataclass(frozen=True)
class FactorizeDecl:
    source: QName
    pattern: Optional[PortsNaming]
    targets: tuple[Union[UnitSpecTarget, TargetScope], ...]
    adjust: tuple[WireSetup, ...] = ()


@dataclass(frozen=True)
class ReplicateDecl:
    units: tuple[QName, ...]
    factor: Expr
    adjust: tuple[WireSetup, ...] = ()


@dataclass(frozen=True)
class ReplaceDecl:
    skeleton: QName
    skeleton_pattern: Optional[PortsNaming]
    new_unit: QName
    new_pattern: Optional[PortsNaming]


@dataclass(frozen=True)
class BindDecl:
    unit: QName
    port: Optional[Seg]
    direction: str  # "out" | "in"
    io_name: str


@dataclass(frozen=True)
class HostDecl:
    text: str


@dataclass(frozen=True)
class ScopeDecl:
    decls: tuple["Declaration", ...]


Declaration = Union[
    UseDecl,
    ImportDecl,
    IteratorDecl,
    InterfaceDecl,
    UnitDecl,
    AssignDecl,
    ConnectDecl,
    UnifyDecl,
    FactorizeDecl,
    ReplicateDecl,
    ReplaceDecl,
    BindDecl,
    HostDecl,
    ScopeDecl,
]


@dataclass(frozen=True)
class RawCounter:
    """Counter condition whose bound is still symbolic (pre-unfold)."""

    expr: Expr


@dataclass
class ConfigAst:
    name: str
    params: tuple[str, ...]
    io: Optional[PortsSpec]
    decls: list[Declaration]
    pragmas: list = field(default_factory=list)
    header_kw: str = "component"
    warnings: list = field(default_factory=list)
