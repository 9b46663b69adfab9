"""Error taxonomy shared by every compiler stage.

Every failure the toolchain can report is an HclError subclass with a stable
`code` string; the CLI and service serialize them as JSON objects. Diagnostics
(collected, non-raising) reuse the same codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class HclError(Exception):
    """Base class; `code` is the stable machine-facing identifier."""

    code = "error"
    line: object = None
    col: object = None

    def __init__(self, message: str, **detail: object):
        super().__init__(message)
        self.message = message
        self.detail = dict(detail)
        for key, value in detail.items():
            if key not in ("message", "detail", "code", "args"):
                setattr(self, key, value)

    def to_json(self) -> dict:
        out: dict = {"code": self.code, "message": self.message}
        if self.detail:
            out["detail"] = {k: v for k, v in sorted(self.detail.items())}
        return out


# frontend
class LexError(HclError):
    code = "LexError"


class ParseError(HclError):
    code = "ParseError"


class UnboundIndex(HclError):
    code = "UnboundIndex"


class EmptyRange(HclError):
    code = "EmptyRange"


class NonIntegerIndexExpression(HclError):
    code = "NonIntegerIndexExpression"


class UnresolvedComponent(HclError):
    code = "UnresolvedComponent"


class CyclicUse(HclError):
    code = "CyclicUse"


# algebra
class UnknownUnit(HclError):
    code = "UnknownUnit"


class DuplicateUnit(HclError):
    code = "DuplicateUnit"


class UnknownPort(HclError):
    code = "UnknownPort"


class UnknownInterface(HclError):
    code = "UnknownInterface"


class DirectionClash(HclError):
    code = "DirectionClash"


class UnmappedPort(HclError):
    code = "UnmappedPort"


class BehaviorNotPreserved(HclError):
    code = "BehaviorNotPreserved"


class NotVirtual(HclError):
    code = "NotVirtual"


class TauHatViolation(HclError):
    code = "TauHatViolation"


class MissingWireAdjust(HclError):
    code = "MissingWireAdjust"


class BadReplicationFactor(HclError):
    code = "BadReplicationFactor"


class ArityMismatch(HclError):
    code = "ArityMismatch"


class UnboundArgument(HclError):
    code = "UnboundArgument"


class NestingMismatch(HclError):
    code = "NestingMismatch"


# automata
class UnknownSemaphore(HclError):
    code = "UnknownSemaphore"


class InvalidActivation(HclError):
    code = "InvalidActivation"


class SemaphoreUnderflow(HclError):
    code = "SemaphoreUnderflow"


class StateSpaceBudgetExceeded(HclError):
    code = "StateSpaceBudgetExceeded"


class NonRegular(HclError):
    code = "NonRegular"


# flattener
class DanglingBind(HclError):
    code = "DanglingBind"


class VirtualUnitRemains(HclError):
    code = "VirtualUnitRemains"


class InconsistentCollective(HclError):
    code = "InconsistentCollective"


class InsufficientSlots(HclError):
    code = "InsufficientSlots"


# codec
class RaggedDepth(HclError):
    code = "RaggedDepth"


class TruncatedStream(HclError):
    code = "TruncatedStream"


class DepthOutOfRange(HclError):
    code = "DepthOutOfRange"


class AtomInStream(HclError):
    code = "AtomInStream"


# simulator
class DuplicateKernel(HclError):
    code = "DuplicateKernel"


class UnknownKernel(HclError):
    code = "UnknownKernel"


class KernelFault(HclError):
    code = "KernelFault"


class ReadyModeViolation(HclError):
    code = "ReadyModeViolation"


class InconsistentStream(HclError):
    code = "InconsistentStream"


# petri
class BudgetExceeded(HclError):
    code = "BudgetExceeded"


@dataclass
class Diagnostic:
    """A collected (non-raising) finding; `rule` names the restriction or code."""

    rule: str
    message: str
    severity: str = "error"  # "error" | "warning"
    subject: str = ""
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"rule": self.rule, "message": self.message, "severity": self.severity}
        if self.subject:
            out["subject"] = self.subject
        if self.detail:
            out["detail"] = {k: v for k, v in sorted(self.detail.items())}
        return out


def errors_only(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
