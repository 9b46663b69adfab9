"""Interface values: construction from declarations, where-clause slices,
#-composition, and the homomorphism relations used for replace legality."""

import pytest

from oracles import sync_shuffle_sets

from hashc.algebra.homomorphism import check_homomorphism
from hashc.algebra.interfaces import (
    InterfaceValue,
    PortSig,
    build_interface,
    compose_interfaces,
    default_behavior,
)
from hashc.automata import compile_behavior, language_upto
from hashc.behavior import BAct, BSeq, BSignal, BWait, BehaviorSpec
from hashc.errors import DirectionClash, UnknownPort, UnmappedPort
from hashc.frontend import parse
from hashc.frontend.ast_nodes import InterfaceDecl


def registry_of(src):
    reg = {}
    for d in parse(src).decls:
        if isinstance(d, InterfaceDecl):
            reg[d.name] = build_interface(d, reg)
    return reg


FIG2 = """component T with
  interface IPipeStage (particles*) -> (events*)
    behavior: repeat seq {particles?; events!} until particles
  interface ITracking (user_info, particles*) -> (events*, totals) where: process_particles@IPipeStage particles -> events
    behavior: seq {user_info?; do process_particles; totals!}
"""


class TestBuildInterface:
    def test_ports_and_nesting(self):
        reg = registry_of(FIG2)
        tracking = reg["ITracking"]
        assert tracking.port_names() == ("user_info", "particles", "events", "totals")
        assert tracking.port("particles").nesting == 1
        assert tracking.port("user_info").nesting == 0
        assert {p.name for p in tracking.inputs()} == {"user_info", "particles"}

    def test_positional_slice_resolves_do(self):
        reg = registry_of(FIG2)
        spec = reg["ITracking"].resolved_behavior()
        aut = compile_behavior(spec)
        words = language_upto(aut, 6, {"particles": 1})
        assert words == {
            ("user_info", "particles", "events", "particles", "events", "totals")
        }

    def test_bare_named_slice_mass_renames(self):
        # every port of the sliced interface takes the slice name; the in/out
        # pair stays apart through its direction
        reg = registry_of(
            """component T with
  interface IAllReduce (contrib) -> (result)
    behavior: seq {contrib?; result!}
  interface IEP (seed) -> () where: sx@IAllReduce
"""
        )
        ep = reg["IEP"]
        sx = [p for p in ep.ports if p.name == "sx"]
        assert {p.direction for p in sx} == {"in", "out"}
        spec = ep.resolved_behavior()
        # the renamed slice behavior is available for `do sx`, unused here
        assert "sx" in ep.slices

    def test_behavior_port_validation(self):
        with pytest.raises(UnknownPort):
            registry_of(
                """component T with
  interface IBad (a) -> ()
    behavior: seq {a?; ghost!}
"""
            )

    def test_slice_nesting_refines_header(self):
        reg = registry_of(
            """component T with
  interface IStage (xs*) -> (ys*)
    behavior: repeat seq {xs?; ys!} until xs
  interface IOuter (xs) -> (ys) where: IStage xs -> ys
"""
        )
        assert reg["IOuter"].port("xs").nesting == 1


class TestCompose:
    def test_disjoint_interleaves(self):
        a = InterfaceValue(
            "ILeft",
            (PortSig("ab", "out", 0),),
            BehaviorSpec((), BAct("ab", "out")),
        )
        b = InterfaceValue(
            "IRight",
            (PortSig("job", "in", 0),),
            BehaviorSpec((), BAct("job", "in")),
        )
        both = compose_interfaces(a, b)
        assert set(both.port_names()) == {"ab", "job"}
        words = language_upto(compile_behavior(both.resolved_behavior()), 3)
        assert words == {("ab", "job"), ("job", "ab")}

    def test_self_composition_is_identity_language(self):
        spec = BehaviorSpec((), BSeq((BAct("a", "out"), BAct("b", "out"))))
        iv = InterfaceValue("I", (PortSig("a", "out", 0), PortSig("b", "out", 0)), spec)
        both = compose_interfaces(iv, iv)
        assert language_upto(compile_behavior(both.resolved_behavior()), 3) == {("a", "b")}

    def test_shared_port_synchronizes(self):
        a = InterfaceValue(
            "IA",
            (PortSig("s", "out", 0), PortSig("a", "out", 0)),
            BehaviorSpec((), BSeq((BAct("s", "out"), BAct("a", "out")))),
        )
        b = InterfaceValue(
            "IB",
            (PortSig("s", "out", 0), PortSig("b", "out", 0)),
            BehaviorSpec((), BSeq((BAct("s", "out"), BAct("b", "out")))),
        )
        both = compose_interfaces(a, b)
        words = language_upto(compile_behavior(both.resolved_behavior()), 3)
        assert words == sync_shuffle_sets({("s", "a")}, {("s", "b")}, {"s"})
        assert words == {("s", "a", "b"), ("s", "b", "a")}

    def test_direction_clash(self):
        a = InterfaceValue("IA", (PortSig("x", "out", 0),), None)
        b = InterfaceValue("IB", (PortSig("x", "in", 0),), None)
        with pytest.raises(DirectionClash):
            compose_interfaces(a, b)


class TestDefaultBehavior:
    def test_plain_and_stream_groups(self):
        iv = InterfaceValue("I", (PortSig("a", "in", 0), PortSig("xs", "out", 1)), None)
        spec = default_behavior(iv)
        words = language_upto(compile_behavior(spec, iv), 4, {"xs": 1})
        # plain port once, stream port loops until its end marker
        assert ("a", "xs", "xs") in words
        assert ("xs", "a", "xs") in words


class TestHomomorphism:
    def test_identity_equivalent(self):
        reg = registry_of(FIG2)
        stage = reg["IPipeStage"]
        v = check_homomorphism(stage, stage, {"particles": "particles", "events": "events"})
        assert v == "Equivalent" and not v.approximate

    def test_fig2_association_subsumes(self):
        reg = registry_of(FIG2)
        v = check_homomorphism(
            reg["ITracking"],
            reg["IPipeStage"],
            {"particles": "particles", "events": "events", "user_info": None, "totals": None},
        )
        assert v == "Subsumes" and not v.approximate

    def test_collapsing_map_is_neither(self):
        src = InterfaceValue(
            "S",
            (PortSig("a", "out", 0), PortSig("b", "out", 0)),
            BehaviorSpec((), BSeq((BAct("a", "out"), BAct("b", "out")))),
        )
        dst = InterfaceValue("D", (PortSig("a", "out", 0),), BehaviorSpec((), BAct("a", "out")))
        v = check_homomorphism(src, dst, {"a": "a", "b": "a"})
        assert v == "Neither"

    def test_unmapped_port_raises(self):
        reg = registry_of(FIG2)
        with pytest.raises(UnmappedPort):
            check_homomorphism(reg["IPipeStage"], reg["IPipeStage"], {"particles": "particles"})

    def test_direction_clash_in_mapping(self):
        src = InterfaceValue("S", (PortSig("a", "out", 0),), BehaviorSpec((), BAct("a", "out")))
        dst = InterfaceValue("D", (PortSig("x", "in", 0),), BehaviorSpec((), BAct("x", "in")))
        with pytest.raises(DirectionClash):
            check_homomorphism(src, dst, {"a": "x"})

    def test_semaphores_fall_back_to_bounded(self):
        spec = BehaviorSpec(
            ("s",),
            BSeq((BSignal("s"), BWait("s"), BAct("a", "out"))),
        )
        iv = InterfaceValue("I", (PortSig("a", "out", 0),), spec)
        v = check_homomorphism(iv, iv, {"a": "a"})
        assert v == "Equivalent" and v.approximate

    def test_strict_subset_is_subsumed(self):
        sub = InterfaceValue(
            "Sub",
            (PortSig("a", "out", 0), PortSig("b", "out", 0)),
            BehaviorSpec((), BSeq((BAct("a", "out"), BAct("b", "out")))),
        )
        from hashc.behavior import BAlt

        sup = InterfaceValue(
            "Sup",
            (PortSig("a", "out", 0), PortSig("b", "out", 0)),
            BehaviorSpec(
                (),
                BAlt(
                    (
                        BSeq((BAct("a", "out"), BAct("b", "out"))),
                        BSeq((BAct("b", "out"), BAct("a", "out"))),
                    )
                ),
            ),
        )
        m = {"a": "a", "b": "b"}
        assert check_homomorphism(sub, sup, m) == "Subsumed"
        assert check_homomorphism(sup, sub, m) == "Subsumes"
