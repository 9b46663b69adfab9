"""Randomized properties: compiled languages agree with the reference
interpreter, and the transformation operators preserve well-formedness."""

import string

from hypothesis import given, settings, strategies as st

from oracles import default_condition_lengths, oracle_language, shuffle_sets

from hashc.algebra.model import (
    Channel,
    ComponentAlgebra,
    GroupInfo,
    PortInfo,
    UnitInfo,
    WireSpec,
)
from hashc.algebra.ops import (
    AdjustSetup,
    FactorTarget,
    OperandSpec,
    TargetSpec,
    factorize,
    replicate,
    unify,
)
from hashc.algebra.interfaces import InterfaceValue, PortSig
from hashc.algebra.restrictions import check_restrictions
from hashc.automata import compile_behavior, language_upto
from hashc.behavior import (
    BAct,
    BAlt,
    BPar,
    BRepeat,
    BSeq,
    BSkip,
    BehaviorSpec,
    CCounter,
    CUntil,
)

LETTERS = st.sampled_from(list("abcd"))
DIRECTIONS = st.sampled_from(["in", "out"])

acts = st.builds(BAct, LETTERS, DIRECTIONS)

behaviors = st.recursive(
    acts | st.just(BSkip()),
    lambda inner: st.one_of(
        st.lists(inner, min_size=1, max_size=3).map(lambda xs: BSeq(tuple(xs))),
        st.lists(inner, min_size=1, max_size=2).map(lambda xs: BPar(tuple(xs))),
        st.lists(inner, min_size=1, max_size=2).map(lambda xs: BAlt(tuple(xs))),
        st.builds(BRepeat, inner, st.integers(0, 2).map(CCounter)),
        st.builds(BRepeat, inner, LETTERS.map(lambda p: CUntil(((p,),)))),
    ),
    max_leaves=6,
)


@settings(max_examples=80, deadline=None)
@given(behaviors)
def test_language_matches_reference_interpreter(expr):
    spec = BehaviorSpec((), expr)
    lengths = default_condition_lengths(spec)
    aut = compile_behavior(spec)
    assert language_upto(aut, 4, lengths) == oracle_language(spec, 4, lengths)


words_st = st.lists(
    st.sampled_from(list(string.ascii_lowercase[:6])), min_size=0, max_size=3
)


@settings(max_examples=40, deadline=None)
@given(words_st, words_st)
def test_synthesized_union_shuffles_disjoint_operands(w1, w2):
    # unify without a declared interface interleaves the operand behaviors;
    # with disjoint alphabets that is exactly the shuffle of their languages
    alg = ComponentAlgebra(name="App")
    for unit, word, prefix in (("u1", w1, "l"), ("u2", w2, "r")):
        ports = [f"{prefix}{c}" for c in word]
        beh = BSeq(tuple(BAct(p, "out") for p in ports)) if ports else BSkip()
        alg.add_unit(UnitInfo(unit, behavior=BehaviorSpec((), beh)))
        for p in dict.fromkeys(ports):
            alg.add_group(GroupInfo(unit, p, "out", (p,)))
            alg.add_port(PortInfo(unit, p, "out"))
    out, _ = unify(alg, [OperandSpec("u1"), OperandSpec("u2")], TargetSpec("u"))
    spec = out.units["u"].behavior
    n = len(w1) + len(w2)
    got = language_upto(compile_behavior(spec), n)
    left = {tuple(f"l{c}" for c in w1)}
    right = {tuple(f"r{c}" for c in w2)}
    assert got == shuffle_sets(left, right)


def chain_alg(k):
    """k workers between one source and one sink, each on its own lane."""
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("src", repetitive=True))
    alg.add_group(
        GroupInfo(
            "src", "o", "out", tuple(f"o[{i}]" for i in range(k)),
            kind="any", nesting=1, wire=WireSpec("distribute"),
        )
    )
    for i in range(k):
        alg.add_port(PortInfo("src", f"o[{i}]", "out"))
    alg.add_unit(UnitInfo("snk", repetitive=True))
    alg.add_group(
        GroupInfo(
            "snk", "i", "in", tuple(f"i[{i}]" for i in range(k)),
            kind="all", nesting=1, wire=WireSpec("concat-combine"),
        )
    )
    for i in range(k):
        alg.add_port(PortInfo("snk", f"i[{i}]", "in"))
    beh = BehaviorSpec(
        (),
        BRepeat(BSeq((BAct("job", "in"), BAct("res", "out"))), CUntil((("job",),))),
    )
    for i in range(k):
        w = f"w{i}"
        alg.add_unit(UnitInfo(w, behavior=beh, repetitive=True))
        alg.add_group(GroupInfo(w, "job", "in", ("job",), nesting=1))
        alg.add_group(GroupInfo(w, "res", "out", ("res",), nesting=1))
        alg.add_port(PortInfo(w, "job", "in"))
        alg.add_port(PortInfo(w, "res", "out"))
        alg.channels.append(Channel(("src", f"o[{i}]", "out"), (w, "job", "in")))
        alg.channels.append(Channel((w, "res", "out"), ("snk", f"i[{i}]", "in")))
    return alg


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4))
def test_unify_keeps_restrictions_clean(k):
    alg = chain_alg(k)
    assert not [d for d in check_restrictions(alg) if d.severity == "error"]
    out, _ = unify(
        alg,
        [OperandSpec(f"w{i}") for i in range(k)],
        TargetSpec("pool", repetitive=True),
    )
    assert not [d for d in check_restrictions(out) if d.severity == "error"]
    # distinct lanes collapse only when they join the same group pair; here
    # they all do, on both sides
    assert out.groups[("pool", "job", "in")].members == ("job",)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(2, 3))
def test_factorize_then_replicate_keep_restrictions_clean(k, r):
    beh = BehaviorSpec(
        (),
        BRepeat(BSeq((BAct("job", "in"), BAct("res", "out"))), CUntil((("job",),))),
    )
    iv = InterfaceValue("IW", (PortSig("job", "in", 1), PortSig("res", "out", 1)), beh)
    out, _ = unify(
        chain_alg(k),
        [OperandSpec(f"w{i}") for i in range(k)],
        TargetSpec("pool", repetitive=True),
    )
    out2, _ = factorize(
        out,
        "pool",
        {},
        [FactorTarget(f"f{i}", iv, "IW", True) for i in range(2)],
        [
            AdjustSetup("o", None, None, None, WireSpec("distribute")),
            AdjustSetup("i", None, None, None, WireSpec("concat-combine")),
        ],
    )
    assert not [d for d in check_restrictions(out2) if d.severity == "error"]
    out3, _ = replicate(
        out2,
        ["f0"],
        r,
        [
            AdjustSetup("o", "any", None, None, WireSpec("distribute")),
            AdjustSetup("i", "all", None, None, WireSpec("concat-combine")),
        ],
    )
    assert not [d for d in check_restrictions(out3) if d.severity == "error"]
    # one slot per replica plus the untouched sibling lane
    assert len(out3.groups[("src", "o", "out")].members) == r + 1
    assert len(out3.channels) == 2 * (r + 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4))
def test_replicate_copies_internal_channels(r):
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True, assigned="Inner"))
    alg.add_unit(UnitInfo("cl.a"))
    alg.add_unit(UnitInfo("cl.b"))
    alg.add_group(GroupInfo("cl.a", "x", "out", ("x",)))
    alg.add_port(PortInfo("cl.a", "x", "out"))
    alg.add_group(GroupInfo("cl.b", "x", "in", ("x",)))
    alg.add_port(PortInfo("cl.b", "x", "in"))
    alg.comprising["cl"] = ("cl.a", "cl.b")
    alg.channels.append(Channel(("cl.a", "x", "out"), ("cl.b", "x", "in")))
    out, _ = replicate(alg, ["cl"], r)
    assert len(out.channels) == r
    assert not [d for d in check_restrictions(out) if d.severity == "error"]
