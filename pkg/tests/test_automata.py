"""Guide automata: compilation, stepping, language, inclusion.

Language assertions run against the structural interpreter in oracles.py,
which never touches the compiler or the runtime.
"""

import pytest

from oracles import (
    oracle_language,
    shuffle_sets,
    sync_shuffle_sets,
)

from hashc.automata import (
    advance,
    check_inclusion,
    compile_behavior,
    enabled_ports,
    initial_state,
    invert_mapping,
    language_upto,
)
from hashc.automata.language import default_lengths, words_as_strings
from hashc.automata.model import CHOICE, FORWARD
from hashc.behavior import (
    BAct,
    BAlt,
    BIf,
    BPar,
    BRepeat,
    BSeq,
    BSignal,
    BSkip,
    BSyncUnion,
    BWait,
    BehaviorSpec,
    CCounter,
    CPending,
    CUntil,
)
from hashc.errors import (
    InvalidActivation,
    NonRegular,
    UnknownPort,
    UnknownSemaphore,
)


def seq(*xs):
    return BSeq(tuple(xs))


def par(*xs):
    return BPar(tuple(xs))


def alt(*xs):
    return BAlt(tuple(xs))


def act(p, d="out"):
    return BAct(p, d)


def until(body, *ports):
    return BRepeat(body, CUntil(tuple((p,) for p in ports)))


def lang(expr, n, lengths=None, sems=()):
    return language_upto(compile_behavior(BehaviorSpec(sems, expr)), n, lengths)


class TestCompile:
    def test_chain_shape(self):
        aut = compile_behavior(BehaviorSpec((), seq(act("recip"), act("avg_e", "in"))))
        assert aut.n_states == 3
        assert len(aut.transitions) == 2
        assert aut.finals == frozenset([2])
        assert lang(seq(act("recip"), act("avg_e", "in")), 3) == {("recip", "avg_e")}

    def test_prob_def_prefix_then_loop(self):
        sends = [act(p) for p in ("recip", "avg_e", "all_tallies", "tally_entries", "user_info")]
        expr = seq(*sends, until(act("particles"), "particles"))
        aut = compile_behavior(BehaviorSpec((), expr))
        choices = [q for q in range(aut.n_states) if aut.kind(q) == CHOICE]
        assert len(choices) == 1
        cond = aut.gamma[choices[0]]
        assert cond.groups == (("particles",),)
        words = language_upto(aut, 8, {"particles": 2})
        prefix = ("recip", "avg_e", "all_tallies", "tally_entries", "user_info")
        assert words == {prefix + ("particles",) * 3}

    def test_par_is_shuffle(self):
        assert lang(par(act("a"), act("b")), 2) == shuffle_sets({("a",)}, {("b",)})
        three = lang(par(act("a"), act("b"), act("c")), 3)
        assert three == shuffle_sets(shuffle_sets({("a",)}, {("b",)}), {("c",)})

    def test_unknown_port_against_interface(self):
        from hashc.algebra.interfaces import InterfaceValue, PortSig

        iv = InterfaceValue("I", (PortSig("a", "out", 0),), None)
        with pytest.raises(UnknownPort):
            compile_behavior(BehaviorSpec((), act("zzz")), iv)

    def test_undeclared_semaphore(self):
        with pytest.raises(UnknownSemaphore):
            compile_behavior(BehaviorSpec((), seq(BSignal("s"), act("a"))))


class TestAdvance:
    def test_forced_chain(self):
        aut = compile_behavior(BehaviorSpec((), seq(act("a"), act("b", "in"))))
        st = initial_state(aut)
        st = advance(aut, st, "a")
        st = advance(aut, st, "b")
        assert any(all(q in aut.finals for q in cfg.threads) for cfg in st.alts)

    def test_wrong_first_letter(self):
        aut = compile_behavior(BehaviorSpec((), seq(act("a"), act("b", "in"))))
        with pytest.raises(InvalidActivation):
            advance(aut, initial_state(aut), "b")

    def test_counter_exit_is_forced(self):
        aut = compile_behavior(BehaviorSpec((), BRepeat(act("a"), CCounter(3))))
        st = initial_state(aut)
        for _ in range(3):
            st = advance(aut, st, "a")
        with pytest.raises(InvalidActivation):
            advance(aut, st, "a")

    def test_sub_behavior_completes_first(self):
        # seq {do ab; do job} shape: job before the ab loop finishes is invalid
        expr = seq(until(act("ab", "in"), "ab"), until(act("job", "in"), "job"))
        aut = compile_behavior(BehaviorSpec((), expr))
        st = initial_state(aut)
        with pytest.raises(InvalidActivation):
            advance(aut, st, "job")

    def test_enabled_ports_alt(self):
        aut = compile_behavior(BehaviorSpec((), alt(act("a", "in"), act("b", "in"))))
        st = initial_state(aut)
        assert {p for _, p in enabled_ports(aut, st)} == {"a", "b"}


class TestLanguage:
    def test_trivial_chain(self):
        assert lang(seq(act("a"), act("b", "in")), 2) == {("a", "b")}

    def test_counter_words(self):
        assert lang(BRepeat(act("a"), CCounter(3)), 5) == {("a",) * 3}
        assert lang(BRepeat(act("a"), CCounter(0)), 3) == {()}

    def test_until_default_length(self):
        # stream length 1: one value then the end marker
        assert lang(until(act("a"), "a"), 5) == {("a", "a")}

    def test_words_as_strings(self):
        assert words_as_strings({("a", "b")}) == {"a b"}

    @pytest.mark.parametrize(
        "name,sems,expr,lengths,n",
        [
            ("alt", (), alt(act("a"), seq(act("b"), act("c"))), None, 4),
            ("counter", (), BRepeat(act("a"), CCounter(3)), None, 5),
            ("until2", (), until(seq(act("a", "in"), act("b")), "a"), {"a": 2}, 8),
            (
                "until-conj",
                (),
                BRepeat(seq(act("a", "in"), act("b", "in")), CUntil((("a", "b"),))),
                {"a": 1, "b": 2},
                8,
            ),
            ("nested", (), seq(until(act("a"), "a"), until(act("b"), "b")), {"a": 1, "b": 1}, 6),
            ("par-until", (), par(until(act("a"), "a"), act("z")), {"a": 1}, 5),
            ("if-pending", (), BIf(CPending((("a",),)), act("x"), act("y")), {"a": 1}, 3),
            (
                "seq-if",
                (),
                seq(act("a", "in"), BIf(CUntil((("a",),)), act("x"), act("y"))),
                {"a": 1},
                4,
            ),
            (
                "sem-handshake",
                ("s",),
                par(seq(BWait("s"), act("a")), seq(act("b"), BSignal("s"))),
                None,
                4,
            ),
            (
                "sem-loop",
                ("s",),
                par(
                    until(seq(BWait("s"), act("a")), "a"),
                    until(seq(act("b"), BSignal("s")), "b"),
                ),
                {"a": 2, "b": 2},
                8,
            ),
            (
                "sync-loop",
                (),
                BSyncUnion((until(seq(act("s"), act("a")), "s"), until(act("s"), "s"))),
                {"s": 2},
                8,
            ),
            (
                "sync-three",
                (),
                BSyncUnion(
                    (seq(act("s"), act("a")), seq(act("s"), act("b")), seq(act("c"), act("s")))
                ),
                None,
                5,
            ),
        ],
    )
    def test_matches_structural_oracle(self, name, sems, expr, lengths, n):
        aut = compile_behavior(BehaviorSpec(sems, expr))
        eff = lengths if lengths is not None else default_lengths(aut)
        assert language_upto(aut, n, lengths) == oracle_language(expr, n, eff)

    def test_sync_union_against_pairwise_oracle(self):
        expr = BSyncUnion((seq(act("s"), act("a")), seq(act("s"), act("b"))))
        got = lang(expr, 3)
        assert got == sync_shuffle_sets({("s", "a")}, {("s", "b")}, {"s"})
        assert got == {("s", "a", "b"), ("s", "b", "a")}


class TestInclusion:
    def test_identity(self):
        a = compile_behavior(BehaviorSpec((), seq(act("a"), act("b"))))
        assert check_inclusion(a, a, {"a": "a", "b": "b"})

    def test_subset_and_reverse(self):
        sub = compile_behavior(BehaviorSpec((), seq(act("a"), act("b"))))
        sup = compile_behavior(BehaviorSpec((), alt(seq(act("a"), act("b")), seq(act("b"), act("a")))))
        m = {"a": "a", "b": "b"}
        assert check_inclusion(sub, sup, m)
        assert not check_inclusion(sup, sub, m)

    def test_renaming_map(self):
        a1 = compile_behavior(BehaviorSpec((), seq(act("x"), act("y"))))
        a2 = compile_behavior(BehaviorSpec((), seq(act("a"), act("b"))))
        assert check_inclusion(a1, a2, {"x": "a", "y": "b"})
        assert not check_inclusion(a1, a2, {"x": "b", "y": "a"})

    def test_erasure_projects_away(self):
        a1 = compile_behavior(BehaviorSpec((), seq(act("a"), act("extra"), act("b"))))
        a2 = compile_behavior(BehaviorSpec((), seq(act("a"), act("b"))))
        assert check_inclusion(a1, a2, {"a": "a", "extra": None, "b": "b"})

    def test_letter_form_keys_win(self):
        a1 = compile_behavior(BehaviorSpec((), seq(act("p", "in"), act("p", "out"))))
        a2 = compile_behavior(BehaviorSpec((), seq(act("x", "in"), act("y", "out"))))
        assert check_inclusion(a1, a2, {"p?": "x?", "p!": "y!"})

    def test_loop_inclusion_under_lengths(self):
        one = compile_behavior(BehaviorSpec((), until(act("a"), "a")))
        loop = compile_behavior(BehaviorSpec((), until(alt(act("a"), act("b")), "a")))
        assert check_inclusion(one, loop, {"a": "a"})
        assert not check_inclusion(loop, one, {"a": "a", "b": "a"})

    def test_semaphores_raise_nonregular(self):
        aut = compile_behavior(
            BehaviorSpec(("s",), par(seq(BWait("s"), act("a")), seq(act("b"), BSignal("s"))))
        )
        plain = compile_behavior(BehaviorSpec((), seq(act("b"), act("a"))))
        with pytest.raises(NonRegular):
            check_inclusion(aut, plain, {"a": "a", "b": "b"})

    def test_bounded_agreement_with_word_oracle(self):
        # the exact decision must agree with explicit word mapping on samples
        a1 = compile_behavior(BehaviorSpec((), until(seq(act("t"), act("r", "in")), "t")))
        a2 = compile_behavior(
            BehaviorSpec((), until(alt(seq(act("t"), act("r", "in")), act("z")), "t"))
        )
        m = {"t": "t", "r": "r"}
        included = check_inclusion(a1, a2, m)
        w1 = language_upto(a1, 8, {"t": 2})
        w2 = language_upto(a2, 8, {"t": 2})
        mapped = {tuple(m.get(x, x) for x in w) for w in w1}
        assert included == mapped.issubset(w2)


class TestInvertMapping:
    def test_simple_inverse(self):
        assert invert_mapping({"a": "x", "b": "y"}) == {"x": "a", "y": "b"}

    def test_erasure_blocks(self):
        assert invert_mapping({"a": "x", "b": None}) is None

    def test_non_injective_blocks(self):
        assert invert_mapping({"a": "x", "b": "x"}) is None

    def test_direction_flip_blocks(self):
        assert invert_mapping({"a?": "b!"}) is None
