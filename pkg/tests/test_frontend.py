import pytest

from hashc.behavior import BAct, BPar, BRepeat, BSeq, CCounter, CUntil
from hashc.errors import (
    CyclicUse,
    EmptyRange,
    LexError,
    NonIntegerIndexExpression,
    ParseError,
    UnboundIndex,
    UnresolvedComponent,
)
from hashc.frontend import (
    Loader,
    SourceBundle,
    expand_macros,
    lex,
    parse,
    parse_file,
    pretty_config,
    pretty_decl,
    resolve_uses,
    unfold_indexed,
)
from hashc.frontend.ast_nodes import (
    AssignDecl,
    BindDecl,
    ConnectDecl,
    EInt,
    InterfaceDecl,
    ReplaceDecl,
    ScopeDecl,
    UnifyDecl,
    UnitDecl,
    UseDecl,
)
from hashc.frontend.tokens import TokenKind


WORKPOOL = """
component Workpool<n> # (jobs*) -> (results*) with
  interface IManager (in*) -> (out*)
    behavior: par {repeat out! until out; repeat in? until in}
  interface IWorker (in*) -> (out*)
    behavior: repeat seq {in?; out!} until in
  unit manager # IManager wire out any*n : distribute, in any*n : concat
  iterator i range [1, n]
  unit *worker[i] # IWorker
  [/ connect manager -> out[i-1] to worker[i] <- in;
     connect worker[i] -> out to manager <- in[i-1] /]
  bind manager <- in to <- jobs
  bind manager -> out to -> results
"""


class TestLexer:
    def test_token_kinds(self):
        lr = lex("unit *w # IWorker -- trailing\nconnect a -> b to c <- d")
        kinds = [t.kind for t in lr.tokens]
        assert kinds[-1] is TokenKind.EOF
        texts = [t.text for t in lr.tokens[:-1]]
        assert texts == [
            "unit", "*", "w", "#", "IWorker",
            "connect", "a", "->", "b", "to", "c", "<-", "d",
        ]

    def test_nested_block_comment(self):
        lr = lex("a {- outer {- inner -} still -} b")
        assert [t.text for t in lr.tokens[:-1]] == ["a", "b"]

    def test_pragma_capture(self):
        lr = lex("-- @collective BCast\nunit u")
        assert lr.pragmas and lr.pragmas[0].text == "@collective BCast"

    def test_hostcode_span(self):
        lr = lex("assign F<{# foo(x, y) #}> to u")
        host = [t for t in lr.tokens if t.kind is TokenKind.HOSTCODE]
        assert len(host) == 1 and host[0].text == "foo(x, y)"

    def test_unterminated_comment(self):
        with pytest.raises(LexError):
            lex("a {- no end")

    def test_unicode_arrows(self):
        lr = lex("(a) → (b)")
        assert any(t.is_sym("->") for t in lr.tokens)


class TestParser:
    def test_workpool_shape(self):
        cfg = parse(WORKPOOL)
        assert cfg.name == "Workpool" and cfg.params == ("n",)
        assert cfg.io is not None
        assert [p.name for p in cfg.io.inputs] == ["jobs"]
        assert cfg.io.inputs[0].nesting == 1
        kinds = [type(d).__name__ for d in cfg.decls]
        assert kinds.count("InterfaceDecl") == 2
        assert kinds.count("UnitDecl") == 2
        assert kinds.count("BindDecl") == 2
        assert "ScopeDecl" in kinds

    def test_behavior_tree(self):
        cfg = parse(WORKPOOL)
        iface = next(d for d in cfg.decls if isinstance(d, InterfaceDecl) and d.name == "IManager")
        expr = iface.behavior.expr
        assert isinstance(expr, BPar) and len(expr.items) == 2
        first = expr.items[0]
        assert isinstance(first, BRepeat)
        assert isinstance(first.body, BAct) and first.body.letter == "out!"
        assert isinstance(first.cond, CUntil) and first.cond.groups == (("out",),)

    def test_connect_modes(self):
        cfg = parse(
            "component C with\n"
            "  connect a -> x to b <- y\n"
            "  connect a -> x to b <- y, buffered 4\n"
            "  connect a -> x to b <- y, ready\n"
        )
        modes = [(d.mode, d.capacity) for d in cfg.decls if isinstance(d, ConnectDecl)]
        assert modes[0] == ("synchronous", None)
        assert modes[1][0] == "buffered" and modes[1][1] == EInt(4)
        assert modes[2] == ("ready", None)

    def test_unify_factorize_replace(self):
        cfg = parse(
            "component C with\n"
            "  unify a # sx, b # (p) -> (q) to c # IThing\n"
            "  factorize wp.manager # (in) -> (out) to dispatcher # () -> (out),"
            " collector # (in) -> ()\n"
            "  replace dispatcher by prob_def # () -> (_, particles, _)\n"
        )
        uni = next(d for d in cfg.decls if isinstance(d, UnifyDecl))
        assert uni.operands[0].mass_rename == "sx"
        assert uni.operands[1].naming is not None
        rep = next(d for d in cfg.decls if isinstance(d, ReplaceDecl))
        assert rep.new_pattern is not None and len(rep.new_pattern.outs) == 3

    def test_use_fanout(self):
        cfg = parse("component C with\n  use Skeletons.{Workpool, Farm}\n  use Skeletons.Collective.BCast\n")
        uses = [d.path for d in cfg.decls if isinstance(d, UseDecl)]
        assert ("Skeletons", "Workpool") in uses
        assert ("Skeletons", "Farm") in uses
        assert ("Skeletons", "Collective", "BCast") in uses

    def test_multi_component_file(self):
        configs = parse_file("component A with\n  unit u\ncomponent B with\n  unit v\n")
        assert [c.name for c in configs] == ["A", "B"]

    def test_counter_and_sem(self):
        cfg = parse(
            "component C with\n"
            "  interface I (a) -> (b) behavior: sem s; seq {repeat a? counter 4; signal s}\n"
        )
        iface = cfg.decls[0]
        assert iface.behavior.sems == ("s",)

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("component C with\n  connect a -> to b <- y\n")
        assert err.value.line == 2

    def test_two_segment_limit(self):
        with pytest.raises(ParseError):
            parse("component C with\n  connect a.b.c -> x to d <- y\n")


class TestPretty:
    ROUND_TRIPS = [
        WORKPOOL,
        "component C with\n  unit u # (a, b*) -> () behavior: alt {a?; b?}\n",
        "component C with\n  replicate pp into 3 adjust wire out any*4 : distribute\n",
        "component C with\n  assign Farm<n, {# f(x) #}> (a) -> (b) to fm\n",
        "component C with\n  interface I (a) -> (b) where: s@IStage # IGather (x) -> (y)\n",
        "component C with\n  unit m wire xy all{left, right} : broadcast\n",
        "component C with\n  interface I (a*) -> () behavior: repeat a? until <a & b> | c\n",
        "component C # (i) -> (o) with\n  bind u <- p to <- i\n  bind u -> q to -> o\n",
    ]

    @pytest.mark.parametrize("src", ROUND_TRIPS)
    def test_round_trip(self, src):
        cfg = parse(src)
        text = pretty_config(cfg)
        again = parse(text)
        assert pretty_config(again) == text

    def test_replace_rendering(self):
        cfg = parse("component C with\n  replace wp.worker[1] by pp[1]\n")
        assert pretty_decl(cfg.decls[0]) == "replace wp.worker[1] by pp[1]"


class TestPreprocess:
    def test_macro_expansion(self):
        out = expand_macros("#define N 4\n#define M N+1\nunit u wire x any*M : w\n")
        assert "any*4+1" in out

    def test_macro_word_boundary(self):
        out = expand_macros("#define N 4\nunit None wire x any*N : w\n")
        assert "None" in out and "any*4" in out

    def test_unfold_workpool(self):
        cfg = unfold_indexed(parse(WORKPOOL), {"n": 3})
        units = [d for d in cfg.decls if isinstance(d, UnitDecl)]
        assert [pretty_decl(u).split()[1] for u in units] == [
            "manager", "*worker[1]", "*worker[2]", "*worker[3]"
        ]
        connects = [d for d in cfg.decls if isinstance(d, ConnectDecl)]
        assert len(connects) == 6

    def test_unfold_verbatim_replaces(self):
        src = (
            "component T<n> with\n"
            "  iterator i range [1, n]\n"
            "  [/ replace wp.worker[i] by pp[i] /]\n"
        )
        cfg = unfold_indexed(parse(src), {"n": 3})
        text = "; ".join(pretty_decl(d) for d in cfg.decls)
        assert text == (
            "replace wp.worker[1] by pp[1]; "
            "replace wp.worker[2] by pp[2]; "
            "replace wp.worker[3] by pp[3]"
        )

    def test_unbound_parameter(self):
        with pytest.raises(UnboundIndex):
            unfold_indexed(parse(WORKPOOL), {})

    def test_empty_range(self):
        src = "component T<n> with\n  iterator i range [1, n]\n  [/ unit u[i] /]\n"
        with pytest.raises(EmptyRange):
            unfold_indexed(parse(src), {"n": 0})

    def test_non_integer_index(self):
        src = "component T<op> with\n  unit u[op]\n"
        with pytest.raises(NonIntegerIndexExpression):
            unfold_indexed(parse(src), {"op": "MPI_SUM"})

    def test_arithmetic_folding(self):
        src = (
            "component T<p> with\n"
            "  iterator d range [0, ilog2(p) - 1]\n"
            "  [/ connect u[d] -> x to u[(d + 1) % (p / 2)] <- y /]\n"
        )
        cfg = unfold_indexed(parse(src), {"p": 8})
        connects = [d for d in cfg.decls if isinstance(d, ConnectDecl)]
        assert len(connects) == 3  # ilog2(8) = 3
        assert connects[2].dst_unit.segments[0].indices[0] == EInt(3 % 4)

    def test_counter_folds_to_literal(self):
        src = "component T<k> with\n  unit u # (a) -> () behavior: repeat a? counter k*2\n"
        cfg = unfold_indexed(parse(src), {"k": 3})
        beh = cfg.decls[0].iface.behavior.expr
        assert beh.cond == CCounter(6)

    def test_hostcode_substitution(self):
        src = "component T<n> with\n  assign F<{# make(n) #}> to u\n"
        cfg = unfold_indexed(parse(src), {"n": 5})
        assert cfg.decls[0].actuals == ("make(5)",)


class TestLoader:
    def test_bundle_resolution(self):
        program = resolve_uses(
            {
                "Main.hcl": "component Main with\n  use Lib.Thing\n  unit u\n",
                "Lib/Thing.hcl": "component Thing with\n  unit v\n",
            },
            "Main.hcl",
            include_library=False,
        )
        assert program.entry == "Main"
        assert set(program.components) == {"Main", "Thing"}
        assert program.order.index("Thing") < program.order.index("Main")

    def test_shared_file_resolution(self):
        program = resolve_uses(
            {
                "Main.hcl": "component Main with\n  use Lib.Multi.Second\n",
                "Lib/Multi.hcl": "component First with\n  unit a\ncomponent Second with\n  unit b\n",
            },
            "Main.hcl",
            include_library=False,
        )
        assert "Second" in program.components and "First" in program.components

    def test_missing_component(self):
        with pytest.raises(UnresolvedComponent):
            resolve_uses(
                {"Main.hcl": "component Main with\n  use Lib.Nope\n"},
                "Main.hcl",
                include_library=False,
            )

    def test_cycle_detection(self):
        with pytest.raises(CyclicUse):
            resolve_uses(
                {
                    "A.hcl": "component A with\n  use B\n",
                    "B.hcl": "component B with\n  use A\n",
                },
                "A.hcl",
                include_library=False,
            )

    def test_entry_defaults_to_last(self):
        program = resolve_uses(
            {"Main.hcl": "component Helper with\n  unit h\ncomponent App with\n  unit a\n"},
            "Main.hcl",
            include_library=False,
        )
        assert program.entry == "App"
