"""Well-formedness restrictions over a component algebra, one violation
fixture per rule."""

from hashc.algebra.model import (
    Channel,
    ComponentAlgebra,
    GroupInfo,
    PortInfo,
    UnitInfo,
)
from hashc.algebra.restrictions import check_restrictions


def rules(alg, severity="error"):
    return sorted(d.rule for d in check_restrictions(alg) if d.severity == severity)


def one_unit(name="u", assigned=None, repetitive=False):
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo(name, assigned=assigned, repetitive=repetitive))
    return alg


def add_port(alg, unit, name, direction, nesting=0, group=None, kind=None):
    alg.add_port(PortInfo(unit, name, direction))
    gname = group or name
    gid = (unit, gname, direction)
    if gid in alg.groups:
        g = alg.groups[gid]
        g.members = g.members + (name,)
    else:
        alg.add_group(GroupInfo(unit, gname, direction, (name,), kind=kind, nesting=nesting))


def clean_pair():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b"))
    add_port(alg, "a", "o", "out")
    add_port(alg, "b", "i", "in")
    alg.channels.append(Channel(("a", "o", "out"), ("b", "i", "in")))
    return alg


def test_clean_network_has_no_findings():
    assert check_restrictions(clean_pair()) == []


def test_r1_main_component_must_stay_unassigned():
    alg = one_unit(assigned="App")
    assert "R1" in rules(alg)


def test_r2_cyclic_hierarchy():
    alg = ComponentAlgebra(name="App")
    for n in ("a", "b"):
        alg.add_unit(UnitInfo(n, cluster=True))
    alg.comprising["a"] = ("b",)
    alg.comprising["b"] = ("a",)
    assert rules(alg).count("R2") == 2


def test_r3_cluster_of_repetitive_units_must_be_repetitive():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True, repetitive=False))
    alg.add_unit(UnitInfo("cl.a", repetitive=True))
    alg.comprising["cl"] = ("cl.a",)
    assert "R3" in rules(alg)


def test_r3_converse_is_only_a_warning():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True, repetitive=True))
    alg.add_unit(UnitInfo("cl.a", repetitive=False))
    alg.comprising["cl"] = ("cl.a",)
    assert "R3" not in rules(alg)
    assert "R3" in rules(alg, severity="warning")


def test_r4_port_in_two_groups():
    alg = one_unit()
    alg.add_port(PortInfo("u", "p", "out"))
    alg.add_group(GroupInfo("u", "g1", "out", ("p",)))
    alg.add_group(GroupInfo("u", "g2", "out", ("p",)))
    assert "R4" in rules(alg)


def test_r5_port_in_no_group():
    alg = one_unit()
    alg.add_port(PortInfo("u", "p", "out"))
    assert "R5" in rules(alg)


def test_r6_empty_group():
    alg = one_unit()
    alg.add_group(GroupInfo("u", "g", "out", ()))
    assert "R6" in rules(alg)


def test_r7_output_feeding_two_inputs():
    alg = clean_pair()
    add_port(alg, "b", "i2", "in")
    alg.channels.append(Channel(("a", "o", "out"), ("b", "i2", "in")))
    assert "R7" in rules(alg)


def test_r7_input_fed_twice():
    alg = clean_pair()
    add_port(alg, "a", "o2", "out")
    alg.channels.append(Channel(("a", "o2", "out"), ("b", "i", "in")))
    assert "R7" in rules(alg)


def test_r7_conflicting_modes_on_same_pair():
    alg = clean_pair()
    alg.channels.append(Channel(("a", "o", "out"), ("b", "i", "in"), mode="buffered"))
    assert "R7" in rules(alg)


def test_r8_missing_endpoint():
    alg = clean_pair()
    alg.channels.append(Channel(("a", "ghost", "out"), ("b", "i", "in")))
    assert "R8" in rules(alg)


def test_r8_direction_must_run_out_to_in():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b"))
    add_port(alg, "a", "o", "out")
    add_port(alg, "b", "i", "in")
    alg.channels.append(Channel(("b", "i", "in"), ("a", "o", "out")))
    assert "R8" in rules(alg)


def test_r9_nesting_must_match():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b"))
    add_port(alg, "a", "o", "out", nesting=2)
    add_port(alg, "b", "i", "in", nesting=0)
    alg.channels.append(Channel(("a", "o", "out"), ("b", "i", "in")))
    assert "R9" in rules(alg)


def test_r9_repetitive_unit_bridges_one_level():
    # the shallow end consumes one stream element per repetition
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b", repetitive=True))
    add_port(alg, "a", "o", "out", nesting=1)
    add_port(alg, "b", "i", "in", nesting=0)
    alg.channels.append(Channel(("a", "o", "out"), ("b", "i", "in")))
    assert "R9" not in rules(alg)


def test_r10_cluster_port_needs_inner_resolution():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True))
    alg.add_unit(UnitInfo("cl.a"))
    alg.comprising["cl"] = ("cl.a",)
    add_port(alg, "cl", "i", "in")
    assert "R10" in rules(alg)


def test_r10_resolution_must_stay_inside():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True))
    alg.add_unit(UnitInfo("cl.a"))
    alg.add_unit(UnitInfo("stranger"))
    alg.comprising["cl"] = ("cl.a",)
    add_port(alg, "cl", "i", "in")
    add_port(alg, "stranger", "i", "in")
    alg.psi[("cl", "i", "in")] = ("stranger", "i", "in")
    assert "R10" in rules(alg)


def test_r10_direction_preserved():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("cl", cluster=True))
    alg.add_unit(UnitInfo("cl.a"))
    alg.comprising["cl"] = ("cl.a",)
    add_port(alg, "cl", "i", "in")
    add_port(alg, "cl.a", "x", "out")
    alg.psi[("cl", "i", "in")] = ("cl.a", "x", "out")
    assert "R10" in rules(alg)


def test_r11_stored_interface_must_match_derived():
    alg = one_unit()
    add_port(alg, "u", "p", "out")
    alg.iota_override = {"u": (("p!", "q?"), None)}
    assert "R11" in rules(alg)


def test_r11_matching_override_is_fine():
    alg = one_unit()
    add_port(alg, "u", "p", "out")
    alg.iota_override = {"u": (("p!",), None)}
    assert "R11" not in rules(alg)


def test_r12_duplicate_group_pair():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b"))
    add_port(alg, "a", "o1", "out", group="o")
    add_port(alg, "a", "o2", "out", group="o")
    add_port(alg, "b", "i1", "in", group="i")
    add_port(alg, "b", "i2", "in", group="i")
    alg.channels.append(Channel(("a", "o1", "out"), ("b", "i1", "in")))
    alg.channels.append(Channel(("a", "o2", "out"), ("b", "i2", "in")))
    assert "R12" in rules(alg)


def test_r12_distinct_group_pairs_are_fine():
    alg = ComponentAlgebra(name="App")
    alg.add_unit(UnitInfo("a"))
    alg.add_unit(UnitInfo("b"))
    add_port(alg, "a", "o1", "out")
    add_port(alg, "a", "o2", "out")
    add_port(alg, "b", "i1", "in")
    add_port(alg, "b", "i2", "in")
    alg.channels.append(Channel(("a", "o1", "out"), ("b", "i1", "in")))
    alg.channels.append(Channel(("a", "o2", "out"), ("b", "i2", "in")))
    assert "R12" not in rules(alg)
