import pytest

from graftool.errors import ModelError
from graftool.model import (
    INT,
    STRING,
    AttrKind,
    TypeGraph,
    parse_model,
    print_model,
)


def test_single_declaration():
    tg = parse_model("node class A { x:int; }")
    td = tg.node_types["A"]
    assert td.supertypes == ("Node",)
    assert td.attributes == (("x", INT),)


def test_inheritance_closure():
    tg = parse_model("node class A { x:int; } node class B extends A {}")
    assert tg.all_attributes("B") == [("x", INT)]
    assert tg.is_subtype("B", "A")
    assert tg.is_subtype("B", "Node")


def test_self_cycle_rejected():
    with pytest.raises(ModelError, match="cycle"):
        parse_model("node class C extends C {}")


def test_longer_cycle_rejected():
    with pytest.raises(ModelError, match="cycle"):
        parse_model("node class A extends B {} node class B extends A {}")


def test_forward_reference_allowed():
    tg = parse_model("node class B extends A {} node class A { x:int; }")
    assert tg.is_subtype("B", "A")


def test_unknown_supertype():
    with pytest.raises(ModelError, match="unknown supertype"):
        parse_model("node class A extends Zzz {}")


def test_subtype_reflexive_and_no_reverse():
    tg = parse_model("node class A {} node class B extends A {}")
    assert tg.is_subtype("A", "A")
    assert tg.is_subtype("B", "A")
    assert not tg.is_subtype("A", "B")


def test_root_has_no_attributes():
    tg = parse_model("")
    assert tg.all_attributes("Node") == []


def test_linear_chain_order():
    tg = parse_model("node class A { x:int; } node class B extends A { y:string; }")
    assert tg.all_attributes("B") == [("x", INT), ("y", STRING)]


def test_diamond_lists_shared_attribute_once():
    # Oracle: enumerate inheritance paths of the diamond by hand. D sees A
    # via both B and C; the attribute set is {x, b, c, d} with x first.
    tg = parse_model(
        """
        node class A { x:int; }
        node class B extends A { b:int; }
        node class C extends A { c:int; }
        node class D extends B, C { d:int; }
        """
    )
    attrs = tg.all_attributes("D")
    assert [a for a, _ in attrs] == ["x", "b", "c", "d"]


def test_duplicate_attribute_on_path_rejected():
    with pytest.raises(ModelError, match="declared by both"):
        parse_model(
            """
            node class A { x:int; }
            node class B { x:int; }
            node class D extends A, B {}
            """
        )


def test_duplicate_type_name_rejected():
    with pytest.raises(ModelError, match="duplicate"):
        parse_model("node class A {} edge class A;")


def test_enum_declaration_and_values():
    tg = parse_model("enum Color { red, green = 5, blue }")
    assert tg.enums["Color"].items == (("red", 0), ("green", 5), ("blue", 6))


def test_enum_duplicate_item_rejected():
    with pytest.raises(ModelError):
        parse_model("enum Color { red, red }")


def test_container_kinds():
    tg = parse_model("node class A { s:set<int>; m:map<string,int>; a:array<boolean>; }")
    kinds = dict(tg.node_types["A"].attributes)
    assert str(kinds["s"]) == "set<int>"
    assert str(kinds["m"]) == "map<string,int>"
    assert str(kinds["a"]) == "array<boolean>"


def test_nested_container_rejected():
    with pytest.raises(ModelError):
        parse_model("node class A { s:set<set<int>>; }")


def test_syntax_error_carries_location():
    with pytest.raises(ModelError) as exc:
        parse_model("node class A {\n  x:int\n}")
    assert exc.value.line == 3


def test_edge_connect_clause():
    tg = parse_model(
        "node class A {} node class B {}\n"
        "edge class E connect A -> B containment { _index:int; }"
    )
    td = tg.edge_types["E"]
    assert td.source_type == "A"
    assert td.target_type == "B"
    assert td.containment


def test_print_parse_fixpoint():
    src = """
    enum Color { red, green = 5 }
    node class A { x:int; c:Color; }
    node class B extends A { s:set<string>; }
    edge class E connect A -> B containment { _index:int; }
    edge class F;
    """
    first = parse_model(src)
    second = parse_model(print_model(first))
    assert first == second
    assert print_model(first) == print_model(second)


def test_kind_mismatch_in_is_subtype():
    tg = parse_model("node class A {} edge class E;")
    with pytest.raises(ModelError, match="across kinds"):
        tg.is_subtype("A", "E")


def test_unknown_type_queries():
    tg = parse_model("")
    with pytest.raises(ModelError, match="unknown type"):
        tg.all_attributes("Nope")
    with pytest.raises(ModelError, match="unknown type"):
        tg.is_subtype("Nope", "Node")


def test_typegraph_rejects_unknown_enum_kind():
    with pytest.raises(ModelError, match="unknown enum"):
        parse_model("node class A { c:Color; }")


def test_attrkind_container_invariant_direct():
    with pytest.raises(ModelError):
        AttrKind("set", elem=AttrKind("set", elem=INT))


def test_every_type_derives_its_root():
    tg = parse_model(
        """
        node class A {} node class B extends A {} node class C extends B, A {}
        edge class E; edge class F extends E;
        enum X { a }
        """
    )
    for name in tg.node_types:
        assert tg.is_subtype(name, "Node")
    for name in tg.edge_types:
        assert tg.is_subtype(name, "Edge")
