import pytest
from hypothesis import given
from hypothesis import strategies as st

from vkgpatterns.errors import IncompleteBindings, ModelError, NullInIdentifier
from vkgpatterns.model import (CATALOG, ForeignKey, IRITemplate, LiteralTemplate, PatternInstance, Table,
                               Attribute, axiom, axiom_set_equal, canonical_kind, data_counterpart,
                               normalize_identifier, render_template, schema_counterpart)


def test_render_person_template():
    assert render_template(IRITemplate.parse(":person/{ssn}"), {"ssn": "123"}) == ":person/123"


def test_render_template_with_literal_text_around_placeholder():
    t = IRITemplate.parse(":mun/mun={istat_code}")
    assert render_template(t, {"istat_code": "021008"}) == ":mun/mun=021008"


def test_escaping_keeps_templates_injective():
    t = IRITemplate.parse(":t/{a}/{b}")
    assert render_template(t, {"a": "x/y", "b": "z"}) != render_template(t, {"a": "x", "b": "y/z"})


def test_null_placeholder_value_is_rejected():
    with pytest.raises(NullInIdentifier):
        render_template(IRITemplate.parse(":person/{ssn}"), {"ssn": None})


def test_literal_template_carries_language_tag():
    t = LiteralTemplate.parse("{name_i}", "it")
    assert render_template(t, {"name_i": "Bolzano"}) == "Bolzano@it"


def test_absolute_iri_template_parses():
    t = IRITemplate.parse("<http://www.Dept{deptID}.Univ{univID}.edu/{ID}>")
    assert t.base == "" and t.placeholders == ("deptID", "univID", "ID")


def test_template_needs_a_placeholder():
    with pytest.raises(ModelError):
        IRITemplate.parse(":person/fixed")


_text = st.text(alphabet="ab/#?{}% x", min_size=0, max_size=6)


@given(st.lists(st.tuples(_text, _text), min_size=1, max_size=30, unique=True))
def test_render_is_injective_on_keys(rows):
    t = IRITemplate.parse(":t/{a}/{b}")
    iris = {render_template(t, {"a": a, "b": b}) for a, b in rows}
    assert len(iris) == len(rows)


def test_axiom_sets_ignore_duplicates():
    assert axiom_set_equal([axiom("subClass", "F", "E")], [axiom("subClass", "F", "E")] * 2)


def test_axiom_kinds_are_distinct():
    assert not axiom_set_equal([axiom("domain", "p", "C")], [axiom("range", "p", "C")])


def test_axiom_rejects_unknown_kind_and_empty_operand():
    with pytest.raises(ModelError):
        axiom("disjoint", "A", "B")
    with pytest.raises(ModelError):
        axiom("subClass", "A", "")


def test_quoted_identifiers_normalize():
    assert normalize_identifier('"ssn"') == "ssn"
    assert normalize_identifier("`ssn`") == "ssn"
    assert normalize_identifier("[ssn]") == "ssn"
    assert normalize_identifier('"a""b"') == 'a"b'


def test_catalog_and_alias():
    assert len(CATALOG) == 23 and len(set(CATALOG)) == 23
    assert canonical_kind("DH0N") == "DH01"
    with pytest.raises(ModelError):
        canonical_kind("XYZ")
    assert schema_counterpart("DRm") == "SRm" and data_counterpart("SHaa") == "DHaa"


def test_instance_requires_every_role():
    with pytest.raises(IncompleteBindings):
        PatternInstance("SE", "person_info", {"K": ("ssn",)}, "declared")


def test_instance_rejects_foreign_roles():
    with pytest.raises(ModelError):
        PatternInstance("SE", "t", {"K": ("a",), "A": (), "B": ("c",)}, "declared")


def test_provenance_follows_kind_prefix():
    with pytest.raises(ModelError):
        PatternInstance("SE", "t", {"K": ("a",), "A": ()}, "discovered")
    with pytest.raises(ModelError):
        PatternInstance("DE", "t", {"K": ("a",), "A": ()}, "declared")
    assert PatternInstance("DE", "t", {"K": ("a",), "A": ()}, "discovered").kind == "DE"


def test_reified_instances_need_two_roles():
    ok = PatternInstance("SRR", "exam", {"K_R": ("s", "c"), "A_R": ("grade",), "K_RE": ("s",),
                                         "K_RF": ("c",)}, "declared")
    assert ok.b["A_R"] == ("grade",)
    with pytest.raises(IncompleteBindings):
        PatternInstance("SRR", "exam", {"K_R": ("s",), "A_R": (), "K_RE": ("s",)}, "declared")


def test_instances_are_hashable_and_params_frozen():
    i = PatternInstance("CE2C", "person", {"K": ("ssn",), "B": ("gender",)}, "discovered",
                        params={"values": [["F"], ["M"]]})
    assert i.p["values"] == (("F",), ("M",))
    assert hash(i) == hash(PatternInstance("CE2C", "person", {"K": ("ssn",), "B": ("gender",)},
                                           "discovered", params={"values": [["F"], ["M"]]}))
    assert i.label == "CE2C(person; B=gender; K=ssn)"


def test_table_invariants():
    attrs = (Attribute("a"), Attribute("b"))
    with pytest.raises(ModelError):
        Table("t", attrs, ("c",))
    with pytest.raises(ModelError):
        Table("t", attrs, ("a",), unique_keys=(("a",),))
    with pytest.raises(ModelError):
        ForeignKey("t", ("a", "b"), "u", ("x",))
