import json
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vkgpatterns.errors import DanglingReference, HeaderMismatch, SchemaDocError, SyntaxError
from vkgpatterns.fixtures import M_PERSON, NPD_QUADRANT, STOD_MUNICIPALITY, UOBM_GRADUATE
from vkgpatterns.ingest import (emit_ddl, emit_schema_doc, format_csv, load_csv_dir, parse_csv, parse_ddl,
                                parse_obda, parse_schema_doc)
from vkgpatterns.model import (CLASS, DATA, Attribute, ForeignKey, IRITemplate, LiteralTemplate,
                               RelationalSchema, Table)
from vkgpatterns.query import ColRef, Constant, ProjItem, Project, Relation, normalize_query, project
from vkgpatterns.emit import emit_obda


# -- DDL ------------------------------------------------------------------

def test_single_column_primary_key():
    s = parse_ddl("CREATE TABLE person_info (ssn TEXT PRIMARY KEY, name TEXT)")
    t = s.relation("person_info")
    assert t.primary_key == ("ssn",) and t.attribute_names == ("ssn", "name")
    assert not t.attribute("ssn").nullable and t.attribute("name").nullable


def test_composite_primary_key_keeps_order():
    s = parse_ddl("CREATE TABLE People (ID TEXT, deptID TEXT, univID TEXT, role TEXT, name TEXT,"
                  " PRIMARY KEY (ID, deptID, univID, role));")
    assert s.relation("People").primary_key == ("ID", "deptID", "univID", "role")


def test_empty_script_has_no_tables():
    assert parse_ddl("").tables == ()
    assert parse_ddl("  -- only a comment\n").tables == ()


def test_constraints_and_quoting():
    s = parse_ddl('''
        CREATE TABLE "course" (code TEXT NOT NULL, title TEXT, id INTEGER PRIMARY KEY, UNIQUE (code));
        CREATE TABLE teaches (prof TEXT, course TEXT REFERENCES course (code), PRIMARY KEY (prof, course));
    ''')
    assert s.relation("course").unique_keys == (("code",),)
    fk = s.relation("teaches").foreign_keys[0]
    assert (fk.source, fk.target_table, fk.target) == (("course",), "course", ("code",))


def test_reference_to_unknown_table():
    with pytest.raises(DanglingReference):
        parse_ddl("CREATE TABLE a (x TEXT PRIMARY KEY, y TEXT REFERENCES nowhere (z));")


def test_reference_arity_mismatch():
    with pytest.raises(DanglingReference):
        parse_ddl("CREATE TABLE b (k TEXT PRIMARY KEY);"
                  "CREATE TABLE a (x TEXT, y TEXT, FOREIGN KEY (x, y) REFERENCES b (k));")


def test_syntax_error_reports_line():
    with pytest.raises(SyntaxError) as e:
        parse_ddl("CREATE TABLE a (\n x TEXT,\n PRIMARY KEY (nope)\n);")
    assert "nope" in str(e.value)


_name = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s not in {"key", "table", "create", "primary", "unique", "foreign", "references", "not", "null",
                        "constraint", "check", "default", "on"})


@st.composite
def schemas(draw):
    tables = []
    names = draw(st.lists(_name, min_size=0, max_size=3, unique=True))
    for name in names:
        cols = draw(st.lists(_name, min_size=1, max_size=5, unique=True))
        pk = tuple(draw(st.lists(st.sampled_from(cols), max_size=2, unique=True)))
        attrs = tuple(Attribute(c, nullable=c not in pk and draw(st.booleans())) for c in cols)
        uk = []
        rest = [c for c in cols if c not in pk]
        if rest and draw(st.booleans()):
            uk.append((draw(st.sampled_from(rest)),))
        fks = []
        for prev in tables:
            if prev.primary_key and len(prev.primary_key) <= len(cols) and draw(st.booleans()):
                src = tuple(cols[:len(prev.primary_key)])
                fks.append(ForeignKey(name, src, prev.name, prev.primary_key))
        tables.append(Table(name, attrs, pk, tuple(uk), tuple(fks)))
    return RelationalSchema(tuple(tables), (), "schema")


@given(schemas())
def test_ddl_round_trip(s):
    assert parse_ddl(emit_ddl(s)) == s


@given(schemas())
def test_schema_doc_round_trip(s):
    assert parse_schema_doc(emit_schema_doc(s)) == s


# -- schema document ------------------------------------------------------

def _doc(**extra):
    t = {"name": "T_F", "attributes": ["K_F", "U_F", "A_F"], "primaryKey": ["K_F"], "uniqueKeys": [["U_F"]]}
    t.update(extra)
    return json.dumps({"tables": [t]})


def test_schema_doc_unique_key():
    assert parse_schema_doc(_doc()).relation("T_F").unique_keys == (("U_F",),)


def test_schema_doc_reference_arity_mismatch():
    bad = _doc(foreignKeys=[{"source": ["U_F", "A_F"], "targetTable": "T_F", "target": ["K_F"]}])
    with pytest.raises(DanglingReference):
        parse_schema_doc(bad)


def test_schema_doc_reports_path():
    with pytest.raises(SchemaDocError) as e:
        parse_schema_doc(json.dumps({"tables": [{"name": "t", "attributes": "x"}]}))
    assert "tables[0]" in str(e.value)


def test_schema_doc_equals_ddl():
    ddl = parse_ddl("CREATE TABLE T_F (K_F TEXT PRIMARY KEY, U_F TEXT, A_F TEXT, UNIQUE (U_F));")
    doc = json.dumps({"tables": [{"name": "T_F", "attributes": [
        {"name": "K_F", "nullable": False}, {"name": "U_F", "nullable": True}, {"name": "A_F", "nullable": True}],
        "primaryKey": ["K_F"], "uniqueKeys": [["U_F"]]}]})
    assert parse_schema_doc(doc).tables == ddl.tables


def test_constant_inclusion_dependency():
    s = parse_schema_doc(json.dumps({"tables": [
        {"name": "P", "attributes": ["id", "role"], "primaryKey": ["id", "role"]},
        {"name": "G", "attributes": ["id"], "primaryKey": ["id"],
         "inclusionDeps": [{"sourceProjection": ["id", {"const": "Grad"}], "targetTable": "P",
                            "target": ["id", "role"]}]}]}))
    ind = s.relation("G").inclusion_deps[0]
    assert ind.constants == [("role", Constant("Grad"))] and ind.attrs == ("id",)
    assert parse_schema_doc(emit_schema_doc(s)) == s


# -- CSV ------------------------------------------------------------------

_PERSON = parse_ddl("CREATE TABLE person_info (ssn TEXT PRIMARY KEY, name TEXT);"
                    "CREATE TABLE other (x TEXT);")


def test_csv_load_and_row_counts(tmp_path):
    (tmp_path / "person_info.csv").write_text("ssn,name\n1,Ann\n2,Bob\n", encoding="utf-8")
    d = load_csv_dir(str(tmp_path), _PERSON)
    assert d.row_counts["person_info"] == 2


def test_csv_header_permutation(tmp_path):
    (tmp_path / "person_info.csv").write_text("name,ssn\nAnn,1\n", encoding="utf-8")
    assert load_csv_dir(str(tmp_path), _PERSON).rows("person_info") == [("1", "Ann")]


def test_csv_header_mismatch(tmp_path):
    (tmp_path / "person_info.csv").write_text("ssn,nome\n1,Ann\n", encoding="utf-8")
    with pytest.raises(HeaderMismatch) as e:
        load_csv_dir(str(tmp_path), _PERSON)
    assert "name" in str(e.value) and "nome" in str(e.value)


def test_missing_file_is_a_warning(tmp_path, caplog):
    (tmp_path / "person_info.csv").write_text("ssn,name\n1,Ann\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        d = load_csv_dir(str(tmp_path), _PERSON)
    assert not d.has("other") and "other" in caplog.text


def test_empty_cell_is_null_but_quoted_empty_is_text():
    assert parse_csv('a,b,c\n,"",x\n') == [["a", "b", "c"], [None, "", "x"]]


_cell = st.one_of(st.none(), st.text(alphabet='ab ,"\né', max_size=5))


@given(st.lists(st.tuples(_cell, _cell), max_size=10))
def test_csv_values_survive_format_and_parse(rows):
    text = format_csv(("a", "b"), rows)
    parsed = parse_csv(text)
    assert parsed[0] == ["a", "b"]
    assert [tuple(r) for r in parsed[1:]] == rows


# -- OBDA -----------------------------------------------------------------

def test_mperson_block():
    doc = parse_obda(M_PERSON)
    a = doc.assertion("mPerson")
    assert a.source == normalize_query(project(Relation("person_info"), [ColRef("person_info", "ssn")]))
    (atom,) = a.targets
    assert atom.kind == CLASS and atom.predicate == ":Person"
    assert atom.subject == IRITemplate.parse(":person/{ssn}")
    assert doc.prefix_map[""] == "http://example.org/voc#"


def test_npd_quadrant_block():
    a = parse_obda(NPD_QUADRANT).assertions[0]
    assert a.targets[0].subject.text == "npd:quadrant/{wlbNamePart1}"
    assert a.targets[0].predicate == "npdv:Quadrant"


def test_uobm_constant_projection():
    a = parse_obda(UOBM_GRADUATE).assertion("Graduate Student")
    assert isinstance(a.source, Project)
    assert ProjItem(Constant("GraduateStudent"), "role") in a.source.items


def test_language_tags_become_literal_templates():
    a = parse_obda(STOD_MUNICIPALITY).assertions[0]
    labels = [t.object for t in a.targets if t.kind == DATA]
    assert labels == [LiteralTemplate.parse("{name_i}", "it"), LiteralTemplate.parse("{name_d}", "de")]


def test_unsupported_sql_is_kept_as_opaque():
    text = M_PERSON.replace('SELECT "ssn" FROM "person_info"',
                            'SELECT ssn FROM person_info GROUP BY ssn')
    a = parse_obda(text).assertions[0]
    assert a.opaque and a.source is None and "GROUP" in a.raw_sql


def test_undeclared_prefix_is_an_error():
    with pytest.raises(SyntaxError):
        parse_obda(M_PERSON.replace(":Person", "foaf:Person"))


def test_duplicate_mapping_id():
    body = M_PERSON.split("[MappingDeclaration] @collection [[\n")[1].split("]]")[0]
    text = M_PERSON.replace("]]", body + "\n]]")
    with pytest.raises(SyntaxError):
        parse_obda(text)


@pytest.mark.parametrize("text", [M_PERSON, NPD_QUADRANT, UOBM_GRADUATE, STOD_MUNICIPALITY])
def test_obda_round_trip(text):
    doc = parse_obda(text)
    again = parse_obda(emit_obda(doc.assertions, doc.prefix_map))
    assert again.prefixes == doc.prefixes
    assert [(a.id, a.source, a.targets) for a in again.assertions] == \
           [(a.id, a.source, a.targets) for a in doc.assertions]
