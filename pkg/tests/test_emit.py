import rdflib
from rdflib.namespace import OWL, RDF, RDFS

from vkgpatterns.emit import emit_obda, emit_ontology, emit_r2rml
from vkgpatterns.fixtures import all_fixtures, scenario_fixtures
from vkgpatterns.generator import generate_all
from vkgpatterns.ingest import parse_obda
from vkgpatterns.model import axiom
from vkgpatterns.patterns import detect_all

PREFIXES = {"": "http://example.org/voc#"}
V = rdflib.Namespace(PREFIXES[""])
RR = rdflib.Namespace("http://www.w3.org/ns/r2rml#")


def _person():
    f = scenario_fixtures()["mPerson"]
    r = detect_all(f.schema(), None, f.hints())
    return generate_all(r.instances, r.derived_schema, r.hints)


def test_entity_block_quotes_identifiers():
    text = emit_obda(_person().assertions, PREFIXES)
    assert 'source\t\tSELECT "ssn", "name" FROM "person_info"' in text.splitlines()
    assert "target\t\t:person/{ssn} a :Person ; :ssn {ssn} ; :name {name} ." in text.splitlines()


def test_empty_mapping_document_has_prefixes_only():
    doc = parse_obda(emit_obda([], PREFIXES))
    assert doc.assertions == () and doc.prefix_map == PREFIXES


def test_r2rml_subject_template_and_class():
    g = rdflib.Graph().parse(data=emit_r2rml(_person().assertions, PREFIXES), format="turtle")
    (tm,) = g.subjects(RDF.type, RR.TriplesMap)
    sm = g.value(tm, RR.subjectMap)
    assert str(g.value(sm, RR.template)) == "http://example.org/voc#person/{ssn}"
    assert g.value(sm, RR["class"]) == V.Person


def test_r2rml_language_tags():
    doc = parse_obda(scenario_fixtures()["stod"].mappings)
    g = rdflib.Graph().parse(data=emit_r2rml(doc.assertions, doc.prefix_map), format="turtle")
    langs = sorted(str(o) for o in g.objects(None, RR.language))
    assert langs == ["de", "it"]


def test_r2rml_object_properties_use_templates():
    f = all_fixtures()["catalog_SR"]
    r = detect_all(f.schema())
    gen = generate_all(r.instances, r.derived_schema)
    g = rdflib.Graph().parse(data=emit_r2rml(gen.assertions, PREFIXES), format="turtle")
    for pom in g.objects(None, RR.predicateObjectMap):
        if g.value(pom, RR.predicate) == V.attends:
            om = g.value(pom, RR.objectMap)
            assert g.value(om, RR.template) is not None and g.value(om, RR.column) is None


def test_subclass_axiom_line():
    text = emit_ontology({axiom("subClass", "Student", "Person")}, PREFIXES)
    assert ":Student rdfs:subClassOf :Person ." in text.splitlines()


def test_domain_and_range_triples():
    g = rdflib.Graph().parse(data=emit_ontology({axiom("domain", "p", "E"), axiom("range", "p", "F")}, PREFIXES),
                             format="turtle")
    assert (V.p, RDFS.domain, V.E) in g and (V.p, RDFS.range, V.F) in g
    assert (V.p, RDF.type, OWL.ObjectProperty) in g


def test_empty_ontology_is_prefixes_only():
    lines = emit_ontology(set(), PREFIXES).splitlines()
    assert lines and all(line.startswith("@prefix") for line in lines)


def test_builtin_annotation_properties_are_not_redeclared():
    doc = parse_obda(scenario_fixtures()["stod"].mappings)
    text = emit_ontology(set(), doc.prefix_map, doc.assertions)
    assert "rdfs:label a" not in text and ":Municipality a owl:Class ." in text


def test_outputs_parse_and_are_byte_stable():
    for f in all_fixtures().values():
        r = detect_all(f.schema(), f.data(), f.hints())
        gen = generate_all(r.instances, r.derived_schema, r.hints)
        r2rml = emit_r2rml(gen.assertions, PREFIXES)
        onto = emit_ontology(gen.axioms, PREFIXES, gen.assertions)
        rdflib.Graph().parse(data=r2rml, format="turtle")
        rdflib.Graph().parse(data=onto, format="turtle")
        again = generate_all(r.instances, r.derived_schema, r.hints)
        assert emit_r2rml(again.assertions, PREFIXES) == r2rml
        assert emit_ontology(again.axioms, PREFIXES, again.assertions) == onto
        assert emit_obda(again.assertions, PREFIXES) == emit_obda(gen.assertions, PREFIXES)
