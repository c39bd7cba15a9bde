"""Bootstrap a VKG from a denormalized enrolment table.

The students table repeats each course's kind on every row. Profiling finds
the hidden course entity, the engine extracts it as a view, and the second
detection round maps it as an entity of its own.

    python demos/bootstrap_university.py
"""
from vkgpatterns.emit import emit_obda, emit_ontology
from vkgpatterns.fixtures import catalog_fixtures
from vkgpatterns.generator import emit_conceptual_summary, generate_all
from vkgpatterns.patterns import detect_all

PREFIXES = {"": "http://example.org/voc#"}


def main():
    f = catalog_fixtures()["DR1Nm"]
    print("-- schema\n" + f.schema_text.strip())
    r = detect_all(f.schema(), f.data(), f.hints())
    print(f"\n-- detection ({r.rounds} rounds)")
    print(r.log_text())
    gen = generate_all(r.instances, r.derived_schema, r.hints)
    print("-- conceptual summary")
    print(emit_conceptual_summary(r.instances, r.derived_schema))
    print("-- mappings")
    print(emit_obda(gen.assertions, PREFIXES))
    print("-- ontology")
    print(emit_ontology(gen.axioms, PREFIXES, gen.assertions))


if __name__ == "__main__":
    main()
