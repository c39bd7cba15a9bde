"""Serializers: OBDA mapping files, R2RML Turtle and ontology Turtle.

All output is deterministic: prefixes are sorted, assertions keep their given
order, ontology declarations and axioms are sorted.
"""

from __future__ import annotations

from .errors import ModelError
from .ingest.obda import format_target
from .model import CLASS, DATA, OBJECT, IRITemplate, LiteralTemplate, Placeholder
from .sql import emit_sql

RR = "http://www.w3.org/ns/r2rml#"
STANDARD = (("owl", "http://www.w3.org/2002/07/owl#"),
            ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
            ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
            ("xsd", "http://www.w3.org/2001/XMLSchema#"))


def _prefix_items(prefixes) -> list:
    items = prefixes.items() if hasattr(prefixes, "items") else prefixes
    out = {}
    for p, iri in items:
        out[p[:-1] if p.endswith(":") else p] = iri
    return sorted(out.items())


def _source_text(a) -> str:
    if a.source is None:
        return " ".join(a.raw_sql.split())
    return emit_sql(a.source)


def emit_obda(assertions, prefixes) -> str:
    """An Ontop-style document; ``prefixes`` maps prefix names (``""`` for ``:``) to IRIs."""
    lines = ["[PrefixDeclaration]"]
    for p, iri in _prefix_items(prefixes):
        lines.append(f"{p + ':':<12}{iri}")
    lines.append("")
    lines.append("[MappingDeclaration] @collection [[")
    for n, a in enumerate(assertions):
        if n:
            lines.append("")
        lines.append(f"mappingId\t{a.id}")
        lines.append(f"target\t\t{format_target(a.targets)}")
        lines.append(f"source\t\t{_source_text(a)}")
    lines.append("]]")
    return "\n".join(lines) + "\n"


# -- Turtle helpers -----------------------------------------------------------

def _string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")
    return f'"{out}"'


def _expand(base: str, prefixes: dict) -> str:
    if not base:
        return ""
    if base.endswith(":") and base[:-1] in prefixes:
        return prefixes[base[:-1]]
    raise ModelError(f"undeclared prefix {base!r}")


def _template_string(t, prefixes: dict) -> str:
    parts = []
    for s in t.segments:
        if isinstance(s, Placeholder):
            parts.append("{" + s.name + "}")
        else:
            parts.append(s.replace("\\", "\\\\").replace("{", "\\{").replace("}", "\\}"))
    head = _expand(t.base, prefixes) if isinstance(t, IRITemplate) else ""
    return _string(head + "".join(parts))


def _object_map(obj, prefixes) -> str:
    if isinstance(obj, IRITemplate):
        return f"rr:template {_template_string(obj, prefixes)}"
    if isinstance(obj, str):
        return f"rr:column {_string(obj)}"
    lang = f" ; rr:language {_string(obj.language)}" if obj.language else ""
    if not obj.placeholders:
        text = "".join(obj.segments)
        if obj.language:
            return f"rr:constant {_string(text)}@{obj.language}"
        return f"rr:constant {_string(text)}"
    if len(obj.segments) == 1:
        return f"rr:column {_string(obj.placeholders[0])}{lang}"
    return f"rr:template {_template_string(obj, prefixes)} ; rr:termType rr:Literal{lang}"


def emit_r2rml(assertions, prefixes) -> str:
    """One ``rr:TriplesMap`` per assertion and subject template, named after the assertion id."""
    pmap = dict(_prefix_items(prefixes))
    lines = [f"@prefix rr: <{RR}> ."]
    for p, iri in _prefix_items(prefixes):
        if p != "rr":
            lines.append(f"@prefix {p}: <{iri}> .")
    for a in assertions:
        groups = []
        for atom in a.targets:
            for g in groups:
                if g[0] == atom.subject:
                    g[1].append(atom)
                    break
            else:
                groups.append((atom.subject, [atom]))
        for n, (subject, atoms) in enumerate(groups, 1):
            name = a.id if len(groups) == 1 else f"{a.id}_{n}"
            lines.append("")
            lines.append(f"<#{name}> a rr:TriplesMap ;")
            lines.append(f"    rr:logicalTable [ rr:sqlQuery {_string(_source_text(a))} ] ;")
            classes = sorted({x.predicate for x in atoms if x.kind == CLASS})
            sm = f"rr:template {_template_string(subject, pmap)}"
            if classes:
                sm += " ; " + " ; ".join(f"rr:class {c}" for c in classes)
            pom = [x for x in atoms if x.kind != CLASS]
            lines.append(f"    rr:subjectMap [ {sm} ]" + (" ;" if pom else " ."))
            for k, x in enumerate(pom):
                end = " ;" if k + 1 < len(pom) else " ."
                lines.append(f"    rr:predicateObjectMap [ rr:predicate {x.predicate} ; "
                             f"rr:objectMap [ {_object_map(x.object, pmap)} ] ]{end}")
    return "\n".join(lines) + "\n"


# -- ontology -----------------------------------------------------------------

_AXIOM_PRED = {"subClass": "rdfs:subClassOf", "domain": "rdfs:domain", "range": "rdfs:range",
               "dataDomain": "rdfs:domain", "subObjectProperty": "rdfs:subPropertyOf"}


def _vocabulary(axioms, assertions=()):
    classes, objects, datas = set(), set(), set()
    for ax in axioms:
        a, b = ax.operands
        if ax.kind == "subClass":
            classes |= {a, b}
        elif ax.kind in ("domain", "range"):
            objects.add(a)
            classes.add(b)
        elif ax.kind == "dataDomain":
            datas.add(a)
            classes.add(b)
        else:
            objects |= {a, b}
    extra = {CLASS: set(), OBJECT: set(), DATA: set()}
    for m in assertions:
        for t in m.targets:
            extra[t.kind].add(t.predicate)
    return classes, objects, datas, extra


def _term(name: str) -> str:
    return name if ":" in name else ":" + name


def emit_ontology(axioms, prefixes, assertions=()) -> str:
    """Turtle with typed vocabulary followed by the axioms.

    Axiom operands are local names in the default namespace.  Predicates used
    by ``assertions`` but absent from every axiom are declared too.
    """
    items = dict(_prefix_items(prefixes))
    for p, iri in STANDARD:
        items.setdefault(p, iri)
    lines = [f"@prefix {p}: <{iri}> ." for p, iri in sorted(items.items())]
    axioms = sorted(set(axioms))
    classes, objects, datas, extra = _vocabulary(axioms, assertions)
    decl = set()
    for names, t in ((classes, "owl:Class"), (objects, "owl:ObjectProperty"), (datas, "owl:DatatypeProperty")):
        decl |= {(_term(n), t) for n in names}
    builtin = {p + ":" for p, _ in STANDARD}
    for kind, t in ((CLASS, "owl:Class"), (OBJECT, "owl:ObjectProperty"), (DATA, "owl:DatatypeProperty")):
        # rdfs:label and friends are already defined; redeclaring them would pun
        decl |= {(n, t) for n in extra[kind] if n[:n.index(":") + 1] not in builtin}
    body = [f"{s} a {t} ." for s, t in sorted(decl)]
    body += sorted({f"{_term(a.operands[0])} {_AXIOM_PRED[a.kind]} {_term(a.operands[1])} ." for a in axioms})
    if body:
        lines.append("")
        lines.extend(body)
    return "\n".join(lines) + "\n"
