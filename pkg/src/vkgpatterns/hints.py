"""Domain-knowledge hints steering detection.

::

    {"entityLabels": {"person_info": "Person"},
     "attributeOwnership": {"university.rector_name": "Rector"},
     "clusterCandidates": [{"table": "person", "attrs": ["gender"],
                            "flavor": "CE2D", "property": "hasGender",
                            "valueInvention": {"F": "Female", "M": "Male"}}],
     "suppress": [{"kind": "SRm", "table": "client", "attrs": ["billing_loc"]}]}

``valueInvention`` keys are the partition values (multi-attribute values
joined with ``|``); ``valueTemplate`` is an IRI template over the ``attrs``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import HintsError
from .model import CATALOG, CLUSTERING_KINDS, KIND_ALIASES, RelationalSchema


@dataclass(frozen=True)
class ClusterCandidate:
    table: str
    attrs: tuple
    flavor: Optional[str] = None
    value_invention: tuple = ()
    value_template: Optional[str] = None
    property: Optional[str] = None

    def invention_map(self) -> dict:
        return {tuple(k.split("|")) if "|" in k else (k,): v for k, v in self.value_invention}


@dataclass(frozen=True)
class Suppression:
    kind: str
    table: str
    attrs: Optional[tuple] = None


@dataclass(frozen=True)
class HintsDocument:
    entity_labels: tuple = ()
    attribute_ownership: tuple = ()
    cluster_candidates: tuple = ()
    suppress: tuple = ()

    @property
    def labels(self) -> dict:
        return dict(self.entity_labels)

    @property
    def ownership(self) -> dict:
        """``(table, attribute) -> owner``."""
        return {tuple(k): v for k, v in self.attribute_ownership}

    def owner(self, table: str, attr: str) -> Optional[str]:
        return self.ownership.get((table, attr))

    def clusters_for(self, table: str) -> list:
        return [c for c in self.cluster_candidates if c.table == table]

    def suppressed(self, kind: str, table: str, attrs=None) -> bool:
        for s in self.suppress:
            if s.kind == kind and s.table == table:
                if s.attrs is None or attrs is None or set(s.attrs) == set(attrs):
                    return True
        return False

    def merged(self, other: "HintsDocument") -> "HintsDocument":
        labels = dict(self.entity_labels)
        labels.update(dict(other.entity_labels))
        own = dict(self.attribute_ownership)
        own.update(dict(other.attribute_ownership))
        clusters = list(self.cluster_candidates)
        for c in other.cluster_candidates:
            if not any(x.table == c.table and x.attrs == c.attrs for x in clusters):
                clusters.append(c)
        return HintsDocument(tuple(sorted(labels.items())), tuple(sorted(own.items())), tuple(clusters),
                             tuple(dict.fromkeys(self.suppress + other.suppress)))


EMPTY_HINTS = HintsDocument()


def parse_hints(text: str) -> HintsDocument:
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise HintsError(f"invalid JSON: {e}") from None
    return hints_from_dict(doc)


def hints_from_dict(doc: dict) -> HintsDocument:
    if not isinstance(doc, dict):
        raise HintsError("hints document must be an object")
    labels = doc.get("entityLabels", {})
    if not isinstance(labels, dict) or not all(isinstance(v, str) and v for v in labels.values()):
        raise HintsError("entityLabels must map names to non-empty strings")
    own = {}
    for k, v in doc.get("attributeOwnership", {}).items():
        if "." not in k or not isinstance(v, str):
            raise HintsError(f"attributeOwnership key {k!r} must look like 'table.attribute'")
        t, a = k.rsplit(".", 1)
        own[(t, a)] = v
    clusters = []
    for c in doc.get("clusterCandidates", []):
        if not isinstance(c, dict) or "table" not in c or not c.get("attrs"):
            raise HintsError("cluster candidates need 'table' and non-empty 'attrs'")
        flavor = c.get("flavor")
        if flavor is not None and flavor not in CLUSTERING_KINDS:
            raise HintsError(f"unknown cluster flavor {flavor!r}")
        inv = c.get("valueInvention") or {}
        clusters.append(ClusterCandidate(c["table"], tuple(c["attrs"]), flavor,
                                         tuple(sorted((str(k), str(v)) for k, v in inv.items())),
                                         c.get("valueTemplate"), c.get("property")))
    sup = []
    for s in doc.get("suppress", []):
        kind = KIND_ALIASES.get(s.get("kind"), s.get("kind"))
        if kind not in CATALOG or "table" not in s:
            raise HintsError(f"bad suppress entry {s!r}")
        sup.append(Suppression(kind, s["table"], tuple(s["attrs"]) if s.get("attrs") else None))
    return HintsDocument(tuple(sorted(labels.items())), tuple(sorted(own.items())), tuple(clusters),
                         tuple(sup))


def hints_to_dict(h: HintsDocument) -> dict:
    out = {}
    if h.entity_labels:
        out["entityLabels"] = dict(h.entity_labels)
    if h.attribute_ownership:
        out["attributeOwnership"] = {f"{t}.{a}": v for (t, a), v in h.attribute_ownership}
    if h.cluster_candidates:
        out["clusterCandidates"] = []
        for c in h.cluster_candidates:
            d = {"table": c.table, "attrs": list(c.attrs)}
            if c.flavor:
                d["flavor"] = c.flavor
            if c.value_invention:
                d["valueInvention"] = dict(c.value_invention)
            if c.value_template:
                d["valueTemplate"] = c.value_template
            if c.property:
                d["property"] = c.property
            out["clusterCandidates"].append(d)
    if h.suppress:
        out["suppress"] = [{"kind": s.kind, "table": s.table, **({"attrs": list(s.attrs)} if s.attrs else {})}
                           for s in h.suppress]
    return out


def validate_hints(h: HintsDocument, schema: RelationalSchema) -> None:
    """Raise :class:`HintsError` for references to unknown relations or attributes."""
    def cols(t):
        if not schema.has(t):
            raise HintsError(f"hints reference unknown table or view {t!r}")
        return schema.columns_of(t)

    for name, _ in h.entity_labels:
        if "." in name:
            t, a = name.rsplit(".", 1)
            if not set(a.split(",")) <= set(cols(t)):
                raise HintsError(f"hints reference unknown attribute {name!r}")
        else:
            cols(name)
    for (t, a), _ in h.attribute_ownership:
        if a not in cols(t):
            raise HintsError(f"hints reference unknown attribute {t}.{a}")
    for c in h.cluster_candidates:
        missing = [a for a in c.attrs if a not in cols(c.table)]
        if missing:
            raise HintsError(f"cluster candidate on {c.table} names unknown attributes {missing}")
    for s in h.suppress:
        cols(s.table)
