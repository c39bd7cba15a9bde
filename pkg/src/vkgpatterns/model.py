"""Domain types shared by ingestion, profiling, detection, generation and classification.

Everything here is an immutable dataclass.  Attribute sets are plain tuples of
attribute names: order matters for key/reference correspondence (position i
of a foreign-key source pairs with position i of its target).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import DanglingReference, IncompleteBindings, ModelError, NullInIdentifier
from .query import (Constant, Project, SourceQuery, Star, output_names, relations,
                    validate)

AttributeSet = tuple


def normalize_identifier(name: str) -> str:
    """Strip SQL quoting: ``"x"``, ```x``` and ``[x]`` all denote ``x``."""
    name = name.strip()
    if len(name) >= 2 and (name[0], name[-1]) in {('"', '"'), ("`", "`"), ("[", "]")}:
        inner = name[1:-1]
        return inner.replace('""', '"') if name[0] == '"' else inner
    return name


def attrset(attrs: Iterable[str]) -> AttributeSet:
    out = tuple(attrs)
    if len(set(out)) != len(out):
        raise ModelError(f"duplicate attribute in {list(out)}")
    return out


# -- schema ---------------------------------------------------------------

@dataclass(frozen=True)
class Attribute:
    name: str
    nullable: bool = True


@dataclass(frozen=True, order=True)
class ForeignKey:
    """A reference ``table.source -> target_table.target``.

    ``declared=False`` marks a reference discovered in the data.
    """

    table: str
    source: AttributeSet
    target_table: str
    target: AttributeSet
    declared: bool = True

    def __post_init__(self):
        object.__setattr__(self, "source", attrset(self.source))
        object.__setattr__(self, "target", attrset(self.target))
        if len(self.source) != len(self.target) or not self.source:
            raise ModelError(f"foreign key arity mismatch: {self.source} -> {self.target}")


@dataclass(frozen=True, order=True)
class InclusionDependency:
    """``π_source_projection(source_table) ⊆ π_target(target_table)``.

    Items of ``source_projection`` are attribute names or :class:`Constant`
    values; a constant witness completes a key that the child lacks.
    """

    source_table: str
    source_projection: tuple
    target_table: str
    target: AttributeSet
    declared: bool = True

    def __post_init__(self):
        object.__setattr__(self, "source_projection", tuple(self.source_projection))
        object.__setattr__(self, "target", attrset(self.target))
        if len(self.source_projection) != len(self.target):
            raise ModelError("inclusion dependency arity mismatch")
        if not any(isinstance(x, Constant) for x in self.source_projection):
            raise ModelError("inclusion dependency without a constant is a foreign key")

    @property
    def attrs(self) -> AttributeSet:
        return tuple(x for x in self.source_projection if not isinstance(x, Constant))

    @property
    def constants(self) -> list:
        """``(target attribute, Constant)`` pairs."""
        return [(t, x) for x, t in zip(self.source_projection, self.target) if isinstance(x, Constant)]


@dataclass(frozen=True)
class Table:
    name: str
    attributes: tuple
    primary_key: AttributeSet = ()
    unique_keys: tuple = ()
    foreign_keys: tuple = ()
    inclusion_deps: tuple = ()

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ModelError(f"{self.name}: duplicate attribute names")
        object.__setattr__(self, "primary_key", attrset(self.primary_key))
        uks = tuple(attrset(u) for u in self.unique_keys)
        object.__setattr__(self, "unique_keys", uks)
        known = set(names)
        for key in (self.primary_key,) + uks:
            if not set(key) <= known:
                raise ModelError(f"{self.name}: key {list(key)} names unknown attributes")
        for u in uks:
            if not u:
                raise ModelError(f"{self.name}: empty unique key")
            if set(u) == set(self.primary_key):
                raise ModelError(f"{self.name}: unique key duplicates the primary key")
        if len({frozenset(u) for u in uks}) != len(uks):
            raise ModelError(f"{self.name}: duplicate unique keys")
        for fk in self.foreign_keys:
            if fk.table != self.name:
                raise ModelError(f"{self.name}: foreign key belongs to {fk.table}")
            if not set(fk.source) <= known:
                raise ModelError(f"{self.name}: foreign key source {list(fk.source)} names unknown attributes")
        for ind in self.inclusion_deps:
            if ind.source_table != self.name or not set(ind.attrs) <= known:
                raise ModelError(f"{self.name}: malformed inclusion dependency")

    @property
    def attribute_names(self) -> tuple:
        return tuple(a.name for a in self.attributes)

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def keys(self) -> list:
        """Declared keys, primary first."""
        return ([self.primary_key] if self.primary_key else []) + list(self.unique_keys)


@dataclass(frozen=True)
class ViewDef:
    name: str
    expr: SourceQuery
    declared_keys: tuple = ()
    foreign_keys: tuple = ()
    origin: str = ""

    def __post_init__(self):
        validate(self.expr)
        if not isinstance(self.expr, Project) or any(isinstance(i.expr, Star) for i in self.expr.items):
            raise ModelError(f"view {self.name} needs an explicit projection")
        object.__setattr__(self, "declared_keys", tuple(attrset(k) for k in self.declared_keys))
        cols = set(self.columns)
        for k in self.declared_keys:
            if not set(k) <= cols:
                raise ModelError(f"view {self.name}: key {list(k)} not among its columns")

    @property
    def columns(self) -> tuple:
        return tuple(output_names(self.expr))

    def as_table(self) -> Table:
        """The relation signature a view exposes to the detectors."""
        keys = list(self.declared_keys)
        pk = keys[0] if keys else ()
        fks = tuple(ForeignKey(self.name, fk.source, fk.target_table, fk.target, fk.declared)
                    for fk in self.foreign_keys)
        return Table(self.name, tuple(Attribute(c, nullable=c not in pk) for c in self.columns),
                     pk, tuple(keys[1:]), fks)


@dataclass(frozen=True)
class RelationalSchema:
    tables: tuple = ()
    views: tuple = ()
    name: str = "schema"

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "views", tuple(self.views))
        seen = set()
        for t in self.tables:
            if t.name in seen:
                raise ModelError(f"duplicate table {t.name}")
            seen.add(t.name)
        for v in self.views:
            if v.name in seen:
                raise ModelError(f"view {v.name} clashes with an existing relation")
            for r in relations(v.expr):
                if r not in seen:
                    raise DanglingReference(f"view {v.name} references unknown relation {r}")
            seen.add(v.name)
        for rel in self.relations():
            for fk in rel.foreign_keys:
                self._check_target(fk.target_table, fk.target, f"{rel.name}{list(fk.source)}")
            for ind in rel.inclusion_deps:
                self._check_target(ind.target_table, ind.target, f"{rel.name} inclusion")

    def _check_target(self, table, attrs, what):
        try:
            rel = self.relation(table)
        except KeyError:
            raise DanglingReference(f"{what} references unknown table {table}") from None
        if not set(attrs) <= set(rel.attribute_names):
            raise DanglingReference(f"{what} references unknown attributes {list(attrs)} of {table}")

    def relations(self) -> list:
        """Tables followed by view signatures, in declaration order."""
        return list(self.tables) + [v.as_table() for v in self.views]

    def relation(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        for v in self.views:
            if v.name == name:
                return v.as_table()
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(t.name == name for t in self.tables) or any(v.name == name for v in self.views)

    def view(self, name: str) -> Optional[ViewDef]:
        for v in self.views:
            if v.name == name:
                return v
        return None

    def columns_of(self, name: str) -> tuple:
        return self.relation(name).attribute_names

    def view_exprs(self) -> dict:
        return {v.name: v.expr for v in self.views}

    def with_views(self, views: Sequence[ViewDef]) -> "RelationalSchema":
        return RelationalSchema(self.tables, tuple(self.views) + tuple(views), self.name)


@dataclass(frozen=True, order=True)
class FunctionalDependency:
    table: str
    determinant: AttributeSet
    dependent: AttributeSet

    def __post_init__(self):
        if set(self.determinant) & set(self.dependent):
            raise ModelError("determinant and dependent overlap")
        if not self.dependent:
            raise ModelError("empty dependent")


@dataclass(frozen=True)
class DerivationRule:
    kind: str = "enumerated-values"
    description: str = ""

    def __post_init__(self):
        if self.kind != "enumerated-values":
            raise ModelError(f"unsupported derivation rule {self.kind!r}")


@dataclass(frozen=True)
class PartitionSpec:
    table: str
    attrs: AttributeSet
    values: tuple
    rule: DerivationRule = DerivationRule()

    def __post_init__(self):
        vals = tuple(tuple(v) for v in self.values)
        if len(set(vals)) != len(vals):
            raise ModelError("partition values must be distinct")
        if any(len(v) != len(self.attrs) for v in vals):
            raise ModelError("partition value arity mismatch")
        object.__setattr__(self, "values", vals)


# -- templates ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Placeholder:
    name: str


_PH = re.compile(r"\{([^{}]*)\}")


def parse_segments(text: str) -> tuple:
    """Split ``"person/{ssn}"`` into ``("person/", Placeholder("ssn"))``."""
    segs, pos = [], 0
    for m in _PH.finditer(text):
        if m.start() > pos:
            segs.append(text[pos:m.start()])
        segs.append(Placeholder(normalize_identifier(m.group(1))))
        pos = m.end()
    if pos < len(text):
        segs.append(text[pos:])
    return tuple(segs)


def _segments_text(segments) -> str:
    return "".join(f"{{{s.name}}}" if isinstance(s, Placeholder) else s for s in segments)


@dataclass(frozen=True)
class IRITemplate:
    """``base`` is a prefix (``":"``, ``"npd:"``) or an absolute IRI prefix."""

    base: str
    segments: tuple
    owner: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        names = self.placeholders
        if not names:
            raise ModelError(f"IRI template {self.text!r} has no placeholder")
        if len(set(names)) != len(names):
            raise ModelError(f"IRI template {self.text!r} repeats a placeholder")

    @classmethod
    def parse(cls, text: str, owner: str = "") -> "IRITemplate":
        """Parse ``prefix:local/{x}`` or ``<http://...{x}>``."""
        text = text.strip()
        if text.startswith("<") and text.endswith(">"):
            return cls("", parse_segments(text[1:-1]), owner)
        m = re.match(r"^([A-Za-z_][\w.-]*)?:", text)
        if not m:
            raise ModelError(f"cannot parse IRI template {text!r}")
        return cls(m.group(0), parse_segments(text[m.end():]), owner)

    @property
    def placeholders(self) -> tuple:
        return tuple(s.name for s in self.segments if isinstance(s, Placeholder))

    @property
    def text(self) -> str:
        return self.base + _segments_text(self.segments)

    def rename(self, mapping: Mapping) -> "IRITemplate":
        segs = tuple(Placeholder(mapping.get(s.name, s.name)) if isinstance(s, Placeholder) else s
                     for s in self.segments)
        return IRITemplate(self.base, segs, self.owner)

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class ValueInventionRule:
    """The finite function ξ from source value tuples to literal text."""

    name: str
    mapping: tuple

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple((tuple(k), v) for k, v in self.mapping))

    def __call__(self, value: tuple) -> str:
        for k, v in self.mapping:
            if k == tuple(value):
                return v
        raise KeyError(value)

    def covers(self, values) -> bool:
        keys = {k for k, _ in self.mapping}
        return all(tuple(v) in keys for v in values)


@dataclass(frozen=True)
class LiteralTemplate:
    segments: tuple
    language: Optional[str] = None
    invention: Optional[ValueInventionRule] = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def parse(cls, text: str, language: Optional[str] = None) -> "LiteralTemplate":
        return cls(parse_segments(text), language)

    @classmethod
    def constant(cls, text: str, language: Optional[str] = None) -> "LiteralTemplate":
        return cls((text,) if text else (), language)

    @property
    def placeholders(self) -> tuple:
        return tuple(s.name for s in self.segments if isinstance(s, Placeholder))

    @property
    def text(self) -> str:
        return _segments_text(self.segments)

    def rename(self, mapping: Mapping) -> "LiteralTemplate":
        segs = tuple(Placeholder(mapping.get(s.name, s.name)) if isinstance(s, Placeholder) else s
                     for s in self.segments)
        return LiteralTemplate(segs, self.language, self.invention)


_IRI_UNSAFE = set("/#?{}%")


def escape_iri_value(value: str) -> str:
    out = []
    for ch in str(value):
        if ch in _IRI_UNSAFE or ch.isspace():
            out.append("".join(f"%{b:02X}" for b in ch.encode("utf-8")))
        else:
            out.append(ch)
    return "".join(out)


def render_template(t: Union[IRITemplate, LiteralTemplate], row: Mapping) -> str:
    """Instantiate ``t`` with the values ``row[placeholder]``.

    IRI placeholder values are percent-escaped so that distinct value tuples
    give distinct IRIs.  Literal templates yield their lexical form, followed
    by ``@tag`` when a language tag is set.
    """
    parts = []
    for s in t.segments:
        if isinstance(s, Placeholder):
            v = row[s.name]
            if v is None:
                raise NullInIdentifier(f"null value for {{{s.name}}} in {t.text!r}")
            parts.append(escape_iri_value(v) if isinstance(t, IRITemplate) else str(v))
        else:
            parts.append(s)
    if isinstance(t, IRITemplate):
        return t.base + "".join(parts)
    text = "".join(parts)
    return f"{text}@{t.language}" if t.language else text


# -- mappings and axioms --------------------------------------------------

CLASS, OBJECT, DATA = "class", "objectProperty", "dataProperty"


@dataclass(frozen=True)
class TargetAtom:
    kind: str
    predicate: str
    subject: IRITemplate
    object: Union[IRITemplate, LiteralTemplate, str, None] = None

    def __post_init__(self):
        if self.kind == CLASS:
            ok = self.object is None
        elif self.kind == OBJECT:
            ok = isinstance(self.object, IRITemplate)
        elif self.kind == DATA:
            ok = isinstance(self.object, (LiteralTemplate, str))
        else:
            ok = False
        if not ok:
            raise ModelError(f"ill-formed {self.kind} atom {self.predicate}")

    def variables(self) -> tuple:
        names = list(self.subject.placeholders)
        if isinstance(self.object, str):
            names.append(self.object)
        elif self.object is not None:
            names.extend(self.object.placeholders)
        return tuple(names)


@dataclass(frozen=True)
class MappingAssertion:
    """A mapping ``source ~> targets``.

    ``source`` is ``None`` when the SQL could not be parsed into the supported
    fragment; ``raw_sql`` keeps the original text either way.
    """

    id: str
    source: Optional[SourceQuery]
    targets: tuple
    raw_sql: str = ""
    opaque_reason: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ModelError(f"mapping {self.id} has no target atoms")
        if self.source is not None:
            validate(self.source)
            names = output_names(self.source)
            if names is not None:
                missing = {v for a in self.targets for v in a.variables()} - set(names)
                if missing:
                    raise ModelError(f"mapping {self.id} uses {sorted(missing)} not produced by its source")

    @property
    def opaque(self) -> bool:
        return self.source is None


AXIOM_KINDS = ("subClass", "domain", "range", "dataDomain", "subObjectProperty")


@dataclass(frozen=True, order=True)
class OntologyAxiom:
    kind: str
    operands: tuple

    def __post_init__(self):
        object.__setattr__(self, "operands", tuple(self.operands))
        if self.kind not in AXIOM_KINDS:
            raise ModelError(f"unknown axiom kind {self.kind!r}")
        if len(self.operands) != 2 or not all(isinstance(o, str) and o for o in self.operands):
            raise ModelError(f"axiom {self.kind} needs two non-empty operands")

    def __str__(self):
        return f"{self.kind}({', '.join(self.operands)})"


def axiom(kind: str, *operands: str) -> OntologyAxiom:
    return OntologyAxiom(kind, operands)


def axiom_set_equal(a: Iterable[OntologyAxiom], b: Iterable[OntologyAxiom]) -> bool:
    return sorted(set(a)) == sorted(set(b))


# -- patterns -------------------------------------------------------------

SCHEMA_KINDS = ("SE", "SR", "SRa", "SRm", "SRR", "SH", "SHa", "SHaa")
DATA_COUNTERPARTS = ("DE", "DR", "DRa", "DRm", "DRR", "DH", "DHa", "DHaa")
DATA_ONLY_KINDS = ("DR1Nm", "DR11m", "DH01", "CE2C", "CE2D", "CE2O", "CR2O")
CATALOG = SCHEMA_KINDS + DATA_COUNTERPARTS + DATA_ONLY_KINDS
KIND_ALIASES = {"DH0N": "DH01"}
CLUSTERING_KINDS = ("CE2C", "CE2D", "CE2O", "CR2O")
MODIFIERS = ("identifierAlignment", "valueInvention", "constantAlignment")

DECLARED, DISCOVERED = "declared", "discovered"


def canonical_kind(label: str) -> str:
    label = KIND_ALIASES.get(label, label)
    if label not in CATALOG:
        raise ModelError(f"unknown pattern kind {label!r}")
    return label


def schema_counterpart(kind: str) -> str:
    """Map a D-kind to its S-kind (and S-kinds to themselves)."""
    if kind in DATA_COUNTERPARTS:
        return SCHEMA_KINDS[DATA_COUNTERPARTS.index(kind)]
    return kind


def data_counterpart(kind: str) -> str:
    if kind in SCHEMA_KINDS:
        return DATA_COUNTERPARTS[SCHEMA_KINDS.index(kind)]
    return kind


def role_letters(n: int) -> list:
    """Role suffixes for relationship participants: E, F, G, ..."""
    letters = "EFGHIJKLMNOPQSTUVWXYZ"
    if n > len(letters):
        raise ModelError("too many relationship roles")
    return list(letters[:n])


_REQUIRED = {
    "SE": ("K", "A"),
    "SR": ("K_RE", "K_RF"),
    "SRa": ("K_RE", "K_RF", "U_F"),
    "SRm": ("K_E", "K_EF"),
    "SH": ("K_FE", "A_F"),
    "SHa": ("K_F", "U_F", "A_F"),
    "SHaa": ("K_F", "K_EF", "A_F"),
    "DR1Nm": ("K_E", "A_E", "K_F", "A_F"),
    "DR11m": ("K_E", "A_E", "K_F", "A_F"),
    "DH01": ("K_RE", "K_RF", "K_E", "A_E"),
    "CE2C": ("K", "B"),
    "CE2D": ("K", "B"),
    "CE2O": ("K", "B"),
    "CR2O": ("K_RE", "K_RF", "B"),
}


def required_roles(kind: str, bindings: Mapping) -> tuple:
    """The binding roles an instance of ``kind`` must carry.

    Reified relationships carry a variable number of roles ``K_RE, K_RF, ...``
    (at least two) besides ``K_R`` and ``A_R``.
    """
    kind = schema_counterpart(kind)
    if kind == "SRR":
        n = len([r for r in bindings if re.fullmatch(r"K_R[A-Z]", r)])
        return ("K_R", "A_R") + tuple(f"K_R{c}" for c in role_letters(max(n, 2)))
    return _REQUIRED[kind]


def _freeze(mapping) -> tuple:
    if isinstance(mapping, Mapping):
        items = mapping.items()
    else:
        items = mapping
    return tuple(sorted((k, _freeze_value(v)) for k, v in items))


def _freeze_value(v):
    if isinstance(v, list):
        return tuple(_freeze_value(x) for x in v)
    if isinstance(v, dict):
        return _freeze(v)
    return v


@dataclass(frozen=True)
class PatternInstance:
    """One application of a catalog pattern.

    ``bindings`` maps a role (``K_E``, ``A_F``, ``B`` ...) to an attribute
    tuple; ``refs`` maps a role (``E``, ``F``, ...) to the referenced relation;
    ``params`` holds kind-specific extras such as partition values or the
    hierarchy alignment sub-case.
    """

    kind: str
    main_table: str
    bindings: tuple
    provenance: str
    refs: tuple = ()
    views: tuple = ()
    modifiers: frozenset = frozenset()
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        object.__setattr__(self, "bindings", tuple(sorted((k, attrset(v)) for k, v in _items(self.bindings))))
        object.__setattr__(self, "refs", tuple(sorted(_items(self.refs))))
        object.__setattr__(self, "params", _freeze(self.params))
        object.__setattr__(self, "views", tuple(self.views))
        object.__setattr__(self, "modifiers", frozenset(self.modifiers))
        if not self.modifiers <= set(MODIFIERS):
            raise ModelError(f"unknown modifiers {sorted(self.modifiers - set(MODIFIERS))}")
        have = dict(self.bindings)
        need = required_roles(self.kind, have)
        for role in need:
            if role not in have:
                raise IncompleteBindings(self.kind, role)
        extra = set(have) - set(need)
        if extra:
            raise ModelError(f"{self.kind} instance has unexpected roles {sorted(extra)}")
        if self.kind in SCHEMA_KINDS and self.provenance != DECLARED:
            raise ModelError(f"{self.kind} requires declared provenance")
        if self.kind not in SCHEMA_KINDS and self.provenance != DISCOVERED:
            raise ModelError(f"{self.kind} requires discovered provenance")

    @property
    def b(self) -> dict:
        return dict(self.bindings)

    @property
    def r(self) -> dict:
        return dict(self.refs)

    @property
    def p(self) -> dict:
        return dict(self.params)

    @property
    def key(self) -> tuple:
        """Application grouping key."""
        return (self.kind, self.main_table, self.bindings, self.refs, self.params)

    @property
    def label(self) -> str:
        parts = [f"{k}={','.join(v)}" for k, v in self.bindings if v]
        return f"{self.kind}({self.main_table}; {'; '.join(parts)})"


def _items(x):
    return x.items() if isinstance(x, Mapping) else x


def sort_instances(instances: Iterable[PatternInstance]) -> list:
    return sorted(instances, key=lambda i: (i.main_table, i.kind, i.bindings, i.refs, i.params))


@dataclass(frozen=True)
class ConceptualSummary:
    entities: tuple = ()
    relationships: tuple = ()
    isa_links: tuple = ()


def check_arity(source: Sequence, target: Sequence, what: str = "reference"):
    if len(source) != len(target):
        raise DanglingReference(f"{what}: arity mismatch {list(source)} vs {list(target)}")
