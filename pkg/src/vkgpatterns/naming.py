"""Vocabulary and identifier conventions shared by the generator and classifier.

Class names come from hint labels, else from the CamelCase table name.  Every
relation that identifies objects has an :class:`Ident`: the IRI template of
the class owning the objects together with, for each placeholder, the column
of the relation (or the constant) that fills it.  Hierarchy children reuse
their parent's template, so a student and the person they are share one IRI.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .hints import EMPTY_HINTS, HintsDocument
from .model import IRITemplate, Placeholder, RelationalSchema
from .query import Constant

_SUFFIX = re.compile(r"_(id|code|key|no|nr|num)$", re.IGNORECASE)
_UNSAFE = re.compile(r"[^A-Za-z0-9_-]+")


def local_name(text: str) -> str:
    """A safe local part for prefixed names."""
    out = _UNSAFE.sub("_", str(text)).strip("_-")
    return out or "x"


def camel(text: str) -> str:
    parts = [p for p in re.split(r"[^A-Za-z0-9]+", str(text)) if p]
    return "".join(p[:1].upper() + p[1:] for p in parts) or "X"


def entity_name_from_key(attrs) -> str:
    """``course_id`` gives ``Course``."""
    return camel("_".join(_SUFFIX.sub("", a) or a for a in attrs))


def has_property(attrs) -> str:
    return "has" + camel("_".join(attrs))


def template_for(class_name: str, attrs, base: str = ":") -> IRITemplate:
    segs = [f"{class_name.lower()}/"]
    for i, a in enumerate(attrs):
        if i:
            segs.append("/")
        segs.append(Placeholder(a))
    return IRITemplate(base, tuple(segs), class_name)


@dataclass(frozen=True)
class Ident:
    """``template`` plus, per placeholder, a column of the relation or a :class:`Constant`."""

    template: IRITemplate
    fill: tuple  # ((placeholder, column name | Constant), ...)

    @property
    def columns(self) -> tuple:
        return tuple(v for _, v in self.fill if not isinstance(v, Constant))

    def through(self, source, target) -> Optional["Ident"]:
        """Re-express over a referencing relation: ``target[i]`` is filled by ``source[i]``."""
        pos = {t: s for s, t in zip(source, target)}
        out = []
        for ph, v in self.fill:
            if isinstance(v, Constant):
                out.append((ph, v))
            elif v in pos:
                out.append((ph, pos[v]))
            else:
                return None
        return Ident(self.template, tuple(out))


class Naming:
    """Names and identifiers for one detection result."""

    def __init__(self, instances, schema: RelationalSchema, hints: HintsDocument = EMPTY_HINTS,
                 base: str = ":"):
        self.schema = schema
        self.hints = hints
        self.base = base
        self.instances = list(instances)
        self._labels = hints.labels
        self._view_label = {}
        for inst in self.instances:
            p = inst.p
            if inst.kind in ("DR1Nm", "DR11m") and p.get("label"):
                self._view_label[p["vf"]] = p["label"]
        self._cache = {}

    # -- vocabulary --------------------------------------------------------

    def class_of(self, table: str) -> str:
        if table in self._labels:
            return local_name(self._labels[table])
        if table in self._view_label:
            return local_name(self._view_label[table])
        return local_name(camel(table))

    def q(self, name: str) -> str:
        """Prefixed name for vocabulary element ``name``."""
        return self.base + name

    # -- identifiers -------------------------------------------------------

    def _instances_on(self, table):
        return [i for i in self.instances if i.main_table == table]

    def ident(self, table: str) -> Optional[Ident]:
        if table in self._cache:
            return self._cache[table]
        self._cache[table] = None  # cycle guard
        out = self._ident(table)
        self._cache[table] = out
        return out

    def _own(self, table, key) -> Ident:
        cls = self.class_of(table)
        return Ident(template_for(cls, key, self.base), tuple((a, a) for a in key))

    def _ident(self, table):
        insts = self._instances_on(table)
        kinds = {i.kind: i for i in insts}
        for k in ("SH", "DH"):
            if k in kinds:
                i = kinds[k]
                parent = self.ident(i.r["E"])
                if parent is not None:
                    got = parent.through(i.b["K_FE"], i.p["target"])
                    if got is not None:
                        return got
        for k in ("SHa", "DHa"):
            if k in kinds and kinds[k].p.get("subcase") == "depicted":
                i = kinds[k]
                parent = self.ident(i.r["E"])
                if parent is not None:
                    got = parent.through(i.b["U_F"], i.p["target"])
                    if got is not None:
                        return got
            if k in kinds:
                return None  # identifiers come from a join with the parent
        for k in ("SHaa", "DHaa"):
            if k in kinds:
                i = kinds[k]
                parent = self.ident(i.r["E"])
                if parent is None:
                    return None
                return parent.through(i.p["projection"], i.p["target"])
        for k in ("SRR", "DRR"):
            if k in kinds:
                return self._own(table, kinds[k].b["K_R"])
        if any(k in kinds for k in ("SR", "DR", "SRa", "DRa", "DH01")):
            return None
        if not self.schema.has(table):
            return None
        rel = self.schema.relation(table)
        for k in ("SE", "DE"):
            if k in kinds:
                return self._own(table, kinds[k].b["K"])
        if rel.primary_key:
            return self._own(table, rel.primary_key)
        return None

    def ref_ident(self, source, target_table, target) -> Optional[Ident]:
        """Identifier of ``target_table`` objects read through ``source`` columns."""
        t = self.ident(target_table)
        return t.through(source, target) if t is not None else None
