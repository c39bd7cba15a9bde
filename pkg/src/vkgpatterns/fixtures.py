"""Small hand-built scenarios, one per catalog kind plus four scenario excerpts.

Data-bearing fixtures are shaped so that the intended constraints are the
only ones the profiler finds: non-key columns repeat values, key values live
in per-table namespaces, and no row of a relationship pairs one object with
every object on the other side.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .hints import HintsDocument, hints_from_dict
from .ingest.csvdata import DataInstance, format_csv
from .ingest.schemadoc import load_schema
from .model import RelationalSchema


@dataclass
class Fixture:
    name: str
    kind: str
    table: str
    schema_text: str
    rows: Optional[dict] = None
    hints_doc: dict = field(default_factory=dict)
    mappings: str = ""

    def schema(self) -> RelationalSchema:
        return load_schema(self.schema_text)

    def data(self) -> Optional[DataInstance]:
        if self.rows is None:
            return None
        return DataInstance.from_rows(self.schema(), self.rows)

    def hints(self) -> HintsDocument:
        return hints_from_dict(self.hints_doc)

    @property
    def schema_file(self) -> str:
        return "schema.json" if self.schema_text.lstrip().startswith("{") else "schema.sql"

    def write(self, path: str) -> dict:
        """Lay the fixture out as CLI inputs; returns the written paths by role."""
        os.makedirs(path, exist_ok=True)
        out = {"schema": os.path.join(path, self.schema_file)}
        with open(out["schema"], "w") as f:
            f.write(self.schema_text)
        if self.rows is not None:
            out["data"] = os.path.join(path, "data")
            os.makedirs(out["data"], exist_ok=True)
            schema = self.schema()
            for t, rows in self.rows.items():
                with open(os.path.join(out["data"], f"{t}.csv"), "w") as f:
                    f.write(format_csv(schema.columns_of(t), rows))
        if self.hints_doc:
            out["hints"] = os.path.join(path, "hints.json")
            with open(out["hints"], "w") as f:
                f.write(json.dumps(self.hints_doc, indent=2, sort_keys=True) + "\n")
        if self.mappings:
            out["mappings"] = os.path.join(path, "mappings.obda")
            with open(out["mappings"], "w") as f:
                f.write(self.mappings)
        return out


# -- shared data ----------------------------------------------------------------

PERSONS = [("p1", "Ann"), ("p2", "Ann"), ("p3", "Bob")]
COURSES = [("c1", "Logic"), ("c2", "Logic"), ("c3", "Art")]
# every person and course takes part, nobody is paired with everything
PAIRS = [("p1", "c1"), ("p1", "c2"), ("p2", "c2"), ("p2", "c3"), ("p3", "c1"), ("p3", "c3")]


def _two(kind, schema, data=None, table=None, hints=None, name=None):
    return Fixture(name or kind.lower(), kind, table, schema, data, hints or {})


_SE = "CREATE TABLE person_info (ssn TEXT PRIMARY KEY, name TEXT);"
_DE = "CREATE TABLE person_info (ssn TEXT, name TEXT);"
_PERSON_INFO = [("s1", "Ann"), ("s2", "Ann"), ("s3", "Bob"), ("s4", "Bob")]

_SR = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, title TEXT);
CREATE TABLE attends (ssn TEXT REFERENCES person(ssn), cid TEXT REFERENCES course(cid),
                      PRIMARY KEY (ssn, cid));
"""
_DR = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, title TEXT);
CREATE TABLE attends (ssn TEXT, cid TEXT, PRIMARY KEY (ssn, cid));
"""
_ATTENDS = {"person": PERSONS, "course": COURSES, "attends": PAIRS}

_SRA = """
CREATE TABLE professor (pid TEXT PRIMARY KEY, pname TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, code TEXT UNIQUE, title TEXT);
CREATE TABLE teaches (pid TEXT REFERENCES professor(pid), code TEXT REFERENCES course(code),
                      PRIMARY KEY (pid, code));
"""
_DRA = """
CREATE TABLE professor (pid TEXT PRIMARY KEY, pname TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, code TEXT UNIQUE, title TEXT);
CREATE TABLE teaches (pid TEXT, code TEXT, PRIMARY KEY (pid, code));
"""
_TEACHES = {
    "professor": [("q1", "Eve"), ("q2", "Eve"), ("q3", "Max")],
    "course": [("c1", "K1", "Logic"), ("c2", "K2", "Logic"), ("c3", "K3", "Art")],
    "teaches": [("q1", "K1"), ("q1", "K2"), ("q2", "K2"), ("q2", "K3"), ("q3", "K1"), ("q3", "K3")],
}

_SRM = """
CREATE TABLE location (lid TEXT PRIMARY KEY, city TEXT);
CREATE TABLE client (cid TEXT PRIMARY KEY, name TEXT, billing_loc TEXT REFERENCES location(lid));
"""
_DRM = """
CREATE TABLE location (lid TEXT PRIMARY KEY, city TEXT);
CREATE TABLE client (cid TEXT PRIMARY KEY, name TEXT, billing_loc TEXT);
"""
_CLIENTS = {
    "location": [("l1", "Rome"), ("l2", "Rome"), ("l3", "Oslo")],
    "client": [("k1", "Ann", "l1"), ("k2", "Bob", "l1"), ("k3", "Ann", "l2"), ("k4", "Bob", "l2")],
}

_SRR = """
CREATE TABLE student (sid TEXT PRIMARY KEY, sname TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, title TEXT);
CREATE TABLE professor (pid TEXT PRIMARY KEY, pname TEXT);
CREATE TABLE exam (sid TEXT REFERENCES student(sid), cid TEXT REFERENCES course(cid),
                   pid TEXT REFERENCES professor(pid), grade TEXT, PRIMARY KEY (sid, cid, pid));
"""
_DRR = """
CREATE TABLE student (sid TEXT PRIMARY KEY, sname TEXT);
CREATE TABLE course (cid TEXT PRIMARY KEY, title TEXT);
CREATE TABLE professor (pid TEXT PRIMARY KEY, pname TEXT);
CREATE TABLE exam (sid TEXT, cid TEXT, pid TEXT, grade TEXT, PRIMARY KEY (sid, cid, pid));
"""
_EXAMS = {
    "student": [("s1", "Ann"), ("s2", "Ann"), ("s3", "Bob")],
    "course": COURSES,
    "professor": [("q1", "Eve"), ("q2", "Eve")],
    "exam": [("s1", "c1", "q1", "A"), ("s1", "c2", "q2", "B"), ("s2", "c1", "q2", "A"),
             ("s2", "c3", "q1", "B"), ("s3", "c2", "q1", "A"), ("s3", "c3", "q2", "B")],
}

_SH = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE student (ssn TEXT PRIMARY KEY REFERENCES person(ssn), school TEXT);
"""
_DH = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE student (ssn TEXT PRIMARY KEY, school TEXT);
"""
_STUDENTS = {
    "person": [("p1", "Ann"), ("p2", "Ann"), ("p3", "Bob"), ("p4", "Bob")],
    "student": [("p1", "MIT"), ("p2", "MIT"), ("p3", "ETH")],
}

_SHA = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE student (matr TEXT PRIMARY KEY, ssn TEXT UNIQUE REFERENCES person(ssn), school TEXT);
"""
_DHA = """
CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT);
CREATE TABLE student (matr TEXT PRIMARY KEY, ssn TEXT UNIQUE, school TEXT);
"""
_MATR = {
    "person": [("p1", "Ann"), ("p2", "Ann"), ("p3", "Bob"), ("p4", "Bob")],
    "student": [("m1", "p1", "MIT"), ("m2", "p2", "MIT"), ("m3", "p3", "ETH")],
}


def _people_doc(declared_ind: bool) -> str:
    grad = {"name": "graduate_student", "attributes": ["pid", "thesis"], "primaryKey": ["pid"]}
    if declared_ind:
        grad["inclusionDeps"] = [{"sourceProjection": [{"const": "GraduateStudent"}, "pid"],
                                  "targetTable": "person", "target": ["role", "pid"]}]
    doc = {"name": "people", "tables": [
        {"name": "person", "attributes": ["role", "pid", "name"], "primaryKey": ["role", "pid"]},
        grad]}
    return json.dumps(doc, indent=2) + "\n"


_PEOPLE = {
    "person": [("GraduateStudent", "g1", "Ann"), ("GraduateStudent", "g2", "Bob"),
               ("Professor", "g1", "Ann"), ("Professor", "f1", "Bob")],
    "graduate_student": [("g1", "Logic"), ("g2", "Logic")],
}

_DR1NM = "CREATE TABLE students (sid TEXT PRIMARY KEY, sname TEXT, course_id TEXT, course_name TEXT);"
_ENROLLED = {"students": [("s1", "Ann", "c1", "Logic"), ("s2", "Bob", "c1", "Logic"),
                          ("s3", "Ann", "c2", "Art"), ("s4", "Bob", "c2", "Art")]}

_DR11M = "CREATE TABLE university (uid TEXT PRIMARY KEY, uname TEXT, rector_ssn TEXT, rector_name TEXT);"
_RECTORS = {"university": [("u1", "Alpha", "r1", "Ann"), ("u2", "Alpha", "r2", "Bob"),
                           ("u3", "Beta", "r3", "Ann")]}

_DH01 = """
CREATE TABLE student (sid TEXT PRIMARY KEY, sname TEXT);
CREATE TABLE program (prg TEXT PRIMARY KEY, pname TEXT);
CREATE TABLE enrolled_in (sid TEXT REFERENCES student(sid), prg TEXT REFERENCES program(prg),
                          PRIMARY KEY (sid, prg));
"""
_PROGRAMS = {
    "student": [("s1", "Ann"), ("s2", "Ann"), ("s3", "Bob"), ("s4", "Bob")],
    "program": [("g1", "Math"), ("g2", "Math"), ("g3", "Law")],
    "enrolled_in": [("s1", "g1"), ("s1", "g2"), ("s2", "g2"), ("s2", "g3"), ("s3", "g1"), ("s3", "g3")],
}

_GENDER = "CREATE TABLE person (ssn TEXT PRIMARY KEY, name TEXT, gender TEXT);"
_GENDERS = {"person": [("p1", "Ann", "F"), ("p2", "Bob", "M"), ("p3", "Bob", "F"), ("p4", "Ann", "M")]}

_CR2O = """
CREATE TABLE professor (ptype TEXT, pid TEXT, PRIMARY KEY (ptype, pid));
CREATE TABLE course (ctype TEXT, cid TEXT, PRIMARY KEY (ctype, cid));
CREATE TABLE teaches (ptype TEXT, pid TEXT, ctype TEXT, cid TEXT,
                      PRIMARY KEY (ptype, pid, ctype, cid),
                      FOREIGN KEY (ptype, pid) REFERENCES professor (ptype, pid),
                      FOREIGN KEY (ctype, cid) REFERENCES course (ctype, cid));
"""
_TEACHING = {
    "professor": [("full", "q1"), ("full", "q2"), ("assoc", "q3"), ("assoc", "q4")],
    "course": [("grad", "c1"), ("grad", "c2"), ("ugrad", "c3"), ("ugrad", "c4")],
    "teaches": [("full", "q1", "grad", "c1"), ("full", "q2", "ugrad", "c3"),
                ("assoc", "q3", "grad", "c2"), ("assoc", "q4", "ugrad", "c4"),
                ("full", "q1", "ugrad", "c4")],
}


def catalog_fixtures() -> dict:
    """One fixture per catalog kind, keyed by kind, in catalog order."""
    fx = [
        _two("SE", _SE, table="person_info"),
        _two("SR", _SR, table="attends"),
        _two("SRa", _SRA, table="teaches"),
        _two("SRm", _SRM, table="client"),
        _two("SRR", _SRR, table="exam"),
        _two("SH", _SH, table="student"),
        _two("SHa", _SHA, table="student"),
        _two("SHaa", _people_doc(True), table="graduate_student"),
        _two("DE", _DE, {"person_info": _PERSON_INFO}, "person_info"),
        _two("DR", _DR, _ATTENDS, "attends"),
        _two("DRa", _DRA, _TEACHES, "teaches"),
        _two("DRm", _DRM, _CLIENTS, "client"),
        _two("DRR", _DRR, _EXAMS, "exam"),
        _two("DH", _DH, _STUDENTS, "student"),
        _two("DHa", _DHA, _MATR, "student"),
        _two("DHaa", _people_doc(False), _PEOPLE, "graduate_student"),
        _two("DR1Nm", _DR1NM, _ENROLLED, "students"),
        _two("DR11m", _DR11M, _RECTORS, "university",
             {"attributeOwnership": {"university.rector_name": "Rector"}}),
        _two("DH01", _DH01, _PROGRAMS, "enrolled_in",
             {"entityLabels": {"student__enrolled_in": "UndergraduateStudent"}}),
        _two("CE2C", _GENDER, _GENDERS, "person",
             {"clusterCandidates": [{"table": "person", "attrs": ["gender"]}]}),
        _two("CE2D", _GENDER, _GENDERS, "person",
             {"clusterCandidates": [{"table": "person", "attrs": ["gender"], "flavor": "CE2D",
                                     "property": "hasGender",
                                     "valueInvention": {"F": "Female", "M": "Male"}}]}),
        _two("CE2O", _GENDER, _GENDERS, "person",
             {"clusterCandidates": [{"table": "person", "attrs": ["gender"], "flavor": "CE2O",
                                     "property": "hasGender", "valueTemplate": ":gender/{gender}"}]}),
        _two("CR2O", _CR2O, _TEACHING, "teaches",
             {"clusterCandidates": [{"table": "teaches", "attrs": ["ptype", "ctype"]}]}),
    ]
    return {f.kind: f for f in fx}


# -- scenario excerpts -------------------------------------------------------------

BASE = "http://example.org/voc#"

M_PERSON = """[PrefixDeclaration]
:           http://example.org/voc#

[MappingDeclaration] @collection [[
mappingId\tmPerson
source\t\tSELECT "ssn" FROM "person_info"
target\t\t:person/{ssn} a :Person .
]]
"""

NPD_QUADRANT = """[PrefixDeclaration]
npd:        http://sws.ifi.uio.no/data/npd-v2/
npdv:       http://sws.ifi.uio.no/vocab/npd-v2#

[MappingDeclaration] @collection [[
mappingId\tMapping:00877:Table:Extra:ex5:npdv:Quadrant
target\t\tnpd:quadrant/{wlbNamePart1} a npdv:Quadrant .
source\t\tSELECT "wlbNamePart1" FROM "wellbore_development_all"
]]
"""

UOBM_GRADUATE = """[PrefixDeclaration]
:           http://example.org/uobm#

[MappingDeclaration] @collection [[
mappingId\tGraduate Student
target\t\t<http://www.Dept{deptID}.Univ{univID}.edu/{role}{studID}> a :GraduateStudent .
source\t\tSELECT deptID, univID, studID, 'GraduateStudent' as role FROM GraduateStudents
]]
"""

STOD_MUNICIPALITY = """[PrefixDeclaration]
:           http://example.org/stod#
rdfs:       http://www.w3.org/2000/01/rdf-schema#

[MappingDeclaration] @collection [[
mappingId\tmunicipality
target\t\t:mun/mun={istat_code} a :Municipality ; rdfs:label {name_i}@it, {name_d}@de .
source\t\tSELECT istat_code, name_i, name_d FROM municipalities
]]
"""

_UOBM = json.dumps({"name": "uobm", "tables": [
    {"name": "People", "attributes": ["ID", "deptID", "univID", "role", "name"],
     "primaryKey": ["ID", "deptID", "univID", "role"]},
    {"name": "GraduateStudents", "attributes": ["studID", "deptID", "univID", "advisor"],
     "primaryKey": ["studID", "deptID", "univID"],
     "inclusionDeps": [{"sourceProjection": ["studID", "deptID", "univID", {"const": "GraduateStudent"}],
                        "targetTable": "People", "target": ["ID", "deptID", "univID", "role"]}]},
]}, indent=2) + "\n"

_WELLBORE = ("CREATE TABLE wellbore_development_all (wlbName TEXT PRIMARY KEY, wlbNamePart1 TEXT,"
             " qdrArea TEXT, wlbDrillingOperator TEXT);")
_WELLBORES = {"wellbore_development_all": [
    ("w1", "15", "A1", "Statoil"), ("w2", "15", "A1", "Shell"), ("w3", "16", "A2", "Statoil"),
    ("w4", "16", "A2", "Shell"), ("w5", "25", "A1", "Statoil"), ("w6", "25", "A1", "Shell")]}


def scenario_fixtures() -> dict:
    """The four scenario excerpts, each with the mapping text it is checked against."""
    return {
        "mPerson": Fixture("mPerson", "SE", "person_info", _SE, None,
                           {"entityLabels": {"person_info": "Person"}}, M_PERSON),
        "npd": Fixture("npd", "DR1Nm", "wellbore_development_all", _WELLBORE, _WELLBORES,
                       {"entityLabels": {"wellbore_development_all.wlbNamePart1": "Quadrant"}},
                       NPD_QUADRANT),
        "uobm": Fixture("uobm", "SHaa", "GraduateStudents", _UOBM, None, {}, UOBM_GRADUATE),
        "stod": Fixture("stod", "SE", "municipalities",
                        "CREATE TABLE municipalities (istat_code TEXT PRIMARY KEY, name_i TEXT, name_d TEXT);",
                        None, {}, STOD_MUNICIPALITY),
    }


def all_fixtures() -> dict:
    out = {f"catalog_{k}": f for k, f in catalog_fixtures().items()}
    out.update({f"scenario_{k}": f for k, f in scenario_fixtures().items()})
    return out
