import json

import pytest

from vkgpatterns.cli import main
from vkgpatterns.fixtures import M_PERSON, catalog_fixtures, scenario_fixtures
from vkgpatterns.model import CATALOG

BASE = "http://example.org/voc#"


def _files(tmp_path, name):
    return scenario_fixtures()[name].write(tmp_path / "in") if name in scenario_fixtures() \
        else catalog_fixtures()[name].write(tmp_path / "in")


def test_schema_only_bootstrap_writes_person_mapping(tmp_path, capsys):
    p = _files(tmp_path, "mPerson")
    out = tmp_path / "out"
    assert main(["bootstrap", "--schema", p["schema"], "--hints", p["hints"], "--base-iri", BASE,
                 "--out", str(out), "--name", "person"]) == 0
    obda = (out / "person.obda").read_text()
    assert "target\t\t:person/{ssn} a :Person ; :ssn {ssn} ; :name {name} ." in obda.splitlines()
    for ext in ("r2rml.ttl", "ontology.ttl", "conceptual.txt", "detection.log"):
        assert (out / f"person.{ext}").exists()
    assert "1 pattern instances" in capsys.readouterr().out


def test_bootstrap_with_data_maps_the_course_class(tmp_path):
    p = _files(tmp_path, "DR1Nm")
    out = tmp_path / "out"
    assert main(["bootstrap", "--schema", p["schema"], "--data", p["data"], "--base-iri", BASE,
                 "--out", str(out), "--name", "s"]) == 0
    assert "a :Course" in (out / "s.obda").read_text()


def test_missing_schema_is_a_usage_error(capsys):
    assert main(["bootstrap", "--base-iri", BASE]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "--schema" in err


def test_unknown_command_is_a_usage_error(capsys):
    assert main(["frobnicate"]) == 1


def test_parse_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.sql"
    bad.write_text("CREATE TABLE (oops")
    assert main(["bootstrap", "--schema", str(bad), "--base-iri", BASE, "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_file_exits_one(tmp_path):
    assert main(["profile", "--schema", str(tmp_path / "nope.sql"), "--data", str(tmp_path)]) == 1


def test_fixpoint_overflow_exits_two(tmp_path, capsys):
    p = _files(tmp_path, "DR1Nm")
    assert main(["bootstrap", "--schema", p["schema"], "--data", p["data"], "--base-iri", BASE,
                 "--out", str(tmp_path / "out"), "--max-rounds", "1"]) == 2
    assert "rounds" in capsys.readouterr().err


def test_profile_of_empty_data_dir(tmp_path, capsys):
    p = _files(tmp_path, "SR")
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["profile", "--schema", p["schema"], "--data", str(empty)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(doc[k] == [] for k in ("keys", "fds", "inds", "partitions", "optionalParticipations"))


def test_profile_reports_undeclared_references_and_is_stable(tmp_path):
    schema = tmp_path / "shop.sql"
    schema.write_text("CREATE TABLE product (nr TEXT PRIMARY KEY, label TEXT);\n"
                      "CREATE TABLE offer (nr TEXT PRIMARY KEY, product TEXT, price TEXT);\n")
    data = tmp_path / "data"
    data.mkdir()
    (data / "product.csv").write_text("nr,label\np1,a\np2,b\np3,c\n")
    (data / "offer.csv").write_text("nr,product,price\no1,p1,10\no2,p1,12\no3,p3,9\n")
    outs = []
    for n in range(2):
        out = tmp_path / f"c{n}.json"
        assert main(["profile", "--schema", str(schema), "--data", str(data), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    inds = json.loads(outs[0])["inds"]
    assert {"sourceTable": "offer", "source": ["product"], "targetTable": "product", "target": ["nr"]} in inds


def test_bootstrap_from_saved_constraints_matches_profiling(tmp_path):
    p = _files(tmp_path, "DR1Nm")
    cons = tmp_path / "c.json"
    assert main(["profile", "--schema", p["schema"], "--data", p["data"], "--out", str(cons)]) == 0
    for tag, extra in (("a", ["--data", p["data"]]), ("b", ["--data", p["data"], "--constraints", str(cons)])):
        assert main(["bootstrap", "--schema", p["schema"], "--base-iri", BASE, "--out", str(tmp_path / tag),
                     "--name", "s"] + extra) == 0
    assert (tmp_path / "a" / "s.obda").read_bytes() == (tmp_path / "b" / "s.obda").read_bytes()


def test_classify_round_trip_has_no_unknowns(tmp_path):
    p = _files(tmp_path, "CR2O")
    boot = tmp_path / "boot"
    assert main(["bootstrap", "--schema", p["schema"], "--data", p["data"], "--hints", p["hints"],
                 "--base-iri", BASE, "--out", str(boot), "--name", "m"]) == 0
    out = tmp_path / "cls"
    assert main(["classify", "--schema", p["schema"], "--data", p["data"], "--hints", p["hints"],
                 "--mappings", str(boot / "m.obda"), "--out", str(out), "--format", "json"]) == 0
    assignments = json.loads((out / "assignments.json").read_text())
    assert assignments and all(e["kind"] != "UNKNOWN" for e in assignments.values())
    report = json.loads((out / "report.json").read_text())
    assert report["unknown"] == {"applications": 0, "mappings": 0}
    assert (out / "classify.log").read_text()


def test_classify_counts_one_opaque_block(tmp_path, capsys):
    p = _files(tmp_path, "mPerson")
    m = tmp_path / "m.obda"
    m.write_text(M_PERSON.replace('SELECT "ssn" FROM "person_info"', "SELECT ssn FROM person_info WHERE ssn IN (SELECT ssn FROM person_info)"))
    assert main(["classify", "--schema", p["schema"], "--mappings", str(m), "--out", str(tmp_path / "c")]) == 0
    assert "1 UNKNOWN" in capsys.readouterr().out
    text = (tmp_path / "c" / "report.txt").read_text().splitlines()
    assert [line.split()[0] for line in text[1:len(CATALOG) + 2]] == list(CATALOG) + ["UNKNOWN"]
    assert text[len(CATALOG) + 1].split()[1:] == ["1", "1"]


@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_report_reformats_assignments(tmp_path, capsys, fmt):
    p = _files(tmp_path, "mPerson")
    assert main(["classify", "--schema", p["schema"], "--mappings", p["mappings"], "--out", str(tmp_path / "c")]) == 0
    capsys.readouterr()
    assert main(["report", "--assignments", str(tmp_path / "c" / "assignments.json"), "--format", fmt]) == 0
    out = capsys.readouterr().out
    assert "SE" in out


def test_report_rejects_bad_assignments(tmp_path):
    bad = tmp_path / "a.json"
    bad.write_text(json.dumps({"m": {"kind": "NOPE"}}))
    assert main(["report", "--assignments", str(bad)]) == 1
