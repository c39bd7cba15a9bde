"""Command-line entry point: ``vkgpatterns bootstrap|profile|classify|report``.

Exit codes: 0 success, 1 usage or parse errors, 2 when the cascade does not
reach a fixpoint within ``--max-rounds``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .classifier import assignments_from_dict, assignments_to_dict, build_report, classify, format_report
from .emit import emit_obda, emit_ontology, emit_r2rml
from .errors import FixpointOverflow, VKGError
from .generator import emit_conceptual_summary, generate_all
from .hints import EMPTY_HINTS, parse_hints
from .ingest import load_csv_dir, load_schema, parse_obda
from .patterns import _partition_candidates, detect_all
from .profiler import ProfilerConfig, constraints_from_dict, constraints_to_dict, profile

log = logging.getLogger("vkgpatterns")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _bounds(p):
    d = ProfilerConfig()
    p.add_argument("--max-key-arity", type=int, default=d.max_key_arity)
    p.add_argument("--max-determinant", type=int, default=d.max_fd_determinant)
    p.add_argument("--max-ind-arity", type=int, default=d.max_ind_arity)
    p.add_argument("--max-values", type=int, default=d.max_partition_values)


def _config(a) -> ProfilerConfig:
    return ProfilerConfig(a.max_key_arity, a.max_determinant, a.max_ind_arity, a.max_values)


def _inputs(a):
    schema = load_schema(_read(a.schema))
    data = load_csv_dir(a.data, schema) if getattr(a, "data", None) else None
    hints = parse_hints(_read(a.hints)) if getattr(a, "hints", None) else EMPTY_HINTS
    constraints = None
    if getattr(a, "constraints", None):
        constraints = constraints_from_dict(json.loads(_read(a.constraints)))
    return schema, data, hints, constraints


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="vkgpatterns", description="Mapping-pattern engine for virtual knowledge graphs.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("bootstrap", help="detect patterns and write mappings and an ontology")
    b.add_argument("--schema", required=True, help="DDL script or JSON schema document")
    b.add_argument("--data", help="directory with one <table>.csv per table")
    b.add_argument("--hints", help="hints JSON document")
    b.add_argument("--constraints", help="constraints document from 'profile', used instead of profiling")
    b.add_argument("--base-iri", required=True, help="IRI bound to the default ':' prefix")
    b.add_argument("--out", default=".", help="output directory")
    b.add_argument("--name", help="output file stem (default: schema file stem)")
    b.add_argument("--max-rounds", type=int, default=4)
    _bounds(b)

    p = sub.add_parser("profile", help="discover keys, FDs, INDs and partitions")
    p.add_argument("--schema", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--hints", help="hints JSON; cluster candidates widen partition discovery")
    p.add_argument("--out", help="output file (default: stdout)")
    _bounds(p)

    c = sub.add_parser("classify", help="assign mapping assertions to catalog patterns")
    c.add_argument("--schema", required=True)
    c.add_argument("--mappings", required=True, help="OBDA mapping file")
    c.add_argument("--data")
    c.add_argument("--hints")
    c.add_argument("--constraints")
    c.add_argument("--out", default=".", help="output directory")
    c.add_argument("--format", choices=("text", "json", "csv"), default="text")
    _bounds(c)

    r = sub.add_parser("report", help="reformat an assignments JSON into a coverage report")
    r.add_argument("--assignments", required=True)
    r.add_argument("--format", choices=("text", "json", "csv"), default="text")
    r.add_argument("--out", help="output file (default: stdout)")
    return top


def cmd_bootstrap(a) -> int:
    schema, data, hints, constraints = _inputs(a)
    result = detect_all(schema, data, hints, _config(a), a.max_rounds, constraints)
    gen = generate_all(result.instances, result.derived_schema, result.hints)
    prefixes = {"": a.base_iri}
    name = a.name or os.path.splitext(os.path.basename(a.schema))[0]
    os.makedirs(a.out, exist_ok=True)
    stem = os.path.join(a.out, name)
    _write(stem + ".obda", emit_obda(gen.assertions, prefixes))
    _write(stem + ".r2rml.ttl", emit_r2rml(gen.assertions, prefixes))
    _write(stem + ".ontology.ttl", emit_ontology(gen.axioms, prefixes, gen.assertions))
    _write(stem + ".conceptual.txt",
           emit_conceptual_summary(result.instances, result.derived_schema, result.hints))
    _write(stem + ".detection.log", result.log_text())
    print(f"{len(result.instances)} pattern instances, {len(gen.assertions)} mapping assertions, "
          f"{len(set(gen.axioms))} axioms -> {stem}.*")
    return 0


def cmd_profile(a) -> int:
    schema, data, hints, _ = _inputs(a)
    dc = profile(schema, data, _config(a), _partition_candidates(hints))
    text = _dump(constraints_to_dict(dc))
    if a.out:
        _write(a.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(a) -> int:
    schema, data, hints, constraints = _inputs(a)
    doc = parse_obda(_read(a.mappings))
    res = classify(doc, schema, data, hints, _config(a), constraints)
    os.makedirs(a.out, exist_ok=True)
    _write(os.path.join(a.out, "assignments.json"), _dump(assignments_to_dict(res.assignments)))
    ext = {"text": "txt", "json": "json", "csv": "csv"}[a.format]
    _write(os.path.join(a.out, f"report.{ext}"), format_report(res.report, a.format))
    _write(os.path.join(a.out, "classify.log"), "\n".join(res.log) + "\n")
    unknown = sum(1 for v in res.assignments.values() if not hasattr(v, "kind"))
    print(f"{len(res.assignments)} assertions classified, {unknown} UNKNOWN -> {a.out}")
    return 0


def cmd_report(a) -> int:
    assignments = assignments_from_dict(json.loads(_read(a.assignments)))
    text = format_report(build_report(assignments), a.format)
    if a.out:
        _write(a.out, text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"bootstrap": cmd_bootstrap, "profile": cmd_profile, "classify": cmd_classify,
            "report": cmd_report}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        return COMMANDS[a.command](a)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except FixpointOverflow as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (VKGError, OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
