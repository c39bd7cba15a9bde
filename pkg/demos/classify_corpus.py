"""Classify hand-written OBDA mappings and print a coverage report.

Each bundled mapping corpus is classified against its own schema, then the
assignments are pooled into one report.

    python demos/classify_corpus.py
"""
from vkgpatterns.classifier import build_report, classify, format_report
from vkgpatterns.fixtures import scenario_fixtures
from vkgpatterns.ingest import parse_obda


def main():
    pooled = {}
    for name, f in sorted(scenario_fixtures().items()):
        if not f.mappings:
            continue
        res = classify(parse_obda(f.mappings), f.schema(), f.data(), f.hints())
        for aid, inst in res.assignments.items():
            print(f"{name:10} {aid:24} {getattr(inst, 'label', 'UNKNOWN')}")
            pooled[f"{name}/{aid}"] = inst
    print()
    print(format_report(build_report(pooled)))


if __name__ == "__main__":
    main()
