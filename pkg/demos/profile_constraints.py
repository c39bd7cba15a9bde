"""Recover constraints a schema forgot to declare.

The shop schema has keys but no foreign keys. Profiling the rows finds the
reference from offers to products. With this few rows it also reports
accidental keys such as product.label, which is why detection treats
discovered constraints as evidence over the given instance only.

    python demos/profile_constraints.py
"""
import json

from vkgpatterns.ingest import DataInstance, load_schema
from vkgpatterns.profiler import constraints_to_dict, profile

DDL = """
CREATE TABLE product (nr TEXT PRIMARY KEY, label TEXT, producer TEXT);
CREATE TABLE offer (nr TEXT PRIMARY KEY, product TEXT, price TEXT);
"""
ROWS = {
    "product": [("p1", "anvil", "acme"), ("p2", "rocket", "acme"), ("p3", "magnet", "initech")],
    "offer": [("o1", "p1", "10"), ("o2", "p1", "12"), ("o3", "p3", "9"), ("o4", "p2", "40")],
}


def main():
    schema = load_schema(DDL)
    dc = profile(schema, DataInstance.from_rows(schema, ROWS))
    print(json.dumps(constraints_to_dict(dc), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
