"""Parsers for DDL, schema documents, CSV data and OBDA mapping files."""

from .csvdata import DataInstance, format_csv, load_csv_dir, parse_csv
from .ddl import emit_ddl, parse_ddl
from .obda import ObdaDocument, format_target, format_term, parse_obda
from .schemadoc import emit_schema_doc, load_schema, parse_schema_doc, schema_to_dict

__all__ = [
    "DataInstance", "ObdaDocument", "emit_ddl", "emit_schema_doc", "format_csv", "format_target",
    "format_term", "load_csv_dir", "load_schema", "parse_csv", "parse_ddl", "parse_obda",
    "parse_schema_doc", "schema_to_dict",
]
