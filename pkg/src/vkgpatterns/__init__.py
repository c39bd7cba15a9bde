"""Mapping-pattern engine for virtual knowledge graph design."""
