"""Exception hierarchy shared by every stage of the pipeline."""


class VKGError(Exception):
    """Base class for all errors raised by :mod:`vkgpatterns`."""


class ModelError(VKGError):
    """A core-model value violates one of its invariants."""


class MalformedQuery(ModelError):
    """A source query leaves the conjunctive fragment or is ill-formed."""


class NullInIdentifier(VKGError):
    """A template placeholder received a null value."""


class SyntaxError(VKGError):  # noqa: A001 - mirrors the parser vocabulary
    def __init__(self, where, reason):
        self.where = where
        self.reason = reason
        super().__init__(f"{where}: {reason}")


class DanglingReference(VKGError):
    """A foreign key or inclusion dependency points at nothing."""


class SchemaDocError(VKGError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class HeaderMismatch(VKGError):
    def __init__(self, table, missing, extra):
        self.table = table
        self.missing = tuple(missing)
        self.extra = tuple(extra)
        super().__init__(f"{table}: missing columns {list(self.missing)}, unexpected columns {list(self.extra)}")


class UnsupportedSql(VKGError):
    """SQL outside the supported conjunctive subset."""


class HintsError(VKGError):
    """The hints document names tables or attributes that do not exist."""


class FixpointOverflow(VKGError):
    """Cascaded detection still produced new views after the round limit."""


class IncompleteBindings(VKGError):
    def __init__(self, kind, missing):
        self.kind = kind
        self.missing = missing
        super().__init__(f"{kind} instance lacks binding for role {missing!r}")


class SchemaMismatch(VKGError):
    def __init__(self, assertion_id, table):
        self.assertion_id = assertion_id
        self.table = table
        super().__init__(f"mapping {assertion_id!r} references unknown relation {table!r}")
