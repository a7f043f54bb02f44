"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class AtlasError(Exception):
    """Base class for all toolchain errors."""


# -- knowledge ---------------------------------------------------------------


class ParseError(AtlasError):
    """A data file could not be decoded."""


class SchemaError(AtlasError):
    """A data file decoded but does not follow its schema."""

    def __init__(self, message: str, field: str | None = None, record: object = None):
        super().__init__(message)
        self.field = field
        self.record = record


class DuplicateCwe(SchemaError):
    pass


class UnknownAssetType(SchemaError):
    pass


class BackendError(AtlasError):
    """The generation backend timed out or answered with something unusable."""


class InvalidDraft(AtlasError):
    """A drafted threat model kept failing validation."""

    def __init__(self, message: str, violations: list | None = None):
        super().__init__(message)
        self.violations = violations or []


# -- rtl frontend ------------------------------------------------------------


class RtlError(AtlasError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class RtlSyntaxError(RtlError):
    """Raised on malformed RTL.

    When the parser managed to recover, ``partial`` holds the best-effort tree
    and ``diagnostics`` lists every problem seen.
    """

    def __init__(self, message: str, line: int = 0, col: int = 0, partial=None, diagnostics=None):
        super().__init__(message, line, col)
        self.partial = partial
        self.diagnostics = diagnostics or []


class UnsupportedConstruct(RtlSyntaxError):
    def __init__(self, construct: str, line: int = 0, col: int = 0, partial=None, diagnostics=None):
        super().__init__(f"unsupported construct '{construct}'", line, col, partial, diagnostics)
        self.construct = construct


class DuplicateDecl(RtlError):
    def __init__(self, name: str, first_span, second_span):
        super().__init__(f"duplicate declaration of '{name}' (first at {first_span})",
                         second_span.start_line, second_span.start_col)
        self.name = name
        self.spans = (first_span, second_span)


class UnknownSignal(AtlasError):
    def __init__(self, name: str):
        super().__init__(f"unknown signal '{name}'")
        self.name = name


# -- asset detection / mapping -------------------------------------------------


class NoDefinitions(AtlasError):
    pass


class EmptyTmdb(AtlasError):
    pass


# -- context -----------------------------------------------------------------


class MissingContext(AtlasError):
    def __init__(self, part: str):
        super().__init__(f"missing context part '{part}'")
        self.part = part


# -- property generation -----------------------------------------------------


class NoTemplate(AtlasError):
    def __init__(self, cwe_id: int):
        super().__init__(f"no property template family applies to CWE-{cwe_id}")
        self.cwe_id = cwe_id


class IterationExceeded(AtlasError):
    pass


class UnvalidatedProperty(AtlasError):
    def __init__(self, name: str):
        super().__init__(f"property '{name}' has not been validated")
        self.name = name


# -- minicheck ---------------------------------------------------------------


class SvaSyntaxError(AtlasError):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(f"col {pos + 1}: {message}")
        self.pos = pos


class UnsupportedSvaFeature(SvaSyntaxError):
    def __init__(self, feature: str, pos: int = 0):
        super().__init__(f"unsupported SVA feature '{feature}'", pos)
        self.feature = feature


class DepthExceeded(AtlasError):
    pass


class GuardUnsupported(AtlasError):
    def __init__(self, expr: str):
        super().__init__(f"guard references signals outside state and free inputs: {expr}")
        self.expr = expr


class TraceError(AtlasError):
    pass


# -- cli ---------------------------------------------------------------------


class ConfigError(AtlasError):
    pass
