"""Exception types shared across the package."""


class PortalMatchError(Exception):
    """Base class for all package errors."""


class ParseError(PortalMatchError):
    """A CSV file could not be parsed; message names file and line."""


class MetadataError(PortalMatchError):
    """A metadata sidecar is missing, unreadable, or structurally invalid."""


class EmptySchemaError(ParseError):
    """A CSV file has no columns."""


class IntegrityError(PortalMatchError):
    """A cross-reference points at something that does not exist."""


class ConfigError(PortalMatchError):
    """A configuration value or combination is invalid."""


class MissingInputError(PortalMatchError):
    """A pipeline stage input file is absent; message names the file."""
