"""Exception hierarchy shared across the package.

Every error carries a ``category`` used by the CLI to prefix diagnostics
(ingest / embed / storage / config / trace / dataset).
"""

from __future__ import annotations


class LadybugError(Exception):
    category = "error"


class RepoPathError(LadybugError):
    """Repository root missing or unreadable."""

    category = "ingest"


class EmptyCorpusError(LadybugError):
    """No Java source files found; localization would be vacuous."""

    category = "ingest"


class DimensionMismatchError(LadybugError):
    """Vectors of different dimensions were combined."""

    category = "embed"


class ProviderMismatchError(LadybugError):
    """Query provider identity differs from the identity the index records."""

    category = "embed"


class ProviderError(LadybugError):
    """Base class for external embedding provider failures."""

    category = "embed"


class ProviderLaunchError(ProviderError):
    pass


class ProviderProtocolError(ProviderError):
    pass


class ProviderDimensionError(ProviderError):
    """Provider returned a vector whose length drifts from its handshake."""

    def __init__(self, message: str, item_index: int):
        super().__init__(message)
        self.item_index = item_index


class ProviderItemError(ProviderError):
    """Provider reported a per-item failure record."""

    def __init__(self, message: str, item_index: int):
        super().__init__(message)
        self.item_index = item_index


class ProviderTimeoutError(ProviderError):
    pass


class ConfigurationError(LadybugError):
    category = "config"


class TraceError(LadybugError):
    category = "trace"


class TraceParseError(TraceError):
    pass


class TraceSchemaError(TraceError):
    pass


class StorageError(LadybugError):
    category = "storage"


class IndexLockError(StorageError):
    pass


class CorruptIndexError(StorageError):
    pass


class IndexVersionError(StorageError):
    pass


class IndexInvariantError(StorageError):
    pass


class DatasetError(LadybugError):
    category = "dataset"
