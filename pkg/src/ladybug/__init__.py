"""GUI-aware bug localization for Android (Java) repositories.

Ranks source files against a bug report with a vector-space (or external
neural) embedding of preprocessed code, then refines the ranking with GUI
terms extracted from a reproduction trace: query reformulation, screen
filtering, and screen-name boosting.
"""

from ladybug.corpus import RepoSnapshot, SourceFileRecord, is_stale, snapshot_repository
from ladybug.embedding import (
    ExternalProvider,
    LexicalModel,
    LexicalProvider,
    ProviderIdentity,
    SegmentEmbedding,
    build_lexical_model,
    cosine,
    embed_external,
)
from ladybug.index_store import (
    CorpusIndex,
    Freshness,
    build_index,
    ensure_fresh,
    load_index,
    save_index,
    staleness_decision,
)
from ladybug.localize import (
    LocalizeConfig,
    RankedList,
    RankEntry,
    boost_ranking,
    filter_ranking,
    localize,
    rank_files,
    reformulate_query,
    render_markdown,
)
from ladybug.preprocess import (
    MAX_SEGMENT_TOKENS,
    Segment,
    TokenStream,
    normalize,
    preprocess_query,
    preprocess_source,
    sanitize,
    segment,
    tokenize,
)
from ladybug.trace import (
    ExecutionTrace,
    GuiScreenTerm,
    GuiTermSet,
    InteractionStep,
    extract_gui_screen_terms,
    extract_screen_component_terms,
    parse_trace,
    serialize_trace,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusIndex",
    "ExecutionTrace",
    "ExternalProvider",
    "Freshness",
    "GuiScreenTerm",
    "GuiTermSet",
    "InteractionStep",
    "LexicalModel",
    "LexicalProvider",
    "LocalizeConfig",
    "MAX_SEGMENT_TOKENS",
    "ProviderIdentity",
    "RankEntry",
    "RankedList",
    "RepoSnapshot",
    "Segment",
    "SegmentEmbedding",
    "SourceFileRecord",
    "TokenStream",
    "boost_ranking",
    "build_index",
    "build_lexical_model",
    "cosine",
    "embed_external",
    "ensure_fresh",
    "extract_gui_screen_terms",
    "extract_screen_component_terms",
    "filter_ranking",
    "is_stale",
    "load_index",
    "localize",
    "normalize",
    "parse_trace",
    "preprocess_query",
    "preprocess_source",
    "rank_files",
    "reformulate_query",
    "render_markdown",
    "sanitize",
    "save_index",
    "segment",
    "serialize_trace",
    "snapshot_repository",
    "staleness_decision",
    "tokenize",
]
