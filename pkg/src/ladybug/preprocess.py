"""Source and bug-report preprocessing: sanitize, tokenize, normalize, segment.

The pipeline turns raw Java text into lowercase stemmed tokens and splits
long files into segments of at most ``MAX_SEGMENT_TOKENS`` tokens, cutting
at method-close boundaries when one is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterator, Literal, Sequence

from ladybug import _kernels

MAX_SEGMENT_TOKENS = 500

Origin = Literal["source_file", "bug_report"]


@dataclass(frozen=True)
class TokenStream:
    """Ordered lowercase tokens plus where they came from."""

    tokens: tuple[str, ...]
    origin: Origin = "source_file"

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)


@dataclass(frozen=True)
class Segment:
    """A contiguous slice of one file's normalized token stream."""

    file_path: str
    segment_index: int
    tokens: tuple[str, ...]


@lru_cache(maxsize=1)
def stop_list() -> frozenset[str]:
    """Bundled stop set: English stop words plus Java reserved words."""
    text = (
        resources.files("ladybug").joinpath("data/stopwords.txt").read_text("utf-8")
    )
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def sanitize(raw_text: str) -> str:
    """Strip comments, import/package lines, literal delimiters, and
    everything outside ``[A-Za-z0-9_]`` plus whitespace."""
    return _kernels.sanitize_java(raw_text)[0]


def tokenize(sanitized_text: str, origin: Origin = "source_file") -> TokenStream:
    """Whitespace-split then break compound identifiers apart.

    camelCase humps, acronym runs, underscores, and letter/digit
    boundaries all split; parts come out lowercased.
    """
    return TokenStream(tuple(_kernels.split_tokens(sanitized_text)), origin)


def normalize_token(token: str) -> str | None:
    """Stop-filter and stem one lowercase token; None when dropped.

    The stop check runs again on the stemmed form so the output never
    contains a stop word, which is what makes normalize idempotent.
    """
    stop = stop_list()
    if len(token) <= 1 or token in stop:
        return None
    stemmed = _stem_fixed_point(token)
    if len(stemmed) <= 1 or stemmed in stop:
        return None
    return stemmed


def _stem_fixed_point(token: str) -> str:
    while True:
        stemmed = _kernels.porter_stem(token)
        if stemmed == token:
            return stemmed
        token = stemmed


def normalize(stream: TokenStream) -> TokenStream:
    kept = []
    for token in stream.tokens:
        out = normalize_token(token)
        if out is not None:
            kept.append(out)
    return TokenStream(tuple(kept), stream.origin)


def segment(
    file_path: str,
    stream: TokenStream,
    boundaries: Sequence[int] = (),
) -> list[Segment]:
    """Split a normalized stream into segments of <= MAX_SEGMENT_TOKENS.

    ``boundaries`` are token indexes recorded at method closings; the split
    point is the latest boundary that keeps the segment within the cap,
    with a hard cut when no boundary helps.  Segments cover the stream in
    order without overlap; a file always yields at least one segment.
    """
    tokens = stream.tokens
    n = len(tokens)
    if n <= MAX_SEGMENT_TOKENS:
        return [Segment(file_path, 0, tokens)]

    marks = sorted({b for b in boundaries if 0 < b < n})
    segments: list[Segment] = []
    start = 0
    while n - start > MAX_SEGMENT_TOKENS:
        cut = start + MAX_SEGMENT_TOKENS
        best = start
        for mark in marks:
            if start < mark <= cut:
                best = max(best, mark)
            elif mark > cut:
                break
        if best > start:
            cut = best
        segments.append(Segment(file_path, len(segments), tokens[start:cut]))
        start = cut
    segments.append(Segment(file_path, len(segments), tokens[start:]))
    return segments


def preprocess_source(file_path: str, raw_text: str) -> list[Segment]:
    """Full file pipeline: sanitize, tokenize, normalize, segment.

    Method boundaries recorded by the sanitizer are carried through
    tokenization and normalization so that segmentation can cut at them.
    """
    clean, char_boundaries = _kernels.sanitize_java(raw_text)
    raw_tokens, offsets = _kernels.split_tokens_with_offsets(clean)

    norm_tokens: list[str] = []
    token_boundaries: list[int] = []
    b = 0
    n_marks = len(char_boundaries)
    for token, offset in zip(raw_tokens, offsets):
        while b < n_marks and char_boundaries[b] <= offset:
            token_boundaries.append(len(norm_tokens))
            b += 1
        out = normalize_token(token)
        if out is not None:
            norm_tokens.append(out)

    stream = TokenStream(tuple(norm_tokens), "source_file")
    return segment(file_path, stream, token_boundaries)


def preprocess_query(text: str) -> TokenStream:
    """Bug-report pipeline: tokenize and normalize, never sanitize or segment.

    The tokenizer treats any non-alphanumeric character as a separator, so
    report prose needs no comment or punctuation stripping beforehand.
    """
    return normalize(tokenize(text, "bug_report"))
