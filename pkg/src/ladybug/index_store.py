"""Corpus index: the persisted product of snapshot + preprocess + embed.

One index file per (repository, provider) pair.  The on-disk format is a
single deterministic binary blob — magic, format version, header, then
length-prefixed records, little-endian throughout, floats as 64-bit
IEEE-754 — so identical indexes are byte-identical files.
"""

from __future__ import annotations

import os
import struct
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from ladybug.corpus import RepoSnapshot, snapshot_repository
from ladybug.embedding import LexicalModel, ProviderIdentity, SegmentEmbedding
from ladybug.errors import (
    CorruptIndexError,
    IndexInvariantError,
    IndexLockError,
    IndexVersionError,
    StorageError,
)
from ladybug.preprocess import Segment, preprocess_source

MAGIC = b"LBINDEX\x00"
FORMAT_VERSION = 1


@dataclass(eq=False)
class CorpusIndex:
    commit_id: str
    provider: ProviderIdentity
    segment_embeddings: tuple[SegmentEmbedding, ...]
    file_token_sets: dict[str, frozenset[str]]
    lexical_model: LexicalModel | None = None

    def __post_init__(self) -> None:
        # Canonical ordering makes serialization (and equality) stable.
        self.segment_embeddings = tuple(
            sorted(
                self.segment_embeddings,
                key=lambda s: (s.file_path, s.segment_index),
            )
        )
        self.file_token_sets = {
            path: frozenset(tokens)
            for path, tokens in sorted(self.file_token_sets.items())
        }
        self._arrays: tuple[np.ndarray, np.ndarray, list[str]] | None = None

    def validate(self) -> None:
        if not self.commit_id:
            raise IndexInvariantError("index has an empty commit id")
        seen: set[tuple[str, int]] = set()
        files_with_segments: set[str] = set()
        for emb in self.segment_embeddings:
            key = (emb.file_path, emb.segment_index)
            if key in seen:
                raise IndexInvariantError(f"duplicate segment {key}")
            seen.add(key)
            files_with_segments.add(emb.file_path)
            if emb.vector.ndim != 1 or emb.vector.shape[0] != self.provider.dimension:
                raise IndexInvariantError(
                    f"segment {key} vector has dimension {emb.vector.shape}, "
                    f"provider declares {self.provider.dimension}"
                )
            if not np.all(np.isfinite(emb.vector)):
                raise IndexInvariantError(f"segment {key} vector has non-finite entries")
        token_files = set(self.file_token_sets)
        if files_with_segments != token_files:
            missing = files_with_segments ^ token_files
            raise IndexInvariantError(
                f"files and segment embeddings disagree on: {sorted(missing)[:5]}"
            )
        if self.lexical_model is not None:
            if self.lexical_model.dimension != self.provider.dimension:
                raise IndexInvariantError(
                    "lexical model dimension differs from provider dimension"
                )

    def scoring_arrays(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        """(segment matrix, segment norms, segment file paths), cached."""
        if self._arrays is None:
            n = len(self.segment_embeddings)
            dim = self.provider.dimension
            matrix = np.zeros((n, dim), dtype=np.float64)
            paths = []
            for i, emb in enumerate(self.segment_embeddings):
                matrix[i, :] = emb.vector
                paths.append(emb.file_path)
            norms = np.linalg.norm(matrix, axis=1)
            self._arrays = (matrix, norms, paths)
        return self._arrays

    def same_as(self, other: "CorpusIndex") -> bool:
        if (
            self.commit_id != other.commit_id
            or self.provider != other.provider
            or self.file_token_sets != other.file_token_sets
            or len(self.segment_embeddings) != len(other.segment_embeddings)
        ):
            return False
        for a, b in zip(self.segment_embeddings, other.segment_embeddings):
            if (
                a.file_path != b.file_path
                or a.segment_index != b.segment_index
                or not np.array_equal(a.vector, b.vector)
            ):
                return False
        a_model, b_model = self.lexical_model, other.lexical_model
        if (a_model is None) != (b_model is None):
            return False
        if a_model is not None and b_model is not None:
            if (
                a_model.vocabulary != b_model.vocabulary
                or not np.array_equal(a_model.idf, b_model.idf)
                or a_model.n_segments != b_model.n_segments
            ):
                return False
        return True


@dataclass(frozen=True)
class IndexHeader:
    commit_id: str
    provider: ProviderIdentity
    n_files: int
    n_segments: int
    has_model: bool


# -- binary encoding ---------------------------------------------------------


def _pack_str(out: bytearray, value: str) -> None:
    data = value.encode("utf-8")
    out += struct.pack("<I", len(data))
    out += data


def _encode(index: CorpusIndex) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", FORMAT_VERSION)
    _pack_str(out, index.commit_id)
    _pack_str(out, index.provider.name)
    _pack_str(out, index.provider.version)
    out += struct.pack(
        "<III",
        index.provider.dimension,
        len(index.file_token_sets),
        len(index.segment_embeddings),
    )
    out += struct.pack("<B", 1 if index.lexical_model is not None else 0)

    for emb in index.segment_embeddings:
        _pack_str(out, emb.file_path)
        out += struct.pack("<II", emb.segment_index, emb.vector.shape[0])
        out += np.ascontiguousarray(emb.vector, dtype="<f8").tobytes()

    for path, tokens in index.file_token_sets.items():
        _pack_str(out, path)
        ordered = sorted(tokens)
        out += struct.pack("<I", len(ordered))
        for token in ordered:
            _pack_str(out, token)

    model = index.lexical_model
    if model is not None:
        out += struct.pack("<II", len(model.vocabulary), model.n_segments)
        for token in model.vocabulary:
            _pack_str(out, token)
        out += np.ascontiguousarray(model.idf, dtype="<f8").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptIndexError(
                f"truncated index file: wanted {n} bytes at offset {self.pos}"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        length = self.u32()
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndexError(f"undecodable string at offset {self.pos}") from exc

    def f64_array(self, count: int) -> np.ndarray:
        raw = self.take(count * 8)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)

    def done(self) -> bool:
        return self.pos == len(self.data)


def _read_header(reader: _Reader) -> IndexHeader:
    magic = reader.take(len(MAGIC))
    if magic != MAGIC:
        raise CorruptIndexError("not an index file (bad magic)")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"unsupported index format version {version} (expected {FORMAT_VERSION})"
        )
    commit_id = reader.string()
    name = reader.string()
    provider_version = reader.string()
    dimension = reader.u32()
    n_files = reader.u32()
    n_segments = reader.u32()
    has_model = reader.u8() != 0
    return IndexHeader(
        commit_id=commit_id,
        provider=ProviderIdentity(name, provider_version, dimension),
        n_files=n_files,
        n_segments=n_segments,
        has_model=has_model,
    )


def save_index(index: CorpusIndex, path: str | os.PathLike[str]) -> None:
    """Write the index atomically (temp file + rename) with an fsync."""
    target = Path(path)
    payload = _encode(index)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            prefix=target.name + ".", suffix=".tmp", dir=target.parent
        )
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, target)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise
    except OSError as exc:
        raise StorageError(f"cannot write index to {target}: {exc}") from exc


def read_index_header(path: str | os.PathLike[str]) -> IndexHeader:
    """Header only — enough to decide freshness without a full load."""
    try:
        with open(path, "rb") as handle:
            prefix = handle.read(64 * 1024)
    except OSError as exc:
        raise StorageError(f"cannot read index at {path}: {exc}") from exc
    return _read_header(_Reader(prefix))


def load_index(path: str | os.PathLike[str]) -> CorpusIndex:
    """Parse and fully validate an index file."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read index at {path}: {exc}") from exc

    reader = _Reader(data)
    header = _read_header(reader)

    embeddings = []
    for _ in range(header.n_segments):
        file_path = reader.string()
        segment_index = reader.u32()
        length = reader.u32()
        if length != header.provider.dimension:
            raise IndexInvariantError(
                f"segment vector length {length} != declared dimension "
                f"{header.provider.dimension}"
            )
        embeddings.append(
            SegmentEmbedding(file_path, segment_index, reader.f64_array(length))
        )

    token_sets: dict[str, frozenset[str]] = {}
    for _ in range(header.n_files):
        file_path = reader.string()
        count = reader.u32()
        token_sets[file_path] = frozenset(reader.string() for _ in range(count))

    model = None
    if header.has_model:
        vocab_size = reader.u32()
        n_segments = reader.u32()
        vocabulary = [reader.string() for _ in range(vocab_size)]
        idf = reader.f64_array(vocab_size)
        model = LexicalModel(vocabulary, idf, n_segments)

    if not reader.done():
        raise CorruptIndexError(
            f"{len(reader.data) - reader.pos} trailing bytes after index payload"
        )

    index = CorpusIndex(
        commit_id=header.commit_id,
        provider=header.provider,
        segment_embeddings=tuple(embeddings),
        file_token_sets=token_sets,
        lexical_model=model,
    )
    index.validate()
    return index


# -- build + freshness -------------------------------------------------------


class Freshness(Enum):
    REUSE = "reuse"
    REBUILD_COMMIT_CHANGED = "rebuild-commit-changed"
    REBUILD_PROVIDER_CHANGED = "rebuild-provider-changed"
    REBUILD_NO_INDEX = "rebuild-no-index"
    REBUILD_UNREADABLE = "rebuild-unreadable"


def staleness_decision(
    stored_commit_id: str,
    stored_provider: ProviderIdentity,
    current_commit_id: str,
    current_provider: ProviderIdentity,
) -> Freshness:
    """Pure trichotomy: reuse, rebuild on commit change, rebuild on provider
    change.  A commit change wins when both differ."""
    if stored_commit_id != current_commit_id:
        return Freshness.REBUILD_COMMIT_CHANGED
    if not stored_provider.same_semantics(current_provider):
        return Freshness.REBUILD_PROVIDER_CHANGED
    return Freshness.REUSE


def build_index(snapshot: RepoSnapshot, provider) -> CorpusIndex:
    """Preprocess every file in the snapshot and embed all segments."""
    segments: list[Segment] = []
    token_sets: dict[str, frozenset[str]] = {}
    for record in snapshot.files:
        file_segments = preprocess_source(record.relative_path, record.raw_text)
        segments.extend(file_segments)
        token_sets[record.relative_path] = frozenset(
            token for seg in file_segments for token in seg.tokens
        )
    embeddings, model, identity = provider.embed_corpus(segments)
    index = CorpusIndex(
        commit_id=snapshot.commit_id,
        provider=identity,
        segment_embeddings=tuple(embeddings),
        file_token_sets=token_sets,
        lexical_model=model,
    )
    index.validate()
    return index


def ensure_fresh(
    repo_root: str | os.PathLike[str],
    store_path: str | os.PathLike[str],
    provider,
    on_event: Callable[[Freshness, RepoSnapshot], None] | None = None,
) -> CorpusIndex:
    """Return a current index, reusing the stored one when it is fresh.

    The stored index is reused only when its commit id matches the current
    snapshot and its provider identity matches the given provider; any
    mismatch (or unreadable store) triggers a full rebuild and save.
    """
    snapshot = snapshot_repository(repo_root)
    store = Path(store_path)

    decision = Freshness.REBUILD_NO_INDEX
    if store.exists():
        try:
            header = read_index_header(store)
        except (StorageError, CorruptIndexError, IndexVersionError):
            decision = Freshness.REBUILD_UNREADABLE
        else:
            decision = staleness_decision(
                header.commit_id,
                header.provider,
                snapshot.commit_id,
                provider.identity(),
            )

    if decision is Freshness.REUSE:
        try:
            index = load_index(store)
        except (StorageError, CorruptIndexError, IndexVersionError, IndexInvariantError):
            decision = Freshness.REBUILD_UNREADABLE
        else:
            if on_event is not None:
                on_event(decision, snapshot)
            return index

    if on_event is not None:
        on_event(decision, snapshot)
    index = build_index(snapshot, provider)
    save_index(index, store)
    return index


# -- advisory lock ------------------------------------------------------------


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    except OSError:
        return False
    return True


@contextmanager
def index_lock(
    store_path: str | os.PathLike[str],
    timeout: float = 10.0,
    poll_interval: float = 0.05,
) -> Iterator[None]:
    """Advisory writer lock: ``<index>.lock`` holding the writer's pid.

    Locks left by dead processes are broken; a live holder makes the
    caller wait up to ``timeout`` and then fail.
    """
    lock_path = str(store_path) + ".lock"
    deadline = time.monotonic() + timeout
    while True:
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
        except FileExistsError:
            holder = 0
            try:
                holder = int(Path(lock_path).read_text("ascii").strip() or "0")
            except (OSError, ValueError):
                pass
            if holder > 0 and not _pid_alive(holder):
                try:
                    os.unlink(lock_path)
                except OSError:
                    pass
                continue
            if time.monotonic() >= deadline:
                raise IndexLockError(
                    f"index is locked by pid {holder or 'unknown'}: {lock_path}"
                ) from None
            time.sleep(poll_interval)
        except OSError as exc:
            raise StorageError(f"cannot create lock file {lock_path}: {exc}") from exc
        else:
            with os.fdopen(fd, "w") as handle:
                handle.write(str(os.getpid()))
            break
    try:
        yield
    finally:
        try:
            os.unlink(lock_path)
        except OSError:
            pass
