"""Embedding providers and vector arithmetic.

The default provider is a deterministic lexical tf-idf vector space over
the corpus vocabulary.  Neural or other models plug in through a child
process speaking a line-delimited JSON protocol (see ExternalProvider).
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
import queue
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ladybug.errors import (
    DimensionMismatchError,
    EmptyCorpusError,
    ProviderDimensionError,
    ProviderItemError,
    ProviderLaunchError,
    ProviderMismatchError,
    ProviderProtocolError,
    ProviderTimeoutError,
)
from ladybug.preprocess import Segment, TokenStream


@dataclass(frozen=True)
class ProviderIdentity:
    """(name, version) pins embedding semantics; indexes record it."""

    name: str
    version: str
    dimension: int

    def same_semantics(self, other: "ProviderIdentity") -> bool:
        return self.name == other.name and self.version == other.version


@dataclass(eq=False)
class SegmentEmbedding:
    file_path: str
    segment_index: int
    vector: np.ndarray


class LexicalModel:
    """tf-idf vector space: one dimension per corpus vocabulary token.

    idf(t) = ln((N + 1) / (df + 1)) + 1 over N segments; the add-one keeps
    out-of-vocabulary query terms finite.  The vocabulary is sorted so the
    vector layout (and any serialization of it) is reproducible.
    """

    def __init__(self, vocabulary: Sequence[str], idf: np.ndarray, n_segments: int):
        self.vocabulary = tuple(vocabulary)
        self.idf = np.asarray(idf, dtype=np.float64)
        self.n_segments = int(n_segments)
        self._token_index = {t: i for i, t in enumerate(self.vocabulary)}
        if len(self.vocabulary) != self.idf.shape[0]:
            raise ValueError("vocabulary and idf length mismatch")

    @property
    def dimension(self) -> int:
        return len(self.vocabulary)

    def idf_of(self, token: str) -> float:
        """idf for any token; unknown tokens get the df=0 smoothed value."""
        i = self._token_index.get(token)
        if i is not None:
            return float(self.idf[i])
        return math.log((self.n_segments + 1) / 1.0) + 1.0

    def embed(self, tokens: TokenStream | Sequence[str]) -> np.ndarray:
        """tf x idf vector; out-of-vocabulary tokens are ignored."""
        vec = np.zeros(self.dimension, dtype=np.float64)
        counts = Counter(tokens.tokens if isinstance(tokens, TokenStream) else tokens)
        for token, count in counts.items():
            i = self._token_index.get(token)
            if i is not None:
                vec[i] = count * self.idf[i]
        return vec


def build_lexical_model(segments: Sequence[Segment]) -> LexicalModel:
    if not segments:
        raise EmptyCorpusError("cannot build a lexical model from zero segments")
    df: Counter[str] = Counter()
    for seg in segments:
        df.update(set(seg.tokens))
    vocabulary = sorted(df)
    n = len(segments)
    idf = np.array(
        [math.log((n + 1) / (df[t] + 1)) + 1.0 for t in vocabulary],
        dtype=np.float64,
    )
    return LexicalModel(vocabulary, idf, n)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs score 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(
            f"cosine over mismatched dimensions {u.shape[0]} vs {v.shape[0]}"
        )
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    value = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, value))


class LexicalProvider:
    """Default embedding provider; model is (re)built per corpus.

    ``corpus_calls`` / ``query_calls`` count embedding invocations so the
    index-freshness tests can observe whether a rebuild happened.
    """

    NAME = "lexical-tfidf"
    VERSION = "1"

    def __init__(self) -> None:
        self.corpus_calls = 0
        self.query_calls = 0
        self._lock = threading.Lock()

    def identity(self) -> ProviderIdentity:
        # Dimension is corpus dependent; 0 means "not fitted yet".
        return ProviderIdentity(self.NAME, self.VERSION, 0)

    def embed_corpus(
        self, segments: Sequence[Segment]
    ) -> tuple[list[SegmentEmbedding], LexicalModel | None, ProviderIdentity]:
        with self._lock:
            self.corpus_calls += 1
        model = build_lexical_model(segments)
        embeddings = [
            SegmentEmbedding(seg.file_path, seg.segment_index, model.embed(seg.tokens))
            for seg in segments
        ]
        identity = ProviderIdentity(self.NAME, self.VERSION, model.dimension)
        return embeddings, model, identity

    def embed_query(self, tokens: TokenStream, model: LexicalModel | None) -> np.ndarray:
        if model is None:
            raise ProviderMismatchError(
                "index carries no lexical model; it was not built by this provider"
            )
        with self._lock:
            self.query_calls += 1
        return model.embed(tokens)


class ExternalProvider:
    """Child-process embedding provider.

    Wire protocol (UTF-8, one JSON record per line on stdin/stdout):

      handshake (first line from provider):
        {"name": str, "version": str, "dimension": int}
      request:   {"id": int, "text": str}
      response:  {"id": int, "vector": [float, ...]}
                 or {"id": int, "error": str}

    Responses may arrive out of order; ids reconcile them.  ``timeout`` is
    the maximum wait for the provider's next output line.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 60.0):
        if isinstance(command, str):
            command = shlex.split(command)
        self.command = list(command)
        self.timeout = timeout
        self.corpus_calls = 0
        self.query_calls = 0
        self._identity: ProviderIdentity | None = None
        self._lock = threading.Lock()

    def identity(self) -> ProviderIdentity:
        """Provider identity from the handshake; probes the process once."""
        with self._lock:
            if self._identity is None:
                proc = self._spawn()
                try:
                    self._identity = self._read_handshake(proc)
                finally:
                    self._shutdown(proc)
            return self._identity

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Embed texts in request order; the process is spawned per batch."""
        if not texts:
            return []
        with self._lock:
            proc = self._spawn()
            try:
                identity = self._read_handshake(proc)
                if self._identity is None:
                    self._identity = identity
                elif not identity.same_semantics(self._identity) or (
                    identity.dimension != self._identity.dimension
                ):
                    raise ProviderProtocolError(
                        f"provider identity changed between runs: {identity} "
                        f"vs {self._identity}"
                    )
                return self._exchange(proc, texts, identity.dimension)
            finally:
                self._shutdown(proc)

    def embed_corpus(
        self, segments: Sequence[Segment]
    ) -> tuple[list[SegmentEmbedding], None, ProviderIdentity]:
        self.corpus_calls += 1
        vectors = self.embed_texts([" ".join(seg.tokens) for seg in segments])
        embeddings = [
            SegmentEmbedding(seg.file_path, seg.segment_index, vec)
            for seg, vec in zip(segments, vectors)
        ]
        return embeddings, None, self.identity()

    def embed_query(self, tokens: TokenStream, model: object = None) -> np.ndarray:
        self.query_calls += 1
        return self.embed_texts([" ".join(tokens.tokens)])[0]

    # -- internals ---------------------------------------------------------

    def _spawn(self) -> subprocess.Popen:
        try:
            return subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise ProviderLaunchError(
                f"cannot launch provider {self.command!r}: {exc}"
            ) from exc

    def _shutdown(self, proc: subprocess.Popen) -> None:
        try:
            if proc.stdin and not proc.stdin.closed:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def _read_handshake(self, proc: subprocess.Popen) -> ProviderIdentity:
        line = self._next_line(proc)
        if line is None:
            raise ProviderProtocolError("provider exited before the handshake")
        record = self._parse_record(line)
        name = record.get("name")
        version = record.get("version")
        dimension = record.get("dimension")
        if (
            not isinstance(name, str)
            or not isinstance(version, str)
            or not isinstance(dimension, int)
            or isinstance(dimension, bool)
            or dimension <= 0
        ):
            raise ProviderProtocolError(f"invalid handshake record: {line!r}")
        return ProviderIdentity(name, version, dimension)

    def _exchange(
        self, proc: subprocess.Popen, texts: Sequence[str], dimension: int
    ) -> list[np.ndarray]:
        requests = [
            json.dumps({"id": i, "text": t}, ensure_ascii=False)
            for i, t in enumerate(texts)
        ]
        writer = threading.Thread(
            target=self._write_requests, args=(proc, requests), daemon=True
        )
        writer.start()

        results: dict[int, np.ndarray] = {}
        while len(results) < len(texts):
            line = self._next_line(proc)
            if line is None:
                raise ProviderProtocolError(
                    f"provider exited after {len(results)} of {len(texts)} responses"
                )
            record = self._parse_record(line)
            item_id = record.get("id")
            if not isinstance(item_id, int) or isinstance(item_id, bool):
                raise ProviderProtocolError(f"response without integer id: {line!r}")
            if item_id < 0 or item_id >= len(texts) or item_id in results:
                raise ProviderProtocolError(
                    f"unexpected or duplicate response id {item_id}"
                )
            if "error" in record:
                raise ProviderItemError(
                    f"provider failed on item {item_id}: {record['error']}",
                    item_index=item_id,
                )
            vector = record.get("vector")
            if not isinstance(vector, list):
                raise ProviderProtocolError(f"response without vector: {line!r}")
            arr = np.asarray(vector, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != dimension:
                raise ProviderDimensionError(
                    f"item {item_id}: expected dimension {dimension}, "
                    f"got {arr.shape[0] if arr.ndim == 1 else arr.shape}",
                    item_index=item_id,
                )
            if not np.all(np.isfinite(arr)):
                raise ProviderProtocolError(f"item {item_id}: non-finite vector entry")
            results[item_id] = arr
        return [results[i] for i in range(len(texts))]

    @staticmethod
    def _write_requests(proc: subprocess.Popen, requests: list[str]) -> None:
        # Closing stdin signals end-of-batch; providers may buffer until EOF.
        try:
            assert proc.stdin is not None
            for line in requests:
                proc.stdin.write(line + "\n")
            proc.stdin.flush()
            proc.stdin.close()
        except (OSError, ValueError):
            # Reader side surfaces the failure as an early-exit error.
            pass

    def _next_line(self, proc: subprocess.Popen) -> str | None:
        """One stdout line within the timeout; None at EOF."""
        result: queue.Queue = queue.Queue(maxsize=1)

        def read_one() -> None:
            try:
                assert proc.stdout is not None
                result.put(proc.stdout.readline())
            except (OSError, ValueError) as exc:
                result.put(exc)

        reader = threading.Thread(target=read_one, daemon=True)
        reader.start()
        try:
            line = result.get(timeout=self.timeout)
        except queue.Empty:
            proc.kill()
            raise ProviderTimeoutError(
                f"no provider output within {self.timeout:.1f}s"
            ) from None
        if isinstance(line, Exception):
            raise ProviderProtocolError(f"provider stream failed: {line}")
        if line == "":
            return None
        return line

    @staticmethod
    def _parse_record(line: str) -> dict:
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderProtocolError(
                f"malformed provider response line: {line!r}"
            ) from exc
        if not isinstance(record, dict):
            raise ProviderProtocolError(f"provider response is not an object: {line!r}")
        return record


def embed_external(
    texts: Sequence[str], command: str | Sequence[str], timeout: float = 60.0
) -> list[np.ndarray]:
    """One-shot helper: run the external protocol for a batch of texts."""
    return ExternalProvider(command, timeout=timeout).embed_texts(texts)
