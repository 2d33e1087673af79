"""Repository snapshots: walk a tree, keep the Java sources, pin a commit id.

A snapshot is the unit the index is built from.  The commit identifier is
the version-control head when one exists, otherwise a content digest, so
staleness checks work on plain directories too.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass
from pathlib import Path

from ladybug.errors import EmptyCorpusError, RepoPathError

_VCS_DIRS = frozenset({".git", ".hg", ".svn"})
_SHA_RE = re.compile(r"^[0-9a-f]{40}([0-9a-f]{24})?$")


@dataclass(frozen=True)
class SourceFileRecord:
    relative_path: str  # repo-relative, '/'-separated
    raw_text: str


@dataclass(frozen=True)
class RepoSnapshot:
    root_path: str
    commit_id: str
    files: tuple[SourceFileRecord, ...]


def snapshot_repository(root_path: str | os.PathLike[str]) -> RepoSnapshot:
    """Collect the ``.java`` files under ``root_path`` plus a commit id.

    Version-control metadata directories are skipped and symlinks are not
    followed.  Files are decoded as UTF-8 with invalid bytes replaced, and
    sorted by path in byte order.  Raises RepoPathError for an unusable
    root and EmptyCorpusError when no Java file exists.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise RepoPathError(f"not a readable directory: {root}")

    records = []
    raw_digests = []
    try:
        entries = _walk_java_files(root)
    except OSError as exc:
        raise RepoPathError(f"cannot read {root}: {exc}") from exc
    for rel_path, abs_path in entries:
        try:
            data = abs_path.read_bytes()
        except OSError as exc:
            raise RepoPathError(f"cannot read {abs_path}: {exc}") from exc
        records.append(
            SourceFileRecord(rel_path, data.decode("utf-8", errors="replace"))
        )
        raw_digests.append((rel_path, data))

    if not records:
        raise EmptyCorpusError(f"empty corpus: no .java files under {root}")

    records.sort(key=lambda r: r.relative_path.encode("utf-8"))
    raw_digests.sort(key=lambda pair: pair[0].encode("utf-8"))

    commit_id = _read_vcs_head(root)
    if commit_id is None:
        commit_id = _content_digest(raw_digests)

    return RepoSnapshot(str(root), commit_id, tuple(records))


def _walk_java_files(root: Path) -> list[tuple[str, Path]]:
    found = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames[:] = [d for d in dirnames if d not in _VCS_DIRS]
        dirnames.sort()
        for name in filenames:
            if not name.endswith(".java"):
                continue
            abs_path = Path(dirpath) / name
            if abs_path.is_symlink():
                continue
            rel = abs_path.relative_to(root).as_posix()
            found.append((rel, abs_path))
    return found


def _content_digest(pairs: list[tuple[str, bytes]]) -> str:
    digest = hashlib.sha256()
    for rel_path, data in pairs:
        digest.update(rel_path.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(str(len(data)).encode("ascii"))
        digest.update(b"\x00")
        digest.update(data)
    return "sha256:" + digest.hexdigest()


def _read_vcs_head(root: Path) -> str | None:
    """Resolve the git head commit, if this tree is a git checkout."""
    git_dir = root / ".git"
    if not git_dir.is_dir():
        return None
    try:
        head = (git_dir / "HEAD").read_text("utf-8").strip()
    except OSError:
        return None
    if _SHA_RE.match(head):
        return head
    if head.startswith("ref: "):
        ref = head[5:].strip()
        ref_file = git_dir / ref
        try:
            value = ref_file.read_text("utf-8").strip()
            if _SHA_RE.match(value):
                return value
        except OSError:
            pass
        packed = git_dir / "packed-refs"
        try:
            for line in packed.read_text("utf-8").splitlines():
                line = line.strip()
                if line.startswith("#") or line.startswith("^") or not line:
                    continue
                parts = line.split(" ", 1)
                if len(parts) == 2 and parts[1] == ref and _SHA_RE.match(parts[0]):
                    return parts[0]
        except OSError:
            pass
    return None


def is_stale(snapshot_commit_id: str, stored_commit_id: str) -> bool:
    """True iff the two commit identifiers differ (exact, case-sensitive)."""
    if not snapshot_commit_id or not stored_commit_id:
        raise ValueError("commit identifiers must be non-empty")
    return snapshot_commit_id != stored_commit_id
