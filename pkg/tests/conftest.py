"""Shared fixtures: the planted mini-repo, its trace, and dataset helpers.

The mini-repo is engineered so that the text-only pipeline buries the
ground-truth file (it shares no normalized token with the bug report,
while every decoy shares at least one) and the GUI pipeline pins it to
rank 1 (only the ground-truth file matches the trace's screen name).
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

# Ground truth: the only file containing the trace's screen class name.
# It must share no normalized token with BUG_REPORT below.
_NOTE_EDITOR = """\
package org.notesmith.editor;

public class NoteEditorActivity extends Activity {

    private EditText titleField;
    private EditText bodyField;
    private boolean dirty;

    @Override
    protected void onCreate(Bundle bundle) {
        super.onCreate(bundle);
        inflateLayout(R.layout.note_editor);
        titleField = findViewById(R.id.note_title_field);
        bodyField = findViewById(R.id.note_body_field);
        dirty = false;
    }

    public void applyBoldStyle() {
        CharSequence body = bodyField.getText();
        SpannableString styled = new SpannableString(body);
        styled.applySpan(new StyleSpan(Typeface.BOLD), 0, body.length());
        bodyField.replaceText(styled);
        dirty = true;
    }

    public void toggleChecklistMarker(int line) {
        CharSequence title = titleField.getText();
        if (title.length() > line) {
            dirty = true;
        }
    }
}
"""

# Each decoy's class name carries a token of the bug report, so every
# decoy outscores the ground truth in the text-only pipeline.
_DECOYS = {
    "src/SyncService.java": """\
package org.notesmith.sync;

public class SyncService {
    public void runSync() {
        long deadline = clock.now() + windowMillis;
        scheduler.enqueue(this, deadline);
    }
}
""",
    "src/CrashReporter.java": """\
package org.notesmith.diagnostics;

public class CrashReporter {
    public void reportCrash(Throwable cause) {
        Log.wtf("crash", cause);
        queue.submit(cause);
    }
}
""",
    "src/AttachmentStore.java": """\
package org.notesmith.storage;

public class AttachmentStore {
    public void putAttachment(long noteId, byte[] payload) {
        File target = resolve(noteId);
        writeAll(target, payload);
    }
}
""",
    "src/DatabaseHelper.java": """\
package org.notesmith.storage;

public class DatabaseHelper {
    public Cursor queryDatabase(String table) {
        return connection.rawQuery("SELECT * FROM " + table, null);
    }
}
""",
    "src/UploadManager.java": """\
package org.notesmith.net;

public class UploadManager {
    public void queueUpload(String endpoint) {
        pending.add(endpoint);
        worker.wake();
    }
}
""",
    "src/ImageCache.java": """\
package org.notesmith.media;

public class ImageCache {
    public Bitmap lookupImage(String key) {
        return memory.get(key);
    }
}
""",
    "src/NetworkClient.java": """\
package org.notesmith.net;

public class NetworkClient {
    public Response fetch(String url) {
        return transport.execute(url);
    }
}
""",
    "src/MigrationTool.java": """\
package org.notesmith.storage;

public class MigrationTool {
    public void applyMigration(int fromVersion) {
        for (Step step : plan(fromVersion)) {
            step.run();
        }
    }
}
""",
    "src/SettingsActivity.java": """\
package org.notesmith.prefs;

public class SettingsActivity extends Activity {
    public void persistPreference(String key, String value) {
        prefs.edit().putString(key, value).commit();
    }
}
""",
    "src/TimeoutWatcher.java": """\
package org.notesmith.net;

public class TimeoutWatcher {
    public void armTimeout(long millis) {
        alarm.schedule(millis);
    }
}
""",
    "src/LoginActivity.java": """\
package org.notesmith.auth;

public class LoginActivity extends Activity {
    public void submitCredentials(String user, String secret) {
        session.begin(user, secret);
    }
}
""",
}

GROUND_TRUTH_PATH = "src/NoteEditorActivity.java"

BUG_REPORT = (
    "The app crashes with an error after a sync timeout during login. "
    "Saving the attachment fails, the database migration corrupts uploads, "
    "and the image thumbnail settings show stale network data."
)

TRACE_DOC = {
    "app_package": "org.notesmith",
    "device_info": "emulator-5554",
    "steps": [
        {
            "screen": "NoteEditorActivity",
            "action": "tap",
            "resource_id": "org.notesmith:id/note_title_field",
            "widget_class": "android.widget.EditText",
            "timestamp_ms": 1000,
        },
        {
            "screen": "NoteEditorActivity",
            "action": "type_text",
            "resource_id": "org.notesmith:id/note_body_field",
            "widget_text": "groceries",
            "timestamp_ms": 2400,
        },
        {
            "screen": "NoteEditorActivity",
            "action": "tap",
            "resource_id": "org.notesmith:id/format_bold_toggle",
            "timestamp_ms": 3900,
        },
    ],
}


def write_mini_repo(root: Path) -> Path:
    """Materialize the planted 12-file repository under ``root``."""
    root.mkdir(parents=True, exist_ok=True)
    for rel, text in {GROUND_TRUTH_PATH: _NOTE_EDITOR, **_DECOYS}.items():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, "utf-8")
    return root


def write_trace(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(TRACE_DOC, indent=2), "utf-8")
    return path


def write_dataset(base: Path, repo_rel: str = "repo") -> Path:
    """One-bug dataset manifest pointing at the planted repo."""
    write_mini_repo(base / repo_rel)
    write_trace(base / "traces" / "bug-001.json")
    manifest = base / "dataset.jsonl"
    record = {
        "bug_id": "bug-001",
        "corpus_path": repo_rel,
        "report_text": BUG_REPORT,
        "trace_path": "traces/bug-001.json",
        "ground_truth": [GROUND_TRUTH_PATH],
    }
    manifest.write_text(json.dumps(record) + "\n", "utf-8")
    return manifest


SYNC_BUG_REPORT = (
    "Background sync never runs; the scheduler deadline is wrong and the "
    "sync window is skipped."
)

IMAGE_BUG_REPORT = "Image lookup returns a stale bitmap from the memory cache."


def write_dataset3(base: Path, repo_rel: str = "repo") -> Path:
    """Three-bug dataset over the planted repo; only bug-001 has a trace."""
    write_mini_repo(base / repo_rel)
    write_trace(base / "traces" / "bug-001.json")
    records = [
        {
            "bug_id": "bug-001",
            "corpus_path": repo_rel,
            "report_text": BUG_REPORT,
            "trace_path": "traces/bug-001.json",
            "ground_truth": [GROUND_TRUTH_PATH],
        },
        {
            "bug_id": "bug-002",
            "corpus_path": repo_rel,
            "report_text": SYNC_BUG_REPORT,
            "ground_truth": ["src/SyncService.java"],
        },
        {
            "bug_id": "bug-003",
            "corpus_path": repo_rel,
            "report_text": IMAGE_BUG_REPORT,
            "ground_truth": ["src/ImageCache.java"],
        },
    ]
    manifest = base / "dataset3.jsonl"
    manifest.write_text(
        "".join(json.dumps(r) + "\n" for r in records), "utf-8"
    )
    return manifest


@pytest.fixture
def mini_repo(tmp_path: Path) -> Path:
    return write_mini_repo(tmp_path / "repo")


@pytest.fixture
def trace_file(tmp_path: Path) -> Path:
    return write_trace(tmp_path / "traces" / "bug-001.json")


@pytest.fixture
def dataset_manifest(tmp_path: Path) -> Path:
    return write_dataset(tmp_path)
