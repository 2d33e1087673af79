"""Execution-trace parsing and GUI term extraction.

The trace document is the canonical JSON export of a bug reproduction run:
an ordered list of interaction steps, each naming the screen (Activity or
Fragment) it happened on and, when available, the widget's resource-id.
Two term classes feed localization: Screen Component terms (split
resource-id names) and GUI Screen terms (screen class names).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from ladybug import _kernels
from ladybug.errors import TraceParseError, TraceSchemaError

ACTIONS = ("tap", "long_tap", "swipe", "type_text", "back", "other")


class TraceOrderingWarning(UserWarning):
    """Timestamps in the trace are not nondecreasing."""


@dataclass(frozen=True)
class InteractionStep:
    screen: str
    action: str = "other"
    resource_id: str | None = None
    widget_class: str | None = None
    widget_text: str | None = None
    timestamp_ms: int | None = None


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[InteractionStep, ...]
    app_package: str | None = None
    device_info: str | None = None


@dataclass(frozen=True)
class GuiScreenTerm:
    """A screen class name with its split-token lowercase form."""

    class_name: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class GuiTermSet:
    screen_component_terms: tuple[tuple[str, ...], ...] = ()
    gui_screen_terms: tuple[GuiScreenTerm, ...] = field(default=())

    @classmethod
    def from_trace(cls, trace: ExecutionTrace) -> "GuiTermSet":
        return cls(
            screen_component_terms=extract_screen_component_terms(trace),
            gui_screen_terms=extract_gui_screen_terms(trace),
        )

    def is_empty(self) -> bool:
        return not self.screen_component_terms and not self.gui_screen_terms


def parse_trace(document_text: str) -> ExecutionTrace:
    """Parse a trace document; unknown fields are ignored.

    Raises TraceParseError for malformed JSON (with line/column context)
    and TraceSchemaError for structural problems, naming the step index.
    Out-of-order timestamps only warn; the steps are kept as given.
    """
    try:
        doc = json.loads(document_text)
    except json.JSONDecodeError as exc:
        raise TraceParseError(
            f"malformed trace document at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise TraceSchemaError("trace document must be a JSON object")
    if "steps" not in doc:
        raise TraceSchemaError("trace document is missing the 'steps' field")
    raw_steps = doc["steps"]
    if not isinstance(raw_steps, list):
        raise TraceSchemaError("'steps' must be a list")

    steps = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise TraceSchemaError(f"step {i} is not an object")
        steps.append(_parse_step(raw, i))

    _check_ordering(steps)
    return ExecutionTrace(
        steps=tuple(steps),
        app_package=_opt_str(doc, "app_package", "trace"),
        device_info=_opt_str(doc, "device_info", "trace"),
    )


def _parse_step(raw: dict, index: int) -> InteractionStep:
    screen = raw.get("screen")
    if not isinstance(screen, str) or not screen:
        raise TraceSchemaError(f"step {index} is missing a non-empty 'screen'")
    action = raw.get("action")
    if action is not None and not isinstance(action, str):
        raise TraceSchemaError(f"step {index}: 'action' must be a string")
    if action not in ACTIONS:
        action = "other"  # forward compatibility with new recorder actions
    timestamp = raw.get("timestamp_ms")
    if timestamp is not None:
        if not isinstance(timestamp, int) or isinstance(timestamp, bool) or timestamp < 0:
            raise TraceSchemaError(
                f"step {index}: 'timestamp_ms' must be a nonnegative integer"
            )
    return InteractionStep(
        screen=screen,
        action=action,
        resource_id=_opt_str(raw, "resource_id", f"step {index}"),
        widget_class=_opt_str(raw, "widget_class", f"step {index}"),
        widget_text=_opt_str(raw, "widget_text", f"step {index}"),
        timestamp_ms=timestamp,
    )


def _opt_str(record: dict, key: str, where: str) -> str | None:
    value = record.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise TraceSchemaError(f"{where}: '{key}' must be a string")
    return value


def _check_ordering(steps: list[InteractionStep]) -> None:
    stamped = [(i, s.timestamp_ms) for i, s in enumerate(steps) if s.timestamp_ms is not None]
    for (_, prev), (i, cur) in zip(stamped, stamped[1:]):
        if cur < prev:
            warnings.warn(
                f"trace timestamps go backwards at step {i} "
                f"({cur} after {prev}); steps kept in given order",
                TraceOrderingWarning,
                stacklevel=3,
            )
            return


def serialize_trace(trace: ExecutionTrace) -> str:
    """Canonical JSON for a trace; parse_trace round-trips it."""
    doc: dict = {}
    if trace.app_package is not None:
        doc["app_package"] = trace.app_package
    if trace.device_info is not None:
        doc["device_info"] = trace.device_info
    doc["steps"] = []
    for step in trace.steps:
        raw: dict = {"screen": step.screen, "action": step.action}
        for key in ("resource_id", "widget_class", "widget_text", "timestamp_ms"):
            value = getattr(step, key)
            if value is not None:
                raw[key] = value
        doc["steps"].append(raw)
    return json.dumps(doc, ensure_ascii=False, indent=2)


def extract_screen_component_terms(trace: ExecutionTrace) -> tuple[tuple[str, ...], ...]:
    """Split resource-id names into term token lists.

    The package prefix (everything up to the last '/') carries no
    localization signal and is discarded.  Terms dedupe on their token
    form, keeping first-occurrence order.
    """
    seen: set[tuple[str, ...]] = set()
    terms: list[tuple[str, ...]] = []
    for step in trace.steps:
        if not step.resource_id:
            continue
        name = step.resource_id.rsplit("/", 1)[-1]
        tokens = tuple(_kernels.split_tokens(name))
        if tokens and tokens not in seen:
            seen.add(tokens)
            terms.append(tokens)
    return tuple(terms)


def extract_gui_screen_terms(trace: ExecutionTrace) -> tuple[GuiScreenTerm, ...]:
    """Distinct screen class names, first-occurrence order, plus split forms."""
    seen: set[str] = set()
    terms: list[GuiScreenTerm] = []
    for step in trace.steps:
        if step.screen in seen:
            continue
        seen.add(step.screen)
        terms.append(
            GuiScreenTerm(step.screen, tuple(_kernels.split_tokens(step.screen)))
        )
    return tuple(terms)
