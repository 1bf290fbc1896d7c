"""JSON output with fixed 17-significant-digit floats.

``json.dumps`` writes the shortest round-trip repr; model documents instead
pin every float to ``%.17g`` so files from different runtimes compare equal.
"""

from __future__ import annotations

import json
import math


class DocumentError(ValueError):
    """Malformed, truncated or incompatible model document."""


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise DocumentError(f"cannot serialize non-finite value {obj}")
        text = format(obj, ".17g")
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"truncated or malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    return doc


def check_header(doc: dict, model_type: str, version: int = 1) -> None:
    if doc.get("schema_version") != version:
        raise DocumentError(
            f"unsupported schema_version {doc.get('schema_version')!r} (expected {version})"
        )
    if doc.get("model_type") != model_type:
        raise DocumentError(f"expected model_type {model_type!r}, got {doc.get('model_type')!r}")
