"""Canonical JSON serialization.

All export documents, API response bodies, and CLI outputs go through
``canonical_json`` so that identical data yields identical bytes everywhere
(sorted keys, minimal separators, one trailing newline).
"""

from __future__ import annotations

import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize ``obj`` deterministically. The result ends with a newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def canonical_json_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def load_json(text: str | bytes) -> Any:
    return json.loads(text)
