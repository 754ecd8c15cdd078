"""Pulling a SQL statement out of free-form model output."""

from __future__ import annotations

import re

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)
_STMT_START = re.compile(r"^\s*(SELECT|WITH)\b", re.IGNORECASE | re.MULTILINE)


def extract_sql(text: str) -> str:
    """First fenced code block, else text from the first SELECT/WITH on.

    The trailing semicolon (and anything after it) is dropped; an empty
    result means no SQL could be located.
    """
    if not text:
        return ""
    m = _FENCE.search(text)
    candidate = m.group(1) if m else None
    if candidate is None:
        m2 = _STMT_START.search(text)
        candidate = text[m2.start():] if m2 else ""
    candidate = candidate.strip()
    if ";" in candidate:
        candidate = candidate.split(";", 1)[0]
    return candidate.strip()
