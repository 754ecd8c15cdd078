"""Stable 64-bit fingerprint of a normalized query."""

from __future__ import annotations

import hashlib

from .nodes import NormalizedAst
from .render import render_query


def ast_fingerprint(n: NormalizedAst) -> int:
    """First 8 bytes of the SHA-256 of the canonical rendering, as an
    unsigned integer. Equal normal forms hash equal; stable across runs."""
    text = render_query(n.root)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
