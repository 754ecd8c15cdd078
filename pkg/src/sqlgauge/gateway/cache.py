"""Disk cache for adapter responses, keyed by the full request identity.

A cache hit must be indistinguishable from a live call except for cost,
so the key covers everything that could change the answer: which
configured model, which underlying LLM, the sampling temperature, the
exact prompt text, and a caller-supplied extra tag (the pipeline passes
the iteration number so repeated iterations stay distinct draws).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .base import AdapterResponse


def cache_key(model_id: str, llm_id: str, temperature: float, prompt: str,
              extra: str = "") -> str:
    payload = json.dumps(
        {"model_id": model_id, "llm_id": llm_id, "temperature": temperature,
         "prompt": prompt, "extra": extra},
        sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed store under ``<root>/<first two hex chars>/``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> AdapterResponse | None:
        path = self._path(key)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError):
            return None
        return AdapterResponse(
            text=raw["text"],
            input_tokens=raw.get("input_tokens"),
            output_tokens=raw.get("output_tokens"),
            latency_ms=float(raw.get("latency_ms", 0.0)))

    def put(self, key: str, response: AdapterResponse) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = json.dumps(
            {"text": response.text, "input_tokens": response.input_tokens,
             "output_tokens": response.output_tokens,
             "latency_ms": response.latency_ms},
            sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(body)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
