"""Gateway service: one front door for every model call.

Wraps an adapter with response caching, bounded retries on transient
failures, and a thread pool for batched requests.  The pipeline only
ever talks to models through this class, which is what makes re-runs
cheap (cache) and statistics honest (``calls_made`` counts live calls
only, never cache hits).
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .adapters import make_adapter
from .base import (Adapter, AdapterError, AdapterResponse, ModelSpec,
                   RequestContext, TransientAdapterError)
from .cache import ResponseCache, cache_key
from .extraction import extract_sql

MAX_ATTEMPTS = 3
_BACKOFF_S = (1.0, 2.0, 4.0)
MAX_PARALLEL = 8


@dataclass(frozen=True)
class GatewayResult:
    """One answered request: raw response plus bookkeeping."""
    response: AdapterResponse
    cached: bool

    @property
    def sql(self) -> str:
        return extract_sql(self.response.text)


class GatewayService:
    def __init__(self, spec: ModelSpec, cache_dir: str | Path | None = None,
                 sleeper: Callable[[float], None] = time.sleep,
                 adapter: Adapter | None = None):
        self.spec = spec
        self.adapter = adapter if adapter is not None else make_adapter(spec)
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self._sleep = sleeper
        self._lock = threading.Lock()
        self.calls_made = 0
        self.cache_hits = 0

    def _record(self, cached: bool):
        with self._lock:
            if cached:
                self.cache_hits += 1
            else:
                self.calls_made += 1

    def generate(self, prompt: str, context: RequestContext,
                 extra: str = "") -> GatewayResult:
        key = None
        if self.cache is not None:
            key = cache_key(self.spec.model_id, self.spec.llm_id,
                            self.spec.temperature, prompt, extra)
            hit = self.cache.get(key)
            if hit is not None:
                self._record(cached=True)
                return GatewayResult(response=hit, cached=True)

        last_exc: Exception | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                response = self.adapter.complete(prompt, context)
                break
            except TransientAdapterError as exc:
                last_exc = exc
                if attempt + 1 < MAX_ATTEMPTS:
                    self._sleep(_BACKOFF_S[attempt])
        else:
            assert last_exc is not None
            raise last_exc

        self._record(cached=False)
        if self.cache is not None and key is not None:
            self.cache.put(key, response)
        return GatewayResult(response=response, cached=False)

    def generate_sql(self, prompt: str, context: RequestContext,
                     extra: str = "") -> tuple[str, GatewayResult]:
        result = self.generate(prompt, context, extra=extra)
        return result.sql, result

    def submit_batch(
        self, requests: Sequence[tuple[str, RequestContext, str]],
        max_parallel: int = MAX_PARALLEL,
    ) -> list["GatewayResult | Exception"]:
        """Answer many requests concurrently, order preserved.

        Each item is ``(prompt, context, extra)``.  A failure is
        returned in that item's slot rather than raised, so one bad
        request never poisons its batch-mates.
        """
        def one(item) -> "GatewayResult | Exception":
            prompt, context, extra = item
            try:
                return self.generate(prompt, context, extra=extra)
            except Exception as exc:  # noqa: BLE001 - isolated per item
                return exc

        workers = max(1, min(max_parallel, len(requests) or 1))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, requests))
