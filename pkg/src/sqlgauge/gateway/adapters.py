"""Concrete adapters: two HTTP clients and three deterministic mocks.

The mocks exist so the whole pipeline — including caching, retries,
batching, metrics, and reporting — can run offline with known-truth
behavior.  The oracle echoes the reference SQL, the mutant applies one
structural edit to it, and the template mock answers augmentation
prompts from the bank in :mod:`sqlgauge.gateway.templates`.
"""

from __future__ import annotations

import json
import os
import time

import requests

from ..sqlast import (SqlAstError, drop_order_by, parse_sql,
                      perturb_first_literal, rename_aliases, render,
                      swap_select_columns)
from .base import (Adapter, AdapterError, AdapterResponse, ModelSpec,
                   RequestContext, TransientAdapterError)
from .templates import template_pair

_HTTP_TIMEOUT_S = 60.0


def _fenced(sql: str) -> str:
    return f"```sql\n{sql}\n```"


class OracleAdapter(Adapter):
    """Returns the reference SQL verbatim: the perfect model."""

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        return AdapterResponse(text=_fenced(context.gt_sql), latency_ms=0.0)


_MUTATIONS = {
    "column_swap": swap_select_columns,
    "drop_order_by": drop_order_by,
    "literal_perturb": perturb_first_literal,
    "alias_rename": rename_aliases,
}


class MutantAdapter(Adapter):
    """Applies one named structural edit to the reference SQL.

    When the edit does not apply (no ORDER BY to drop, a single output
    column, no literals) the reference SQL is returned unchanged, so a
    mutant model degrades gracefully to the oracle on such inputs.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        name = spec.options.get("mutation", "")
        if name not in _MUTATIONS:
            raise AdapterError(
                f"model {spec.model_id!r}: options.mutation must be one of "
                f"{sorted(_MUTATIONS)}, got {name!r}")
        self._mutate = _MUTATIONS[name]

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        sql = context.gt_sql
        try:
            ast = parse_sql(sql)
        except SqlAstError:
            return AdapterResponse(text=_fenced(sql), latency_ms=0.0)
        mutated = self._mutate(ast)
        if mutated is not None:
            sql = render(mutated)
        return AdapterResponse(text=_fenced(sql), latency_ms=0.0)


class TemplateAdapter(Adapter):
    """Answers augmentation prompts from the known-good template bank.

    For a targeted request it emits a QUESTION/SQL pair for the target
    subcategory, varied by the attempt index so retries produce fresh
    candidates.  For plain generation requests it behaves like the
    oracle.
    """

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        if not context.target_subcategory:
            return AdapterResponse(text=_fenced(context.gt_sql), latency_ms=0.0)
        pair = template_pair(context.target_subcategory, context.db_id,
                             context.attempt)
        if pair is None:
            return AdapterResponse(text="", latency_ms=0.0)
        question, sql = pair
        return AdapterResponse(text=f"QUESTION: {question}\nSQL: {sql}",
                               latency_ms=0.0)


def _raise_for_status(status: int, body: str):
    if status == 429 or status >= 500:
        raise TransientAdapterError(f"HTTP {status}: {body[:200]}")
    if status >= 400:
        raise AdapterError(f"HTTP {status}: {body[:200]}")


def _post_json(url: str, payload: dict, headers: dict) -> tuple[dict, float]:
    started = time.monotonic()
    try:
        resp = requests.post(url, json=payload, headers=headers,
                             timeout=_HTTP_TIMEOUT_S)
    except requests.exceptions.RequestException as exc:
        raise TransientAdapterError(f"request failed: {exc}") from exc
    latency_ms = (time.monotonic() - started) * 1000.0
    _raise_for_status(resp.status_code, resp.text)
    try:
        return resp.json(), latency_ms
    except json.JSONDecodeError as exc:
        raise AdapterError(f"non-JSON response: {resp.text[:200]}") from exc


class DirectLlmAdapter(Adapter):
    """Chat-completions client for providers speaking the common shape.

    The API key is read from the environment variable named in
    ``options.api_key_env`` at call time, never stored in run artifacts.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        if not spec.endpoint:
            raise AdapterError(f"model {spec.model_id!r}: endpoint required")
        if not spec.llm_id:
            raise AdapterError(f"model {spec.model_id!r}: llm_id required")

    def _headers(self) -> dict:
        headers = {"content-type": "application/json"}
        env_name = self.spec.options.get("api_key_env", "")
        if env_name:
            key = os.environ.get(env_name, "")
            if not key:
                raise AdapterError(
                    f"environment variable {env_name} is empty; cannot "
                    f"authenticate model {self.spec.model_id!r}")
            headers["authorization"] = f"Bearer {key}"
        headers.update(self.spec.options.get("extra_headers", {}))
        return headers

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        payload = {
            "model": self.spec.llm_id,
            "temperature": self.spec.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        payload.update(self.spec.options.get("extra_body", {}))
        data, latency_ms = _post_json(self.spec.endpoint, payload,
                                      self._headers())
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise AdapterError(f"unexpected response shape: "
                               f"{str(data)[:200]}") from exc
        usage = data.get("usage") or {}
        return AdapterResponse(
            text=text or "",
            input_tokens=usage.get("prompt_tokens"),
            output_tokens=usage.get("completion_tokens"),
            latency_ms=latency_ms)


class ExternalHttpAdapter(Adapter):
    """Client for self-hosted text-to-SQL services.

    Posts ``{"question", "prompt", "db_id"}`` and accepts either
    ``{"sql": ...}`` or ``{"text": ...}`` back.
    """

    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        if not spec.endpoint:
            raise AdapterError(f"model {spec.model_id!r}: endpoint required")

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        payload = {"question": context.question, "prompt": prompt,
                   "db_id": context.db_id}
        headers = {"content-type": "application/json"}
        headers.update(self.spec.options.get("extra_headers", {}))
        data, latency_ms = _post_json(self.spec.endpoint, payload, headers)
        text = data.get("sql") or data.get("text")
        if not isinstance(text, str):
            raise AdapterError(f"response carries no sql/text field: "
                               f"{str(data)[:200]}")
        usage = data.get("usage") or {}
        return AdapterResponse(
            text=text,
            input_tokens=usage.get("prompt_tokens"),
            output_tokens=usage.get("completion_tokens"),
            latency_ms=latency_ms)


_FACTORIES = {
    "mock_oracle": OracleAdapter,
    "mock_mutant": MutantAdapter,
    "mock_template": TemplateAdapter,
    "direct_llm": DirectLlmAdapter,
    "external_http": ExternalHttpAdapter,
}


def make_adapter(spec: ModelSpec) -> Adapter:
    return _FACTORIES[spec.kind](spec)
