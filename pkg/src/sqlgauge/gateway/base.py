"""Adapter contract for SQL-generating models."""

from __future__ import annotations

from dataclasses import dataclass, field

ADAPTER_KINDS = ("direct_llm", "external_http", "mock_oracle", "mock_mutant",
                 "mock_template")


class AdapterError(Exception):
    """Permanent failure: bad configuration, malformed response, 4xx."""


class TransientAdapterError(AdapterError):
    """Retryable failure: network trouble, 5xx, provider overload."""


@dataclass(frozen=True)
class ModelSpec:
    """Configuration of one model under benchmark."""
    model_id: str
    kind: str
    llm_id: str = ""
    temperature: float = 0.0
    endpoint: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ADAPTER_KINDS:
            raise ValueError(f"unknown adapter kind: {self.kind!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelSpec":
        return cls(model_id=raw["model_id"], kind=raw["kind"],
                   llm_id=raw.get("llm_id", ""),
                   temperature=float(raw.get("temperature", 0.0)),
                   endpoint=raw.get("endpoint", ""),
                   options=dict(raw.get("options", {})))

    def to_dict(self) -> dict:
        return {"model_id": self.model_id, "kind": self.kind,
                "llm_id": self.llm_id, "temperature": self.temperature,
                "endpoint": self.endpoint, "options": dict(self.options)}


@dataclass(frozen=True)
class RequestContext:
    """Everything an adapter may need beyond the prompt.

    Real adapters must only look at the prompt; the reference SQL and
    target subcategory exist for the mock adapters, which synthesize
    answers instead of calling a model.
    """
    db_id: str = ""
    question: str = ""
    gt_sql: str = ""
    iteration: int = 0
    target_subcategory: str = ""
    attempt: int = 0


@dataclass(frozen=True)
class AdapterResponse:
    text: str
    input_tokens: int | None = None
    output_tokens: int | None = None
    latency_ms: float = 0.0


class Adapter:
    def __init__(self, spec: ModelSpec):
        self.spec = spec

    def complete(self, prompt: str, context: RequestContext) -> AdapterResponse:
        raise NotImplementedError
