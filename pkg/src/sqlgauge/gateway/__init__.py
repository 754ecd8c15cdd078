"""Model gateway: adapters, caching, retries, and batch dispatch."""

from .adapters import (DirectLlmAdapter, ExternalHttpAdapter, MutantAdapter,
                       OracleAdapter, TemplateAdapter, make_adapter)
from .base import (ADAPTER_KINDS, Adapter, AdapterError, AdapterResponse,
                   ModelSpec, RequestContext, TransientAdapterError)
from .cache import ResponseCache, cache_key
from .extraction import extract_sql
from .prompts import (build_augment_prompt, build_generation_prompt,
                      parse_pair_response, schema_text)
from .service import (MAX_ATTEMPTS, MAX_PARALLEL, GatewayResult,
                      GatewayService)
from .templates import TEMPLATE_BANK, supported_dbs, template_pair

__all__ = [
    "ADAPTER_KINDS", "Adapter", "AdapterError", "AdapterResponse",
    "DirectLlmAdapter", "ExternalHttpAdapter", "GatewayResult",
    "GatewayService", "MAX_ATTEMPTS", "MAX_PARALLEL", "ModelSpec",
    "MutantAdapter", "OracleAdapter", "RequestContext", "ResponseCache",
    "TEMPLATE_BANK", "TemplateAdapter", "TransientAdapterError",
    "build_augment_prompt", "build_generation_prompt", "cache_key",
    "extract_sql", "make_adapter", "parse_pair_response", "schema_text",
    "supported_dbs", "template_pair",
]
