"""Gateway behavior: caching, retries, batching, SQL extraction."""

import pytest

from sqlgauge.gateway import (AdapterError, GatewayService, ModelSpec,
                              RequestContext, TransientAdapterError,
                              extract_sql, make_adapter)
from sqlgauge.gateway.base import Adapter, AdapterResponse
from sqlgauge.gateway.cache import cache_key

CTX = RequestContext(db_id="campus", question="q", gt_sql="SELECT 1",
                     iteration=0)


class ScriptedAdapter(Adapter):
    """Replays a canned sequence; exceptions in the list are raised."""

    def __init__(self, script):
        super().__init__(ModelSpec(model_id="fake", kind="mock_oracle"))
        self.script = list(script)
        self.calls = 0

    def complete(self, prompt, context):
        self.calls += 1
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return AdapterResponse(text=item)


def service(script, cache_dir=None, sleeper=None):
    sleeps = []
    svc = GatewayService(ModelSpec(model_id="fake", kind="mock_oracle"),
                         cache_dir=cache_dir,
                         sleeper=sleeps.append if sleeper is None else sleeper,
                         adapter=ScriptedAdapter(script))
    svc._test_sleeps = sleeps
    return svc


def test_cache_key_covers_the_full_request_identity():
    base = cache_key("m", "llm", 0.0, "prompt", "0")
    assert cache_key("m", "llm", 0.0, "prompt", "0") == base
    assert cache_key("m2", "llm", 0.0, "prompt", "0") != base
    assert cache_key("m", "llm2", 0.0, "prompt", "0") != base
    assert cache_key("m", "llm", 0.5, "prompt", "0") != base
    assert cache_key("m", "llm", 0.0, "prompt2", "0") != base
    assert cache_key("m", "llm", 0.0, "prompt", "1") != base


def test_disk_cache_round_trip(tmp_path):
    first = service(["```sql\nSELECT 1\n```"], cache_dir=tmp_path)
    result = first.generate("p", CTX, extra="0")
    assert not result.cached
    assert first.calls_made == 1

    second = service([], cache_dir=tmp_path)  # empty script: must not call
    replay = second.generate("p", CTX, extra="0")
    assert replay.cached
    assert replay.response.text == result.response.text
    assert second.calls_made == 0 and second.cache_hits == 1


def test_different_extra_tag_misses_the_cache(tmp_path):
    svc = service(["a", "b"], cache_dir=tmp_path)
    assert svc.generate("p", CTX, extra="0").response.text == "a"
    assert svc.generate("p", CTX, extra="1").response.text == "b"
    assert svc.calls_made == 2


def test_transient_failures_are_retried_with_backoff():
    svc = service([TransientAdapterError("hiccup"),
                   TransientAdapterError("again"),
                   "recovered"])
    result = svc.generate("p", CTX)
    assert result.response.text == "recovered"
    assert svc._test_sleeps == [1.0, 2.0]
    assert svc.calls_made == 1  # only the answered call counts


def test_retries_are_bounded():
    svc = service([TransientAdapterError("1"), TransientAdapterError("2"),
                   TransientAdapterError("3")])
    with pytest.raises(TransientAdapterError):
        svc.generate("p", CTX)
    assert svc._test_sleeps == [1.0, 2.0]


def test_hard_failures_are_not_retried():
    svc = service([AdapterError("bad request"), "never reached"])
    with pytest.raises(AdapterError):
        svc.generate("p", CTX)
    assert svc._test_sleeps == []


def test_batch_preserves_order_and_isolates_failures():
    svc = service(["one", AdapterError("boom"), "three"])
    out = svc.submit_batch([("p1", CTX, ""), ("p2", CTX, ""),
                            ("p3", CTX, "")], max_parallel=1)
    assert out[0].response.text == "one"
    assert isinstance(out[1], AdapterError)
    assert out[2].response.text == "three"


# -- extraction -----------------------------------------------------------


@pytest.mark.parametrize("text,expected", [
    ("```sql\nSELECT a FROM t\n```", "SELECT a FROM t"),
    ("```\nSELECT a FROM t;\n```", "SELECT a FROM t"),
    ("Sure! Here you go:\n```sql\nSELECT 1\n```\nHope that helps.",
     "SELECT 1"),
    ("The answer is:\nSELECT name FROM student; -- done",
     "SELECT name FROM student"),
    # a SELECT buried mid-sentence is not mistaken for a statement
    ("The answer is SELECT whatever you like", ""),
    ("with t as (select 1) select * from t", "with t as (select 1) select * from t"),
    ("no sql here at all", ""),
    ("", ""),
])
def test_extract_sql(text, expected):
    assert extract_sql(text) == expected


def test_gateway_result_exposes_extracted_sql():
    svc = service(["Here:\n```sql\nSELECT 42;\n```"])
    sql, result = svc.generate_sql("p", CTX)
    assert sql == "SELECT 42"
    assert result.response.text.startswith("Here:")


# -- mock adapters ---------------------------------------------------------


def test_oracle_mock_echoes_the_reference_sql():
    adapter = make_adapter(ModelSpec(model_id="o", kind="mock_oracle"))
    out = adapter.complete("ignored", CTX)
    assert extract_sql(out.text) == "SELECT 1"


def test_unknown_adapter_kind_is_rejected():
    with pytest.raises(ValueError):
        ModelSpec(model_id="x", kind="time_travel")


def test_model_spec_round_trips_through_dict():
    spec = ModelSpec(model_id="m", kind="direct_llm", llm_id="foo-9",
                     temperature=0.3, endpoint="http://localhost:1",
                     options={"api_key_env": "KEY"})
    assert ModelSpec.from_dict(spec.to_dict()) == spec
