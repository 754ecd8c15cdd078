"""The five benchmark metrics.

Each metric yields a ``MetricOutcome`` whose ``value`` is a bool (rate
metrics), an int (token usage), or ``None`` when the metric could not be
evaluated at all — absence is tracked separately from failure so that
aggregation can weight supports honestly.

* **EA** execution accuracy: result tables match under the comparison
  policy.
* **EM** exact match: component-wise equality of normalized ASTs (spider
  mode masks literal values, strict keeps them).
* **CC** classification consistency: the candidate's taxonomy *category*
  does not exceed the reference's — generating simpler SQL for the same
  intent is fine, escalating complexity is not.
* **ETC** efficiency: candidate median runtime stays within
  ``(1 + tau) * max(reference_median, floor_ms)`` and did not time out.
* **TU** token usage: provider-reported tokens when available, otherwise
  a chars/4 estimate flagged approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .datastore.executor import ResultTable, TimingStats
from .sqlast import ParseError, UnsupportedConstruct
from .sqlast import exact_match as ast_exact_match
from .sqlast import classify, parse_sql
from .sqlast.nodes import QueryAst

METRIC_NAMES = ("EA", "EM", "CC", "ETC", "TU")

DEFAULT_TAU = 1.0
DEFAULT_FLOOR_MS = 1.0


@dataclass(frozen=True)
class ComparisonPolicy:
    """How two result tables are declared equivalent."""
    bag_semantics: bool = True          # unordered compare is multiset, not set
    order_sensitive_iff_gt_ordered: bool = True
    column_order_sensitive: bool = True
    null_equals_null: bool = True
    float_rel_tol: float = 1e-6
    float_abs_tol: float = 1e-9


@dataclass(frozen=True)
class MetricOutcome:
    metric: str
    value: bool | int | None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"value": self.value}
        if self.detail:
            out["detail"] = self.detail
        return out


def _cells_equal(a, b, policy: ComparisonPolicy) -> bool:
    if a is None or b is None:
        return a is None and b is None and policy.null_equals_null
    a_num = isinstance(a, (int, float)) and not isinstance(a, bool)
    b_num = isinstance(b, (int, float)) and not isinstance(b, bool)
    if a_num and b_num:
        if isinstance(a, int) and isinstance(b, int):
            return a == b
        return math.isclose(float(a), float(b),
                            rel_tol=policy.float_rel_tol,
                            abs_tol=policy.float_abs_tol)
    return type(a) is type(b) and a == b


def _rows_equal(r1, r2, policy: ComparisonPolicy) -> bool:
    return len(r1) == len(r2) and all(
        _cells_equal(a, b, policy) for a, b in zip(r1, r2))


def _sort_key(row) -> tuple:
    # Floats are keyed on a coarse rounding so that values inside the
    # comparison tolerance usually sort to the same position; the final
    # pairwise check still applies the exact tolerance.
    def cell_key(v):
        if v is None:
            return (0, "")
        if isinstance(v, bool):
            return (1, str(v))
        if isinstance(v, (int, float)):
            return (2, round(float(v), 6))
        return (3, str(v))
    return tuple(cell_key(v) for v in row)


def compare_result_tables(cand: ResultTable, ref: ResultTable,
                          policy: ComparisonPolicy = ComparisonPolicy()
                          ) -> tuple[bool, str | None]:
    """(equal?, reason-when-not).  Column names are ignored; arity is not."""
    if len(cand.columns) != len(ref.columns):
        return False, "column-count"
    if len(cand.rows) != len(ref.rows):
        return False, "row-count"
    sequence_sensitive = policy.order_sensitive_iff_gt_ordered and ref.ordered
    if sequence_sensitive:
        for i, (a, b) in enumerate(zip(cand.rows, ref.rows)):
            if not _rows_equal(a, b, policy):
                return False, f"row-{i}"
        return True, None
    if not policy.bag_semantics:
        a_set = {tuple(map(repr, r)) for r in cand.rows}
        b_set = {tuple(map(repr, r)) for r in ref.rows}
        return (True, None) if a_set == b_set else (False, "set-mismatch")
    left = sorted(cand.rows, key=_sort_key)
    right = sorted(ref.rows, key=_sort_key)
    for a, b in zip(left, right):
        if not _rows_equal(a, b, policy):
            return False, "bag-mismatch"
    return True, None


def execution_accuracy(cand: ResultTable | None, ref: ResultTable,
                       policy: ComparisonPolicy = ComparisonPolicy(),
                       error: str | None = None) -> MetricOutcome:
    if cand is None:
        return MetricOutcome("EA", False, {"reason": error or "execution-failed"})
    ok, reason = compare_result_tables(cand, ref, policy)
    detail = {} if ok else {"reason": reason}
    return MetricOutcome("EA", ok, detail)


def exact_match_metric(cand_sql: str, ref: QueryAst, *,
                       mode: str = "spider_compatible",
                       schema: dict[str, list[str]] | None = None
                       ) -> MetricOutcome:
    try:
        cand = parse_sql(cand_sql)
    except (ParseError, UnsupportedConstruct) as exc:
        return MetricOutcome("EM", False, {"reason": "unparsable",
                                           "message": str(exc)})
    ok, diff = ast_exact_match(cand, ref, mode=mode, schema=schema)
    detail: dict = {"mode": mode}
    if not ok:
        detail["mismatches"] = diff.to_json()["mismatches"][:8]
    return MetricOutcome("EM", ok, detail)


def classification_consistency(cand_sql: str, ref: QueryAst) -> MetricOutcome:
    ref_label = classify(ref)
    try:
        cand_label = classify(parse_sql(cand_sql))
    except (ParseError, UnsupportedConstruct):
        return MetricOutcome("CC", False, {"reason": "unparsable",
                                           "gt": ref_label.code})
    ok = cand_label.category <= ref_label.category
    return MetricOutcome("CC", ok, {"gen": cand_label.code,
                                    "gt": ref_label.code})


def efficiency_within_tolerance(cand: TimingStats | None,
                                ref: TimingStats, *,
                                tau: float = DEFAULT_TAU,
                                floor_ms: float = DEFAULT_FLOOR_MS
                                ) -> MetricOutcome:
    if ref.timeout or ref.median_ms is None:
        return MetricOutcome("ETC", None, {"reason": "gt-timing-unavailable"})
    if cand is None or cand.timeout or cand.median_ms is None:
        return MetricOutcome("ETC", False, {"reason": "timeout"})
    budget = (1.0 + tau) * max(ref.median_ms, floor_ms)
    ok = cand.median_ms <= budget
    return MetricOutcome("ETC", ok, {
        "gen_median_ms": round(cand.median_ms, 3),
        "gt_median_ms": round(ref.median_ms, 3),
        "budget_ms": round(budget, 3),
    })


def token_usage(*, input_tokens: int | None, output_tokens: int | None,
                prompt_text: str, response_text: str) -> MetricOutcome:
    approx = False
    if input_tokens is None:
        input_tokens = math.ceil(len(prompt_text) / 4)
        approx = True
    if output_tokens is None:
        # An empty response costs nothing on the output side.
        output_tokens = math.ceil(len(response_text) / 4) if response_text else 0
        approx = True
    total = int(input_tokens) + int(output_tokens)
    detail = {"input_tokens": int(input_tokens),
              "output_tokens": int(output_tokens)}
    if approx:
        detail["approximate"] = True
    return MetricOutcome("TU", total, detail)
