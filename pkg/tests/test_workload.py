"""Workloads: validation, versioned storage, alignment, augmentation."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sqlgauge.gateway import GatewayService, ModelSpec
from sqlgauge.sqlast import TaxonomyLabel, ast_fingerprint, normalize, parse_sql
from sqlgauge.workload import (AugmentOutcome, DataPoint, InfeasibleAlignment,
                               Provenance, TargetDistribution,
                               ValidationError, Workload, WorkloadError,
                               WorkloadStore, align_workload,
                               aligned_workload_id, augment_workload,
                               data_points_from_lines,
                               select_weak_subcategories, validate_candidate)

GOOD_LINE = json.dumps({
    "id": "dp-1", "question": "How many students are there?",
    "gt_sql": "SELECT count(*) FROM student", "db_id": "campus",
    "split": "eval",
    "provenance": {"kind": "seed_benchmark", "name": "demo-seed"}})


def point(i, category, split="eval", db_id="campus"):
    """A minimal synthetic data point; only split and label matter here."""
    return DataPoint(id=f"p{i:03d}", question=f"q{i}",
                     gt_sql="SELECT 1", db_id=db_id, split=split,
                     provenance=Provenance(kind="seed_benchmark"),
                     label=TaxonomyLabel(category, 1))


def synthetic(counts, trains=0):
    """counts: {category: n_eval_points}."""
    points, i = [], 0
    for category, n in sorted(counts.items()):
        for _ in range(n):
            points.append(point(i, category))
            i += 1
    for _ in range(trains):
        points.append(point(i, 1, split="train"))
        i += 1
    return Workload(workload_id="synth", version=1,
                    data_points=tuple(points))


# -- parsing and validation -------------------------------------------------


def test_loader_accepts_a_valid_line():
    (dp,) = data_points_from_lines([GOOD_LINE])
    assert dp.id == "dp-1"
    assert dp.label.code == "2.1"       # bare aggregate
    assert dp.split == "eval"


@pytest.mark.parametrize("mutation,needle", [
    (lambda d: d.pop("question"), "question"),
    (lambda d: d.update(split="validation"), "split"),
    (lambda d: d.update(gt_sql="SELEC oops"), "parse"),
])
def test_loader_rejects_bad_points(mutation, needle):
    raw = json.loads(GOOD_LINE)
    mutation(raw)
    with pytest.raises(ValidationError) as err:
        data_points_from_lines([json.dumps(raw)])
    (dp_id, reason), = err.value.problems
    assert needle in reason


def test_loader_rejects_duplicate_ids():
    with pytest.raises(ValidationError) as err:
        data_points_from_lines([GOOD_LINE, GOOD_LINE])
    assert any("duplicate" in reason for _, reason in err.value.problems)


def test_loader_checks_db_ids_against_the_catalog(catalog):
    raw = json.loads(GOOD_LINE)
    raw["db_id"] = "warehouse"
    with pytest.raises(ValidationError):
        data_points_from_lines([json.dumps(raw)], catalog)


# -- versioned store ----------------------------------------------------------


def test_store_round_trip(tmp_path):
    store = WorkloadStore(tmp_path)
    store.save(synthetic({1: 3}), note="first")
    assert store.ids() == ["synth"]
    assert store.latest_version("synth") == 1
    loaded = store.load("synth")
    assert [dp.id for dp in loaded.data_points] == ["p000", "p001", "p002"]


def test_store_versions_are_immutable(tmp_path):
    store = WorkloadStore(tmp_path)
    store.save(synthetic({1: 2}))
    with pytest.raises(WorkloadError):
        store.save(synthetic({1: 2}))


def test_store_requires_supersets(tmp_path):
    store = WorkloadStore(tmp_path)
    v1 = synthetic({1: 3})
    store.save(v1)

    shrunk = Workload(workload_id="synth", version=2,
                      data_points=v1.data_points[:1], parent_version=1)
    with pytest.raises(WorkloadError):
        store.save(shrunk)

    grown = Workload(workload_id="synth", version=2,
                     data_points=v1.data_points + (point(99, 2),),
                     parent_version=1)
    store.save(grown)
    assert store.latest_version("synth") == 2
    assert len(store.load("synth", version=1).data_points) == 3
    assert len(store.load("synth").data_points) == 4


def test_store_unknown_ids_raise(tmp_path):
    store = WorkloadStore(tmp_path)
    with pytest.raises(WorkloadError):
        store.meta("ghost")


def test_demo_workloads_load(demo_root, catalog):
    store = WorkloadStore(demo_root)
    assert store.ids() == ["sample_easy", "sample_hard", "sample_medium"]
    easy = store.load("sample_easy", catalog=catalog)
    assert len(easy.data_points) == 20
    assert easy.split_counts() == {"eval": 16, "train": 4}


# -- target distributions ------------------------------------------------------


def test_target_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        TargetDistribution({1: 0.5, 2: 0.4})


def test_target_accepts_category_prefixed_keys():
    t = TargetDistribution.from_dict({"c1": 0.5, "2": 0.5})
    assert t.weights == {1: 0.5, 2: 0.5}


def test_target_rejects_unknown_categories():
    with pytest.raises(ValueError):
        TargetDistribution({7: 1.0})


# -- alignment -----------------------------------------------------------------


def category_counts(workload):
    counts = {}
    for dp in workload.data_points:
        if dp.split == "eval":
            counts[dp.label.category] = counts.get(dp.label.category, 0) + 1
    return counts


def test_align_picks_the_largest_feasible_subset():
    source = synthetic({1: 10, 2: 10, 3: 10}, trains=2)
    target = TargetDistribution({1: 0.5, 2: 0.3, 3: 0.2})
    aligned = align_workload(source, target, seed=4)
    assert category_counts(aligned) == {1: 10, 2: 6, 3: 4}
    # train exemplars ride along untouched
    assert sum(dp.split == "train" for dp in aligned.data_points) == 2


def test_align_is_deterministic_and_names_itself_by_inputs():
    source = synthetic({1: 10, 2: 10, 3: 10})
    target = TargetDistribution({1: 0.5, 2: 0.3, 3: 0.2})
    a = align_workload(source, target, seed=4)
    b = align_workload(source, target, seed=4)
    assert [dp.id for dp in a.data_points] == [dp.id for dp in b.data_points]
    assert a.workload_id == b.workload_id == aligned_workload_id(
        "synth", target, 4)
    c = align_workload(source, target, seed=5)
    assert c.workload_id != a.workload_id


def test_align_requires_data_in_every_weighted_category():
    source = synthetic({1: 10, 2: 10})
    with pytest.raises(InfeasibleAlignment):
        align_workload(source, TargetDistribution({1: 0.5, 4: 0.5}))


def test_align_zero_weight_categories_are_dropped():
    source = synthetic({1: 6, 2: 6, 3: 6})
    aligned = align_workload(
        source, TargetDistribution({1: 0.5, 2: 0.5, 3: 0.0}))
    assert set(category_counts(aligned)) == {1, 2}


def brute_force_best(weights, available):
    """Independent reference: exact arithmetic over every subset size."""
    def quotas(n):
        floors = {c: int(Fraction(weights[c]) * n) for c in weights}
        rem = sorted(((Fraction(weights[c]) * n - floors[c], c)
                      for c in weights), key=lambda t: (-t[0], t[1]))
        for _, c in rem[:n - sum(floors.values())]:
            floors[c] += 1
        return floors
    for n in range(sum(available.values()), 0, -1):
        q = quotas(n)
        if all(q[c] <= available[c] for c in weights):
            return q
    return None


@settings(max_examples=60, deadline=None)
@given(st.tuples(st.integers(0, 1024), st.integers(0, 1024),
                 st.integers(0, 1024)).filter(lambda t: sum(t) == 0 or all(
                     True for _ in t)),
       st.tuples(st.integers(0, 12), st.integers(0, 12), st.integers(0, 12)))
def test_align_matches_exact_arithmetic(raw_weights, avail):
    total = sum(raw_weights)
    if total == 0:
        return
    # dyadic weights are exact in binary floating point, so float and
    # Fraction arithmetic must agree and the oracle is trustworthy
    weights = {c + 1: Fraction(w, total) for c, w in enumerate(raw_weights)
               if w > 0}
    if sum(weights.values()) != 1:
        return
    counts = {c: avail[c - 1] for c in weights}
    source = synthetic(counts)
    target = TargetDistribution({c: float(w) for c, w in weights.items()})

    if any(counts[c] == 0 for c in weights):
        with pytest.raises(InfeasibleAlignment):
            align_workload(source, target)
        return
    expected = brute_force_best(
        {c: float(w) for c, w in weights.items()}, counts)
    if expected is None:
        with pytest.raises(InfeasibleAlignment):
            align_workload(source, target)
        return
    aligned = align_workload(source, target)
    got = category_counts(aligned)
    assert {c: got.get(c, 0) for c in weights} == expected


# -- weak-subcategory selection -------------------------------------------------


def fake_report(cells):
    return {"models": [{"model_id": "m", "by_subcategory": {"EA": cells}}]}


def test_weak_selection_applies_threshold_and_support():
    report = fake_report({
        "2.2": {"score": 0.2, "support": 5, "data_points": 5},
        "4.2": {"score": 0.9, "support": 5, "data_points": 5},
        "3.3": {"score": 0.1, "support": 2, "data_points": 2},   # thin
        "5.1": {"score": None, "support": 0, "data_points": 0},  # no signal
    })
    assert select_weak_subcategories(report, theta=0.5) == {"2.2"}


def test_weak_selection_threshold_is_strict():
    report = fake_report({"2.2": {"score": 0.5, "support": 9,
                                  "data_points": 9}})
    assert select_weak_subcategories(report, theta=0.5) == set()


def test_weak_selection_unions_models():
    report = {"models": [
        {"model_id": "a", "by_subcategory": {"EA": {
            "1.1": {"score": 0.0, "support": 4, "data_points": 4}}}},
        {"model_id": "b", "by_subcategory": {"EA": {
            "6.2": {"score": 0.1, "support": 4, "data_points": 4}}}},
    ]}
    assert select_weak_subcategories(report, theta=0.3) == {"1.1", "6.2"}


def test_weak_selection_validates_theta():
    with pytest.raises(ValueError):
        select_weak_subcategories(fake_report({}), theta=1.5)


# -- candidate validation ---------------------------------------------------------


def fp(sql):
    return ast_fingerprint(normalize(parse_sql(sql)))


def test_validate_accepts_a_fresh_in_target_pair(campus_db):
    verdict = validate_candidate(
        "Which departments have a budget over 100?",
        "SELECT name FROM department WHERE budget > 100",
        "1.3", str(campus_db), set())
    assert verdict.accepted
    assert verdict.fingerprint


@pytest.mark.parametrize("question,sql,target,known,reason", [
    ("", "SELECT 1", "1.1", set(), "malformed"),
    ("q", "   ", "1.1", set(), "malformed"),
    ("q", "SELEC oops", "1.1", set(), "unparsable"),
    ("q", "SELECT name FROM department", "2.2", set(), "label-mismatch"),
    ("q", "SELECT * FROM ghost_table", "1.1", set(), "exec-failure"),
    ("q", "SELECT name FROM department", "1.2",
     {fp("SELECT name FROM department")}, "duplicate"),
    ("q", "SELECT id FROM student ORDER BY gpa DESC LIMIT 3", "2.2",
     set(), "label-mismatch"),
])
def test_validate_rejection_reasons(question, sql, target, known, reason,
                                    campus_db):
    verdict = validate_candidate(question, sql, target, str(campus_db), known)
    assert not verdict.accepted
    assert verdict.reason == reason


def test_validate_duplicate_detection_sees_through_aliases(campus_db):
    known = {fp("SELECT name FROM department WHERE budget > 100")}
    verdict = validate_candidate(
        "q", "SELECT d.name FROM department AS d WHERE d.budget > 100",
        "1.3", str(campus_db), known)
    assert verdict.reason == "duplicate"


# -- augmentation -----------------------------------------------------------------


@pytest.fixture()
def template_gateway():
    return GatewayService(ModelSpec(model_id="writer", kind="mock_template"))


def test_augment_happy_path(demo_root, catalog, template_gateway):
    store = WorkloadStore(demo_root)
    base = store.load("sample_easy", catalog=catalog)
    outcome = augment_workload(base, {"2.2", "4.2"}, 3, template_gateway,
                               catalog, seed=1)
    assert isinstance(outcome, AugmentOutcome)
    assert {k: len(v) for k, v in outcome.accepted.items()} == {
        "2.2": 3, "4.2": 3}
    assert outcome.shortfall == {}

    new = outcome.workload
    assert new.version == base.version + 1
    assert new.parent_version == base.version
    added = [dp for dp in new.data_points
             if dp.provenance.kind == "augmented"]
    assert len(added) == 6
    for dp in added:
        assert dp.split == "eval"
        assert dp.label.code in {"2.2", "4.2"}
        assert dp.provenance.model_id == "writer"


def test_augment_never_duplicates_existing_points(demo_root, catalog,
                                                  template_gateway):
    store = WorkloadStore(demo_root)
    base = store.load("sample_easy", catalog=catalog)
    first = augment_workload(base, {"2.2"}, 2, template_gateway, catalog,
                             seed=1)
    again = augment_workload(first.workload, {"2.2"}, 50, template_gateway,
                             catalog, seed=1)
    fingerprints = [fp(dp.gt_sql) for dp in again.workload.data_points
                    if dp.label.code == "2.2" and dp.db_id ==
                    again.workload.data_points[0].db_id]
    # the template bank is finite: a huge ask must fall short, and the
    # points that do land are all distinct
    assert again.shortfall.get("2.2", 0) > 0
    assert "duplicate" in again.rejected["2.2"]


def test_augment_requires_work():
    w = synthetic({1: 2})
    gateway = GatewayService(ModelSpec(model_id="m", kind="mock_template"))
    with pytest.raises(WorkloadError):
        augment_workload(w, set(), 3, gateway, None)
    with pytest.raises(WorkloadError):
        augment_workload(w, {"1.1"}, 0, gateway, None)
