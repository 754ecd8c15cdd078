"""Versioned question–SQL workloads: load, validate, align, augment.

A workload is a list of data points (question, ground-truth SQL,
database) stored as JSONL, one version per file, with lineage in a
sibling ``meta.json``.  Versions are immutable: augmentation builds the
next version as a superset and publishes it atomically.  Alignment
produces a *derived* workload under a new id instead of a new version,
because an aligned workload is a subset and versions may only grow.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .datastore import Catalog, execute_query, introspect_schema
from .gateway import (GatewayService, RequestContext, build_augment_prompt,
                      parse_pair_response, schema_text)
from .sqlast import (SUBCATEGORY_DESCRIPTIONS, SqlAstError, TaxonomyLabel,
                     ast_fingerprint, classify, normalize, parse_sql)

SPLITS = ("train", "eval")
DEFAULT_AUGMENT_BUDGET_FACTOR = 5
DEFAULT_MIN_SUPPORT = 3


class WorkloadError(Exception):
    pass


class ValidationError(WorkloadError):
    """One or more data points failed validation.

    ``problems`` is a list of (data_point_id, reason) pairs; the id is
    the raw ``id`` field when present, else the 1-based line number.
    """

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        ids = ", ".join(p[0] for p in problems[:10])
        more = "" if len(problems) <= 10 else f" (+{len(problems) - 10} more)"
        super().__init__(f"{len(problems)} invalid data points: {ids}{more}")


class InfeasibleAlignment(WorkloadError):
    pass


@dataclass(frozen=True)
class Provenance:
    """Where a data point came from: a seed benchmark or augmentation."""
    kind: str
    name: str = ""
    model_id: str = ""
    run_id: str = ""

    def __post_init__(self):
        if self.kind not in ("seed_benchmark", "augmented"):
            raise ValueError(f"unknown provenance kind: {self.kind!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "Provenance":
        return cls(kind=raw.get("kind", ""), name=raw.get("name", ""),
                   model_id=raw.get("model_id", ""),
                   run_id=raw.get("run_id", ""))

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "seed_benchmark":
            out["name"] = self.name
        else:
            out["model_id"] = self.model_id
            out["run_id"] = self.run_id
        return out


@dataclass(frozen=True)
class DataPoint:
    id: str
    question: str
    gt_sql: str
    db_id: str
    split: str
    provenance: Provenance
    label: TaxonomyLabel

    def to_dict(self) -> dict:
        return {"id": self.id, "question": self.question,
                "gt_sql": self.gt_sql, "db_id": self.db_id,
                "split": self.split, "provenance": self.provenance.to_dict()}


@dataclass(frozen=True)
class Workload:
    workload_id: str
    version: int
    data_points: tuple[DataPoint, ...]
    parent_version: int | None = None
    created_at: str = ""

    def __post_init__(self):
        if self.version < 1:
            raise ValueError("version must be >= 1")

    def __len__(self) -> int:
        return len(self.data_points)

    def by_id(self, dp_id: str) -> DataPoint:
        for dp in self.data_points:
            if dp.id == dp_id:
                return dp
        raise KeyError(dp_id)

    def split_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in SPLITS}
        for dp in self.data_points:
            counts[dp.split] += 1
        return counts

    def category_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for dp in self.data_points:
            counts[dp.label.category] = counts.get(dp.label.category, 0) + 1
        return counts


@dataclass(frozen=True)
class TargetDistribution:
    weights: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, expected 1")
        for cat, w in self.weights.items():
            if cat not in range(1, 7):
                raise ValueError(f"unknown category {cat}")
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight out of range for {cat}: {w}")

    @classmethod
    def from_dict(cls, raw: dict) -> "TargetDistribution":
        weights = {}
        for key, value in raw.items():
            name = str(key).lower().lstrip("c")
            weights[int(name)] = float(value)
        return cls(weights=weights)

    @classmethod
    def from_file(cls, path: str | Path) -> "TargetDistribution":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict) and "weights" in data:
            data = data["weights"]
        return cls.from_dict(data)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _parse_data_point(raw: dict, line_no: int,
                      problems: list[tuple[str, str]],
                      catalog: Catalog | None) -> DataPoint | None:
    dp_id = str(raw.get("id") or f"line-{line_no}")
    for field_name in ("id", "question", "gt_sql", "db_id", "split"):
        if not raw.get(field_name):
            problems.append((dp_id, f"missing field {field_name!r}"))
            return None
    if raw["split"] not in SPLITS:
        problems.append((dp_id, f"split must be one of {SPLITS}"))
        return None
    if catalog is not None and raw["db_id"] not in catalog.db_ids():
        problems.append((dp_id, f"unknown db_id {raw['db_id']!r}"))
        return None
    try:
        label = classify(parse_sql(raw["gt_sql"]))
    except SqlAstError as exc:
        problems.append((dp_id, f"gt_sql does not parse: {exc}"))
        return None
    try:
        provenance = Provenance.from_dict(raw.get("provenance") or {})
    except ValueError as exc:
        problems.append((dp_id, str(exc)))
        return None
    return DataPoint(id=raw["id"], question=raw["question"],
                     gt_sql=raw["gt_sql"], db_id=raw["db_id"],
                     split=raw["split"], provenance=provenance, label=label)


def data_points_from_lines(lines: Iterable[str],
                           catalog: Catalog | None = None
                           ) -> tuple[DataPoint, ...]:
    problems: list[tuple[str, str]] = []
    points: list[DataPoint] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append((f"line-{line_no}", f"bad JSON: {exc}"))
            continue
        dp = _parse_data_point(raw, line_no, problems, catalog)
        if dp is None:
            continue
        if dp.id in seen:
            problems.append((dp.id, "duplicate id"))
            continue
        seen.add(dp.id)
        points.append(dp)
    if problems:
        raise ValidationError(problems)
    return tuple(points)


def load_workload(path: str | Path, workload_id: str = "", version: int = 1,
                  catalog: Catalog | None = None) -> Workload:
    """Read one JSONL workload file, validating every data point."""
    path = Path(path)
    points = data_points_from_lines(
        path.read_text(encoding="utf-8").splitlines(), catalog)
    wid = workload_id or path.stem
    return Workload(workload_id=wid, version=version, data_points=points,
                    created_at=_now())


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class WorkloadStore:
    """Filesystem layout: ``workloads/<id>/v<k>.jsonl`` + ``meta.json``."""

    def __init__(self, workdir: str | Path):
        self.root = Path(workdir) / "workloads"

    def _dir(self, workload_id: str) -> Path:
        return self.root / workload_id

    def ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "meta.json").is_file())

    def meta(self, workload_id: str) -> dict:
        path = self._dir(workload_id) / "meta.json"
        if not path.is_file():
            raise WorkloadError(f"unknown workload: {workload_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def latest_version(self, workload_id: str) -> int:
        return int(self.meta(workload_id)["latest_version"])

    def load(self, workload_id: str, version: int | None = None,
             catalog: Catalog | None = None) -> Workload:
        meta = self.meta(workload_id)
        if version is None:
            version = int(meta["latest_version"])
        entry = meta["versions"].get(str(version))
        if entry is None:
            raise WorkloadError(
                f"workload {workload_id!r} has no version {version}")
        path = self._dir(workload_id) / f"v{version}.jsonl"
        points = data_points_from_lines(
            path.read_text(encoding="utf-8").splitlines(), catalog)
        parent = entry.get("parent_version")
        return Workload(workload_id=workload_id, version=version,
                        data_points=points,
                        parent_version=None if parent is None else int(parent),
                        created_at=entry.get("created_at", ""))

    def save(self, workload: Workload, note: str = "") -> None:
        """Publish one immutable version; supersets enforced for v > 1."""
        directory = self._dir(workload.workload_id)
        target = directory / f"v{workload.version}.jsonl"
        if target.exists():
            raise WorkloadError(
                f"{workload.workload_id} v{workload.version} already exists")
        if workload.version > 1:
            parent_path = directory / f"v{workload.version - 1}.jsonl"
            if not parent_path.is_file():
                raise WorkloadError(
                    f"cannot save v{workload.version}: "
                    f"v{workload.version - 1} missing")
            parent_ids = {dp.id for dp in data_points_from_lines(
                parent_path.read_text(encoding="utf-8").splitlines())}
            new_ids = {dp.id for dp in workload.data_points}
            if not parent_ids <= new_ids:
                raise WorkloadError(
                    "new version must contain every data point of its parent")
        body = "\n".join(json.dumps(dp.to_dict(), sort_keys=True)
                         for dp in workload.data_points) + "\n"
        _atomic_write(target, body)
        meta_path = directory / "meta.json"
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        else:
            meta = {"workload_id": workload.workload_id,
                    "latest_version": 0, "versions": {}}
        meta["versions"][str(workload.version)] = {
            "parent_version": workload.parent_version,
            "note": note,
            "created_at": workload.created_at or _now(),
        }
        meta["latest_version"] = max(int(v) for v in meta["versions"])
        _atomic_write(meta_path, json.dumps(meta, indent=2, sort_keys=True))


def _largest_remainder_quotas(weights: dict[int, float],
                              n: int) -> dict[int, int]:
    """Apportion *n* seats to categories by largest remainder."""
    floors: dict[int, int] = {}
    remainders: list[tuple[float, int]] = []
    for cat in sorted(weights):
        exact = weights[cat] * n
        floors[cat] = int(exact)
        remainders.append((exact - int(exact), cat))
    leftover = n - sum(floors.values())
    remainders.sort(key=lambda item: (-item[0], item[1]))
    for _, cat in remainders[:leftover]:
        floors[cat] += 1
    return floors


def aligned_workload_id(workload_id: str, target: TargetDistribution,
                        seed: int) -> str:
    tag = json.dumps({"weights": {str(c): target.weights[c]
                                  for c in sorted(target.weights)},
                      "seed": seed}, sort_keys=True)
    digest = hashlib.sha256(tag.encode("utf-8")).hexdigest()[:8]
    return f"{workload_id}_aligned_{digest}"


def align_workload(workload: Workload, target: TargetDistribution,
                   seed: int = 0) -> Workload:
    """Select the largest eval subset matching *target* category weights.

    Quotas come from largest-remainder rounding of ``weight·n``; the
    subset size is the largest n whose quotas all fit the available
    counts.  Rounding is not monotone in n (a bigger n can demand more
    of a category than a smaller one did), so n is found by scanning
    down from the total rather than by bisection.  Members are drawn per
    category by seeded sampling without replacement.  Train-split points
    pass through untouched — they are prompt exemplars, not measurements
    — so the distribution guarantee covers the eval split.

    The result is a *derived* workload under a deterministic new id
    (same source, target, and seed ⇒ same id), version 1: a subset can
    never be the next version of its source, versions only grow.
    """
    positive = {c for c, w in target.weights.items() if w > 0}
    pools: dict[int, list[DataPoint]] = {c: [] for c in positive}
    for dp in workload.data_points:
        if dp.split == "eval" and dp.label.category in pools:
            pools[dp.label.category].append(dp)
    empty = sorted(c for c in positive if not pools[c])
    if empty:
        raise InfeasibleAlignment(
            f"target gives weight to categories with no eval data "
            f"points: {empty}")

    available = {c: len(pools[c]) for c in positive}
    weights = {c: target.weights[c] for c in positive}
    best_n = 0
    for n in range(sum(available.values()), 0, -1):
        quotas = _largest_remainder_quotas(weights, n)
        if all(quotas[c] <= available[c] for c in positive):
            best_n = n
            break
    if best_n == 0:
        raise InfeasibleAlignment("no subset size satisfies the target")

    quotas = _largest_remainder_quotas(weights, best_n)
    rng = random.Random(f"align:{seed}")
    chosen = [dp for dp in workload.data_points if dp.split == "train"]
    for cat in sorted(positive):
        pool = sorted(pools[cat], key=lambda dp: dp.id)
        chosen.extend(rng.sample(pool, quotas[cat]))
    chosen.sort(key=lambda dp: dp.id)
    return Workload(
        workload_id=aligned_workload_id(workload.workload_id, target, seed),
        version=1, data_points=tuple(chosen),
        parent_version=None, created_at=_now())


def select_weak_subcategories(report: dict, metric: str = "EA",
                              theta: float = 0.0,
                              min_support: int = DEFAULT_MIN_SUPPORT
                              ) -> set[str]:
    """Subcategories scoring below *theta* with enough data points.

    A subcategory counts as weak when any model in the report scores it
    below the threshold over at least *min_support* distinct data
    points.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must be within [0, 1]")
    weak: set[str] = set()
    for model in report.get("models", []):
        table = model.get("by_subcategory", {}).get(metric, {})
        for code, cell in table.items():
            score = cell.get("score")
            if score is None:
                continue
            support = cell.get("data_points", cell.get("support", 0))
            if score < theta and support >= min_support:
                weak.add(code)
    return weak


@dataclass(frozen=True)
class CandidateVerdict:
    accepted: bool
    reason: str = ""
    fingerprint: bytes = b""


def validate_candidate(question: str, sql: str, target: str, db_path: str,
                       known_fingerprints: set[bytes]) -> CandidateVerdict:
    """Accept a generated pair only if it is provably in-target and runs.

    Rejection reasons: ``malformed`` (empty question/SQL),
    ``unparsable``, ``label-mismatch``, ``exec-failure``, ``duplicate``.
    """
    if not question.strip() or not sql.strip():
        return CandidateVerdict(False, "malformed")
    try:
        ast = parse_sql(sql)
    except SqlAstError:
        return CandidateVerdict(False, "unparsable")
    if classify(ast).code != target:
        return CandidateVerdict(False, "label-mismatch")
    fingerprint = ast_fingerprint(normalize(ast))
    if fingerprint in known_fingerprints:
        return CandidateVerdict(False, "duplicate")
    try:
        execute_query(db_path, sql)
    except Exception:
        return CandidateVerdict(False, "exec-failure")
    return CandidateVerdict(True, fingerprint=fingerprint)


@dataclass(frozen=True)
class AugmentOutcome:
    workload: Workload
    accepted: dict[str, list[str]]
    rejected: dict[str, list[str]]
    shortfall: dict[str, int]

    def summary(self) -> dict:
        return {
            "accepted": {k: list(v) for k, v in sorted(self.accepted.items())},
            "rejected_reasons": {k: sorted(v) for k, v
                                 in sorted(self.rejected.items())},
            "shortfall": dict(sorted(self.shortfall.items())),
        }


def _pick_database(workload: Workload, subcategory: str,
                   rng: random.Random) -> str:
    """Sample a database, weighted toward where the subcategory lives."""
    in_target = [dp.db_id for dp in workload.data_points
                 if dp.label.code == subcategory]
    pool = in_target or [dp.db_id for dp in workload.data_points]
    return rng.choice(sorted(pool))


def _exemplars(workload: Workload, subcategory: str,
               limit: int = 3) -> list[tuple[str, str]]:
    picked = [dp for dp in workload.data_points
              if dp.split == "train" and dp.label.code == subcategory]
    picked.sort(key=lambda dp: dp.id)
    return [(dp.question, dp.gt_sql) for dp in picked[:limit]]


def augment_workload(workload: Workload, weak: set[str],
                     k_per_subcat: int, gateway: GatewayService,
                     catalog: Catalog, seed: int = 0, run_id: str = "",
                     budget_factor: int = DEFAULT_AUGMENT_BUDGET_FACTOR
                     ) -> AugmentOutcome:
    """Generate and validate new data points for each weak subcategory.

    Each subcategory gets up to ``budget_factor * k_per_subcat``
    generation attempts; accepted pairs join the eval split with
    augmented provenance.  Shortfalls are reported, never raised.
    """
    if not weak:
        raise WorkloadError("no weak subcategories given")
    if k_per_subcat < 1:
        raise WorkloadError("k_per_subcat must be >= 1")

    fingerprints: dict[str, set[bytes]] = {}
    for dp in workload.data_points:
        try:
            fp = ast_fingerprint(normalize(parse_sql(dp.gt_sql)))
        except SqlAstError:
            continue
        fingerprints.setdefault(dp.db_id, set()).add(fp)

    schemas: dict[str, str] = {}
    accepted: dict[str, list[str]] = {}
    rejected: dict[str, list[str]] = {}
    shortfall: dict[str, int] = {}
    new_points: list[DataPoint] = []

    for subcategory in sorted(weak):
        rng = random.Random(f"augment:{seed}:{subcategory}")
        db_id = _pick_database(workload, subcategory, rng)
        db_path = catalog.get(db_id).path
        if db_id not in schemas:
            schemas[db_id] = schema_text(introspect_schema(db_path))
        description = SUBCATEGORY_DESCRIPTIONS.get(subcategory, "")
        exemplars = _exemplars(workload, subcategory)
        known = fingerprints.setdefault(db_id, set())
        got: list[str] = []
        reasons: list[str] = []

        for attempt in range(budget_factor * k_per_subcat):
            if len(got) >= k_per_subcat:
                break
            prompt = build_augment_prompt(
                target=subcategory, target_description=description,
                schema=schemas[db_id], exemplars=exemplars, attempt=attempt)
            context = RequestContext(db_id=db_id,
                                     target_subcategory=subcategory,
                                     attempt=attempt)
            result = gateway.generate(prompt, context,
                                      extra=f"augment:{subcategory}:{attempt}")
            pair = parse_pair_response(result.response.text)
            if pair is None:
                reasons.append("malformed")
                continue
            question, sql = pair
            verdict = validate_candidate(question, sql, subcategory,
                                         db_path, known)
            if not verdict.accepted:
                reasons.append(verdict.reason)
                continue
            known.add(verdict.fingerprint)
            dp_id = (f"{workload.workload_id}-aug-{subcategory}-"
                     f"{len(got) + 1}")
            new_points.append(DataPoint(
                id=dp_id, question=question, gt_sql=sql, db_id=db_id,
                split="eval",
                provenance=Provenance(kind="augmented",
                                      model_id=gateway.spec.model_id,
                                      run_id=run_id),
                label=classify(parse_sql(sql))))
            got.append(dp_id)

        accepted[subcategory] = got
        rejected[subcategory] = reasons
        if len(got) < k_per_subcat:
            shortfall[subcategory] = k_per_subcat - len(got)

    augmented = Workload(
        workload_id=workload.workload_id,
        version=workload.version + 1,
        data_points=workload.data_points + tuple(new_points),
        parent_version=workload.version,
        created_at=_now())
    return AugmentOutcome(workload=augmented, accepted=accepted,
                          rejected=rejected, shortfall=shortfall)
