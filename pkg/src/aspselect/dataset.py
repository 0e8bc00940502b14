"""Training-set assembly: per-run records, best-solver labels, and the
50/25/25 stratified split.

File formats (delimited text, one header line) are shared with the
evaluation harness: records files carry
(instanceId, solverId, status, wallTime, groundTime) and feature files
carry (instanceId, <ten ratios>, <raw counts>).
"""

from __future__ import annotations

import csv
import enum
import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .features import FEATURE_NAMES, FeatureVector, RawCounts

SPLIT_RATIOS = (0.5, 0.25, 0.25)

_COUNT_FIELDS = (
    "facts", "rules", "pos_occurrences", "neg_occurrences", "body_occurrences",
    "constraints", "weak_constraints", "standard_rules", "choice_rules",
    "weight_rules", "disjunctive_rules",
)


class RunStatus(enum.Enum):
    SOLVED = "solved"
    TIMEOUT = "timeout"
    MEMOUT = "memout"
    ERROR = "error"


@dataclass(frozen=True)
class RuntimeRecord:
    instance_id: str
    solver_id: str
    status: RunStatus
    wall_time: float
    ground_time: float | None = None


@dataclass(frozen=True)
class LabeledInstance:
    instance_id: str
    features: FeatureVector
    label: str


@dataclass
class LabelingResult:
    instances: list[LabeledInstance]
    unsolved: list[str]          # dropped: no solver solved them
    missing_records: list[str]   # had features but no runtime rows


@dataclass
class SplitDataset:
    train: list[LabeledInstance] = field(default_factory=list)
    valid: list[LabeledInstance] = field(default_factory=list)
    test: list[LabeledInstance] = field(default_factory=list)


def label_instances(
    records: Iterable[RuntimeRecord],
    features: dict[str, FeatureVector],
    solver_order: Sequence[str],
) -> LabelingResult:
    """Label each instance with the fastest solver that solved it.

    Ties break by position in solver_order; instances no solver solved
    are dropped and reported.
    """
    priority = {s: i for i, s in enumerate(solver_order)}
    best: dict[str, tuple[float, int, str]] = {}
    seen: set[str] = set()
    for rec in records:
        seen.add(rec.instance_id)
        if rec.status is not RunStatus.SOLVED:
            continue
        key = (rec.wall_time, priority.get(rec.solver_id, len(priority)),
               rec.solver_id)
        if rec.instance_id not in best or key < best[rec.instance_id]:
            best[rec.instance_id] = key

    instances = []
    unsolved = []
    for iid in sorted(seen):
        if iid not in features:
            continue
        if iid in best:
            instances.append(LabeledInstance(iid, features[iid], best[iid][2]))
        else:
            unsolved.append(iid)
    missing = sorted(set(features) - seen)
    return LabelingResult(instances, unsolved, missing)


def _apportion(n: int, ratios: Sequence[float], prefer_last: bool) -> list[int]:
    """Largest-remainder split of n into len(ratios) parts.

    prefer_last flips the tie order between equal remainders so ties do
    not systematically favor one split across labels.
    """
    floors = [int(n * r) for r in ratios]
    remainders = [n * r - f for r, f in zip(ratios, floors)]
    leftover = n - sum(floors)
    order = sorted(
        range(len(ratios)),
        key=lambda i: (-remainders[i], -i if prefer_last else i),
    )
    for i in order[:leftover]:
        floors[i] += 1
    return floors


def stratified_split(
    instances: Sequence[LabeledInstance],
    ratios: tuple[float, float, float] = SPLIT_RATIOS,
    seed: int = 0,
) -> SplitDataset:
    """Deterministic per-label split preserving label frequencies within 1."""
    if not instances:
        raise ValueError("cannot split an empty dataset")
    if abs(sum(ratios) - 1.0) > 1e-12:
        raise ValueError(f"split ratios {ratios} do not sum to 1")

    by_label: dict[str, list[LabeledInstance]] = {}
    for inst in instances:
        by_label.setdefault(inst.label, []).append(inst)

    rng = random.Random(seed)
    split = SplitDataset()
    for li, label in enumerate(sorted(by_label)):
        group = sorted(by_label[label], key=lambda x: x.instance_id)
        if len(group) < 4:
            warnings.warn(
                f"label {label!r} has only {len(group)} instances; "
                "its split degenerates", stacklevel=2)
        rng.shuffle(group)
        n_train, n_valid, _ = _apportion(len(group), ratios, prefer_last=li % 2 == 1)
        split.train.extend(group[:n_train])
        split.valid.extend(group[n_train:n_train + n_valid])
        split.test.extend(group[n_train + n_valid:])
    return split


# --- file formats ---------------------------------------------------------

def write_records(path: Path | str, records: Iterable[RuntimeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instanceId", "solverId", "status", "wallTime", "groundTime"])
        for r in records:
            w.writerow([r.instance_id, r.solver_id, r.status.value,
                        f"{r.wall_time:.6f}",
                        "" if r.ground_time is None else f"{r.ground_time:.6f}"])


def read_records(path: Path | str) -> list[RuntimeRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RuntimeRecord(
                instance_id=row["instanceId"],
                solver_id=row["solverId"],
                status=RunStatus(row["status"]),
                wall_time=float(row["wallTime"]),
                ground_time=float(row["groundTime"]) if row.get("groundTime") else None,
            ))
    return out


def _feature_header() -> list[str]:
    return ["instanceId", *FEATURE_NAMES, *_COUNT_FIELDS]


def _feature_row(iid: str, fv: FeatureVector) -> list[str]:
    rec = fv.as_record()
    return [iid] + [repr(rec[k]) for k in FEATURE_NAMES] \
        + [str(rec[k]) for k in _COUNT_FIELDS]


def _feature_from_row(row: dict[str, str]) -> FeatureVector:
    counts = RawCounts(**{k: int(row[k]) for k in _COUNT_FIELDS})
    return FeatureVector(**{k: float(row[k]) for k in FEATURE_NAMES}, counts=counts)


def write_features(path: Path | str, features: dict[str, FeatureVector]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_feature_header())
        for iid in sorted(features):
            w.writerow(_feature_row(iid, features[iid]))


def read_features(path: Path | str) -> dict[str, FeatureVector]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["instanceId"]] = _feature_from_row(row)
    return out


def write_labeled(path: Path | str, instances: Iterable[LabeledInstance]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instanceId", "label", *FEATURE_NAMES, *_COUNT_FIELDS])
        for inst in instances:
            w.writerow([inst.instance_id, inst.label,
                        *_feature_row(inst.instance_id, inst.features)[1:]])


def read_labeled(path: Path | str) -> list[LabeledInstance]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(LabeledInstance(
                instance_id=row["instanceId"],
                features=_feature_from_row(row),
                label=row["label"],
            ))
    return out
