"""Offline evaluation: solved counts and average times per policy.

Scores runtime matrices under three policies (virtual best, single best,
learned selector), computes selector overhead against a fixed-solver
baseline, and renders competition-style tables plus cactus-plot data.
Average times follow the competition convention: mean over solved
instances only; unsolved domains render as TO.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .dataset import RunStatus, RuntimeRecord


@dataclass
class RuntimeMatrix:
    rows: dict[tuple[str, str], RuntimeRecord]
    domains: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_records(cls, records: Iterable[RuntimeRecord],
                     domains: Mapping[str, str] | None = None) -> "RuntimeMatrix":
        rows: dict[tuple[str, str], RuntimeRecord] = {}
        for rec in records:
            key = (rec.instance_id, rec.solver_id)
            if key in rows:
                raise ValueError(f"duplicate row for {key}")
            rows[key] = rec
        return cls(rows=rows, domains=dict(domains or {}))

    def instances(self) -> list[str]:
        return sorted({i for i, _ in self.rows})

    def solvers(self) -> list[str]:
        return sorted({s for _, s in self.rows})

    def domain_of(self, instance_id: str) -> str:
        return self.domains.get(instance_id, "all")


@dataclass(frozen=True)
class PolicyScore:
    policy: str
    solved_count: int
    # domain -> (solved, avg time over solved instances or None when 0 solved)
    per_domain: dict[str, tuple[int, float | None]]
    times: tuple[float, ...]  # wall times of solved instances, unsorted


def _aggregate(matrix: RuntimeMatrix, policy: str,
               picks: dict[str, RuntimeRecord | None]) -> PolicyScore:
    solved = 0
    times = []
    dom_solved: dict[str, int] = {}
    dom_time: dict[str, float] = {}
    for iid in matrix.instances():
        dom = matrix.domain_of(iid)
        dom_solved.setdefault(dom, 0)
        dom_time.setdefault(dom, 0.0)
        rec = picks.get(iid)
        if rec is not None and rec.status is RunStatus.SOLVED:
            solved += 1
            times.append(rec.wall_time)
            dom_solved[dom] += 1
            dom_time[dom] += rec.wall_time
    per_domain = {
        dom: (n, dom_time[dom] / n if n else None)
        for dom, n in dom_solved.items()
    }
    return PolicyScore(policy=policy, solved_count=solved,
                       per_domain=per_domain, times=tuple(times))


def score_virtual_best(matrix: RuntimeMatrix) -> PolicyScore:
    picks: dict[str, RuntimeRecord | None] = {}
    for iid in matrix.instances():
        best = None
        for s in matrix.solvers():
            rec = matrix.rows.get((iid, s))
            if rec and rec.status is RunStatus.SOLVED:
                if best is None or rec.wall_time < best.wall_time:
                    best = rec
        picks[iid] = best
    return _aggregate(matrix, "virtual-best", picks)


def virtual_best_choices(matrix: RuntimeMatrix) -> dict[str, str]:
    """Per-instance argmin solver; ties break by solver id order."""
    out = {}
    for iid in matrix.instances():
        best = None
        for s in matrix.solvers():
            rec = matrix.rows.get((iid, s))
            if rec and rec.status is RunStatus.SOLVED:
                if best is None or rec.wall_time < best[0]:
                    best = (rec.wall_time, s)
        if best:
            out[iid] = best[1]
    return out


def score_single_best(matrix: RuntimeMatrix, solver_id: str) -> PolicyScore:
    picks = {iid: matrix.rows.get((iid, solver_id))
             for iid in matrix.instances()}
    return _aggregate(matrix, f"single-best({solver_id})", picks)


def score_selector(matrix: RuntimeMatrix,
                   selector_fn: Callable[[str], str],
                   model_id: str = "selector") -> PolicyScore:
    picks = {}
    for iid in matrix.instances():
        solver = selector_fn(iid)
        if (iid, solver) not in matrix.rows:
            raise ValueError(
                f"selector chose {solver!r} for {iid!r} but the matrix has "
                "no such row")
        picks[iid] = matrix.rows[(iid, solver)]
    return _aggregate(matrix, f"selector({model_id})", picks)


@dataclass(frozen=True)
class OverheadReport:
    # domain -> (min, max, mean) overhead fraction over paired solved runs
    per_domain: dict[str, tuple[float, float, float]]
    unpaired: tuple[str, ...]


def overhead_report(selector_times: Mapping[str, float],
                    baseline_times: Mapping[str, float],
                    domains: Mapping[str, str] | None = None) -> OverheadReport:
    """Relative slowdown of the selector pipeline per solved pair."""
    domains = domains or {}
    per_dom: dict[str, list[float]] = {}
    paired = set(selector_times) & set(baseline_times)
    unpaired = tuple(sorted(set(selector_times) ^ set(baseline_times)))
    for iid in sorted(paired):
        base = baseline_times[iid]
        if base <= 0:
            continue
        ovh = (selector_times[iid] - base) / base
        per_dom.setdefault(domains.get(iid, "all"), []).append(ovh)
    return OverheadReport(
        per_domain={d: (min(v), max(v), sum(v) / len(v))
                    for d, v in per_dom.items()},
        unpaired=unpaired,
    )


def cactus_data(score: PolicyScore) -> list[tuple[int, float]]:
    """(index, sorted solved time) pairs for external plotting."""
    return [(i + 1, t) for i, t in enumerate(sorted(score.times))]


def render_report(scores: list[PolicyScore]) -> tuple[str, dict[str, list[tuple[int, float]]]]:
    if not scores:
        raise ValueError("no policy scores to render")
    domains = sorted({d for s in scores for d in s.per_domain})
    header = ["Problem"] + [f"{s.policy} #solved|time" for s in scores]
    rows = [header]
    for dom in domains:
        row = [dom]
        for s in scores:
            solved, avg = s.per_domain.get(dom, (0, None))
            row.append(f"{solved} | " + (f"{avg:.2f}" if avg is not None else "TO"))
        rows.append(row)
    total = ["Total Solved Instances"] + [str(s.solved_count) for s in scores]
    rows.append(total)

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
             for r in rows]
    lines.insert(1, "-" * len(lines[0]))
    table = "\n".join(lines) + "\n"
    plots = {s.policy: cactus_data(s) for s in scores}
    return table, plots
