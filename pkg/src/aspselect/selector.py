"""Per-instance solver selection.

Glue between the stratification check, the feature extractor and the
trained classifier: solver-free programs are answered directly, anything
else gets a predicted solver from the configured pool.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .classifiers import Model, Standardizer, predict
from .features import FeatureVector, extract_features
from .groundfmt import GroundProgram
from .strat import Classification, classify_program, evaluate_stratified


class ConfigError(ValueError):
    pass


DEFAULT_EXIT_CODES = {0: "solved", 10: "solved", 30: "solved", 20: "unsat"}


@dataclass(frozen=True)
class SolverSpec:
    solver_id: str
    executable: str
    args: tuple[str, ...] = ()
    input_format: str = "numericGround"
    # exit code -> outcome; table-driven, never keyed on the solver name
    exit_codes: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_EXIT_CODES))


def default_pool() -> list[SolverSpec]:
    """clasp/wasp with the empirically selected option strings."""
    return [
        SolverSpec("clasp*", "clasp", ("--configuration=trendy",)),
        SolverSpec("wasp*", "wasp", ("--shrinking-strategy=progression",
                                     "--shrinking-budget=10", "--trim-core",
                                     "--enable-disjcores")),
    ]


def load_pool(path: Path | str) -> list[SolverSpec]:
    try:
        entries = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"pool file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"pool file {path}: {exc}") from None
    pool = []
    seen = set()
    for e in entries:
        spec = SolverSpec(
            solver_id=e["solverId"],
            executable=e["executable"],
            args=tuple(e.get("args", [])),
            input_format=e.get("inputFormat", "numericGround"),
            exit_codes={int(k): v for k, v in
                        e.get("exitCodes", DEFAULT_EXIT_CODES).items()},
        )
        if spec.solver_id in seen:
            raise ConfigError(f"duplicate solverId {spec.solver_id!r} in pool")
        seen.add(spec.solver_id)
        pool.append(spec)
    return pool


def save_pool(path: Path | str, pool: list[SolverSpec]) -> None:
    entries = [{
        "solverId": s.solver_id,
        "executable": s.executable,
        "args": list(s.args),
        "inputFormat": s.input_format,
        "exitCodes": {str(k): v for k, v in s.exit_codes.items()},
    } for s in pool]
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")


@dataclass(frozen=True)
class SelectionDecision:
    outcome: str                      # "solver-free" | "chosen"
    solver_id: str | None = None
    answer_set: frozenset[int] | None = None
    features: FeatureVector | None = None
    model_id: str = ""
    elapsed: float = 0.0


def select(p: GroundProgram, model: Model, scaler: Standardizer,
           pool: list[SolverSpec], model_id: str = "") -> SelectionDecision:
    pool_ids = {s.solver_id for s in pool}
    missing = set(model.label_order) - pool_ids
    if missing:
        raise ConfigError(
            f"model labels {sorted(missing)} are not in the solver pool")

    start = time.perf_counter()
    if classify_program(p) is Classification.SOLVER_FREE:
        answer = evaluate_stratified(p)
        return SelectionDecision(outcome="solver-free", answer_set=answer,
                                 model_id=model_id,
                                 elapsed=time.perf_counter() - start)
    fv = extract_features(p)
    chosen = predict(model, scaler, fv)
    return SelectionDecision(outcome="chosen", solver_id=chosen, features=fv,
                             model_id=model_id,
                             elapsed=time.perf_counter() - start)
