"""Supervised subprocess execution of grounder and solver under one
shared time/memory budget.

Each child runs in its own process group with a 100 ms watchdog polling
wall time and resident memory; on a breach the whole group gets SIGTERM,
a 2 s grace interval, then SIGKILL.  Ground output is spooled to a
temporary file so large instantiations never live in memory twice.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import psutil

from .classifiers import Model, Standardizer
from .groundfmt import parse_ground_program
from .selector import ConfigError, SolverSpec, select
from .strat import NoAnswerSetError

POLL_INTERVAL = 0.1
GRACE_PERIOD = 2.0

DEFAULT_TIME_LIMIT = 600.0
DEFAULT_MEM_LIMIT = 15 * 2**30


@dataclass(frozen=True)
class ResourceLimits:
    time_limit: float = DEFAULT_TIME_LIMIT   # seconds
    mem_limit: int = DEFAULT_MEM_LIMIT       # bytes

    def __post_init__(self):
        if self.time_limit <= 0 or self.mem_limit <= 0:
            raise ValueError("resource limits must be positive")


@dataclass
class RunOutcome:
    status: str                  # solved | unsat | timeout | memout | error
    wall_time: float
    peak_mem: int = 0
    answer: str | None = None
    exit_info: str | None = None
    phase_times: dict[str, float] = field(default_factory=dict)
    solver_id: str | None = None
    mem_enforcement: str = "polling"  # weaker than an OS hard cap; reported

    def record_line(self) -> str:
        parts = [f"status={self.status}", f"wall={self.wall_time:.3f}",
                 f"peak_mem={self.peak_mem}"]
        for phase in ("ground", "select", "solve"):
            if phase in self.phase_times:
                parts.append(f"{phase}={self.phase_times[phase]:.3f}")
        if self.solver_id:
            parts.append(f"solver={self.solver_id}")
        return " ".join(parts)


def _resolve_executable(spec: SolverSpec) -> str:
    exe = spec.executable
    if os.path.sep in exe or (os.path.altsep and os.path.altsep in exe):
        if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
            raise ConfigError(f"executable not found or not runnable: {exe}")
        return exe
    found = shutil.which(exe)
    if not found:
        raise ConfigError(f"executable not found on PATH: {exe}")
    return found


def _kill_group(proc: subprocess.Popen) -> None:
    """Polite terminate, grace interval, then kill; idempotent."""
    try:
        pgid = os.getpgid(proc.pid)
    except ProcessLookupError:
        return
    for sig, wait in ((signal.SIGTERM, GRACE_PERIOD), (signal.SIGKILL, 5.0)):
        try:
            os.killpg(pgid, sig)
        except ProcessLookupError:
            return
        try:
            proc.wait(timeout=wait)
            break
        except subprocess.TimeoutExpired:
            continue
    # reap any stragglers in the group
    deadline = time.monotonic() + 1.0
    while time.monotonic() < deadline:
        try:
            os.killpg(pgid, 0)
        except ProcessLookupError:
            return
        time.sleep(0.02)


def _group_memory(proc: psutil.Process) -> int:
    total = 0
    try:
        procs = [proc] + proc.children(recursive=True)
    except psutil.NoSuchProcess:
        return 0
    for p in procs:
        try:
            total += p.memory_info().rss
        except psutil.NoSuchProcess:
            continue
    return total


def supervise(cmd: list[str], limits: ResourceLimits,
              stdin_path: Path | str | None = None,
              stdout_path: Path | str | None = None,
              exit_codes: dict[int, str] | None = None) -> RunOutcome:
    """Run one child under the limits and map its exit to an outcome."""
    exit_codes = exit_codes if exit_codes is not None else {0: "solved"}
    stdin_fh = open(stdin_path, "rb") if stdin_path else subprocess.DEVNULL
    stdout_fh = open(stdout_path, "wb") if stdout_path else subprocess.DEVNULL
    stderr_fh = tempfile.TemporaryFile()
    start = time.monotonic()
    breach: str | None = None
    peak = 0
    try:
        proc = subprocess.Popen(cmd, stdin=stdin_fh, stdout=stdout_fh,
                                stderr=stderr_fh, start_new_session=True)
        ps = psutil.Process(proc.pid)
        while True:
            try:
                proc.wait(timeout=POLL_INTERVAL)
                break
            except subprocess.TimeoutExpired:
                pass
            peak = max(peak, _group_memory(ps))
            elapsed = time.monotonic() - start
            if elapsed >= limits.time_limit:
                breach = "timeout"
            elif peak > limits.mem_limit:
                breach = "memout"
            if breach:
                _kill_group(proc)
                break
        wall = time.monotonic() - start
        _kill_group(proc)  # no orphans even on normal exit
        if breach:
            status = breach
            exit_info = f"killed after {breach}"
        else:
            code = proc.returncode
            status = exit_codes.get(code, "error")
            stderr_fh.seek(0)
            tail = stderr_fh.read()[-2000:].decode("utf-8", "replace")
            exit_info = f"exit code {code}" + (f"; stderr: {tail}" if
                                               status == "error" and tail else "")
        return RunOutcome(status=status, wall_time=wall, peak_mem=peak,
                          exit_info=exit_info)
    finally:
        if stdin_path:
            stdin_fh.close()
        if stdout_path:
            stdout_fh.close()
        stderr_fh.close()


def run_single(ground_path: Path | str, solver: SolverSpec,
               limits: ResourceLimits) -> RunOutcome:
    """One solver run over an already-ground program file."""
    exe = _resolve_executable(solver)
    with tempfile.TemporaryDirectory(prefix="aspselect-run-") as tmp:
        out_path = Path(tmp) / "answer.txt"
        outcome = supervise([exe, *solver.args], limits,
                            stdin_path=ground_path, stdout_path=out_path,
                            exit_codes=solver.exit_codes)
        if out_path.exists() and outcome.status in ("solved", "unsat"):
            outcome.answer = out_path.read_text()
        outcome.solver_id = solver.solver_id
        outcome.phase_times["solve"] = outcome.wall_time
        return outcome


def run_pipeline(program_path: Path | str, grounder: SolverSpec,
                 model: Model, scaler: Standardizer, pool: list[SolverSpec],
                 limits: ResourceLimits, model_id: str = "") -> RunOutcome:
    """Ground, select, and solve under one shared budget."""
    grounder_exe = _resolve_executable(grounder)
    specs = {s.solver_id: s for s in pool}
    for s in pool:
        _resolve_executable(s)

    start = time.monotonic()
    phases: dict[str, float] = {}

    def remaining() -> float:
        return limits.time_limit - (time.monotonic() - start)

    with tempfile.TemporaryDirectory(prefix="aspselect-pipe-") as tmp:
        ground_path = Path(tmp) / "ground.out"
        ground_outcome = supervise(
            [grounder_exe, *grounder.args, str(program_path)],
            ResourceLimits(max(remaining(), 1e-3), limits.mem_limit),
            stdout_path=ground_path,
            exit_codes={0: "solved"},
        )
        phases["ground"] = ground_outcome.wall_time
        peak = ground_outcome.peak_mem
        if ground_outcome.status != "solved":
            status = ground_outcome.status if ground_outcome.status in \
                ("timeout", "memout") else "error"
            return RunOutcome(status=status,
                              wall_time=time.monotonic() - start,
                              peak_mem=peak, exit_info=ground_outcome.exit_info,
                              phase_times=phases)

        t0 = time.monotonic()
        with open(ground_path, "rb") as fh:
            program = parse_ground_program(fh)
        try:
            decision = select(program, model, scaler, pool, model_id=model_id)
        except NoAnswerSetError as exc:
            phases["select"] = time.monotonic() - t0
            phases["solve"] = 0.0
            return RunOutcome(status="unsat",
                              wall_time=time.monotonic() - start,
                              peak_mem=peak, exit_info=str(exc),
                              phase_times=phases)
        phases["select"] = time.monotonic() - t0
        if remaining() <= 0:
            return RunOutcome(status="timeout",
                              wall_time=time.monotonic() - start,
                              peak_mem=peak, phase_times=phases)

        if decision.outcome == "solver-free":
            names = sorted(program.symbols.get(a, f"_{a}")
                           for a in decision.answer_set or ())
            phases["solve"] = 0.0
            return RunOutcome(status="solved",
                              wall_time=time.monotonic() - start,
                              peak_mem=peak, answer=" ".join(names) + "\n",
                              phase_times=phases)

        assert decision.solver_id is not None
        spec = specs[decision.solver_id]
        solve = run_single(ground_path, spec,
                           ResourceLimits(max(remaining(), 1e-3),
                                          limits.mem_limit))
        phases["solve"] = solve.wall_time
        return RunOutcome(status=solve.status,
                          wall_time=time.monotonic() - start,
                          peak_mem=max(peak, solve.peak_mem),
                          answer=solve.answer, exit_info=solve.exit_info,
                          phase_times=phases, solver_id=decision.solver_id)
