import os
import stat
import time

import numpy as np
import pytest

from aspselect.classifiers import LinearSvmModel, Standardizer
from aspselect.groundfmt import write_ground_program, GroundProgram, RuleKind, \
    RuleStatement
from aspselect.runner import (ResourceLimits, RunOutcome, run_pipeline,
                              run_single, supervise)
from aspselect.selector import ConfigError, SolverSpec

from helpers import five_rule_fixture


def make_script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return str(path)


def spec(exe, solver_id="stub", args=(), exit_codes=None):
    if exit_codes is None:
        return SolverSpec(solver_id, exe, tuple(args))
    return SolverSpec(solver_id, exe, tuple(args), exit_codes=exit_codes)


LIMITS = ResourceLimits(time_limit=20.0, mem_limit=2**30)


# --- supervise / run_single --------------------------------------------------

def test_solved_run_captures_answer(tmp_path):
    exe = make_script(tmp_path, "ok.sh", 'cat > /dev/null\necho "1 2 3"\nexit 0\n')
    ground = tmp_path / "in.gr"
    ground.write_text("0\n0\nB+\n0\nB-\n0\n1\n")
    out = run_single(ground, spec(exe), LIMITS)
    assert out.status == "solved"
    assert out.answer == "1 2 3\n"
    assert out.solver_id == "stub"
    assert out.mem_enforcement == "polling"
    assert out.phase_times["solve"] == out.wall_time


def test_exit_code_table_mapping(tmp_path):
    ground = tmp_path / "in.gr"
    ground.write_text("")
    for code, expected in ((0, "solved"), (10, "solved"), (30, "solved"),
                           (20, "unsat"), (7, "error")):
        exe = make_script(tmp_path, f"exit{code}.sh", f"exit {code}\n")
        out = run_single(ground, spec(exe), LIMITS)
        assert out.status == expected, f"exit {code}"
        assert f"exit code {code}" in out.exit_info


def test_custom_exit_code_table(tmp_path):
    ground = tmp_path / "in.gr"
    ground.write_text("")
    exe = make_script(tmp_path, "exit42.sh", "exit 42\n")
    out = run_single(ground, spec(exe, exit_codes={42: "solved"}), LIMITS)
    assert out.status == "solved"
    out = run_single(ground, spec(exe), LIMITS)
    assert out.status == "error"


def test_error_run_reports_stderr_tail(tmp_path):
    exe = make_script(tmp_path, "boom.sh", 'echo "segfault imminent" >&2\nexit 1\n')
    out = supervise([exe], LIMITS)
    assert out.status == "error"
    assert "segfault imminent" in out.exit_info


def test_timeout_enforced_within_grace(tmp_path):
    exe = make_script(tmp_path, "slow.sh", "sleep 60\n")
    limits = ResourceLimits(time_limit=0.5, mem_limit=2**30)
    t0 = time.monotonic()
    out = supervise([exe], limits)
    elapsed = time.monotonic() - t0
    assert out.status == "timeout"
    assert "timeout" in out.exit_info
    # wall time may exceed the limit only by the grace interval plus
    # polling slack
    assert elapsed <= limits.time_limit + 2.0 + 2.0


def test_memout_enforced_by_polling(tmp_path):
    exe = make_script(
        tmp_path, "hog.sh",
        "exec python3 -c 'b = bytearray(300 * 1024 * 1024); "
        "import time; time.sleep(60)'\n")
    limits = ResourceLimits(time_limit=30.0, mem_limit=64 * 2**20)
    out = supervise([exe], limits)
    assert out.status == "memout"
    assert out.peak_mem > limits.mem_limit


def test_no_orphan_processes_after_timeout(tmp_path):
    pid_file = tmp_path / "child.pid"
    exe = make_script(tmp_path, "spawner.sh",
                      f"sleep 60 &\necho $! > {pid_file}\nsleep 60\n")
    limits = ResourceLimits(time_limit=0.5, mem_limit=2**30)
    out = supervise([exe], limits)
    assert out.status == "timeout"
    child = int(pid_file.read_text())
    # the whole process group must be gone, including the backgrounded child
    deadline = time.monotonic() + 3.0
    while time.monotonic() < deadline:
        try:
            os.kill(child, 0)
        except ProcessLookupError:
            return
        time.sleep(0.05)
    pytest.fail(f"backgrounded child {child} survived the group kill")


def test_missing_executable_raises_before_spawn(tmp_path):
    ground = tmp_path / "in.gr"
    ground.write_text("")
    with pytest.raises(ConfigError, match="not found"):
        run_single(ground, spec("/nonexistent/solver"), LIMITS)
    with pytest.raises(ConfigError, match="PATH"):
        run_single(ground, spec("definitely-not-a-real-solver-xyz"), LIMITS)


def test_non_executable_file_rejected(tmp_path):
    plain = tmp_path / "data.txt"
    plain.write_text("not a program")
    with pytest.raises(ConfigError, match="not runnable"):
        run_single(plain, spec(str(plain)), LIMITS)


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        ResourceLimits(time_limit=0.0)
    with pytest.raises(ValueError):
        ResourceLimits(mem_limit=-1)


def test_record_line_fields():
    out = RunOutcome(status="solved", wall_time=1.23456, peak_mem=42,
                     phase_times={"ground": 0.5, "select": 0.01, "solve": 0.7},
                     solver_id="s1")
    line = out.record_line()
    assert "status=solved" in line and "wall=1.235" in line
    assert "ground=0.500" in line and "solver=s1" in line


# --- run_pipeline ------------------------------------------------------------

def identity_scaler():
    return Standardizer(mean=np.zeros(10), stdev=np.ones(10),
                        constant=np.zeros(10, dtype=bool))


def model_for(labels=("s1", "s2"), toward_first=True):
    sign = 1.0 if toward_first else -1.0
    return LinearSvmModel(weights=np.full(10, sign), bias=sign,
                          reg_c=1.0, label_order=labels)


def cat_grounder():
    # stands in for a real grounder: copies the already-ground file to stdout
    return SolverSpec("copy-grounder", "/bin/cat")


def test_pipeline_needs_solver_runs_chosen_stub(tmp_path):
    program = tmp_path / "prog.gr"
    program.write_text(write_ground_program(five_rule_fixture()))
    marker1 = tmp_path / "ran1"
    s1 = make_script(tmp_path, "s1.sh",
                     f"cat > /dev/null\ntouch {marker1}\necho world\nexit 10\n")
    s2 = make_script(tmp_path, "s2.sh", "exit 1\n")
    pool = [spec(s1, "s1"), spec(s2, "s2")]
    out = run_pipeline(program, cat_grounder(), model_for(), identity_scaler(),
                       pool, LIMITS)
    assert out.status == "solved"
    assert out.solver_id == "s1"
    assert out.answer == "world\n"
    assert marker1.exists()
    assert set(out.phase_times) == {"ground", "select", "solve"}
    assert out.wall_time >= sum(out.phase_times.values()) - 1e-6


def test_pipeline_solver_free_never_spawns_solver(tmp_path):
    p = GroundProgram(rules=(RuleStatement(RuleKind.BASIC, heads=(1,)),),
                      symbols={1: "a"})
    program = tmp_path / "prog.gr"
    program.write_text(write_ground_program(p))
    marker = tmp_path / "ran"
    s1 = make_script(tmp_path, "s1.sh", f"touch {marker}\nexit 0\n")
    pool = [spec(s1, "s1"), spec(s1, "s2")]
    out = run_pipeline(program, cat_grounder(), model_for(), identity_scaler(),
                       pool, LIMITS)
    assert out.status == "solved"
    assert out.answer == "a\n"
    assert out.solver_id is None
    assert not marker.exists()
    assert out.phase_times["solve"] == 0.0


def test_pipeline_stratified_contradiction_is_unsat(tmp_path):
    # fact a, but the compute section forbids a
    p = GroundProgram(rules=(RuleStatement(RuleKind.BASIC, heads=(1,)),),
                      symbols={1: "a"}, compute_false=frozenset({1}))
    program = tmp_path / "prog.gr"
    program.write_text(write_ground_program(p))
    s1 = make_script(tmp_path, "s1.sh", "exit 0\n")
    pool = [spec(s1, "s1"), spec(s1, "s2")]
    out = run_pipeline(program, cat_grounder(), model_for(), identity_scaler(),
                       pool, LIMITS)
    assert out.status == "unsat"
    assert "forbidden" in out.exit_info


def test_pipeline_grounder_failure_is_error(tmp_path):
    program = tmp_path / "prog.gr"
    program.write_text("anything")
    bad_grounder = SolverSpec("bad", make_script(tmp_path, "g.sh", "exit 3\n"))
    s1 = make_script(tmp_path, "s1.sh", "exit 0\n")
    pool = [spec(s1, "s1"), spec(s1, "s2")]
    out = run_pipeline(program, bad_grounder, model_for(), identity_scaler(),
                       pool, LIMITS)
    assert out.status == "error"
    assert "ground" in out.phase_times and "solve" not in out.phase_times


def test_pipeline_checks_all_executables_before_grounding(tmp_path):
    program = tmp_path / "prog.gr"
    program.write_text(write_ground_program(five_rule_fixture()))
    marker = tmp_path / "grounded"
    grounder = SolverSpec(
        "g", make_script(tmp_path, "g.sh", f"touch {marker}\ncat\n"))
    pool = [spec("/nonexistent/solver", "s1"),
            spec("/nonexistent/solver", "s2")]
    with pytest.raises(ConfigError):
        run_pipeline(program, grounder, model_for(), identity_scaler(),
                     pool, LIMITS)
    assert not marker.exists()


def test_pipeline_shared_budget_times_out(tmp_path):
    program = tmp_path / "prog.gr"
    program.write_text(write_ground_program(five_rule_fixture()))
    slow_grounder = SolverSpec(
        "g", make_script(tmp_path, "g.sh", "sleep 60\n"))
    s1 = make_script(tmp_path, "s1.sh", "exit 0\n")
    pool = [spec(s1, "s1"), spec(s1, "s2")]
    limits = ResourceLimits(time_limit=0.5, mem_limit=2**30)
    out = run_pipeline(program, slow_grounder, model_for(), identity_scaler(),
                       pool, limits)
    assert out.status == "timeout"
