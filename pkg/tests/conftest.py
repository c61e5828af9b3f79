import pytest

from predsynth.programs import load_problems
from predsynth.solving import Solver, SolverNotFound, default_solver_config

DATA = __file__.rsplit("/", 1)[0] + "/data/paper_problems.txt"


@pytest.fixture(scope="session")
def paper_problems():
    return {p.pid: p for p in load_problems(DATA)}


@pytest.fixture(scope="session")
def solver():
    try:
        cfg = default_solver_config(timeout_ms=2000)
    except SolverNotFound as exc:
        pytest.fail(f"solver backend missing: {exc}")
    with Solver(cfg) as s:
        yield s
