import time

import pytest

from ksground.steady import solve_steady

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion and print it."""

    def _report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


@pytest.fixture(scope="session")
def six_states():
    t0 = time.perf_counter()
    states = {(m, M): solve_steady(m, M) for m in (1.5, 2.0, 3.0) for M in (1.0, 10.0)}
    return states, time.perf_counter() - t0


@pytest.fixture(scope="session")
def steady_m2():
    return solve_steady(2.0, 1.0)


@pytest.fixture(scope="session")
def steady_m3():
    return solve_steady(3.0, 1.0)


@pytest.fixture(scope="session")
def scaled_run():
    """m = 2, M = 1 run from 0.8^2 rho0(0.8 r) on the default 601-node grid, T = 100."""
    from ksground.masspde import evolution_grid, evolve, steady_initial

    t0 = time.perf_counter()
    s = solve_steady(2.0, 1.0)
    state = steady_initial(s, evolution_grid(s), 0.8)
    run = evolve(state, 100.0, checkpoints=50, reference=s)
    return s, run, time.perf_counter() - t0
