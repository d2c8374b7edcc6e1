import logging

import pytest

from solwave.lab import ExperimentConfig, run_experiment

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

CRITERIA = {
    1: "soliton profile residual",
    2: "conjugate and factor identities",
    3: "spectral counts",
    4: "no internal mode",
    5: "explicit-constant inequalities",
    6: "inversion round trips",
    7: "modulation",
    8: "solver fidelity",
    9: "long-time perturbation run",
    10: "determinism",
}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(passed), detail)
    return record


@pytest.fixture(autouse=True)
def _quiet_truncation_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="solwave")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n} ({title}): NOT RUN")


@pytest.fixture(scope="session")
def long_run():
    """The default perturbation experiment (omega0 = 1/8, eps = 0.01, T = 100)."""
    cfg = ExperimentConfig()
    records, summary = run_experiment(cfg)
    return cfg, records, summary
