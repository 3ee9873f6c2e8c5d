from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
SMOKE_CORPUS = ROOT / "data" / "smoke_corpus.txt"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def smoke_tokens():
    return SMOKE_CORPUS.read_text().split()


# criterion number -> list of (part, status, detail) filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[str, str, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        statuses = {s for _, s, _ in parts}
        overall = "FAIL" if "FAIL" in statuses else ("PASS" if statuses == {"PASS"} else "NOT RUN" if statuses == {"SKIP"} else "PARTIAL")
        detail = "; ".join(f"{part}: {status} ({text})" for part, status, text in parts)
        terminalreporter.write_line(f"criterion {number}: {overall} | {detail}")
