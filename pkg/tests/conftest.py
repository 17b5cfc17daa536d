from pathlib import Path

import pytest
import sympy

from crnjoin.net import parse_file
from crnjoin.poly import Poly

ROOT = Path(__file__).resolve().parents[1]
MODELS = ROOT / "models"


def load(name: str):
    return parse_file((MODELS / name).read_text())


def to_sympy(p: Poly) -> sympy.Expr:
    return sympy.sympify(str(p).replace("^", "**")) if not p.is_zero() else sympy.Integer(0)


@pytest.fixture
def models_dir() -> Path:
    return MODELS


# acceptance outcomes, keyed by criterion number
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, part: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((part, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[criterion]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        summary = "; ".join(f"{part}: {'ok' if ok else 'FAILED'} ({detail})" for part, ok, detail in parts)
        terminalreporter.write_line(f"criterion {criterion}: {status} - {summary}")
