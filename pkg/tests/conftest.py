from __future__ import annotations

import functools
import json
from pathlib import Path

from bmlab.bmsheaf import build_bm
from bmlab.coxeter import Ball, build_system, system_from_json

MATRIX_DIR = Path(__file__).resolve().parent.parent / "matrices"

DIHEDRAL_NAMES = ["s", "t"]


@functools.lru_cache(maxsize=None)
def system(name: str):
    """Named systems: files in matrices/, plus I2(m) as 'i2_<m>'."""
    if name.startswith("i2_"):
        m = int(name[3:])
        return build_system([[1, m], [m, 1]], DIHEDRAL_NAMES)
    return system_from_json(json.loads((MATRIX_DIR / f"{name}.json").read_text()))


@functools.lru_cache(maxsize=None)
def ball(name: str, radius: int) -> Ball:
    return Ball(system(name), radius)


@functools.lru_cache(maxsize=None)
def sheaf(name: str, radius: int, index: int, margin: int = 4):
    """Sheaves are shared across test modules; they are never mutated by tests."""
    return build_bm(ball(name, radius), index, margin)


def sheaf_of(name: str, word: str, margin: int = 4):
    sys_ = system(name)
    w = sys_.parse_word(word)
    b = ball(name, len(w))
    return sheaf(name, len(w), b.find_word(w), margin)


ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"acceptance {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
