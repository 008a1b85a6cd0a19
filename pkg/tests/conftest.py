"""Shared fixtures and the acceptance-criterion summary."""
from __future__ import annotations

import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# criterion id -> list of (part, passed, detail)
ACCEPTANCE: dict[int, list] = {}
TITLES = {
    1: "Fock family W'(0,0) = 1 - 2|mu|^2, endpoints vacuum and Fock",
    2: "purity at |mu|^2 = 1/2 vs high precision",
    3: "sigma_min curves vs closed form",
    4: "coherent end-to-end reconstruction vs closed form",
    5: "reconstruction error decreases with gamma0",
    6: "Fock marginal validity, naive marginal negativity",
    7: "kernel normalization, scale invariance, superpose vs approx_convolve",
    8: "squeezed h-coefficient path vs single-mode closed form",
    9: "extract_R vs brute-force two-detector counts",
    10: "Gaussian integral and rank-one oracles",
}


class Recorder:
    def __init__(self, cid: int):
        self.cid = cid

    def check(self, part: str, value: float, tol: float, *, below: bool = True) -> bool:
        """Record value <= tol (or >= tol when ``below`` is False)."""
        ok = bool(value <= tol) if below else bool(value >= tol)
        rel = "<=" if below else ">="
        self.record(part, ok, f"{value:.3e} {rel} {tol:.0e}")
        return ok

    def record(self, part: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.setdefault(self.cid, []).append((part, bool(ok), detail))
        print(f"criterion {self.cid} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
        return ok


@pytest.fixture
def criterion():
    return Recorder


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[cid]
        ok = all(p[1] for p in parts)
        terminalreporter.write_line(f"criterion {cid:2d} {'PASS' if ok else 'FAIL'}  {TITLES.get(cid, '')}")
        for part, pok, detail in parts:
            terminalreporter.write_line(f"    {'ok  ' if pok else 'FAIL'} {part}: {detail}")
