"""Self-test levels and fault injection.

``fast`` runs the exhaustive and oracle-equivalence checks; ``full`` adds the
statistical acceptance criteria. Faults are injected by temporarily replacing
a function in :mod:`dimcons.harmonic`, so the checks see the corrupted code
path exactly as a real regression would.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterator, List, Optional

from . import harmonic
from .acceptance import CRITERIA, CheckResult, fast_checks

LEVELS = ("fast", "full")


def _bad_cylinder_mass(m: int, w) -> float:
    k = len(w)
    if k == 0:
        return 1.0
    return 1.0 / (2 * m) * float(2 * m - 1) ** (-k)


FAULTS = {"cylinder-exponent": ("exact_cylinder_mass", _bad_cylinder_mass)}


@contextlib.contextmanager
def injected(fault: Optional[str]) -> Iterator[None]:
    if fault is None:
        yield
        return
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {', '.join(FAULTS)}")
    name, repl = FAULTS[fault]
    orig = getattr(harmonic, name)
    setattr(harmonic, name, repl)
    try:
        yield
    finally:
        setattr(harmonic, name, orig)


def run_self_test(level: str = "fast", inject: Optional[str] = None, seed: int = 0,
                  report: Optional[Callable[[CheckResult], None]] = None) -> List[CheckResult]:
    """Run the checks for ``level``; ``report`` is called as each statistical check finishes."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    with injected(inject):
        results = fast_checks()
        if report:
            for r in results:
                report(r)
        if level == "full":
            for crit in CRITERIA:
                results.append(crit(seed))
                if report:
                    report(results[-1])
    return results
