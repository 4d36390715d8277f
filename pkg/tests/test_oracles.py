"""The exhaustive oracles pass on the real code and catch planted bugs."""
from fractions import Fraction

import pytest

import dimcons.acceptance as acc
import dimcons.harmonic as harmonic
import dimcons.pivotal.chains as chains
from dimcons.selftest import FAULTS, injected, run_self_test


def test_fast_checks_all_pass():
    results = acc.fast_checks()
    assert len(results) == 6
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_check_line_format():
    line = acc.CheckResult("demo", True, {"x": 0.5, "n": 3}, 1.5).line()
    assert line == "PASS demo: x=0.5, n=3 (1.5s)"


def test_full_depth_oracles():
    assert acc.chain_shadow_oracle(12)[0]
    assert acc.rn_cocycle_oracle(3)[0]


def test_cylinder_exponent_fault_detected():
    with injected("cylinder-exponent"):
        ok, details = acc.first_step_oracle()
    assert not ok and details["max_rel_error"] > 0.1
    assert acc.first_step_oracle()[0]


def test_unknown_fault_rejected():
    with pytest.raises(ValueError):
        run_self_test("fast", inject="nope")
    assert "cylinder-exponent" in FAULTS


def test_chain_shadow_oracle_catches_wrong_rule(monkeypatch):
    real = chains.chain_shadow_metric
    monkeypatch.setattr(chains, "chain_shadow_metric", lambda ly, lz, py, C: real(ly, lz, py, C + 1))
    assert not acc.chain_shadow_oracle(8, (0,))[0]


def test_rn_oracle_catches_wrong_sign(monkeypatch):
    real = harmonic.rn_derivative

    def bad(m, x, eta):
        v = real(m, x, eta)
        return type(v)(v.x, v.eta, 1 / v.exact if len(x) == 2 else v.exact)

    monkeypatch.setattr(harmonic, "rn_derivative", bad)
    assert not acc.rn_cocycle_oracle(2)[0]


def test_doob_oracle_catches_wrong_kernel(monkeypatch):
    real = harmonic.doob_kernel

    def bad(spec, state):
        row = real(spec, state)
        k = next(iter(row))
        row[k] = row[k] * Fraction(11, 10)
        return row

    monkeypatch.setattr(harmonic, "doob_kernel", bad)
    assert not acc.doob_cylinder_oracle(1)[0]


def test_chain_audit_small():
    ok, details = acc.chain_audit(60, seed=1)
    assert ok and details["traces"] == 60


def test_injectivity_small():
    ok, details = acc.injectivity_check(2, seed=0)
    assert ok and details["collisions"] == 0 and details["members"] > 0
