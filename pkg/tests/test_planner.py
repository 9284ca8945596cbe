import numpy as np
import pytest

from chainwalk import planner
from chainwalk.errors import DomainError, InfeasibleError


def test_collision_examples():
    for n, m in ((100, 100), (100, 130), (100, 150), (100, 200)):
        assert planner.collision_exponent(0, m, n).exponent == pytest.approx(m / 3)
    r = planner.collision_exponent(25, 150, 100)
    assert r.exponent == pytest.approx(200 / 3) and r.regime == "ours"
    r = planner.collision_exponent(60, 180, 100)
    assert r.exponent == pytest.approx(105) and r.regime == "ours-extended"
    assert not r.feasible  # 60 > 2n - m, reported rather than raised
    with pytest.raises(DomainError):
        planner.collision_exponent(1, 90, 100)


def test_normalized_units():
    a = planner.collision_exponent(25, 150, 100)
    b = planner.collision_exponent(0.25, 1.5, 1.0, normalized=True)
    assert b.exponent * 100 == pytest.approx(a.exponent)


def test_tradeoff_examples():
    k, m, n = 10, 120, 100
    ell = 2 * k / 3 + m / 3
    assert planner.tradeoff_exponent(k, ell, m, n).exponent == pytest.approx(ell)
    assert planner.tradeoff_exponent(10, 45, 120, 100).exponent == pytest.approx(47.5)
    with pytest.raises(InfeasibleError, match="max"):
        planner.tradeoff_exponent(60, 80, 150, 100)
    with pytest.raises(InfeasibleError, match="k <= ell"):
        planner.tradeoff_exponent(30, 20, 120, 100)


def test_bht_examples():
    assert planner.bht_exponent(50, 100, 100).exponent == pytest.approx(200 / 3)
    r = planner.bht_exponent(40, 140, 100)
    assert r.exponent == pytest.approx(80) and r.memory_exponent == pytest.approx(60)
    k = 3 * 100 - 2 * 130
    a = planner.bht_exponent(k, 130, 100).exponent
    b = planner.bht_exponent(k + 1e-9, 130, 100).exponent
    assert a == pytest.approx(b, abs=1e-8)


def test_r_collision_examples():
    for k, m in ((0, 90), (10, 120)):
        assert planner.r_collision(2, k, m, 100).exponent == pytest.approx(2 * k / 3 + m / 3)
    r = planner.r_collision(3, 0, 70, 100)
    assert r.exponent == pytest.approx(30) and r.feasible
    assert not planner.r_collision(3, 0, 120, 100).feasible
    n = 49.0
    r = planner.r_collision(3, n / 7, n, n)
    assert r.exponent == pytest.approx(n * 25 / 49)
    assert r.extra["constraint_lhs"] == pytest.approx(n / 49 + 6 * n / 7)


def test_limited_birthday_examples():
    r = planner.limited_birthday(128, 32, 32, 0)
    assert r.exponent == pytest.approx(48 - 32 / 3) and r.regime == "sparse"
    assert r.extra["classical_exponent"] == pytest.approx(65)
    # single-structure case: k below 2 din - n + dout
    n, din, dout, k = 128, 60, 60, 5
    r = planner.limited_birthday(n, din, dout, k)
    assert r.regime == "single-structure"
    assert r.exponent == pytest.approx(planner.collision_exponent(k, n - dout, din).exponent)
    a = planner.limited_birthday(128, 40, 40, 3)
    assert a.extra["roles_swapped"] is False


def test_continuity_across_boundaries():
    n = 100.0
    for m in (110.0, 140.0):
        for k0 in (3 * n - 2 * m, m / 4):
            if 0 <= k0 <= 2 * n - m:
                lo = planner.collision_exponent(k0 - 1e-7, m, n).exponent
                hi = planner.collision_exponent(k0 + 1e-7, m, n).exponent
                assert abs(lo - hi) < 1e-5


def test_sieve_reference_point():
    r = planner.sieve_derived(0.3875, 0.27)
    assert r.zeta == pytest.approx(0.1568, abs=5e-4)
    assert r.rho0 == pytest.approx(0.1214, abs=5e-4)
    assert r.eps_exp == pytest.approx(-0.200, abs=1e-3)
    t = planner.sieve_total(0.3875, 0.27, "new")
    assert t.total_exp_N == pytest.approx(1.2347, abs=3e-4)
    assert t.total_exp_d == pytest.approx(0.2563, abs=3e-4)
    assert t.fas1_exp == pytest.approx(0.3916, abs=1e-4)
    with pytest.raises(DomainError):
        planner.sieve_derived(0.2, 0.3)


def test_sieve_near_one_is_finite():
    r = planner.sieve_derived(0.999, 0.5)
    assert np.isfinite(r.alpha) and np.isfinite(r.zeta)


def test_sieve_new_never_worse():
    for c in np.arange(0.05, 1.0, 0.05):
        for c1 in np.arange(0.025, c, 0.05):
            try:
                new = planner.sieve_total(float(c), float(c1), "new").total_exp_N
            except DomainError:
                continue
            old = planner.sieve_total(float(c), float(c1), "old").total_exp_N
            assert new <= old + 1e-12


def test_optimizer():
    c, c1, new = planner.optimize_sieve("new")
    assert new.total_exp_d == pytest.approx(0.2563, abs=3e-4)
    assert abs(c - 0.3875) <= 0.01 and abs(c1 - 0.27) <= 0.01
    _, _, old = planner.optimize_sieve("old")
    assert old.total_exp_d == pytest.approx(0.2570, abs=5e-4)
    assert new.total_exp_d <= old.total_exp_d
