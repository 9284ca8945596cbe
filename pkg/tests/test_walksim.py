import math

import numpy as np
import pytest

from chainwalk import amplify
from chainwalk.combinat import DomainSpec, coin_index, rank
from chainwalk.errors import CapacityError, DomainError, GuaranteeUnavailableError
from chainwalk.rng import make_rng
from chainwalk.walksim import (
    EdgeAmplitudes,
    WalkConfig,
    WalkSpace,
    fidelity_decay,
    marked_uniform_state,
    measure_marked,
    mnrs_run,
    noise_bound,
    phase_flip_marked,
    random_vertex_state,
    ref_coin,
    reflect_uniform_exact,
    reflect_uniform_phase_est,
    spectrum,
    swup,
    uniform_edge_state,
    unmarked_uniform_state,
    walk_op,
)


def cfg_for(N, R, marked=lambda S: False):
    return WalkConfig.build(DomainSpec(N), R, marked)


def random_state(cfg, seed=0):
    rng = make_rng(seed)
    a = rng.normal(size=cfg.space.shape) + 1j * rng.normal(size=cfg.space.shape)
    return EdgeAmplitudes(cfg.space, a / np.linalg.norm(a))


def test_uniform_state_example():
    cfg = cfg_for(4, 2)
    u = uniform_edge_state(cfg)
    assert u.amplitudes.size == 24
    assert np.allclose(u.amplitudes, 1 / math.sqrt(24))


def test_capacity_error():
    with pytest.raises(CapacityError):
        WalkSpace(DomainSpec(30), 10, memory_cap=1000)


def test_swup_is_involution_and_moves_basis():
    cfg = cfg_for(8, 3)
    s = random_state(cfg)
    back = swup(swup(s, cfg), cfg)
    assert np.array_equal(back.amplitudes, s.amplitudes)
    assert cfg.query_counter == 4
    spec = cfg.space.spec
    a = np.zeros(cfg.space.shape)
    a[rank((1, 3, 5), spec), coin_index((2, 3), 3, 8)] = 1
    out = swup(EdgeAmplitudes(cfg.space, a), cfg).amplitudes
    assert out[rank((1, 4, 5), spec), coin_index((2, 3), 3, 8)] == 1
    u = uniform_edge_state(cfg)
    assert np.array_equal(swup(u, cfg).amplitudes, u.amplitudes)


def test_ref_coin():
    cfg = cfg_for(6, 2)
    u = uniform_edge_state(cfg)
    assert np.allclose(ref_coin(u, cfg).amplitudes, u.amplitudes)
    a = np.zeros(cfg.space.shape)
    a[0, 0], a[0, 1] = 1, -1
    s = EdgeAmplitudes(cfg.space, a / math.sqrt(2))
    assert np.allclose(ref_coin(s, cfg).amplitudes, -s.amplitudes)
    r = random_state(cfg)
    assert np.allclose(ref_coin(ref_coin(r, cfg), cfg).amplitudes, r.amplitudes, atol=1e-12)


def test_walk_op_fixes_uniform_and_is_unitary():
    cfg = cfg_for(6, 2)
    u = uniform_edge_state(cfg)
    assert np.allclose(walk_op(u, cfg).amplitudes, u.amplitudes, atol=1e-10)
    s = random_state(cfg, 3)
    for _ in range(10_000):
        s = walk_op(s, cfg)
    assert abs(s.norm - 1) < 1e-8


def test_spectrum_examples():
    rep = spectrum(cfg_for(6, 2))
    assert rep.fixed_vector_overlap >= 1 - 1e-9
    assert rep.min_nonzero_phase >= 2 * math.sqrt(0.75)
    assert rep.min_nonzero_phase == pytest.approx(2 * math.acos(0.25), abs=1e-9)
    assert rep.zero_phase_count == 1
    assert rep.dim_busy == 2 * 15 - 1
    rep = spectrum(cfg_for(8, 3))
    assert rep.min_nonzero_phase >= 2 * math.sqrt(8 / 15)


def test_exact_reflection():
    cfg = cfg_for(6, 2)
    u = uniform_edge_state(cfg)
    assert np.allclose(reflect_uniform_exact(u, cfg).amplitudes, u.amplitudes)
    r = random_state(cfg).amplitudes
    r = r - np.vdot(u.amplitudes, r) * u.amplitudes
    s = EdgeAmplitudes(cfg.space, r / np.linalg.norm(r))
    assert np.allclose(reflect_uniform_exact(s, cfg).amplitudes, -s.amplitudes)


def test_reflections_reproduce_two_d_rotation():
    marked = lambda S: S[0] == 0 and S[1] == 1
    cfg = cfg_for(7, 2, marked)
    eps = cfg.epsilon
    alpha = amplify.angle(eps)
    bad, good = unmarked_uniform_state(cfg), marked_uniform_state(cfg)
    s = uniform_edge_state(cfg)
    for k in range(1, 6):
        s = reflect_uniform_exact(phase_flip_marked(s, cfg), cfg)
        want = amplify.iterate(amplify.TwoDState.uniform(eps), alpha, k)
        assert abs(s.inner(bad) - want.bad_amp) < 1e-10
        assert abs(s.inner(good) - want.good_amp) < 1e-10


def test_phase_estimation_reflection():
    cfg = cfg_for(6, 2)
    u = uniform_edge_state(cfg)
    for t in (2, 3, 5):
        out, fid = reflect_uniform_phase_est(u, cfg, t)
        assert fid >= 1 - 1e-6
    s = random_vertex_state(cfg, make_rng(4))
    fids = [reflect_uniform_phase_est(s, cfg, t)[1] for t in range(2, 9)]
    assert all(b >= a - 1e-12 for a, b in zip(fids, fids[1:]))
    assert fids[-1] >= 0.99
    with pytest.raises(DomainError):
        reflect_uniform_phase_est(s, cfg, 0)


def test_measure_edge_cases(rng):
    none = cfg_for(5, 2)
    u = uniform_edge_state(none)
    assert np.array_equal(phase_flip_marked(u, none).amplitudes, u.amplitudes)
    assert measure_marked(u, none, rng)[0] is False
    every = cfg_for(5, 2, lambda S: True)
    u = uniform_edge_state(every)
    assert np.array_equal(phase_flip_marked(u, every).amplitudes, -u.amplitudes)
    assert measure_marked(u, every, rng)[0] is True
    zero = EdgeAmplitudes(u.space, np.zeros(u.space.shape))
    with pytest.raises(DomainError):
        measure_marked(zero, every, rng)


def test_mnrs_quarter_turn(rng):
    # 5 of the 20 vertices of J(6,3)
    cfg = cfg_for(6, 3, lambda S: S[:2] == (0, 1) or S == (2, 3, 4))
    assert cfg.epsilon == 0.25
    ok, _, stats = mnrs_run(cfg, uniform_edge_state(cfg), rng)
    assert ok and stats.iterations == 1
    assert stats.success_probability == pytest.approx(1.0, abs=1e-12)


def test_mnrs_errors(rng):
    cfg = cfg_for(5, 2)
    with pytest.raises(DomainError):
        mnrs_run(cfg, uniform_edge_state(cfg), rng)
    cfg = cfg_for(5, 2, lambda S: S[0] < 2)
    with pytest.raises(GuaranteeUnavailableError):
        mnrs_run(cfg, uniform_edge_state(cfg), rng)


def test_noise():
    cfg = cfg_for(6, 2)
    assert fidelity_decay(cfg, 0.0, 30, make_rng(0)) == pytest.approx([1.0] * 30)
    ov = fidelity_decay(cfg, 1e-6, 100, make_rng(0))
    assert noise_bound(1e-6, 100) == pytest.approx(0.89995, abs=1e-5)
    assert ov[-1] >= noise_bound(1e-6, 100)
    with pytest.raises(DomainError):
        fidelity_decay(cfg, 1.0, 3, make_rng(0))
