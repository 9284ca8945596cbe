import math

import numpy as np
import pytest

from chainwalk import amplify
from chainwalk.errors import DomainError, GuaranteeUnavailableError
from chainwalk.rng import trial_rng


def test_schedule_examples():
    s = amplify.schedule(0.25)
    assert s.alpha == pytest.approx(math.pi / 6)
    assert (s.iters_uniform, s.iters_bad) == (1, 1)
    s = amplify.schedule(1.0)
    assert (s.iters_uniform, s.iters_bad) == (0, 0)
    assert amplify.schedule(math.sin(0.1) ** 2).iters_bad == 7
    with pytest.raises(DomainError):
        amplify.schedule(0.0)


def test_rotate_examples():
    r = amplify.rotate(amplify.TwoDState(1.0, 0.0), math.pi / 2)
    assert r.bad_amp == pytest.approx(0.0, abs=1e-12) and r.good_amp == pytest.approx(1.0)
    a = 0.4
    s = amplify.TwoDState(math.cos(a), math.sin(a))
    assert amplify.rotate(s, 0.0) == s
    r = amplify.rotate(amplify.TwoDState(math.cos(math.pi / 6), math.sin(math.pi / 6)), math.pi / 3)
    assert abs(r.bad_amp) < 1e-12 and abs(r.good_amp - 1) < 1e-12


def test_success_probability_examples():
    pu, pb = amplify.success_probabilities(0.25)
    assert pu == pytest.approx(1.0, abs=1e-12)
    assert pb == pytest.approx(0.75, abs=1e-12)
    _, pb = amplify.success_probabilities(math.sin(0.1) ** 2)
    assert pb == pytest.approx(math.sin(1.4) ** 2, abs=1e-12)
    assert pb >= 1 - 0.04
    with pytest.raises(GuaranteeUnavailableError):
        amplify.success_probabilities(0.6)


def test_iterate_matches_formula():
    eps = 0.03
    a = amplify.angle(eps)
    st = amplify.iterate(amplify.TwoDState.uniform(eps), a, 5)
    assert st.success_probability == pytest.approx(math.sin(11 * a) ** 2)


def test_lower_bound_over_grid():
    for eps in np.linspace(0.001, 0.5, 50):
        pu, pb = amplify.success_probabilities(float(eps))
        lb = amplify.lower_bound(float(eps))
        assert pu >= lb and pb >= lb


def test_repeat_until_success():
    assert all(amplify.repeat_until_success(0.25, trial_rng(9, t)) == 1 for t in range(50))
    with pytest.raises(DomainError):
        amplify.repeat_until_success(0.25, trial_rng(0, 0), max_rounds=0)
    eps = math.sin(0.1) ** 2
    runs = [amplify.repeat_until_success(eps, trial_rng(1, t)) for t in range(10_000)]
    pu, pb = amplify.success_probabilities(eps)
    mean = amplify.expected_rounds(eps)
    # rounds = 1 w.p. pu, else 1 + Geometric(pb)
    ex2 = pu + (1 - pu) * ((2 - pb) / pb**2 + 2 / pb + 1)
    sigma = math.sqrt((ex2 - mean**2) / len(runs))
    assert abs(np.mean(runs) - mean) <= 3 * sigma
