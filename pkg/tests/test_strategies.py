import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptrelay.channel import ScenarioParams
from swiptrelay.geometry import Disc, PPPConfig, counter_rng
from swiptrelay.montecarlo import draw_trial_batch
from swiptrelay.strategies import (
    RelayRealization,
    StrategyKind,
    batch_snr,
    beamforming_transmit_powers,
    outage_event,
    select_closest_relay,
    snr_beamforming,
    snr_direct,
    snr_random_relay,
)

# P = 10, tau = 1 (R = 0.5), eta = 0.5
P = ScenarioParams(power=10.0, rate=0.5, eta=0.5)


def real(x0, x, y, r=None):
    x = np.atleast_1d(x)
    return RelayRealization(x0, x, y, np.arange(len(x)) + 1.0 if r is None else r)


def test_hand_worked_random_relay():
    assert P.tau == pytest.approx(1.0)
    assert snr_random_relay(real(0.1, 0.5, 0.2), P, 0) == pytest.approx(1.4)


def test_silent_relay_cases():
    assert snr_random_relay(real(0.1, P.epsilon, 0.9), P, 0) == pytest.approx(1.0)
    assert snr_random_relay(real(0.1, 0.05, 0.9), P, 0) == pytest.approx(1.0)
    assert snr_random_relay(real(0.1, 0.5, 0.0), P, 0) == pytest.approx(1.0)


def test_closest_selection():
    assert select_closest_relay(real(0, [0.5], [0.5], [2.0])) == 0
    assert select_closest_relay(real(0, [1, 1, 1], [1, 1, 1], [1.2, 0.3, 0.9])) == 1
    assert select_closest_relay(real(0, [1, 1, 1], [1, 1, 1], [0.7, 0.4, 0.4])) == 1
    with pytest.raises(ValueError):
        select_closest_relay(real(0, [], [], []))


def test_beamforming_sum():
    empty = real(0.1, [], [], [])
    assert snr_beamforming(empty, P) == pytest.approx(snr_direct(empty, P))
    one = real(0.1, [0.5, 0.01], [0.2, 3.0])
    assert snr_beamforming(one, P) == pytest.approx(snr_random_relay(one, P, 0))
    two = real(0.1, [0.5, 0.3], [0.2, 0.7])
    inc = [snr_random_relay(two, P, i) - snr_direct(two, P) for i in range(2)]
    assert inc == pytest.approx([0.4, 0.7])
    assert snr_beamforming(two, P) == pytest.approx(1.0 + 0.4 + 0.7)


def test_outage_boundary():
    assert not outage_event(P.tau, P)
    assert outage_event(0.0, P)
    assert not outage_event(0.0, ScenarioParams(10.0, 0.0))


def test_transmit_power_never_exceeds_harvest():
    rl = real(0.1, [0.5, 0.3, 0.05], [0.2, 0.7, 1.0])
    tx = beamforming_transmit_powers(rl, P)
    assert np.all(tx <= np.array([2.0, 1.0, 0.0]) + 1e-12)
    assert tx[2] == 0.0


gains = st.lists(st.floats(0, 5), min_size=1, max_size=6)


@settings(max_examples=100)
@given(x0=st.floats(0, 2), x=gains, y=gains, data=st.data())
def test_pointwise_dominance(x0, x, y, data):
    n = min(len(x), len(y))
    rl = real(x0, x[:n], y[:n])
    i = data.draw(st.integers(0, n - 1))
    assert snr_beamforming(rl, P) >= snr_random_relay(rl, P, i) - 1e-12
    assert snr_random_relay(rl, P, i) >= snr_direct(rl, P)


@settings(max_examples=50)
@given(x=gains, y=gains, extra=st.tuples(st.floats(0, 5), st.floats(0, 5)))
def test_beamforming_monotone_in_qualified_set(x, y, extra):
    n = min(len(x), len(y))
    base = real(0.2, x[:n], y[:n])
    bigger = real(0.2, x[:n] + [extra[0]], y[:n] + [extra[1]])
    assert snr_beamforming(bigger, P) >= snr_beamforming(base, P)


def test_batch_matches_scalar():
    disc, ppp = Disc(1.5, 3.0), PPPConfig(1.0)
    params = ScenarioParams.from_db(10, rate=0.5)
    b = draw_trial_batch(params, disc, ppp, 300, counter_rng(2))
    snr = {k: batch_snr(k, b, params) for k in StrategyKind}
    for t, off in enumerate(b.offsets):
        n = b.counts[t]
        sl = slice(off, off + n)
        rl = RelayRealization(b.x0[t], b.x[sl], b.y[sl], b.r[sl])
        assert snr[StrategyKind.DIRECT_ONLY][t] == pytest.approx(snr_direct(rl, params))
        assert snr[StrategyKind.BEAMFORMING][t] == pytest.approx(snr_beamforming(rl, params))
        if n == 0:
            assert snr[StrategyKind.RANDOM_RELAY][t] == snr[StrategyKind.DIRECT_ONLY][t]
            continue
        pick = min(int(b.pick[t] * n), n - 1)
        assert snr[StrategyKind.RANDOM_RELAY][t] == pytest.approx(snr_random_relay(rl, params, pick))
        near = select_closest_relay(rl)
        assert snr[StrategyKind.CLOSEST_RELAY][t] == pytest.approx(snr_random_relay(rl, params, near))


def test_random_choice_ignores_fading():
    disc, ppp = Disc(1.5, 3.0), PPPConfig(1.0)
    params = ScenarioParams.from_db(10, rate=0.5)
    b = draw_trial_batch(params, disc, ppp, 500, counter_rng(8))
    local = np.minimum((b.pick * b.counts).astype(int), np.maximum(b.counts - 1, 0))
    b.x, b.y = b.x[::-1].copy(), b.y[::-1].copy()  # scramble fading only
    local2 = np.minimum((b.pick * b.counts).astype(int), np.maximum(b.counts - 1, 0))
    assert np.array_equal(local, local2)
