"""Counter registry, ledger, movement classification and QoS score."""

import pytest

from wsnhandoff.stats import (DEFAULT_DIRECTIONS, REGISTRY, Category,
                              CounterKey, Direction, Layer,
                              NoSignificantChangeError, StatsLedger,
                              UnknownCounterError, classify,
                              counter_by_token, qos_improvement,
                              render_report)

ERRORS = CounterKey(Layer.PHY_80211, "signals_received_with_errors")
LOCKED = CounterKey(Layer.PHY_80211, "signals_locked")
SP_QUEUED = CounterKey(Layer.NET_STRICT_PRIOR, "packets_queued")
FIFO_QUEUED = CounterKey(Layer.NET_FIFO, "packets_queued")
FIFO_PEAK = CounterKey(Layer.NET_FIFO, "peak_queue_size")
SAT_RECEIVED = CounterKey(Layer.MAC_SATCOM, "frames_received")


def test_registry_is_the_full_layer_census():
    assert len(REGISTRY) == 28
    assert len(set(REGISTRY)) == 28
    tokens = [k.token() for k in REGISTRY]
    assert len(set(tokens)) == 28
    per_layer = {layer: sum(1 for k in REGISTRY if k.layer is layer)
                 for layer in Layer}
    assert per_layer == {Layer.PHY_80211: 4, Layer.MAC_80211: 3,
                         Layer.MAC_DCF: 2, Layer.MAC_LINK: 3,
                         Layer.MAC_SATCOM: 3, Layer.NET_IP: 4,
                         Layer.NET_STRICT_PRIOR: 2, Layer.NET_FIFO: 3,
                         Layer.TRANSPORT_UDP: 2, Layer.APP_BELLMAN_FORD: 2}


def test_token_lookup_roundtrip():
    for key in REGISTRY:
        assert counter_by_token(key.token()) == key
    with pytest.raises(UnknownCounterError):
        counter_by_token("phy80211.bogus")


def test_ledger_records_and_rejects_unknown_keys():
    led = StatsLedger()
    assert led.get(LOCKED) == 0
    led.record(LOCKED)
    led.record(LOCKED, 4)
    assert led.get(LOCKED) == 5
    with pytest.raises(UnknownCounterError):
        led.record(CounterKey(Layer.PHY_80211, "nope"))
    with pytest.raises(ValueError):
        led.record(LOCKED, -1)


def test_peak_counter_is_a_high_water_mark():
    led = StatsLedger()
    led.record_peak(FIFO_PEAK, 3)
    led.record_peak(FIFO_PEAK, 2)
    assert led.get(FIFO_PEAK) == 3
    led.record_peak(FIFO_PEAK, 7)
    assert led.get(FIFO_PEAK) == 7


def test_default_directions_mark_three_bad_movers():
    bad = {k for k, d in DEFAULT_DIRECTIONS.items()
           if d is Direction.BAD_INCREASING}
    assert bad == {ERRORS, SP_QUEUED, FIFO_QUEUED}
    assert all(DEFAULT_DIRECTIONS[k] is Direction.GOOD_INCREASING
               for k in REGISTRY if k not in bad)


def test_classify_good_and_bad_movement():
    base, cand = StatsLedger(), StatsLedger()
    cand.record(LOCKED, 7)       # good counter up: desirable
    cand.record(ERRORS, 6)       # bad counter up from nil: undesirable
    base.record(SAT_RECEIVED, 13)
    cand.record(SAT_RECEIVED, 6)  # good counter down: undesirable
    c = classify(base, cand)
    assert c.per_counter[LOCKED] == (7, Category.DESIRABLE)
    assert c.per_counter[ERRORS] == (6, Category.UNDESIRABLE)
    assert c.per_counter[SAT_RECEIVED] == (-7, Category.UNDESIRABLE)
    assert c.desirable == 1 and c.undesirable == 2
    assert c.insignificant == len(REGISTRY) - 3


def test_classify_bad_counter_decreasing_is_desirable():
    base, cand = StatsLedger(), StatsLedger()
    base.record(FIFO_QUEUED, 10)
    cand.record(FIFO_QUEUED, 2)
    c = classify(base, cand)
    assert c.per_counter[FIFO_QUEUED] == (-8, Category.DESIRABLE)


def test_classify_epsilon_threshold():
    base, cand = StatsLedger(), StatsLedger()
    cand.record(LOCKED, 2)
    cand.record(ERRORS, 3)
    c = classify(base, cand, epsilon=2)
    assert c.per_counter[LOCKED] == (2, Category.INSIGNIFICANT)
    assert c.per_counter[ERRORS] == (3, Category.UNDESIRABLE)
    assert classify(base, cand, epsilon=3).undesirable == 0
    with pytest.raises(ValueError):
        classify(base, cand, epsilon=-1)


def test_eleven_four_thirteen_split_yields_7333_percent():
    # eleven significant improvements, four significant regressions
    base, cand = StatsLedger(), StatsLedger()
    good = [k for k in REGISTRY
            if DEFAULT_DIRECTIONS[k] is Direction.GOOD_INCREASING
            and k is not SAT_RECEIVED]
    for k in good[:11]:
        cand.record(k, 10)
    cand.record(ERRORS, 6)
    cand.record(SP_QUEUED, 9)
    cand.record(FIFO_QUEUED, 9)
    base.record(SAT_RECEIVED, 13)
    cand.record(SAT_RECEIVED, 6)
    c = classify(base, cand)
    assert (c.desirable, c.undesirable, c.insignificant) == (11, 4, 13)
    assert qos_improvement(c) == pytest.approx(73.33, abs=0.01)


def test_qos_even_split_is_fifty_percent():
    base, cand = StatsLedger(), StatsLedger()
    cand.record(LOCKED, 5)
    cand.record(ERRORS, 5)
    assert qos_improvement(classify(base, cand)) == pytest.approx(50.0)


def test_qos_undefined_when_nothing_moved():
    base, cand = StatsLedger(), StatsLedger()
    with pytest.raises(NoSignificantChangeError):
        qos_improvement(classify(base, cand))


def test_render_report_layout_and_determinism():
    led = StatsLedger()
    led.record(LOCKED, 3)
    text = render_report(led)
    lines = text.splitlines()
    assert len(lines) == len(REGISTRY)
    assert lines[0] == "phy80211.signals_transmitted=0"
    assert "phy80211.signals_locked=3" in lines
    assert render_report(led) == text

    cand = StatsLedger()
    cand.record(LOCKED, 3)
    with_cls = render_report(cand, classify(StatsLedger(), cand))
    assert "phy80211.signals_locked: Desirable (+3)" in with_cls
    assert with_cls.splitlines()[-1] == "QoS improvement: 100.00%"


def test_render_report_undefined_qos_line():
    led = StatsLedger()
    text = render_report(led, classify(StatsLedger(), led))
    assert text.splitlines()[-1] == \
        "QoS improvement: undefined (no significant change)"
