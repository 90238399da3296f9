import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimdalloc import (
    CapacityEventVector,
    EventLog,
    ResourceParams,
    communication_overhead,
    evaluate_capacity_events,
)


def params(*caps, gamma=1.0):
    return [
        ResourceParams(capacity=c, alpha=0.01, beta=0.5, gamma_cap=gamma, gamma_norm=0.1)
        for c in caps
    ]


class TestCapacityEvents:
    def test_reference_capacities(self):
        vec = evaluate_capacity_events((32.01, 19.0, 24.0), params(32.0, 20.0, 25.0))
        assert vec.bits == (1, 0, 0)

    def test_strict_inequality_at_boundary(self):
        vec = evaluate_capacity_events((32.0, 20.0, 25.0), params(32.0, 20.0, 25.0))
        assert vec.bits == (0, 0, 0)

    def test_derated_threshold(self):
        vec = evaluate_capacity_events((18.5,), params(20.0, gamma=0.9))
        assert vec.bits == (1,)  # 18.5 > 0.9 * 20

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_capacity_events((1.0, 2.0), params(32.0, 20.0, 25.0))

    @given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=6), st.data())
    def test_permutation_equivariance(self, totals, data):
        ps = params(*[50.0 + 10 * i for i in range(len(totals))])
        perm = data.draw(st.permutations(range(len(totals))))
        base = evaluate_capacity_events(totals, ps).bits
        shuffled = evaluate_capacity_events(
            [totals[p] for p in perm], [ps[p] for p in perm]
        ).bits
        assert shuffled == tuple(base[p] for p in perm)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=6),
        st.integers(min_value=0, max_value=5),
        st.floats(min_value=0.0, max_value=50.0),
    )
    def test_monotone_in_totals(self, totals, idx, bump):
        ps = params(*[30.0] * len(totals))
        before = evaluate_capacity_events(totals, ps).bits
        raised = list(totals)
        raised[idx % len(totals)] += bump
        after = evaluate_capacity_events(raised, ps).bits
        assert all(a >= b for a, b in zip(after, before))

    def test_bits_validated(self):
        with pytest.raises(ValueError):
            CapacityEventVector(step=0, bits=(0, 2))


class TestEventLog:
    def test_starts_all_zero(self):
        log = EventLog(m=3)
        assert log[0].bits == (0, 0, 0)

    def test_append_requires_contiguous_steps(self):
        log = EventLog(m=2)
        log.append(CapacityEventVector(step=1, bits=(1, 0)))
        with pytest.raises(ValueError):
            log.append(CapacityEventVector(step=3, bits=(0, 0)))

    def test_from_array_round_trip(self):
        bits = np.array([[0, 0], [1, 0], [1, 1]], dtype=np.uint8)
        log = EventLog.from_array(bits)
        np.testing.assert_array_equal(log.to_array(), bits)

    def test_from_array_rejects_nonzero_start(self):
        with pytest.raises(ValueError):
            EventLog.from_array(np.array([[1, 0], [0, 0]]))


class TestOverhead:
    def test_single_step(self):
        log = EventLog(m=3)
        log.append(CapacityEventVector(step=1, bits=(1, 0, 1)))
        assert communication_overhead(log, 1) == 2

    def test_all_zero_log(self):
        log = EventLog.from_array(np.zeros((25, 4), dtype=np.uint8))
        assert communication_overhead(log, 24) == 0

    def test_out_of_range(self):
        log = EventLog(m=1)
        with pytest.raises(IndexError):
            communication_overhead(log, 1)

    @given(st.integers(min_value=1, max_value=40), st.integers(min_value=1, max_value=5), st.integers(min_value=0))
    def test_nondecreasing_and_bounded(self, steps, m, seed):
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(steps + 1, m)).astype(np.uint8)
        bits[0] = 0
        log = EventLog.from_array(bits)
        prev = 0
        for k in range(steps + 1):
            cur = communication_overhead(log, k)
            assert cur >= prev
            assert cur <= m * (k + 1)
            prev = cur
