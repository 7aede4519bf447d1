"""Consumption math and recharge-pad scheduling."""

import math
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmway.energy import (
    SPARE_BATTERY_WEIGHT_KG,
    SUPPORT_CAPACITY_FACTOR,
    Drone,
    DroneSpec,
    EnergyModel,
    charge_time,
    consumption_rate,
    make_delivery_drone,
    make_support_drone,
    pad_schedule,
    segment_consumption,
    travel_time,
)
from swarmway.formations import default_table, make_formation
from swarmway.network import Node, Segment, SkywayNetwork, Wind

from oracles import brute_pad_makespan


def model(payload_gain=1.0):
    return EnergyModel(DroneSpec(), default_table(), payload_gain)


class TestTravelTime:
    def test_basic(self):
        assert travel_time(1000.0, 60.0) == 1.0
        assert travel_time(0.0, 30.0) == 0.0
        assert travel_time(7500.0, 30.0) == 15.0

    def test_validation(self):
        with pytest.raises(ValueError):
            travel_time(1000.0, 0.0)
        with pytest.raises(ValueError):
            travel_time(-1.0, 30.0)


class TestConsumptionRate:
    def test_formula(self):
        m = model()
        f = make_formation("vee", 3)
        rate = consumption_rate(m, 0.7, f, 1, "head")
        coeff = default_table().coefficient("vee", 1, "head")
        assert rate == m.spec.base_consumption_rate * 1.5 * coeff

    def test_zero_payload_is_base_times_coefficient(self):
        m = model()
        f = make_formation("column", 2)
        coeff = default_table().coefficient("column", 0, "tail")
        assert consumption_rate(m, 0.0, f, 0, "tail") == \
            m.spec.base_consumption_rate * coeff

    def test_payload_gain_scales_the_payload_term(self):
        f = make_formation("column", 2)
        lo = consumption_rate(model(0.5), 1.4, f, 0, "tail")
        hi = consumption_rate(model(2.0), 1.4, f, 0, "tail")
        coeff = default_table().coefficient("column", 0, "tail")
        base = DroneSpec().base_consumption_rate
        assert lo == base * 1.5 * coeff
        assert hi == base * 3.0 * coeff

    def test_support_payload_allowed(self):
        # spare batteries push supports past the delivery payload ceiling
        f = make_formation("column", 2)
        heavy = (SUPPORT_CAPACITY_FACTOR - 1) * SPARE_BATTERY_WEIGHT_KG
        assert consumption_rate(model(), heavy, f, 1, "left") > 0

    def test_validation(self):
        f = make_formation("column", 2)
        with pytest.raises(ValueError):
            consumption_rate(model(), -0.1, f, 0, "head")
        with pytest.raises(ValueError):
            consumption_rate(model(), 1.4 * SUPPORT_CAPACITY_FACTOR + 1, f, 0, "head")
        with pytest.raises(ValueError):
            consumption_rate(model(), 0.5, f, 2, "head")


class TestSegmentConsumption:
    def net(self, wind):
        return SkywayNetwork(
            [Node(0, 0.0, 0.0, 2), Node(1, 1000.0, 0.0, 2)],
            [Segment(0, 1, 1000.0, wind)],
        )

    def swarm(self):
        spec = DroneSpec()
        d0 = make_delivery_drone(0, 0.7, spec)
        d1 = make_delivery_drone(1, 0.0, spec)
        d1.position = 1
        return SimpleNamespace(drones=[d0, d1], formation=make_formation("column", 2))

    def test_per_drone_breakdown(self):
        net = self.net(Wind(5.0, 90.0))  # travel heading 0 -> right-side wind
        m = model()
        out = segment_consumption(self.swarm(), net.segments[0], net, m, 0)
        assert set(out) == {0, 1}
        minutes = travel_time(1000.0, m.spec.cruise_speed)
        for drone_id, slot, payload in ((0, 0, 0.7), (1, 1, 0.0)):
            b = out[drone_id]
            assert b.sector == "right"
            assert b.payload_factor == 1.0 + payload / 1.4
            assert b.slot_coefficient == \
                default_table().coefficient("column", slot, "right")
            rate = m.spec.base_consumption_rate * b.payload_factor * b.slot_coefficient
            assert b.energy_mah == rate * minutes

    def test_direction_matters(self):
        net = self.net(Wind(5.0, 0.0))
        m = model()
        fwd = segment_consumption(self.swarm(), net.segments[0], net, m, 0)
        back = segment_consumption(self.swarm(), net.segments[0], net, m, 1)
        assert fwd[0].sector == "tail"
        assert back[0].sector == "head"
        assert back[0].energy_mah > fwd[0].energy_mah

    def test_windless_segment_rejected(self):
        net = self.net(None)
        with pytest.raises(ValueError, match="no wind data"):
            segment_consumption(self.swarm(), net.segments[0], net, model(), 0)


class TestChargeTime:
    def test_basic(self):
        assert charge_time(4480.0, 4480.0 / 64.0) == 64.0
        assert charge_time(0.0, 10.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            charge_time(10.0, 0.0)
        with pytest.raises(ValueError):
            charge_time(-1.0, 10.0)


class TestPadSchedule:
    def test_reference_makespans(self):
        times = [60.0, 50.0, 40.0, 30.0, 20.0]
        assert pad_schedule(times, 1).node_time == 200.0
        assert pad_schedule(times, 3).node_time == 70.0
        assert pad_schedule(times, 5).node_time == 60.0

    def test_queues_serve_in_input_order(self):
        s = pad_schedule([5.0, 1.0, 5.0], 1)
        assert s.queues == ((0, 1, 2),)
        assert s.intervals == {0: (0.0, 5.0), 1: (5.0, 6.0), 2: (6.0, 11.0)}

    def test_ties_take_the_lexicographically_smallest_assignment(self):
        s = pad_schedule([10.0, 10.0], 2)
        assert s.queues == ((0,), (1,))

    def test_empty(self):
        s = pad_schedule([], 3)
        assert s.queues == ((), (), ())
        assert s.node_time == 0.0
        assert s.intervals == {}

    def test_zero_duration_entries(self):
        s = pad_schedule([0.0, 0.0, 6.0], 2)
        assert s.node_time == 6.0

    def test_validation(self):
        with pytest.raises(ValueError):
            pad_schedule([1.0], 0)
        with pytest.raises(ValueError):
            pad_schedule([-1.0], 1)

    def test_exhaustive_cap_refuses_large_inputs(self):
        times = [float(i + 1) for i in range(13)]
        with pytest.raises(ValueError, match="greedy=True"):
            pad_schedule(times, 2)
        s = pad_schedule(times, 2, greedy=True)
        assert s.node_time >= sum(times) / 2

    def test_intervals_partition_each_pad(self):
        s = pad_schedule([7.0, 3.0, 9.0, 2.0, 4.0], 2)
        for queue in s.queues:
            clock = 0.0
            for drone in queue:
                start, end = s.intervals[drone]
                assert start == clock
                clock = end
        assert s.node_time == max(e for _, e in s.intervals.values())

    def test_matches_brute_force(self):
        import random

        rng = random.Random(7)
        for _ in range(120):
            n = rng.randint(1, 7)
            pads = rng.randint(1, 4)
            times = [round(rng.uniform(0.5, 60.0), 3) for _ in range(n)]
            got = pad_schedule(times, pads).node_time
            want = brute_pad_makespan(times, pads)
            assert got == want, (times, pads)

    @given(
        times=st.lists(st.floats(0.1, 100.0, allow_nan=False), min_size=1, max_size=8),
        pads=st.integers(1, 4),
    )
    @settings(max_examples=60, deadline=None)
    def test_never_worse_than_greedy(self, times, pads):
        exact = pad_schedule(times, pads).node_time
        greedy = pad_schedule(times, pads, exhaustive_cap=0, greedy=True).node_time
        assert exact <= greedy

    def test_deterministic(self):
        times = [13.25, 4.5, 22.0, 9.75, 13.25]
        a = pad_schedule(times, 3)
        b = pad_schedule(times, 3)
        assert a.queues == b.queues and a.intervals == b.intervals


class TestDroneTypes:
    def test_spec_rejects_nonpositive_fields(self):
        with pytest.raises(ValueError, match="cruise_speed"):
            DroneSpec(cruise_speed=0.0)

    def test_delivery_drone(self):
        spec = DroneSpec()
        d = make_delivery_drone(3, 1.1, spec)
        assert d.role == "delivery"
        assert d.battery == d.capacity == spec.battery_capacity
        with pytest.raises(ValueError, match="exceeds"):
            make_delivery_drone(0, 1.5, spec)

    def test_support_drone(self):
        spec = DroneSpec()
        d = make_support_drone(9, spec)
        assert d.role == "support"
        assert d.capacity == 4 * spec.battery_capacity
        assert d.payload == pytest.approx(3 * SPARE_BATTERY_WEIGHT_KG)

    def test_drone_validation(self):
        with pytest.raises(ValueError):
            Drone(0, "scout", 0.0, 100.0, 100.0)
        with pytest.raises(ValueError):
            Drone(0, "delivery", -0.1, 100.0, 100.0)
        with pytest.raises(ValueError):
            Drone(0, "delivery", 0.0, 101.0, 100.0)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            EnergyModel(DroneSpec(), default_table(), -0.5)
