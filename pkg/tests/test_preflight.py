"""Swarm sizing, formation selection, and slot assignment."""

import itertools

import pytest

from swarmway.energy import (
    DroneSpec,
    EnergyModel,
    make_delivery_drone,
    make_support_drone,
)
from swarmway.formations import (
    FORMATION_KINDS,
    WIND_SECTORS,
    CoefficientTable,
    default_table,
    make_formation,
)
from swarmway.network import DeliveryRequest, Node, Segment, SkywayNetwork, Wind
from swarmway.preflight import (
    FailureInputs,
    Swarm,
    assign_positions,
    build_swarm,
    failure_probability,
    network_diameter,
    payload_ratio,
    redundancy_count,
    route_average_wind,
    select_formation,
)

MODEL = EnergyModel(DroneSpec(), default_table())


class TestPayloadRatio:
    def test_formula(self):
        assert payload_ratio([0.7, 1.4], 1.4) == (0.7 + 1.4) / 1.4 / 2

    def test_validation(self):
        with pytest.raises(ValueError):
            payload_ratio([], 1.4)
        with pytest.raises(ValueError):
            payload_ratio([0.5], 0.0)
        with pytest.raises(ValueError):
            payload_ratio([0.0], 1.4)
        with pytest.raises(ValueError):
            payload_ratio([1.5], 1.4)


class TestFailureEstimate:
    def test_probability_formula(self):
        inputs = FailureInputs(0.5, 0.5, 1.0, 0.5)
        assert failure_probability(inputs, 4.0) == 100.0 * 4.0 * 0.125

    def test_probability_clamps_at_100(self):
        inputs = FailureInputs(1.0, 1.0, 1.0, 1.0)
        assert failure_probability(inputs, 50.0) == 100.0

    def test_weights_multiply_in(self):
        inputs = FailureInputs(0.5, 0.5, 1.0, 0.5, weights=(2.0, 1.0, 1.0, 1.0))
        assert failure_probability(inputs, 1.0) == 2.0 * failure_probability(
            FailureInputs(0.5, 0.5, 1.0, 0.5), 1.0
        )

    def test_input_validation(self):
        with pytest.raises(ValueError):
            FailureInputs(1.1, 0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            FailureInputs(0.5, -0.1, 0.5, 0.5)
        with pytest.raises(ValueError):
            FailureInputs(0.5, 0.5, 0.5, 0.5, weights=(0.0, 1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            failure_probability(FailureInputs(0.5, 0.5, 0.5, 0.5), 0.0)

    def test_redundancy_bands(self):
        assert redundancy_count(0.0, 5) == 1
        assert redundancy_count(19.0, 5) == 1
        assert redundancy_count(20.0, 5) == 2
        assert redundancy_count(39.99, 5) == 2
        assert redundancy_count(40.0, 5) == 3
        assert redundancy_count(60.0, 5) == 4
        assert redundancy_count(79.99, 5) == 4
        assert redundancy_count(80.0, 5) == 5
        assert redundancy_count(100.0, 3) == 3

    def test_redundancy_validation(self):
        with pytest.raises(ValueError):
            redundancy_count(-1.0, 3)
        with pytest.raises(ValueError):
            redundancy_count(101.0, 3)
        with pytest.raises(ValueError):
            redundancy_count(50.0, 0)


class TestSelectFormation:
    def test_single_drone_defaults_to_column(self):
        f = select_formation(1, Wind(10.0, 180.0), 0.0, MODEL)
        assert f.kind == "column" and f.size == 1

    def test_head_wind_prefers_vee(self):
        # heading 0, wind toward 180 -> head sector
        assert select_formation(6, Wind(8.0, 180.0), 0.0, MODEL).kind == "vee"

    def test_tail_wind_prefers_column(self):
        assert select_formation(6, Wind(8.0, 0.0), 0.0, MODEL).kind == "column"

    def test_side_wind_prefers_diamond(self):
        assert select_formation(6, Wind(8.0, 90.0), 0.0, MODEL).kind == "diamond"
        assert select_formation(6, Wind(8.0, 270.0), 0.0, MODEL).kind == "diamond"

    def test_tie_takes_declaration_order(self):
        flat = CoefficientTable({
            (kind, slot, sector): 1.0
            for kind in FORMATION_KINDS
            for slot in range(12)
            for sector in WIND_SECTORS
        })
        model = EnergyModel(DroneSpec(), flat)
        assert select_formation(4, Wind(8.0, 180.0), 0.0, model).kind == \
            FORMATION_KINDS[0]

    def test_validation(self):
        with pytest.raises(ValueError):
            select_formation(0, Wind(8.0, 0.0), 0.0, MODEL)


def small_swarm(n_delivery, n_support, kind="column"):
    spec = DroneSpec()
    drones = [make_delivery_drone(i, 0.5 + 0.1 * i, spec) for i in range(n_delivery)]
    drones += [make_support_drone(n_delivery + k, spec) for k in range(n_support)]
    for slot, d in enumerate(drones):
        d.position = slot
    return Swarm(drones, make_formation(kind, len(drones)))


class TestAssignPositions:
    def test_location_aware_gives_delivery_the_cheap_slots(self):
        swarm = small_swarm(2, 2, "vee")
        assignment = assign_positions(swarm, "location-aware", "head", MODEL)
        order = default_table().slot_order("vee", "head", 4)
        # heavier package (id 1) flies the cheapest slot; supports take the
        # dearest slots, lowest support id at the very worst one
        assert assignment[1] == order[0]
        assert assignment[0] == order[1]
        assert assignment[2] == order[3]
        assert assignment[3] == order[2]

    def test_energy_aware_gives_support_the_cheap_slots(self):
        swarm = small_swarm(2, 2, "vee")
        assignment = assign_positions(swarm, "energy-aware", "head", MODEL)
        order = default_table().slot_order("vee", "head", 4)
        assert assignment[2] == order[0]
        assert assignment[3] == order[1]
        assert assignment[1] == order[2]
        assert assignment[0] == order[3]

    def test_equal_payload_ties_break_by_id(self):
        spec = DroneSpec()
        drones = [make_delivery_drone(i, 0.7, spec) for i in range(3)]
        for slot, d in enumerate(drones):
            d.position = slot
        swarm = Swarm(drones, make_formation("column", 3))
        assignment = assign_positions(swarm, "location-aware", "tail", MODEL)
        order = default_table().slot_order("column", "tail", 3)
        assert [assignment[i] for i in range(3)] == order

    def test_positions_written_back_to_drones(self):
        swarm = small_swarm(3, 1, "diamond")
        assignment = assign_positions(swarm, "energy-aware", "left", MODEL)
        for d in swarm.drones:
            assert d.position == assignment[d.id]

    def test_unknown_setting_rejected(self):
        with pytest.raises(ValueError, match="positioning"):
            assign_positions(small_swarm(2, 1), "fastest", "head", MODEL)

    @pytest.mark.parametrize("setting", ("location-aware", "energy-aware"))
    @pytest.mark.parametrize("kind", FORMATION_KINDS)
    def test_support_drones_never_adjacent(self, setting, kind):
        for n_delivery in range(1, 7):
            for n_support in range(1, n_delivery + 1):
                swarm = small_swarm(n_delivery, n_support, kind)
                for sector in WIND_SECTORS:
                    assign_positions(swarm, setting, sector, MODEL)
                    slots = [d.position for d in swarm.support_drones()]
                    for a, b in itertools.combinations(slots, 2):
                        assert not swarm.formation.adjacent(a, b), (
                            setting, kind, sector, n_delivery, n_support
                        )


class TestSwarmType:
    def test_validation(self):
        spec = DroneSpec()
        drones = [make_delivery_drone(0, 0.5, spec)]
        with pytest.raises(ValueError):
            Swarm(drones, make_formation("column", 2))
        two = [make_delivery_drone(i, 0.5, spec) for i in range(2)]
        # both parked at slot 0
        with pytest.raises(ValueError, match="permutation"):
            Swarm(two, make_formation("column", 2))

    def test_lookups(self):
        swarm = small_swarm(2, 1)
        assert [d.id for d in swarm.delivery_drones()] == [0, 1]
        assert [d.id for d in swarm.support_drones()] == [2]
        assert swarm.drone(1).id == 1
        assert swarm.occupant(2).position == 2
        with pytest.raises(KeyError):
            swarm.drone(99)
        with pytest.raises(KeyError):
            swarm.occupant(99)

    def test_clone_is_independent(self):
        swarm = small_swarm(2, 1)
        copy = swarm.clone()
        copy.drones[0].battery -= 1000.0
        copy.drones[0].position, copy.drones[1].position = (
            copy.drones[1].position,
            copy.drones[0].position,
        )
        assert swarm.drones[0].battery == DroneSpec().battery_capacity
        assert swarm.drones[0].position == 0


class TestRouteStats:
    def line_net(self, winds):
        nodes = [Node(i, 1000.0 * i, 0.0, 2) for i in range(len(winds) + 1)]
        segs = [
            Segment(i, i + 1, 1000.0, w) for i, w in enumerate(winds)
        ]
        return SkywayNetwork(nodes, segs)

    def test_average_wind_speed_is_arithmetic_mean(self):
        net = self.line_net([Wind(4.0, 0.0), Wind(8.0, 0.0)])
        avg = route_average_wind(net, [0, 1, 2])
        assert avg.speed == 6.0
        assert avg.direction == 0.0

    def test_average_direction_is_circular(self):
        net = self.line_net([Wind(5.0, 350.0), Wind(5.0, 10.0)])
        avg = route_average_wind(net, [0, 1, 2])
        assert avg.direction == pytest.approx(0.0, abs=1e-9)
        net2 = self.line_net([Wind(5.0, 90.0), Wind(5.0, 0.0)])
        assert route_average_wind(net2, [0, 1, 2]).direction == pytest.approx(45.0)

    def test_average_wind_validation(self):
        net = self.line_net([Wind(5.0, 0.0), None])
        with pytest.raises(ValueError):
            route_average_wind(net, [0])
        with pytest.raises(ValueError, match="no wind data"):
            route_average_wind(net, [1, 2])

    def test_network_diameter(self):
        net = self.line_net([Wind(5.0, 0.0), Wind(5.0, 0.0)])
        assert network_diameter(net) == 2000.0


class TestBuildSwarm:
    def request(self, weights):
        return DeliveryRequest(0, 0, 1, weights)

    def build(self, weights, **kwargs):
        defaults = dict(
            route_wind=Wind(6.0, 180.0),
            route_heading=0.0,
            route_distance_m=9000.0,
            diameter_m=30000.0,
        )
        defaults.update(kwargs)
        return build_swarm(self.request(weights), MODEL, **defaults)

    def test_roles_ids_and_payloads(self):
        swarm = self.build([0.9, 0.4, 1.2])
        delivery = swarm.delivery_drones()
        assert [d.id for d in delivery] == [0, 1, 2]
        assert [d.payload for d in delivery] == [0.9, 0.4, 1.2]
        support = swarm.support_drones()
        assert support and [d.id for d in support] == \
            list(range(3, 3 + len(support)))
        assert all(d.battery == d.capacity for d in swarm.drones)
        assert swarm.formation.size == len(swarm.drones)

    def test_without_support(self):
        swarm = self.build([0.9, 0.4], include_support=False)
        assert swarm.support_drones() == []
        assert swarm.formation.size == 2

    def test_failure_scale_drives_support_count(self):
        lean = self.build([0.9, 0.4, 1.2], failure_scale=1e-6)
        doubled = self.build([0.9, 0.4, 1.2], failure_scale=1e6)
        assert len(lean.support_drones()) == 1
        assert len(doubled.support_drones()) == 3

    def test_positioning_setting_respected(self):
        swarm = self.build([0.9, 0.4, 1.2], positioning="energy-aware")
        order = MODEL.coeffs.slot_order(
            swarm.formation.kind, "head", swarm.formation.size
        )
        n_support = len(swarm.support_drones())
        support_slots = {d.position for d in swarm.support_drones()}
        assert support_slots == set(order[:n_support])

    def test_head_wind_swarm_flies_vee(self):
        swarm = self.build([0.9, 0.4, 1.2])
        assert swarm.formation.kind == "vee"
