"""Pre-departure swarm construction.

Before a swarm lifts off we fix everything that stays constant in
flight: how many support drones ride along, which formation shape the
swarm flies, and which drone takes which slot.  Sizing uses a failure
estimate built from normalized route factors; positioning trades
delivery-drone safety ("location-aware") against node recharge time
("energy-aware").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .energy import (
    EnergyModel,
    SUPPORT_CAPACITY_FACTOR,
    consumption_rate,
    make_delivery_drone,
    make_support_drone,
)
from .formations import FORMATION_KINDS, Formation, make_formation, wind_sector
from .network import DeliveryRequest, SkywayNetwork, Wind, shortest_path_tree

POSITIONING_SETTINGS = ("location-aware", "energy-aware")
DEFAULT_FAILURE_SCALE = 12.0
DEFAULT_FACTOR_WEIGHTS = (1.0, 1.0, 1.0, 1.0)


@dataclass
class Swarm:
    """Drones plus the formation they fly; slot state lives on the drones."""

    drones: list
    formation: Formation

    def __post_init__(self):
        if len(self.drones) != self.formation.size:
            raise ValueError(
                f"{len(self.drones)} drones cannot fill a "
                f"{self.formation.size}-slot formation"
            )
        slots = sorted(d.position for d in self.drones)
        if slots != list(range(self.formation.size)):
            raise ValueError("drone slots must be a permutation of formation slots")

    def delivery_drones(self) -> list:
        return [d for d in self.drones if d.role == "delivery"]

    def support_drones(self) -> list:
        return [d for d in self.drones if d.role == "support"]

    def drone(self, drone_id: int):
        for d in self.drones:
            if d.id == drone_id:
                return d
        raise KeyError(f"no drone {drone_id}")

    def occupant(self, slot: int):
        for d in self.drones:
            if d.position == slot:
                return d
        raise KeyError(f"no drone at slot {slot}")

    def clone(self) -> "Swarm":
        """Independent copy; composition mutates batteries and slots."""
        return Swarm([replace(d) for d in self.drones], self.formation)


def payload_ratio(weights: list[float], max_payload: float) -> float:
    """Mean package weight as a fraction of the payload ceiling."""
    if not weights:
        raise ValueError("weights must be non-empty")
    if max_payload <= 0:
        raise ValueError(f"max_payload must be > 0, got {max_payload}")
    for w in weights:
        if not 0 < w <= max_payload:
            raise ValueError(f"weight {w} outside (0, {max_payload}]")
    return (sum(weights) / max_payload) / len(weights)


@dataclass(frozen=True)
class FailureInputs:
    """Normalized route factors and their weights for the failure estimate."""

    payload: float  # mean payload fraction
    distance: float  # route length over network diameter
    capacity: float  # provider capacity multiplier over its maximum
    wind: float  # mean wind speed over the flight-safe bound
    weights: tuple[float, float, float, float] = DEFAULT_FACTOR_WEIGHTS

    def __post_init__(self):
        for name in ("payload", "distance", "capacity", "wind"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} factor {value} outside [0, 1]")
        for w in self.weights:
            if w <= 0:
                raise ValueError(f"factor weight {w} must be > 0")


def failure_probability(inputs: FailureInputs, scale: float = DEFAULT_FAILURE_SCALE) -> float:
    """Percent chance the swarm needs rescuing, from the factor product."""
    if scale <= 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    product = 1.0
    for factor, weight in zip(
        (inputs.payload, inputs.distance, inputs.capacity, inputs.wind),
        inputs.weights,
    ):
        product *= weight * factor
    return 100.0 * min(1.0, scale * product)


def redundancy_count(probability: float, n_delivery: int) -> int:
    """Support drones to attach for a failure probability band.

    Bands widen in 20-point steps; at 80 or above the swarm doubles
    (one support per delivery drone).
    """
    if not 0.0 <= probability <= 100.0:
        raise ValueError(f"probability {probability} outside [0, 100]")
    if n_delivery < 1:
        raise ValueError(f"need at least one delivery drone, got {n_delivery}")
    if probability >= 80.0:
        return n_delivery
    return 1 + int(probability // 20.0)


def select_formation(
    swarm_size: int,
    avg_wind: Wind,
    heading_deg: float,
    model: EnergyModel,
) -> Formation:
    """Cheapest formation for the expected wind, by neutral-payload swarm draw.

    A single drone has no formation effect and defaults to a column.
    Ties go to the earlier kind in declaration order.
    """
    if swarm_size < 1:
        raise ValueError(f"swarm size must be >= 1, got {swarm_size}")
    if swarm_size == 1:
        return make_formation("column", 1)
    sector = wind_sector(heading_deg, avg_wind)
    best = None
    best_total = math.inf
    for kind in FORMATION_KINDS:
        formation = make_formation(kind, swarm_size)
        total = sum(
            consumption_rate(model, 0.0, formation, slot, sector)
            for slot in range(swarm_size)
        )
        if total < best_total:
            best, best_total = formation, total
    return best


def assign_positions(
    swarm: Swarm,
    setting: str,
    sector: str,
    model: EnergyModel,
) -> dict[int, int]:
    """Map drone ids to formation slots under a positioning policy.

    location-aware: delivery drones take the cheapest slots (heaviest
    payload first) and support drones absorb the dearest ones.
    energy-aware: support drones fly the cheapest slots so they arrive
    at nodes fuller; delivery drones fill the rest by payload.
    Ties always fall back to ascending drone id.
    """
    if setting not in POSITIONING_SETTINGS:
        raise ValueError(f"unknown positioning {setting!r}")
    order = model.coeffs.slot_order(swarm.formation.kind, sector, swarm.formation.size)
    delivery = sorted(swarm.delivery_drones(), key=lambda d: (-d.payload, d.id))
    support = sorted(swarm.support_drones(), key=lambda d: d.id)
    assignment: dict[int, int] = {}
    if setting == "location-aware":
        for drone, slot in zip(delivery, order):
            assignment[drone.id] = slot
        for drone, slot in zip(support, reversed(order[len(delivery):])):
            assignment[drone.id] = slot
    else:
        for drone, slot in zip(support, order):
            assignment[drone.id] = slot
        for drone, slot in zip(delivery, order[len(support):]):
            assignment[drone.id] = slot
    for drone in swarm.drones:
        drone.position = assignment[drone.id]
    return assignment


def route_average_wind(net: SkywayNetwork, path: list[int]) -> Wind:
    """Mean wind over a node path: arithmetic speed, circular direction."""
    if len(path) < 2:
        raise ValueError("path needs at least one segment")
    speeds = []
    vx = vy = 0.0
    for u, v in zip(path, path[1:]):
        wind = net.segment(u, v).wind
        if wind is None:
            raise ValueError(f"segment ({u}, {v}) has no wind data")
        speeds.append(wind.speed)
        vx += math.cos(math.radians(wind.direction))
        vy += math.sin(math.radians(wind.direction))
    direction = math.degrees(math.atan2(vy, vx)) % 360.0 if (vx or vy) else 0.0
    return Wind(sum(speeds) / len(speeds), direction)


def network_diameter(net: SkywayNetwork) -> float:
    """Largest finite shortest-path distance between any node pair."""
    best = 0.0
    for nid in sorted(net.nodes):
        tree = shortest_path_tree(net, nid)
        best = max(best, max(tree.dist.values()))
    return best


def build_swarm(
    request: DeliveryRequest,
    model: EnergyModel,
    *,
    positioning: str = "location-aware",
    include_support: bool = True,
    route_wind: Wind,
    route_heading: float,
    route_distance_m: float,
    diameter_m: float,
    failure_scale: float = DEFAULT_FAILURE_SCALE,
    factor_weights: tuple[float, float, float, float] = DEFAULT_FACTOR_WEIGHTS,
) -> Swarm:
    """Size, shape, and position a fresh fully-charged swarm for one request."""
    n = len(request.package_weights)
    drones = [
        make_delivery_drone(i, w, model.spec)
        for i, w in enumerate(request.package_weights)
    ]
    if include_support:
        inputs = FailureInputs(
            payload=payload_ratio(request.package_weights, model.spec.max_payload),
            distance=min(1.0, route_distance_m / diameter_m),
            capacity=SUPPORT_CAPACITY_FACTOR / SUPPORT_CAPACITY_FACTOR,
            wind=route_wind.speed / 13.8,
            weights=factor_weights,
        )
        probability = failure_probability(inputs, failure_scale)
        for k in range(redundancy_count(probability, n)):
            drones.append(make_support_drone(n + k, model.spec))
    formation = select_formation(len(drones), route_wind, route_heading, model)
    for slot, drone in enumerate(drones):
        drone.position = slot
    swarm = Swarm(drones, formation)
    assign_positions(swarm, positioning, wind_sector(route_heading, route_wind), model)
    return swarm
