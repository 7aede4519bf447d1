"""Battery, consumption, and recharge-pad timing models.

All energy is in mAh and all times in minutes.  Consumption for a drone
flying one segment is

    base_rate * (1 + payload_gain * payload / max_payload) * C(kind, slot, sector)

where C comes from the coefficient table and the sector is the wind
direction quantized relative to travel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .formations import CoefficientTable, Formation, wind_sector
from .network import Segment, SkywayNetwork

SUPPORT_CAPACITY_FACTOR = 4  # a support drone flies with 3 spare batteries
SPARE_BATTERY_WEIGHT_KG = 0.365  # weight of one spare battery pack
PAD_EXHAUSTIVE_CAP = 12


@dataclass(frozen=True)
class DroneSpec:
    """Hardware profile shared by every drone in a swarm.

    Defaults model a small quadcopter: 4480 mAh / 15.2 V battery,
    1.4 kg payload ceiling, 30 km/h cruise.  The base consumption rate
    is 3% of battery per minute; the pad rate refills a delivery
    battery in one hour.
    """

    battery_capacity: float = 4480.0
    voltage: float = 15.2
    max_payload: float = 1.4
    cruise_speed: float = 30.0
    inflight_share_rate: float = 5.88
    pad_charge_rate: float = 4480.0 / 60.0
    base_consumption_rate: float = 0.03 * 4480.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass
class Drone:
    """One swarm member. Battery and slot are mutable flight state."""

    id: int
    role: str  # "delivery" or "support"
    payload: float
    battery: float
    capacity: float
    position: int = 0

    def __post_init__(self):
        if self.role not in ("delivery", "support"):
            raise ValueError(f"drone {self.id}: bad role {self.role!r}")
        if self.payload < 0:
            raise ValueError(f"drone {self.id}: negative payload")
        if not 0 <= self.battery <= self.capacity:
            raise ValueError(
                f"drone {self.id}: battery {self.battery} outside [0, {self.capacity}]"
            )


def make_delivery_drone(drone_id: int, payload: float, spec: DroneSpec) -> Drone:
    if payload > spec.max_payload:
        raise ValueError(f"payload {payload} exceeds max {spec.max_payload}")
    return Drone(drone_id, "delivery", payload, spec.battery_capacity,
                 spec.battery_capacity)


def make_support_drone(drone_id: int, spec: DroneSpec) -> Drone:
    cap = spec.battery_capacity * SUPPORT_CAPACITY_FACTOR
    payload = (SUPPORT_CAPACITY_FACTOR - 1) * SPARE_BATTERY_WEIGHT_KG
    return Drone(drone_id, "support", payload, cap, cap)


@dataclass(frozen=True)
class EnergyModel:
    """DroneSpec plus the tuning shared by all consumption operations."""

    spec: DroneSpec
    coeffs: CoefficientTable
    payload_gain: float = 1.0  # sensitivity of consumption to relative payload

    def __post_init__(self):
        if self.payload_gain < 0:
            raise ValueError("payload_gain must be >= 0")


@dataclass(frozen=True)
class ConsumptionBreakdown:
    """Energy one drone spends on one segment, with its multipliers."""

    drone_id: int
    energy_mah: float
    payload_factor: float
    slot_coefficient: float  # combined position-and-wind multiplier
    sector: str


def travel_time(distance_m: float, speed_kmh: float) -> float:
    """Minutes to cover a distance at constant speed."""
    if speed_kmh <= 0:
        raise ValueError(f"speed must be > 0, got {speed_kmh}")
    if distance_m < 0:
        raise ValueError(f"distance must be >= 0, got {distance_m}")
    return (distance_m / 1000.0) / speed_kmh * 60.0


def consumption_rate(
    model: EnergyModel,
    payload: float,
    formation: Formation,
    slot: int,
    sector: str,
) -> float:
    """Per-minute draw of one drone at a formation slot under a wind sector."""
    spec = model.spec
    if payload < 0 or payload > spec.max_payload * SUPPORT_CAPACITY_FACTOR:
        raise ValueError(f"payload {payload} out of range")
    if not 0 <= slot < formation.size:
        raise ValueError(f"slot {slot} invalid for formation of size {formation.size}")
    coeff = model.coeffs.coefficient(formation.kind, slot, sector)
    payload_factor = 1.0 + model.payload_gain * payload / spec.max_payload
    return spec.base_consumption_rate * payload_factor * coeff


def segment_consumption(
    swarm,
    segment: Segment,
    net: SkywayNetwork,
    model: EnergyModel,
    from_node: int,
) -> dict[int, ConsumptionBreakdown]:
    """Energy each swarm member spends traversing ``segment`` out of ``from_node``.

    Linear in distance at fixed factors; requires the segment to carry wind.
    """
    if segment.wind is None:
        raise ValueError(f"segment ({segment.u}, {segment.v}) has no wind data")
    heading = net.heading(from_node, segment.other(from_node))
    sector = wind_sector(heading, segment.wind)
    minutes = travel_time(segment.distance_m, model.spec.cruise_speed)
    out = {}
    for drone in swarm.drones:
        rate = consumption_rate(model, drone.payload, swarm.formation,
                                drone.position, sector)
        payload_factor = 1.0 + model.payload_gain * drone.payload / model.spec.max_payload
        coeff = model.coeffs.coefficient(swarm.formation.kind, drone.position, sector)
        out[drone.id] = ConsumptionBreakdown(
            drone.id, rate * minutes, payload_factor, coeff, sector
        )
    return out


def charge_time(needed_mah: float, rate_mah_per_min: float) -> float:
    """Minutes a pad (or a provider) takes to move ``needed_mah``."""
    if rate_mah_per_min <= 0:
        raise ValueError(f"charge rate must be > 0, got {rate_mah_per_min}")
    if needed_mah < 0:
        raise ValueError(f"needed energy must be >= 0, got {needed_mah}")
    return needed_mah / rate_mah_per_min


@dataclass
class PadSchedule:
    """Which pad each drone queues on, and when it charges."""

    queues: tuple[tuple[int, ...], ...]  # drone indices per pad, service order
    node_time: float  # makespan: time until the last drone is charged
    intervals: dict[int, tuple[float, float]] = field(default_factory=dict)


def _greedy_assignment(times: tuple[float, ...], pads: int) -> tuple[int, ...]:
    """Longest-processing-time heuristic; used as a bound and as the fallback."""
    loads = [0.0] * pads
    assign = [0] * len(times)
    for i in sorted(range(len(times)), key=lambda k: (-times[k], k)):
        pad = min(range(pads), key=lambda p: (loads[p], p))
        assign[i] = pad
        loads[pad] += times[i]
    return tuple(assign)


@lru_cache(maxsize=200_000)
def _best_assignment(times: tuple[float, ...], pads: int) -> tuple[int, ...]:
    """Exhaustive makespan-minimal pad assignment.

    Enumerates canonical assignments (pad labels in first-use order) in
    lexicographic order, so the first optimum found is the
    lexicographically smallest one over all labelings.
    """
    n = len(times)
    greedy = _greedy_assignment(times, pads)
    bound = max(
        (sum(times[i] for i in range(n) if greedy[i] == p) for p in range(pads)),
        default=0.0,
    )
    best_assign = None
    best_nt = math.inf
    assign = [0] * n
    loads = [0.0] * pads

    def recurse(i: int, used: int, cur_max: float):
        nonlocal best_assign, best_nt
        if cur_max > bound or cur_max >= best_nt:
            return
        if i == n:
            best_nt = cur_max
            best_assign = tuple(assign)
            return
        for pad in range(min(used + 1, pads)):
            assign[i] = pad
            # save/restore instead of -=: float subtraction would not
            # exactly undo the addition and the drift corrupts pruning
            prev = loads[pad]
            loads[pad] = prev + times[i]
            recurse(i + 1, max(used, pad + 1), max(cur_max, loads[pad]))
            loads[pad] = prev

    recurse(0, 0, 0.0)
    assert best_assign is not None
    return best_assign


def pad_schedule(
    charge_times: list[float],
    pads: int,
    *,
    exhaustive_cap: int = PAD_EXHAUSTIVE_CAP,
    greedy: bool = False,
) -> PadSchedule:
    """Queue drones on identical pads so the last finish time is minimal.

    ``charge_times`` is indexed by drone; each pad serves its queue in
    input order.  Above ``exhaustive_cap`` drones the exact search is
    refused unless ``greedy=True`` selects the LPT fallback.
    """
    if pads < 1:
        raise ValueError(f"pad count must be >= 1, got {pads}")
    for i, t in enumerate(charge_times):
        if t < 0:
            raise ValueError(f"charge time for drone {i} must be >= 0, got {t}")
    if not charge_times:
        return PadSchedule(queues=((),) * pads, node_time=0.0)
    times = tuple(charge_times)
    if len(times) > exhaustive_cap and not greedy:
        raise ValueError(
            f"{len(times)} drones exceed the exhaustive cap of {exhaustive_cap}; "
            "pass greedy=True (CLI: --greedy-pads) to use the LPT fallback"
        )
    if len(times) > exhaustive_cap:
        assign = _greedy_assignment(times, pads)
    else:
        assign = _best_assignment(times, pads)
    queues = tuple(
        tuple(i for i in range(len(times)) if assign[i] == p) for p in range(pads)
    )
    intervals = {}
    node_time = 0.0
    for queue in queues:
        clock = 0.0
        for drone in queue:
            start = clock
            clock = start + times[drone]
            intervals[drone] = (start, clock)
        node_time = max(node_time, clock)
    return PadSchedule(queues=queues, node_time=node_time, intervals=intervals)
