"""In-flight energy transfer between support and delivery drones.

While a swarm crosses a segment, a support drone (the provider) can top
up delivery drones that fall below a battery threshold.  Transfers run
one consumer at a time and require the consumer to sit next to the
provider, so each allocation may transiently swap the consumer with one
of the provider's formation neighbors.

Two composition policies are provided:

* ``pb_compose`` serves whole requests, neediest first: requests sort by
  start time then descending amount, and each one is delivered in full
  (truncated only by the segment end).
* ``fb_compose`` ignores requests and cycles over all delivery drones in
  id order, granting a fixed quantum per turn while the provider keeps a
  reserve; a turn may start any time before the window closes and its
  transfer then completes even if the recorded interval is clipped.

All times are minutes relative to the segment window.  Batteries may go
negative in the returned state; judging feasibility is the planner's job.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


@dataclass
class EnergyRequest:
    """A delivery drone asking for ``amount`` mAh inside [start, end]."""

    id: int
    drone_id: int
    amount: float
    start: float
    end: float
    slot: int | None = None

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError(f"request {self.id}: amount must be > 0")
        if not self.start < self.end:
            raise ValueError(f"request {self.id}: empty window [{self.start}, {self.end}]")


@dataclass
class EnergyOffer:
    """Energy a support drone can spare over a segment window."""

    provider_id: int
    energy: float
    start: float
    end: float

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError(f"offer energy must be >= 0, got {self.energy}")
        if not self.start < self.end:
            raise ValueError(f"offer window [{self.start}, {self.end}] is empty")


@dataclass(frozen=True)
class Allocation:
    provider: int
    consumer: int
    start: float
    duration: float
    amount: float


@dataclass(frozen=True)
class SwapEvent:
    """Two slots exchanged occupants at ``time`` (applied again to swap back)."""

    time: float
    slot_a: int
    slot_b: int


@dataclass
class SharingPlan:
    allocations: list[Allocation] = field(default_factory=list)
    swaps: list[SwapEvent] = field(default_factory=list)
    provider_given: dict[int, float] = field(default_factory=dict)
    consumer_gained: dict[int, float] = field(default_factory=dict)

    @property
    def total_shared(self) -> float:
        return sum(a.amount for a in self.allocations)


def write_plan_csv(plan: SharingPlan, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["provider", "consumer", "start_min", "duration_min", "amount_mAh"])
        for a in plan.allocations:
            writer.writerow([a.provider, a.consumer, repr(a.start),
                             repr(a.duration), repr(a.amount)])


@dataclass
class ShareContext:
    """Flight state a composer needs: who flies, how charged, how thirsty.

    ``batteries``/``rates`` cover the provider as well as the consumers;
    ``consumer_ids`` names the delivery drones eligible to receive.
    """

    batteries: dict[int, float]
    capacities: dict[int, float]
    rates: dict[int, float]
    consumer_ids: list[int]
    share_rate: float
    slots: dict[int, int] | None = None

    def __post_init__(self):
        if self.share_rate <= 0:
            raise ValueError(f"share_rate must be > 0, got {self.share_rate}")
        for cid in self.consumer_ids:
            if cid not in self.batteries or cid not in self.capacities:
                raise ValueError(f"consumer {cid} missing battery or capacity")


@dataclass
class ShareResult:
    plan: SharingPlan
    batteries_after: dict[int, float]
    consumed: dict[int, float]  # drain only; transfers are tracked in the plan
    traces: dict[int, list[tuple[float, float]]]  # piecewise-linear (t, battery)


class _LegState:
    """Steps batteries forward between events; linear between breakpoints."""

    def __init__(self, ctx: ShareContext, t0: float):
        self.t = t0
        self.b = dict(ctx.batteries)
        self.rates = dict(ctx.rates)
        self.consumed = {i: 0.0 for i in self.b}
        self.traces = {i: [(t0, self.b[i])] for i in self.b}
        self._saved: list[dict[int, float]] = []

    def advance(self, t2: float, deltas: dict[int, float] | None = None):
        dt = t2 - self.t
        if dt < 0:
            raise ValueError("time cannot move backwards")
        if dt == 0 and not deltas:
            return
        for i in self.b:
            drained = self.rates.get(i, 0.0) * dt
            self.consumed[i] += drained
            b2 = self.b[i] - drained
            if deltas and i in deltas:
                b2 += deltas[i]
            self.b[i] = b2
            self.traces[i].append((t2, b2))
        self.t = t2

    def push_rates(self, overrides: dict[int, float]):
        self._saved.append({i: self.rates[i] for i in overrides})
        self.rates.update(overrides)

    def pop_rates(self):
        self.rates.update(self._saved.pop())


def generate_requests(
    batteries: dict[int, float],
    capacities: dict[int, float],
    gamma: float,
    now: float,
    segment_end: float,
    *,
    open_ids: frozenset[int] = frozenset(),
    start_id: int = 0,
    slots: dict[int, int] | None = None,
) -> list[EnergyRequest]:
    """File a top-up request for every drone strictly below gamma * capacity.

    Drones listed in ``open_ids`` already have a live request and are
    passed over.  Requests ask for a full refill as of ``now``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma {gamma} outside [0, 1]")
    if now >= segment_end:
        return []
    out = []
    next_id = start_id
    for drone_id in sorted(batteries):
        if drone_id in open_ids:
            continue
        if batteries[drone_id] < gamma * capacities[drone_id]:
            out.append(EnergyRequest(
                id=next_id,
                drone_id=drone_id,
                amount=capacities[drone_id] - batteries[drone_id],
                start=now,
                end=segment_end,
                slot=slots.get(drone_id) if slots else None,
            ))
            next_id += 1
    return out


def _begin_swap(state, plan, reorder, consumer_id, time):
    """Apply the pre-transfer slot swap, if any. Returns (undo, pairs)."""
    if reorder is None:
        return None, ()
    swap = reorder(consumer_id)
    if swap is None:
        return None, ()
    overrides, pairs, undo = swap
    state.push_rates(overrides)
    for a, b in pairs:
        plan.swaps.append(SwapEvent(time, a, b))
    return undo, pairs


def _end_swap(state, plan, undo, pairs, time):
    if undo is None:
        return
    undo()
    state.pop_rates()
    for a, b in pairs:
        # the same slot pair exchanges back
        plan.swaps.append(SwapEvent(time, a, b))


def pb_compose(
    ctx: ShareContext,
    offer: EnergyOffer,
    window: tuple[float, float],
    gamma: float,
    *,
    requests: list[EnergyRequest] | None = None,
    reorder=None,
) -> ShareResult:
    """Serve requests fully, ordered by start time then largest amount.

    The provider handles one request at a time; a request is eligible
    once service can start inside both its own window and the segment
    window, and only if its full amount still fits the offer.  A service
    running into the segment end is cut there with a proportional
    amount.  New requests are generated after each completed allocation.
    """
    w_start, w_end = window
    if not w_start < w_end:
        raise ValueError(f"empty window [{w_start}, {w_end}]")
    state = _LegState(ctx, w_start)
    plan = SharingPlan(provider_given={offer.provider_id: 0.0},
                       consumer_gained={c: 0.0 for c in ctx.consumer_ids})
    consumer_caps = {c: ctx.capacities[c] for c in ctx.consumer_ids}
    if requests is not None:
        pending = list(requests)
    else:
        pending = generate_requests(
            {c: state.b[c] for c in ctx.consumer_ids}, consumer_caps,
            gamma, w_start, w_end, slots=ctx.slots,
        )
    next_id = max((er.id for er in pending), default=-1) + 1
    given = 0.0
    free = w_start
    while True:
        pending.sort(key=lambda er: (er.start, -er.amount, er.id))
        chosen = None
        for er in pending:
            start = max(er.start, free)
            if start >= er.end or start >= w_end:
                continue
            if er.amount > offer.energy - given:
                continue
            chosen = er
            break
        if chosen is None:
            break
        pending.remove(chosen)
        start = max(chosen.start, free)
        end = start + chosen.amount / ctx.share_rate
        amount = chosen.amount
        if end > w_end:
            end = w_end
            amount = ctx.share_rate * (end - start)
        state.advance(start)
        undo, pairs = _begin_swap(state, plan, reorder, chosen.drone_id, start)
        state.advance(end, {chosen.drone_id: amount, offer.provider_id: -amount})
        _end_swap(state, plan, undo, pairs, end)
        plan.allocations.append(
            Allocation(offer.provider_id, chosen.drone_id, start, end - start, amount)
        )
        given += amount
        plan.provider_given[offer.provider_id] = given
        plan.consumer_gained[chosen.drone_id] += amount
        free = end
        pending.extend(generate_requests(
            {c: state.b[c] for c in ctx.consumer_ids}, consumer_caps,
            gamma, state.t, w_end,
            open_ids=frozenset(er.drone_id for er in pending),
            start_id=next_id, slots=ctx.slots,
        ))
        next_id = max((er.id for er in pending), default=next_id - 1) + 1
    state.advance(w_end)
    return ShareResult(plan, state.b, state.consumed, state.traces)


def fb_compose(
    ctx: ShareContext,
    offer: EnergyOffer,
    window: tuple[float, float],
    quantum: float,
    reserve: float,
    *,
    reorder=None,
) -> ShareResult:
    """Round-robin a fixed quantum to every non-full delivery drone.

    Each granted turn costs quantum / share_rate minutes of window
    regardless of how much actually flows (grants clamp to the room left
    in the battery and to the energy left in the offer).  A turn may
    begin whenever time remains and the provider still holds strictly
    more than ``reserve``; the final turn's transfer completes in full
    but its recorded interval stops at the window end.  Full drones cost
    nothing.
    """
    w_start, w_end = window
    if not w_start < w_end:
        raise ValueError(f"empty window [{w_start}, {w_end}]")
    if quantum <= 0:
        raise ValueError(f"quantum must be > 0, got {quantum}")
    if reserve < 0:
        raise ValueError(f"reserve must be >= 0, got {reserve}")
    turn_time = quantum / ctx.share_rate
    state = _LegState(ctx, w_start)
    plan = SharingPlan(provider_given={offer.provider_id: 0.0},
                       consumer_gained={c: 0.0 for c in ctx.consumer_ids})
    given = 0.0
    ct = w_start
    while ct < w_end and offer.energy - given > reserve:
        progressed = False
        for cid in sorted(ctx.consumer_ids):
            if ct >= w_end or offer.energy - given <= reserve:
                break
            state.advance(ct)
            room = ctx.capacities[cid] - state.b[cid]
            if room <= 0:
                continue
            amount = min(quantum, room, offer.energy - given)
            start = ct
            end_recorded = min(ct + turn_time, w_end)
            ct += turn_time
            undo, pairs = _begin_swap(state, plan, reorder, cid, start)
            state.advance(end_recorded, {cid: amount, offer.provider_id: -amount})
            _end_swap(state, plan, undo, pairs, end_recorded)
            plan.allocations.append(
                Allocation(offer.provider_id, cid, start, end_recorded - start, amount)
            )
            given += amount
            plan.provider_given[offer.provider_id] = given
            plan.consumer_gained[cid] += amount
            progressed = True
        if not progressed:
            break  # everyone full; nothing left to rotate over
    state.advance(w_end)
    return ShareResult(plan, state.b, state.consumed, state.traces)


@dataclass(frozen=True)
class SwapRecord:
    """One applied slot exchange, with enough to undo it."""

    consumer_id: int
    partner_id: int
    consumer_slot: int
    partner_slot: int


def reorder_fixed(swarm, consumer_id: int, provider_id: int) -> SwapRecord | None:
    """Bring a consumer next to its provider without moving any support drone.

    Returns None when they are already adjacent; otherwise the consumer
    swaps slots with the delivery drone in the provider's
    lowest-numbered adjacent slot.  The swap costs nothing and is undone
    with ``swap_back`` once the transfer ends.
    """
    consumer = swarm.drone(consumer_id)
    provider = swarm.drone(provider_id)
    if consumer.role != "delivery":
        raise ValueError(f"consumer {consumer_id} is not a delivery drone")
    if provider.role != "support":
        raise ValueError(f"provider {provider_id} is not a support drone")
    if swarm.formation.adjacent(consumer.position, provider.position):
        return None
    for slot in sorted(swarm.formation.neighbors(provider.position)):
        partner = swarm.occupant(slot)
        if partner.role == "delivery":
            record = SwapRecord(consumer_id, partner.id, consumer.position, slot)
            consumer.position, partner.position = slot, consumer.position
            return record
    raise ValueError(
        f"provider {provider_id} has no delivery drone in an adjacent slot; "
        "positioning should never cluster support drones together"
    )


def swap_back(swarm, record: SwapRecord) -> None:
    consumer = swarm.drone(record.consumer_id)
    partner = swarm.drone(record.partner_id)
    consumer.position, partner.position = record.consumer_slot, record.partner_slot
