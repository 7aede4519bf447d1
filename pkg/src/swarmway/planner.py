"""Route composition over the skyway network.

The main entry point, ``compose``, walks a swarm from source to
destination: it flies the remaining shortest path in one go when the
batteries allow it (with in-flight sharing if enabled), and otherwise
hops to the cheapest adjacent node, recharges everyone fully, and tries
again.  Two static routers (Dijkstra and Floyd-Warshall over fixed
per-segment costs) serve as comparison baselines; they pick their whole
path up front and succeed only if every leg happens to be flyable.

Battery feasibility is judged on an integer-minute grid: a leg fails
iff some drone's battery is negative at any whole minute or at the leg
end, with transfers credited over their allocation intervals.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel, consumption_rate, pad_schedule, travel_time
from .formations import wind_sector
from .network import DeliveryRequest, PathTree, SkywayNetwork, shortest_path_tree
from .preflight import Swarm
from .sharing import (
    EnergyOffer,
    ShareContext,
    SharingPlan,
    fb_compose,
    pb_compose,
    reorder_fixed,
    swap_back,
)

FLOOR_TOLERANCE = 1e-9
MAX_NODE_VISITS = 2


@dataclass(frozen=True)
class ShareConfig:
    """Knobs for in-flight sharing during composition."""

    strategy: str  # "pb" or "fb"
    gamma: float = 0.8  # request threshold as a fraction of capacity
    delta_frac: float = 0.2  # provider reserve as a fraction of its capacity
    quantum: float = 2240.0  # fb per-turn grant, mAh

    def __post_init__(self):
        if self.strategy not in ("pb", "fb"):
            raise ValueError(f"unknown sharing strategy {self.strategy!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma {self.gamma} outside [0, 1]")
        if not 0.0 <= self.delta_frac < 1.0:
            raise ValueError(f"delta_frac {self.delta_frac} outside [0, 1)")
        if self.quantum <= 0:
            raise ValueError(f"quantum must be > 0, got {self.quantum}")


@dataclass
class LegOutcome:
    """One segment traversal: energy spent, energy moved, state after."""

    u: int
    v: int
    distance_m: float
    tt: float
    sector: str
    consumed: dict[int, float]
    batteries_before: dict[int, float]
    batteries_after: dict[int, float]
    plan: SharingPlan | None
    traces: dict[int, list[tuple[float, float]]] = field(repr=False, default_factory=dict)

    @property
    def shared(self) -> float:
        return self.plan.total_shared if self.plan else 0.0


@dataclass
class NodeVisit:
    """A recharge stop: every drone refills fully before the next leg."""

    node: int
    nt: float
    queues: tuple[tuple[int, ...], ...]


@dataclass
class DeliveryPlan:
    request_id: int
    strategy: str
    status: str  # "success", "stuck", or "unreachable"
    path: list[int]
    legs: list[LegOutcome]
    visits: list[NodeVisit]
    stuck_node: int | None = None
    static_cost: float | None = None  # static routers: their path's planned cost
    positioning: str = ""

    @property
    def tt_total(self) -> float:
        return sum(leg.tt for leg in self.legs)

    @property
    def nt_total(self) -> float:
        return sum(v.nt for v in self.visits)

    @property
    def dt(self) -> float:
        return self.tt_total + self.nt_total

    @property
    def energy_shared(self) -> float:
        return sum(leg.shared for leg in self.legs)

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "strategy": self.strategy,
            "positioning": self.positioning,
            "status": self.status,
            "stuck_node": self.stuck_node,
            "path": self.path,
            "dt_min": self.dt,
            "tt_min": self.tt_total,
            "nt_min": self.nt_total,
            "energy_shared_mAh": self.energy_shared,
            "legs": [
                {
                    "u": leg.u,
                    "v": leg.v,
                    "distance_m": leg.distance_m,
                    "tt_min": leg.tt,
                    "sector": leg.sector,
                    "consumed_mAh": leg.consumed,
                    "shared_mAh": leg.shared,
                }
                for leg in self.legs
            ],
            "visits": [{"node": v.node, "nt_min": v.nt} for v in self.visits],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


class _RateCache:
    """Per-sector drain rates at the swarm's standing slot assignment."""

    def __init__(self, swarm: Swarm, model: EnergyModel):
        self.swarm = swarm
        self.model = model
        self._by_sector: dict[str, dict[int, float]] = {}

    def rates(self, sector: str) -> dict[int, float]:
        if sector not in self._by_sector:
            self._by_sector[sector] = {
                d.id: consumption_rate(self.model, d.payload, self.swarm.formation,
                                       d.position, sector)
                for d in self.swarm.drones
            }
        return self._by_sector[sector]


def _provider_blocks(swarm: Swarm):
    """Split delivery drones into contiguous slot blocks, one per provider."""
    providers = sorted(swarm.support_drones(), key=lambda d: d.position)
    consumers = sorted(swarm.delivery_drones(), key=lambda d: d.position)
    blocks = []
    base, extra = divmod(len(consumers), len(providers))
    at = 0
    for i, provider in enumerate(providers):
        size = base + (1 if i < extra else 0)
        blocks.append((provider, consumers[at:at + size]))
        at += size
    return blocks


def _make_reorder_hook(swarm: Swarm, provider_id: int, model: EnergyModel,
                       sector: str, tracked_ids: frozenset[int]):
    """Swap-into-range callback for one provider's composer run.

    Rate overrides only cover drones the serving context simulates; a
    swap partner pulled from another provider's block keeps its
    standing-slot rate there, since that block composes independently.
    """
    def hook(consumer_id: int):
        record = reorder_fixed(swarm, consumer_id, provider_id)
        if record is None:
            return None
        overrides = {}
        for did in (record.consumer_id, record.partner_id):
            if did in tracked_ids:
                d = swarm.drone(did)
                overrides[did] = consumption_rate(model, d.payload, swarm.formation,
                                                  d.position, sector)
        def undo():
            swap_back(swarm, record)
        return overrides, [(record.consumer_slot, record.partner_slot)], undo
    return hook


def _grid_feasible(traces: dict[int, list[tuple[float, float]]], tt: float) -> bool:
    """True when every trace stays non-negative at whole minutes and at tt."""
    grid = [float(m) for m in range(int(math.floor(tt)) + 1)]
    if grid[-1] != tt:
        grid.append(tt)
    for points in traces.values():
        idx = 0
        for t in grid:
            while idx + 1 < len(points) and points[idx + 1][0] < t:
                idx += 1
            t1, b1 = points[idx]
            if idx + 1 < len(points):
                t2, b2 = points[idx + 1]
                value = b2 if t2 == t1 else b1 + (b2 - b1) * (t - t1) / (t2 - t1)
            else:
                value = b1
            if value < -FLOOR_TOLERANCE:
                return False
    return True


def feasible_leg(
    swarm: Swarm,
    net: SkywayNetwork,
    u: int,
    v: int,
    model: EnergyModel,
    *,
    batteries: dict[int, float] | None = None,
    share: ShareConfig | None = None,
    rate_cache: _RateCache | None = None,
) -> LegOutcome | None:
    """Traverse one segment if the batteries survive it; None otherwise.

    With sharing enabled, each support drone independently serves its
    contiguous block of delivery drones, offering whatever its battery
    holds beyond its own projected drain for the leg.
    """
    seg = net.segment(u, v)
    if seg.wind is None:
        raise ValueError(f"segment ({u}, {v}) has no wind data")
    sector = wind_sector(net.heading(u, v), seg.wind)
    tt = travel_time(seg.distance_m, model.spec.cruise_speed)
    cache = rate_cache or _RateCache(swarm, model)
    rates = cache.rates(sector)
    before = dict(batteries) if batteries is not None else {d.id: d.battery for d in swarm.drones}

    providers = swarm.support_drones()
    consumers = swarm.delivery_drones()
    if share is None or not providers or not consumers:
        after = {}
        consumed = {}
        traces = {}
        for d in swarm.drones:
            spent = rates[d.id] * tt
            consumed[d.id] = spent
            after[d.id] = before[d.id] - spent
            traces[d.id] = [(0.0, before[d.id]), (tt, after[d.id])]
        plan = None
    else:
        after = {}
        consumed = {}
        traces = {}
        plan = SharingPlan()
        slots = {d.id: d.position for d in swarm.drones}
        for provider, block in _provider_blocks(swarm):
            ids = [provider.id] + [c.id for c in block]
            ctx = ShareContext(
                batteries={i: before[i] for i in ids},
                capacities={i: swarm.drone(i).capacity for i in ids},
                rates={i: rates[i] for i in ids},
                consumer_ids=[c.id for c in block],
                share_rate=model.spec.inflight_share_rate,
                slots=slots,
            )
            ae = max(0.0, before[provider.id] - rates[provider.id] * tt)
            offer = EnergyOffer(provider.id, ae, 0.0, tt)
            hook = _make_reorder_hook(swarm, provider.id, model, sector,
                                      frozenset(ids))
            if share.strategy == "pb":
                result = pb_compose(ctx, offer, (0.0, tt), share.gamma, reorder=hook)
            else:
                reserve = share.delta_frac * provider.capacity
                result = fb_compose(ctx, offer, (0.0, tt), share.quantum, reserve,
                                    reorder=hook)
            after.update(result.batteries_after)
            consumed.update(result.consumed)
            traces.update(result.traces)
            plan.allocations.extend(result.plan.allocations)
            plan.swaps.extend(result.plan.swaps)
            plan.provider_given.update(result.plan.provider_given)
            plan.consumer_gained.update(result.plan.consumer_gained)

    if not _grid_feasible(traces, tt):
        return None
    return LegOutcome(u, v, seg.distance_m, tt, sector, consumed, before, after,
                      plan, traces)


def _fly_through(swarm, net, path, model, batteries, share, cache):
    """Fly consecutive segments without stopping; None if any leg fails."""
    legs = []
    state = dict(batteries)
    for a, b in zip(path, path[1:]):
        leg = feasible_leg(swarm, net, a, b, model, batteries=state,
                           share=share, rate_cache=cache)
        if leg is None:
            return None
        legs.append(leg)
        state = leg.batteries_after
    return legs


def _full_recharge(swarm, batteries, node, model, greedy=False):
    """Pad schedule for topping everyone up at this node's pads."""
    times = [
        (d.capacity - batteries[d.id]) / model.spec.pad_charge_rate
        for d in swarm.drones
    ]
    sched = pad_schedule(times, node.pads, greedy=greedy)
    return NodeVisit(node.id, sched.node_time, sched.queues)


def compose(
    swarm_template: Swarm,
    net: SkywayNetwork,
    request: DeliveryRequest,
    model: EnergyModel,
    *,
    share: ShareConfig | None = None,
    tree: PathTree | None = None,
    greedy_pads: bool = False,
) -> DeliveryPlan:
    """Walk the swarm toward the destination, recharging only when forced.

    Each round first tries to fly the remaining shortest path outright,
    then the same with in-flight sharing, and finally falls back to the
    feasible neighbor stop minimizing travel plus recharge time (ties to
    the smaller node id; arriving at the destination costs no recharge).
    A node accepts at most two visits per plan; running out of moves
    strands the plan as "stuck".
    """
    strategy = share.strategy if share else "baseline"
    swarm = swarm_template.clone()
    if tree is None or tree.root != request.destination:
        tree = shortest_path_tree(net, request.destination)
    plan = DeliveryPlan(request.id, strategy, "stuck", [request.source], [], [])
    if tree.distance(request.source) == math.inf:
        plan.status = "unreachable"
        return plan
    cache = _RateCache(swarm, model)
    batteries = {d.id: d.battery for d in swarm.drones}
    current = request.source
    visit_count = {current: 1}

    while current != request.destination:
        remaining = tree.path_to_root(current)
        legs = _fly_through(swarm, net, remaining, model, batteries, None, cache)
        if legs is None and share is not None:
            legs = _fly_through(swarm, net, remaining, model, batteries, share, cache)
        if legs is not None:
            plan.legs.extend(legs)
            plan.path.extend(remaining[1:])
            current = request.destination
            break

        best = None
        for nb in net.neighbors(current):
            if visit_count.get(nb, 0) >= MAX_NODE_VISITS:
                continue
            if nb != request.destination and net.nodes[nb].pads < 1:
                continue
            leg = feasible_leg(swarm, net, current, nb, model, batteries=batteries,
                               share=share, rate_cache=cache)
            if leg is None:
                continue
            if nb == request.destination:
                visit, nt = None, 0.0
            else:
                visit = _full_recharge(swarm, leg.batteries_after, net.nodes[nb],
                                       model, greedy_pads)
                nt = visit.nt
            cost = leg.tt + nt
            if best is None or cost < best[0]:
                best = (cost, nb, leg, visit)
        if best is None:
            plan.stuck_node = current
            return plan

        _, nb, leg, visit = best
        plan.legs.append(leg)
        plan.path.append(nb)
        visit_count[nb] = visit_count.get(nb, 0) + 1
        if visit is not None:
            plan.visits.append(visit)
            batteries = {d.id: d.capacity for d in swarm.drones}
        else:
            batteries = leg.batteries_after
        current = nb

    plan.status = "success"
    return plan


def static_edge_costs(swarm: Swarm, net: SkywayNetwork, model: EnergyModel,
                      greedy_pads: bool = False):
    """Directed cost tt + restore-time makespan at the head node.

    The restore time assumes the leg started on full batteries, which is
    how the static routers then simulate their chosen path.
    """
    cache = _RateCache(swarm, model)
    costs: dict[tuple[int, int], float] = {}
    for seg in net.segments:
        if seg.wind is None:
            raise ValueError(f"segment ({seg.u}, {seg.v}) has no wind data")
        tt = travel_time(seg.distance_m, model.spec.cruise_speed)
        for a, b in ((seg.u, seg.v), (seg.v, seg.u)):
            head = net.nodes[b]
            if head.pads < 1:
                costs[(a, b)] = math.inf
                continue
            sector = wind_sector(net.heading(a, b), seg.wind)
            rates = cache.rates(sector)
            times = [
                rates[d.id] * tt / model.spec.pad_charge_rate for d in swarm.drones
            ]
            costs[(a, b)] = tt + pad_schedule(times, head.pads,
                                              greedy=greedy_pads).node_time
    return costs


def static_dijkstra(net: SkywayNetwork, costs, source: int):
    """Single-source shortest static costs; ties keep the first-found parent."""
    dist = {source: 0.0}
    parent: dict[int, int | None] = {source: None}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, cur = heapq.heappop(heap)
        if cur in done:
            continue
        done.add(cur)
        for nb in net.neighbors(cur):
            w = costs[(cur, nb)]
            if w == math.inf:
                continue
            nd = d + w
            if nb not in dist or nd < dist[nb]:
                dist[nb] = nd
                parent[nb] = cur
                heapq.heappush(heap, (nd, nb))
    return dist, parent


def floyd_warshall_tables(net: SkywayNetwork, costs):
    """All-pairs static costs and successor table, vectorized over nodes."""
    ids = sorted(net.nodes)
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    nxt = np.full((n, n), -1, dtype=np.int64)
    nxt[np.diag_indices(n)] = np.arange(n)
    for (a, b), w in costs.items():
        if w < dist[index[a], index[b]]:
            dist[index[a], index[b]] = w
            nxt[index[a], index[b]] = index[b]
    for k in range(n):
        cand = dist[:, k, None] + dist[None, k, :]
        mask = cand < dist
        dist = np.where(mask, cand, dist)
        nxt = np.where(mask, np.broadcast_to(nxt[:, k, None], nxt.shape), nxt)
    return ids, dist, nxt


def _simulate_static_path(swarm, net, path, model, request_id, strategy, static_cost,
                          greedy_pads=False):
    """Fly a fixed path with full recharges at the intermediate stops."""
    plan = DeliveryPlan(request_id, strategy, "stuck", list(path), [], [],
                        static_cost=static_cost)
    cache = _RateCache(swarm, model)
    batteries = {d.id: d.battery for d in swarm.drones}
    for i, (a, b) in enumerate(zip(path, path[1:])):
        leg = feasible_leg(swarm, net, a, b, model, batteries=batteries,
                           rate_cache=cache)
        if leg is None:
            plan.stuck_node = a
            plan.path = list(path[: i + 1])
            return plan
        plan.legs.append(leg)
        if b != path[-1]:
            visit = _full_recharge(swarm, leg.batteries_after, net.nodes[b],
                                   model, greedy_pads)
            plan.visits.append(visit)
            batteries = {d.id: d.capacity for d in swarm.drones}
        else:
            batteries = leg.batteries_after
    plan.status = "success"
    return plan


def dijkstra_baseline(
    swarm_template: Swarm,
    net: SkywayNetwork,
    request: DeliveryRequest,
    model: EnergyModel,
    *,
    costs=None,
    greedy_pads: bool = False,
) -> DeliveryPlan:
    """Route on static costs with Dijkstra, then fly that path as-is."""
    swarm = swarm_template.clone()
    if costs is None:
        costs = static_edge_costs(swarm, net, model, greedy_pads)
    dist, parent = static_dijkstra(net, costs, request.source)
    if request.destination not in dist:
        return DeliveryPlan(request.id, "dijkstra", "unreachable",
                            [request.source], [], [])
    path = [request.destination]
    while path[-1] != request.source:
        path.append(parent[path[-1]])
    path.reverse()
    return _simulate_static_path(swarm, net, path, model, request.id, "dijkstra",
                                 dist[request.destination], greedy_pads)


def floyd_warshall_baseline(
    swarm_template: Swarm,
    net: SkywayNetwork,
    request: DeliveryRequest,
    model: EnergyModel,
    *,
    costs=None,
    tables=None,
    greedy_pads: bool = False,
) -> DeliveryPlan:
    """Route on static costs with Floyd-Warshall, then fly that path as-is."""
    swarm = swarm_template.clone()
    if costs is None:
        costs = static_edge_costs(swarm, net, model, greedy_pads)
    ids, dist, nxt = tables if tables is not None else floyd_warshall_tables(net, costs)
    index = {nid: i for i, nid in enumerate(ids)}
    si, di = index[request.source], index[request.destination]
    if not np.isfinite(dist[si, di]):
        return DeliveryPlan(request.id, "floyd", "unreachable",
                            [request.source], [], [])
    path = [request.source]
    at = si
    while at != di:
        at = int(nxt[at, di])
        path.append(ids[at])
    return _simulate_static_path(swarm, net, path, model, request.id, "floyd",
                                 float(dist[si, di]), greedy_pads)
