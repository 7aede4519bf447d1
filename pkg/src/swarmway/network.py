"""Skyway network model: recharging-pad nodes joined by wind-bearing segments.

A network is loaded from (or saved to) a two-section CSV file and stays
immutable afterwards.  Requests, wind fields, and whole synthetic networks
can be generated deterministically from a seed.
"""

from __future__ import annotations

import csv
import heapq
import math
import random
from dataclasses import dataclass, field

MAX_WIND_SPEED = 13.8  # m/s, flight-safe bound (exclusive)


class NetworkFormatError(ValueError):
    """Raised when a network or request file cannot be parsed."""


@dataclass(frozen=True)
class Wind:
    """Wind over one segment.

    ``direction`` is the bearing the air moves toward, in degrees
    counterclockwise from the +x axis.  It wraps modulo 360 on construction.
    """

    speed: float
    direction: float

    def __post_init__(self):
        if not 0.0 <= self.speed < MAX_WIND_SPEED:
            raise ValueError(
                f"wind speed {self.speed} outside [0, {MAX_WIND_SPEED})"
            )
        object.__setattr__(self, "direction", self.direction % 360.0)


@dataclass(frozen=True)
class Node:
    """A skyway stop: coordinates in meters plus its recharging pad count."""

    id: int
    x: float
    y: float
    pads: int

    def __post_init__(self):
        if self.pads < 0:
            raise ValueError(f"node {self.id}: pads must be >= 0, got {self.pads}")


@dataclass(frozen=True)
class Segment:
    """Undirected link between two nodes; stored once per pair."""

    u: int
    v: int
    distance_m: float
    wind: Wind | None = None

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"segment endpoints must differ, got {self.u}")
        if self.distance_m <= 0:
            raise ValueError(
                f"segment ({self.u}, {self.v}): distance must be > 0, "
                f"got {self.distance_m}"
            )

    def other(self, node_id: int) -> int:
        return self.v if node_id == self.u else self.u


@dataclass
class DeliveryRequest:
    """A package delivery order: one weight per package, one drone per package."""

    id: int
    source: int
    destination: int
    package_weights: list[float]

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError(f"request {self.id}: source equals destination")
        if not self.package_weights:
            raise ValueError(f"request {self.id}: needs at least one package")
        for w in self.package_weights:
            if w <= 0:
                raise ValueError(f"request {self.id}: weight {w} must be > 0")


class SkywayNetwork:
    """Immutable node/segment store with an adjacency index."""

    def __init__(self, nodes: list[Node], segments: list[Segment]):
        self.nodes: dict[int, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise ValueError(f"duplicate node id {node.id}")
            self.nodes[node.id] = node
        self.segments: list[Segment] = []
        self._adj: dict[int, dict[int, Segment]] = {nid: {} for nid in self.nodes}
        for seg in segments:
            for end in (seg.u, seg.v):
                if end not in self.nodes:
                    raise ValueError(
                        f"segment ({seg.u}, {seg.v}) references unknown node {end}"
                    )
            if seg.v in self._adj[seg.u]:
                raise ValueError(f"duplicate segment ({seg.u}, {seg.v})")
            self.segments.append(seg)
            self._adj[seg.u][seg.v] = seg
            self._adj[seg.v][seg.u] = seg

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, node_id: int) -> list[int]:
        """Adjacent node ids, ascending."""
        return sorted(self._adj[node_id])

    def segment(self, u: int, v: int) -> Segment:
        try:
            return self._adj[u][v]
        except KeyError:
            raise KeyError(f"no segment between {u} and {v}") from None

    def heading(self, u: int, v: int) -> float:
        """Travel bearing u -> v in degrees CCW from +x."""
        a, b = self.nodes[u], self.nodes[v]
        return math.degrees(math.atan2(b.y - a.y, b.x - a.x)) % 360.0


def load_network(path) -> SkywayNetwork:
    """Parse the two-section ``nodes``/``segments`` CSV format.

    Node rows are ``id,x,y,pads``; segment rows are
    ``u,v,distance_m[,wind_speed,wind_dir]``.  Parse errors carry the
    1-based line number.
    """
    nodes: list[Node] = []
    segments: list[Segment] = []
    section = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            head = row[0].strip().lower()
            if head in ("nodes", "segments") and len(row) == 1:
                section = head
                continue
            if section is None:
                raise NetworkFormatError(
                    f"line {lineno}: expected a 'nodes' section header first"
                )
            try:
                if section == "nodes":
                    if len(row) != 4:
                        raise ValueError(f"expected 4 fields, got {len(row)}")
                    nodes.append(
                        Node(int(row[0]), float(row[1]), float(row[2]), int(row[3]))
                    )
                else:
                    if len(row) not in (3, 5):
                        raise ValueError(f"expected 3 or 5 fields, got {len(row)}")
                    wind = None
                    if len(row) == 5:
                        wind = Wind(float(row[3]), float(row[4]))
                    segments.append(Segment(int(row[0]), int(row[1]), float(row[2]), wind))
            except ValueError as exc:
                raise NetworkFormatError(f"line {lineno}: {exc}") from None
    try:
        return SkywayNetwork(nodes, segments)
    except ValueError as exc:
        raise NetworkFormatError(str(exc)) from None


def save_network(net: SkywayNetwork, path) -> None:
    """Write a network in the format ``load_network`` reads; round-trips losslessly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nodes"])
        for nid in sorted(net.nodes):
            node = net.nodes[nid]
            writer.writerow([node.id, repr(node.x), repr(node.y), node.pads])
        writer.writerow(["segments"])
        for seg in sorted(net.segments, key=lambda s: (s.u, s.v)):
            row = [seg.u, seg.v, repr(seg.distance_m)]
            if seg.wind is not None:
                row += [repr(seg.wind.speed), repr(seg.wind.direction)]
            writer.writerow(row)


def load_requests(path, max_weight: float | None = None) -> list[DeliveryRequest]:
    """Read request rows ``id,source,dest,w1;w2;...``."""
    requests = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                if len(row) != 4:
                    raise ValueError(f"expected 4 fields, got {len(row)}")
                weights = [float(w) for w in row[3].split(";") if w]
                req = DeliveryRequest(int(row[0]), int(row[1]), int(row[2]), weights)
                if max_weight is not None:
                    for w in weights:
                        if w > max_weight:
                            raise ValueError(
                                f"request {req.id}: weight {w} exceeds {max_weight}"
                            )
            except ValueError as exc:
                raise NetworkFormatError(f"line {lineno}: {exc}") from None
            requests.append(req)
    return requests


def save_requests(requests: list[DeliveryRequest], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for req in requests:
            writer.writerow(
                [req.id, req.source, req.destination,
                 ";".join(repr(w) for w in req.package_weights)]
            )


def largest_connected_component(net: SkywayNetwork) -> SkywayNetwork:
    """Induced subgraph on the largest component.

    Size ties go to the component containing the smallest node id.
    """
    if not net.nodes:
        raise ValueError("empty network has no components")
    seen: set[int] = set()
    best: set[int] = set()
    for start in sorted(net.nodes):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nb in net._adj[cur]:
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        # strict > keeps the earlier (smaller-min-id) component on ties
        if len(comp) > len(best):
            best = comp
    nodes = [net.nodes[nid] for nid in sorted(best)]
    segs = [s for s in net.segments if s.u in best and s.v in best]
    return SkywayNetwork(nodes, segs)


def synthesize_wind(net: SkywayNetwork, seed: int) -> SkywayNetwork:
    """Assign every segment a seeded wind draw.

    Speeds are uniform in [0, 13.8) m/s and directions uniform in
    [0, 360).  Segments are visited in (u, v) order so identical seeds
    give identical fields.
    """
    rng = random.Random(seed)
    segs = []
    for seg in sorted(net.segments, key=lambda s: (s.u, s.v)):
        wind = Wind(rng.uniform(0.0, MAX_WIND_SPEED), rng.uniform(0.0, 360.0))
        segs.append(Segment(seg.u, seg.v, seg.distance_m, wind))
    return SkywayNetwork(list(net.nodes.values()), segs)


def synthesize_requests(
    net: SkywayNetwork,
    n: int,
    seed: int,
    max_weight: float = 1.4,
    packages: tuple[int, int] = (2, 5),
) -> list[DeliveryRequest]:
    """Draw ``n`` delivery requests with distinct endpoints and per-package weights.

    Weights are uniform in (0, max_weight]; package counts uniform over the
    inclusive ``packages`` range.
    """
    if n < 0:
        raise ValueError(f"request count must be >= 0, got {n}")
    if len(net.nodes) < 2:
        raise ValueError("need at least 2 nodes to draw requests")
    lo, hi = packages
    if not 1 <= lo <= hi:
        raise ValueError(f"bad package range {packages}")
    rng = random.Random(seed)
    ids = sorted(net.nodes)
    requests = []
    for rid in range(n):
        src, dst = rng.sample(ids, 2)
        count = rng.randint(lo, hi)
        # 1 - random() lies in (0, 1], keeping weights strictly positive
        weights = [max_weight * (1.0 - rng.random()) for _ in range(count)]
        requests.append(DeliveryRequest(rid, src, dst, weights))
    return requests


def synthesize_network(
    n_nodes: int,
    seed: int,
    *,
    cluster_count: int = 8,
    area_km: float = 30.0,
    neighbor_links: int = 3,
    link_radius_km: float = 6.0,
    pads: tuple[int, int] = (1, 3),
) -> SkywayNetwork:
    """Generate a clustered geometric skyway network.

    Nodes scatter around randomly placed cluster centers and link to their
    nearest in-range neighbors, so segment lengths stay mostly short while
    cluster-to-cluster bridges come out long.  The result is usually
    disconnected; pass it through ``largest_connected_component``.
    """
    if n_nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {n_nodes}")
    rng = random.Random(seed)
    area = area_km * 1000.0
    centers = [(rng.uniform(0, area), rng.uniform(0, area)) for _ in range(cluster_count)]
    nodes = []
    for nid in range(n_nodes):
        cx, cy = centers[rng.randrange(cluster_count)]
        x = min(max(rng.gauss(cx, 2000.0), 0.0), area)
        y = min(max(rng.gauss(cy, 2000.0), 0.0), area)
        nodes.append(Node(nid, x, y, rng.randint(*pads)))

    def dist(a: Node, b: Node) -> float:
        return math.hypot(a.x - b.x, a.y - b.y)

    pairs: set[tuple[int, int]] = set()
    for node in nodes:
        ranked = sorted(
            (other for other in nodes if other.id != node.id),
            key=lambda o: (dist(node, o), o.id),
        )
        taken = 0
        for other in ranked:
            if taken >= neighbor_links:
                break
            if dist(node, other) > link_radius_km * 1000.0:
                break
            pairs.add((min(node.id, other.id), max(node.id, other.id)))
            taken += 1
    # bridge each cluster toward its nearest distinct cluster so long
    # segments exist between dense regions
    for ci, (cx, cy) in enumerate(centers):
        members = [n for n in nodes if math.hypot(n.x - cx, n.y - cy) < 4000.0]
        others = [n for n in nodes if math.hypot(n.x - cx, n.y - cy) >= 8000.0]
        if not members or not others:
            continue
        a = members[rng.randrange(len(members))]
        b = min(others, key=lambda o: (dist(a, o), o.id))
        pairs.add((min(a.id, b.id), max(a.id, b.id)))

    by_id = {n.id: n for n in nodes}
    segments = []
    for u, v in sorted(pairs):
        d = round(dist(by_id[u], by_id[v]), 1)
        # boundary clamping can co-locate nodes; no flyable segment there
        if d > 0:
            segments.append(Segment(u, v, d))
    return synthesize_wind(SkywayNetwork(nodes, segments), seed)


UNREACHABLE = math.inf


def shortest_distance(net: SkywayNetwork, a: int, b: int) -> tuple[float, list[int]]:
    """Minimal total segment meters from ``a`` to ``b`` plus one realizing path.

    Ties are broken toward the lexicographically smallest node-id path.
    Returns ``(math.inf, [])`` when ``b`` is unreachable.
    """
    if a not in net.nodes or b not in net.nodes:
        raise KeyError(f"unknown endpoint in ({a}, {b})")
    if a == b:
        return 0.0, [a]
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (a,))]
    done: set[int] = set()
    while heap:
        d, path = heapq.heappop(heap)
        cur = path[-1]
        if cur in done:
            continue
        if cur == b:
            return d, list(path)
        done.add(cur)
        for nb, seg in net._adj[cur].items():
            if nb not in done:
                heapq.heappush(heap, (d + seg.distance_m, path + (nb,)))
    return UNREACHABLE, []


@dataclass
class PathTree:
    """Single-source shortest distances with parent pointers toward the root."""

    root: int
    dist: dict[int, float]
    parent: dict[int, int | None] = field(repr=False, default_factory=dict)

    def distance(self, node: int) -> float:
        return self.dist.get(node, UNREACHABLE)

    def path_to_root(self, node: int) -> list[int]:
        """Node sequence node -> ... -> root; empty when unreachable."""
        if node not in self.dist:
            return []
        path = [node]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path


def shortest_path_tree(net: SkywayNetwork, root: int) -> PathTree:
    """Dijkstra from ``root`` over segment distances (deterministic ties by node id)."""
    dist: dict[int, float] = {root: 0.0}
    parent: dict[int, int | None] = {root: None}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, root)]
    while heap:
        d, cur = heapq.heappop(heap)
        if cur in done:
            continue
        done.add(cur)
        for nb in sorted(net._adj[cur]):
            nd = d + net._adj[cur][nb].distance_m
            if nb not in dist or nd < dist[nb]:
                dist[nb] = nd
                parent[nb] = cur
                heapq.heappush(heap, (nd, nb))
    return PathTree(root, dist, parent)
