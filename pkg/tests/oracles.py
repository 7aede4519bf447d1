"""Independent reference implementations the tests compare against.

Everything here is deliberately brute force and structured differently
from the library code (closed-form battery evaluation instead of
incremental state, raw enumeration instead of pruned search), so that
agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools
import math


def brute_shortest(net, a: int, b: int) -> float:
    """Minimal a->b distance by enumerating every simple path."""
    if a == b:
        return 0.0
    best = math.inf

    def walk(node, seen, total):
        nonlocal best
        if total >= best:
            return
        for nb in net.neighbors(node):
            if nb == b:
                best = min(best, total + net.segment(node, nb).distance_m)
            elif nb not in seen:
                walk(nb, seen | {nb}, total + net.segment(node, nb).distance_m)

    walk(a, {a}, 0.0)
    return best


def brute_pad_makespan(times, pads: int) -> float:
    """Minimal makespan over every pad assignment (tiny inputs only)."""
    if not times:
        return 0.0
    best = math.inf
    for assign in itertools.product(range(pads), repeat=len(times)):
        loads = [0.0] * pads
        for i, p in enumerate(assign):
            loads[p] += times[i]
        best = min(best, max(loads))
    return best


class BatteryLedger:
    """Closed-form battery evaluation from a transfer record.

    Transfers are blended linearly across their interval, matching the
    piecewise-linear trace semantics of the composers.
    """

    def __init__(self, batteries, rates, t0=0.0):
        self.b0 = dict(batteries)
        self.rates = dict(rates)
        self.t0 = t0
        self.transfers = []  # (drone, start, end, signed amount)

    def record(self, consumer, provider, start, end, amount):
        self.transfers.append((consumer, start, end, amount))
        self.transfers.append((provider, start, end, -amount))

    def battery(self, drone, t):
        v = self.b0[drone] - self.rates.get(drone, 0.0) * (t - self.t0)
        for who, s, e, a in self.transfers:
            if who != drone:
                continue
            if t >= e:
                v += a
            elif t > s:
                v += a * (t - s) / (e - s)
        return v


def pb_oracle(batteries, capacities, rates, consumer_ids, provider_id,
              ae, share_rate, window, gamma):
    """Priority service replay: earliest start, then largest ask, served
    whole, one at a time, re-polling the fleet after each allocation."""
    w0, w1 = window
    ledger = BatteryLedger(batteries, rates, w0)
    pending = []  # [start, amount, consumer, seq]
    seq = 0

    def refile(now):
        nonlocal seq
        open_ids = {p[2] for p in pending}
        for c in sorted(consumer_ids):
            if c in open_ids:
                continue
            b = ledger.battery(c, now)
            if b < gamma * capacities[c]:
                pending.append([now, capacities[c] - b, c, seq])
                seq += 1

    refile(w0)
    free = w0
    remaining = ae
    while True:
        pending.sort(key=lambda p: (p[0], -p[1], p[3]))
        pick = None
        for p in pending:
            # requests filed here always close at the window end, so the
            # only timing gate is starting before w1
            if max(p[0], free) < w1 and p[1] <= remaining:
                pick = p
                break
        if pick is None:
            break
        pending.remove(pick)
        start = max(pick[0], free)
        end = start + pick[1] / share_rate
        amount = pick[1]
        if end > w1:
            end = w1
            amount = share_rate * (end - start)
        ledger.record(pick[2], provider_id, start, end, amount)
        remaining -= amount
        free = end
        refile(end)
    final = {i: ledger.battery(i, w1) for i in batteries}
    return final, ae - remaining


def fb_oracle(batteries, capacities, rates, consumer_ids, provider_id,
              ae, share_rate, window, quantum, reserve):
    """Round-robin replay: fixed quantum by ascending id, full drones
    free, a turn may begin while time and non-reserve energy remain."""
    w0, w1 = window
    ledger = BatteryLedger(batteries, rates, w0)
    turn = quantum / share_rate
    ct = w0
    remaining = ae
    while ct < w1 and remaining > reserve:
        granted = False
        for c in sorted(consumer_ids):
            if ct >= w1 or remaining <= reserve:
                break
            room = capacities[c] - ledger.battery(c, ct)
            if room <= 0:
                continue
            amount = min(quantum, room, remaining)
            start = ct
            end = min(ct + turn, w1)
            ct = ct + turn
            ledger.record(c, provider_id, start, end, amount)
            remaining -= amount
            granted = True
        if not granted:
            break
    final = {i: ledger.battery(i, w1) for i in batteries}
    return final, ae - remaining


def leg_grid_feasible(batteries, rates, allocations, tt, tol=1e-9) -> bool:
    """Whole-minute battery floor check from first principles.

    ``allocations`` carry (provider, consumer, start, duration, amount);
    rates must be constant over the leg, so instances with mid-leg slot
    swaps are out of scope here.
    """
    ledger = BatteryLedger(batteries, rates, 0.0)
    for a in allocations:
        ledger.record(a.consumer, a.provider, a.start, a.start + a.duration,
                      a.amount)
    grid = [float(m) for m in range(int(math.floor(tt)) + 1)]
    if grid[-1] != tt:
        grid.append(tt)
    for drone in batteries:
        for t in grid:
            if ledger.battery(drone, t) < -tol:
                return False
    return True
