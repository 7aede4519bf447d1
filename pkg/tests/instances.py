"""Random instance builders shared by the sharing and acceptance tests.

Every quantity is a small dyadic rational (multiples of 1/4 or finer on
values, powers of two on rates), so composer arithmetic and closed-form
oracle arithmetic are both exact and results can be compared with ==.
"""

import random

PROVIDER_ID = 100


def dyadic_instance(rng: random.Random) -> dict:
    """One energy-sharing scenario: 1-4 consumers, one provider."""
    n = rng.randint(1, 4)
    consumer_ids = list(range(1, n + 1))
    batteries = {}
    capacities = {}
    rates = {}
    for cid in consumer_ids:
        cap = float(rng.randrange(2048, 16385, 256))
        batteries[cid] = rng.randrange(0, int(cap) * 4 + 1) / 4.0
        capacities[cid] = cap
        rates[cid] = rng.randrange(0, 257) / 4.0
    batteries[PROVIDER_ID] = float(rng.randrange(8192, 65537, 256))
    capacities[PROVIDER_ID] = 65536.0
    rates[PROVIDER_ID] = rng.randrange(0, 257) / 4.0
    return {
        "batteries": batteries,
        "capacities": capacities,
        "rates": rates,
        "consumer_ids": consumer_ids,
        "provider_id": PROVIDER_ID,
        "share_rate": float(rng.choice((4, 8, 16))),
        "window": (0.0, float(rng.randint(1, 200))),
        "gamma": rng.randrange(0, 17) / 16.0,
        "ae": rng.randrange(0, 131073) / 4.0,
        "quantum": rng.randrange(1, 65537) / 4.0,
        "reserve": rng.randrange(0, 65537) / 4.0,
    }
