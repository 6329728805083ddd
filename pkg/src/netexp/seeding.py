"""Deterministic stream derivation for common-random-number experiments.

Every random stream is a Philox generator keyed by a 128-bit seed hashed from
``(base seed, cell key, replication, role)``.  Outcome noise never depends on
the design or the drawn assignment, so designs and global-treatment runs that
share a cell key and replication index see identical noise paths.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

RNG_NAME = "numpy.random.Philox(4x64) seeded by blake2b-128 of (base, cell, replication, role)"

ROLES = ("graph", "clustering", "assignment", "outcome-noise", "truth")


def derive_seed(base_seed: int, cell_key: str, replication: int, role: str) -> int:
    if role not in ROLES:
        raise ValueError(f"unknown stream role {role!r}; expected one of {ROLES}")
    payload = json.dumps([int(base_seed), str(cell_key), int(replication), role])
    digest = hashlib.blake2b(payload.encode(), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def stream(base_seed: int, cell_key: str, replication: int, role: str) -> np.random.Generator:
    return make_rng(derive_seed(base_seed, cell_key, replication, role))
