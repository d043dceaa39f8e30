"""Counter-derived random streams for reproducible Monte-Carlo runs.

Every trial (or fixed-size draw block) gets its own generator seeded from a
stable hash of (master seed, experiment label, counter).  Results therefore
do not depend on how trials are partitioned across workers, only on the
master seed.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, label: str, index: int) -> int:
    digest = hashlib.sha256(f"{master_seed}/{label}/{index}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


def derive_rng(master_seed: int, label: str, index: int) -> np.random.Generator:
    """Generator for one trial of one experiment under one master seed."""
    return np.random.default_rng(np.random.SeedSequence(derive_seed(master_seed, label, index)))
