"""Deterministic, splittable seeding.

Every random choice in the toolkit flows from a single 64-bit root seed.
Sub-streams are derived by hashing (root, *path), so independent attempts
can run in any order (or in parallel) and still reproduce bit-for-bit.
"""

import hashlib
import random


def derive_seed(root: int, *path) -> int:
    h = hashlib.sha256()
    h.update(repr((int(root),) + tuple(path)).encode())
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(root: int, *path) -> random.Random:
    return random.Random(derive_seed(root, *path))
