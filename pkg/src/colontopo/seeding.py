"""Deterministic per-pair random streams.

Synthetic backends must return the same value for the same (seed, pair)
regardless of query order or process, so streams are derived from a stable
hash rather than Python's salted ``hash()``.
"""

from __future__ import annotations

import hashlib

import numpy as np


def pair_rng(seed: int, a: str, b: str, domain: str = "") -> np.random.Generator:
    """Generator keyed by the unordered pair {a, b} and a domain label."""
    lo, hi = sorted((a, b))
    digest = hashlib.blake2b(
        f"{domain}|{seed}|{lo}|{hi}".encode(), digest_size=8
    ).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))
