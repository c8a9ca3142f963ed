"""Seed derivation. Every random draw in a run descends from the plan seed."""

from __future__ import annotations

import hashlib

import numpy as np

U64_MASK = (1 << 64) - 1


def stable_hash64(*parts: object) -> int:
    """Platform-stable 64-bit hash of ``parts`` (blake2b over their ``repr``, joined by NUL)."""
    text = "\x00".join(repr(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


def derive_run_seed(plan_seed: int, src: str, dst: str, bandwidth_hz: float) -> int:
    return stable_hash64("run", plan_seed & U64_MASK, src, dst, float(bandwidth_hz))


def packet_stream(seed: int, flow_id: str) -> np.random.Generator:
    """Counter-based stream: the i-th uniform drawn belongs to packet sequence number i.

    Philox keyed by (seed, flow id); the counter starts at zero, so a packet's
    draw depends only on the key and its sequence number.
    """
    key = ((seed & U64_MASK) << 64) | stable_hash64("flow", flow_id)
    return np.random.Generator(np.random.Philox(key=key))
