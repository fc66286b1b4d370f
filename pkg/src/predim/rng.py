"""Deterministic seed derivation: every randomized step gets its own stream."""
import hashlib
import random


def derive_seed(master, *tags):
    text = ":".join([str(master)] + [str(t) for t in tags])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def stream(master, *tags):
    return random.Random(derive_seed(master, *tags))
