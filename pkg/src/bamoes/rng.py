"""Order-independent random streams.

Every stream is a Philox (counter-based) generator whose key is derived
from the global seed plus a tuple of identifiers such as
``(series_id, method_name, replica)``. Results therefore do not depend on
the order in which tasks are executed.
"""
import hashlib

import numpy as np


def _word(key):
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("integer keys must be nonnegative")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def keyed_seed_sequence(seed, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([_word(seed)] + [_word(k) for k in keys])


def keyed_rng(seed, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(keyed_seed_sequence(seed, *keys)))


def derive_seed(seed, *keys) -> int:
    """64-bit integer seed for components that take a plain seed."""
    return int(keyed_seed_sequence(seed, *keys).generate_state(1, np.uint64)[0])
