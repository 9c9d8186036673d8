"""Named random streams.

Every stream is derived from the run seed plus a tuple of integer keys, so adding egos or trials
never perturbs the draws of anybody else.
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _as_int(key: Key) -> int:
    if isinstance(key, str):
        # crc32 is stable across interpreter runs, unlike hash()
        return zlib.crc32(key.encode("utf-8"))
    return int(key)


def stream(seed: int, *keys: Key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[_as_int(k) for k in keys]]))
