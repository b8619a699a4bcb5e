"""Seeded random streams.

All randomness goes through numpy's Philox4x64-10 counter-based bit
generator, keyed by a SeedSequence built from ``(seed, *stream)``.  Monte
Carlo loops derive one stream per block of trials from ``(seed, block)``,
so results do not depend on how blocks are scheduled.
"""
import numpy as np

RNG_ID = "numpy-Philox4x64-10/SeedSequence(seed,stream...)"


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


def blocks(trials: int, block: int):
    """Yield (block_index, size) covering ``trials``."""
    i = 0
    done = 0
    while done < trials:
        b = min(block, trials - done)
        yield i, b
        done += b
        i += 1
