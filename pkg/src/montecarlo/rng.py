"""
Per-path random streams.

Every path owns a Philox counter-based generator keyed with seed XOR path
index and draws its uniforms in fixed chunks, so the numbers a path sees never
depend on which batch or thread advances it.
"""

import numpy as np

from src.core.polynomials import FloatArray

CHUNK_STEPS: int = 1024
# normal pair (Box-Muller), jump test, jump target, bridge crossing test
UNIFORMS_PER_STEP: int = 5
SEED_MASK: int = (1 << 64) - 1


def path_seed(seed: int, index: int) -> int:
    return (seed ^ index) & SEED_MASK


def path_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=path_seed(seed, index)))


def box_muller(u1: FloatArray, u2: FloatArray) -> FloatArray:
    """Standard normals from two uniform arrays on [0, 1)."""
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


class BatchStreams:
    """Streams for a fixed set of path indices, advanced chunk by chunk."""

    def __init__(self, seed: int, indices: list[int]) -> None:
        self.seed: int = seed
        self.indices: list[int] = indices
        self._generators: list[np.random.Generator] = [path_generator(seed, i) for i in indices]

    def __len__(self) -> int:
        return len(self.indices)

    def next_chunk(self) -> FloatArray:
        """Uniforms of shape (paths, CHUNK_STEPS, UNIFORMS_PER_STEP)."""
        return np.stack(
            [g.random((CHUNK_STEPS, UNIFORMS_PER_STEP)) for g in self._generators]
        )
