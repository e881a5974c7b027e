import numpy as np


class RngStream:
    """
    Seeded random stream. Identical (seed, stream) pairs reproduce identical draws.

    Compiled kernels cannot share a numpy ``Generator``; they receive a 32-bit seed drawn
    from this stream through :meth:`kernel_seed`, so they stay on the same reproducible sequence.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.generator = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream,)))

    def __repr__(self):
        return f"<RngStream(seed={self.seed}, stream={self.stream})>"

    def kernel_seed(self) -> int:
        return int(self.generator.integers(0, 2 ** 32 - 1))

    def normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def rademacher(self, shape) -> np.ndarray:
        return self.generator.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0

    def for_chain(self, chain_index: int) -> "RngStream":
        return RngStream(self.seed + chain_index, self.stream)
