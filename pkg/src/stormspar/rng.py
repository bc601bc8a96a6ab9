"""Seeded, splittable random streams.

Every random draw in the package goes through :class:`SeededRng`, which wraps a
NumPy ``Generator`` driven by the counter-based Philox bit generator. The pair
``(seed, stream_id)`` is fed to ``SeedSequence`` as ``entropy=seed,
spawn_key=(stream_id,)``, so equal pairs give bit-identical sequences on
every platform NumPy supports and distinct stream ids give independent
streams. Gaussian variates come from ``Generator.standard_normal``.
"""
import numpy as np

__all__ = ["SeededRng"]

_MASK64 = (1 << 64) - 1


class SeededRng:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The object is stateful: draws advance it. Give each concurrent worker its
    own instance (see :meth:`spawn`).
    """

    def __init__(self, seed=0, stream_id=0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = seed
        self.stream_id = stream_id
        self._seq = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.Philox(self._seq))

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, count):
        """Return ``count`` child streams, independent of this one and of each other.

        Children are derived from the construction key only, so the result does
        not depend on how many draws this stream has already made.
        """
        children = []
        for i in range(count):
            child = SeededRng.__new__(SeededRng)
            child.seed = self.seed
            child.stream_id = self.stream_id
            child._seq = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id, i)
            )
            child.generator = np.random.Generator(np.random.Philox(child._seq))
            children.append(child)
        return children

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def permutation(self, n):
        return self.generator.permutation(n)

    def choice(self, n, size, replace=False):
        return self.generator.choice(n, size=size, replace=replace)
