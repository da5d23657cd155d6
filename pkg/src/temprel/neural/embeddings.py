"""Word embedding lookup with a deterministic out-of-vocabulary fallback."""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import FormatError


class EmbeddingTable:
    """Maps words to fixed vectors.

    Lookup falls back from the exact form to the lowercased form, then to
    a vector seeded from a hash of the word, so unknown words resolve to
    the same vector in every run and every process.
    """

    def __init__(self, dimension: int = 300, seed: int = 13,
                 vectors: dict[str, np.ndarray] | None = None):
        self.dimension = dimension
        self.seed = seed
        self.vectors = {w: np.asarray(v, dtype=np.float64)
                        for w, v in (vectors or {}).items()}
        self._oov_cache: dict[str, np.ndarray] = {}

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, word):
        return word in self.vectors or word.lower() in self.vectors

    def zero(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def lookup(self, word: str) -> np.ndarray:
        hit = self.vectors.get(word)
        if hit is None:
            hit = self.vectors.get(word.lower())
        if hit is None:
            hit = self._oov(word.lower())
        return hit

    def encode(self, words) -> np.ndarray:
        """Stack lookups into a (len(words), dimension) matrix."""
        return np.stack([self.lookup(w) for w in words]) if words else \
            np.empty((0, self.dimension))

    def _oov(self, key: str) -> np.ndarray:
        cached = self._oov_cache.get(key)
        if cached is None:
            digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng([self.seed, int.from_bytes(digest, "big")])
            cached = rng.uniform(-0.05, 0.05, self.dimension)
            self._oov_cache[key] = cached
        return cached

    @classmethod
    def load(cls, path, seed: int = 13) -> "EmbeddingTable":
        """Read a text embedding file: word then floats, optional count header."""
        vectors = {}
        dimension = None
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                parts = line.rstrip("\n").split()
                if not parts:
                    continue
                if line_no == 1 and len(parts) == 2:
                    try:
                        int(parts[0])
                        dimension = int(parts[1])
                        continue
                    except ValueError:
                        pass  # two-column data line, fall through
                word, values = parts[0], parts[1:]
                if dimension is None:
                    dimension = len(values)
                elif len(values) != dimension:
                    raise FormatError(
                        f"expected {dimension} values for {word!r}, "
                        f"got {len(values)}", line_no)
                try:
                    vectors[word] = np.asarray([float(v) for v in values])
                except ValueError:
                    raise FormatError(f"non-numeric embedding for {word!r}", line_no)
        if dimension is None:
            raise FormatError("embedding file is empty")
        return cls(dimension=dimension, seed=seed, vectors=vectors)
