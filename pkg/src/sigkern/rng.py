"""Deterministic hierarchical random streams.

Every randomized component takes a :class:`SeedStream` instead of a raw seed.
A stream is identified by a root seed plus a path of string labels; labels are
hashed into ``SeedSequence`` spawn keys, so sibling streams are statistically
independent and the whole tree is reproducible across platforms and across
any threading schedule (each unit of work owns its own substream).
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["SeedStream"]


def _label_words(label: str) -> tuple[int, int]:
    # Stable 64-bit label hash, split into two uint32 spawn-key words.
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "little")
    return value & 0xFFFFFFFF, value >> 32


class SeedStream:
    """Root seed plus a path of labels; spawns children and Generators.

    Instances are immutable: ``child`` returns a new stream and ``generator``
    can be called any number of times, always yielding a Generator in the
    same initial state.
    """

    __slots__ = ("seed", "path", "_key")

    def __init__(self, seed: int, path: tuple[str, ...] = ()):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
            raise ValueError(f"seed must be an integer, got {seed!r}")
        if seed < 0 or seed > 0xFFFFFFFFFFFFFFFF:
            raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        key: list[int] = []
        for label in self.path:
            key.extend(_label_words(label))
        self._key = tuple(key)

    def child(self, label: str) -> "SeedStream":
        """Derive the substream named ``label`` under this stream."""
        if not isinstance(label, str) or not label:
            raise ValueError(f"child label must be a non-empty string, got {label!r}")
        return SeedStream(self.seed, self.path + (label,))

    def generator(self) -> np.random.Generator:
        """Fresh Philox Generator for this stream's seed sequence."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self._key)
        return np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"SeedStream(seed={self.seed}, path={self.path!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SeedStream)
            and self.seed == other.seed
            and self.path == other.path
        )

    def __hash__(self) -> int:
        return hash((self.seed, self.path))
