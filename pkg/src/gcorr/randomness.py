"""Deterministic, splittable random streams.

A :class:`Stream` is a value ``(seed, path)``.  Its bits come from a Philox
counter-based generator keyed by hashing the path into a ``SeedSequence``
spawn key, so deriving a child costs nothing and two different paths never
share a key.  Normal variates use numpy's ziggurat sampler; the method name is
echoed in every report header (:data:`NORMAL_METHOD`) because exact draw
sequences matter for bit-reproducibility.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .bodies import OrthogonalMatrix

RNG_METHOD = "philox4x64"
NORMAL_METHOD = "ziggurat"
DEFAULT_CHUNK = 2**16

_MASK64 = (1 << 64) - 1


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class Stream:
    seed: int
    path: tuple = ()
    _gen: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def generator(self) -> np.random.Generator:
        """The stream's generator, created on first use and then advanced by every draw."""
        if not self._gen:
            key = []
            for label, index in self.path:
                key.extend((_label_key(label), int(index) & 0xFFFFFFFF, int(index) >> 32))
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(key))
            self._gen.append(np.random.Generator(np.random.Philox(ss)))
        return self._gen[0]

    def derive(self, label: str, index: int = 0) -> "Stream":
        return derive_stream(self, label, index)

    def describe(self) -> str:
        return "/".join(f"{lab}:{i}" for lab, i in self.path) or "root"


def derive_stream(parent: Stream, label: str, index: int = 0) -> Stream:
    """Child stream fully determined by ``(parent, label, index)``."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return Stream(parent.seed, parent.path + ((str(label), int(index)),))


def std_normal_vector(stream: Stream, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return stream.generator.standard_normal(n)


def std_normal_matrix(stream: Stream, m: int, n: int) -> np.ndarray:
    return stream.generator.standard_normal((m, n))


def haar_matrix(gen: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix as a plain array (QR with sign fix)."""
    while True:
        z = gen.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        if np.all(np.abs(d) > 1e-12):
            return q * np.sign(d)


def haar_orthogonal(stream: Stream, n: int) -> OrthogonalMatrix:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return OrthogonalMatrix(haar_matrix(stream.generator, n))


def chunk_sizes(total: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    if total < 0:
        raise ValueError("sample count must be nonnegative")
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def uniform_sphere(gen: np.random.Generator, m: int, n: int) -> np.ndarray:
    z = gen.standard_normal((m, n))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return z / norms
