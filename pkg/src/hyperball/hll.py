"""Packed HyperLogLog counter arrays.

A CounterArray holds n independent HyperLogLog counters of p = 2^b
registers each, bit-packed at register_width bits per register. Counters
support add, register-wise-max union (which computes the counter of the
union of the underlying sets) and cardinality estimation with the
linear-counting small-range correction. All mutating operations are
monotone: a register value never decreases.

Concurrency: arrays may be read from any number of threads. Different
slots may be mutated concurrently; concurrent mutation of the same slot
must be serialized by the caller. No locks are taken here.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels

BLOB_MAGIC = b"HLLA"
BLOB_VERSION = 1

_U64_MASK = (1 << 64) - 1
_MIX_C1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_C2 = np.uint64(0x94D049BB133111EB)

# 2^-r for every possible register value of a byte-wide working register.
POW2NEG = 2.0 ** -np.arange(256, dtype=np.float64)


class BlobFormatError(ValueError):
    """Raised when a serialized counter-array blob is malformed."""


def alpha(p: int) -> float:
    """Bias-correction constant of the raw estimator for p registers."""
    if p == 16:
        return 0.673
    if p == 32:
        return 0.697
    if p == 64:
        return 0.709
    return 0.7213 / (1.0 + 1.079 / p)


def standard_deviation_bound(p: int) -> float:
    """Guaranteed ceiling 1.06/sqrt(p) on the relative standard deviation."""
    if p < 16:
        raise ValueError(f"p must be >= 16, got {p}")
    return 1.06 / math.sqrt(p)


def rho_plus(bits: int, max_value: int) -> int:
    """Number of leading zeros of a (max_value - 1)-bit word, plus one.

    An all-zero word saturates at max_value.
    """
    if max_value < 1:
        raise ValueError("max_value must be positive")
    if bits < 0 or bits >> (max_value - 1):
        raise ValueError(f"bits does not fit in {max_value - 1} positions")
    return max_value - bits.bit_length()


def _mix64(z: np.ndarray) -> np.ndarray:
    # 1-d arrays wrap modulo 2^64 silently; uint64 scalars (and the scalars
    # that 0-d arrays decay to) emit overflow warnings instead.
    z = np.atleast_1d(np.asarray(z, dtype=np.uint64))
    z = (z ^ (z >> np.uint64(30))) * _MIX_C1
    z = (z ^ (z >> np.uint64(27))) * _MIX_C2
    return z ^ (z >> np.uint64(31))


def hash_items(items: np.ndarray, replicas: np.ndarray, seed: int) -> np.ndarray:
    """64-bit avalanche hash of (item, replica) pairs under an explicit seed.

    Injective in `item` for a fixed (replica, seed), so distinct items never
    collide; distinct replicas or seeds give independently mixed streams.
    """
    items = np.asarray(items, dtype=np.uint64)
    replicas = np.asarray(replicas, dtype=np.uint64)
    key = _mix64(replicas + _mix64(np.uint64(seed & _U64_MASK)))
    return _mix64(items + key)


def hash_item(item: int, replica: int = 0, seed: int = 0) -> int:
    """Scalar convenience wrapper around hash_items."""
    out = hash_items(np.array([item], dtype=np.uint64),
                     np.array([replica], dtype=np.uint64), seed)
    return int(out[0])


def _bit_length_u64(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    out = np.zeros(x.shape, dtype=np.uint64)
    for s in (32, 16, 8, 4, 2, 1):
        big = x >= np.uint64(1 << s)
        out[big] += np.uint64(s)
        x[big] >>= np.uint64(s)
    out[x > 0] += np.uint64(1)
    return out


@dataclass(frozen=True)
class CounterParams:
    """Shape of one counter: p = 2^b registers of register_width bits."""

    b: int
    register_width: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.b < 4:
            raise ValueError(f"b must be >= 4 (p >= 16), got {self.b}")
        if not 1 <= self.register_width <= 8:
            raise ValueError(
                f"register_width must be in [1, 8], got {self.register_width}")

    @property
    def p(self) -> int:
        return 1 << self.b

    @property
    def row_bytes(self) -> int:
        # p >= 16 makes p * register_width a multiple of 8, so each
        # counter occupies a whole number of bytes with no padding.
        return self.p * self.register_width // 8

    @property
    def saturation(self) -> int:
        return (1 << self.register_width) - 1

    @property
    def rho_max(self) -> int:
        # add() feeds rho_plus the 64 - b bits left after register selection.
        return 64 - self.b + 1

    def rsd_bound(self) -> float:
        return standard_deviation_bound(self.p)


def register_values(hashes: np.ndarray, params: CounterParams):
    """Split hashes into (register index, clamped rho) pairs.

    The low b bits select the register; the remaining 64 - b bits feed the
    leading-zero count, clamped to the register saturation value.
    """
    hashes = np.asarray(hashes, dtype=np.uint64)
    idx = (hashes & np.uint64(params.p - 1)).astype(np.int64)
    rest = hashes >> np.uint64(params.b)
    rho = np.uint64(params.rho_max) - _bit_length_u64(rest)
    rho = np.minimum(rho, np.uint64(params.saturation)).astype(np.uint8)
    return idx, rho


def pack_rows(dense: np.ndarray, register_width: int) -> np.ndarray:
    """(k, p) byte-wide registers -> (k, p*width//8) packed rows."""
    dense = np.ascontiguousarray(dense, dtype=np.uint8)
    k, p = dense.shape
    shifts = np.arange(register_width - 1, -1, -1, dtype=np.uint8)
    bits = (dense[:, :, None] >> shifts) & np.uint8(1)
    return np.packbits(bits.reshape(k, p * register_width), axis=1)


def unpack_rows(packed: np.ndarray, p: int, register_width: int) -> np.ndarray:
    """Inverse of pack_rows."""
    packed = np.atleast_2d(packed)
    k = packed.shape[0]
    bits = np.unpackbits(packed, axis=1)[:, :p * register_width]
    bits = bits.reshape(k, p, register_width)
    shifts = np.arange(register_width - 1, -1, -1, dtype=np.uint8)
    return (bits << shifts).sum(axis=2, dtype=np.uint8)


class CounterArray:
    """n bit-packed HyperLogLog counters sharing one CounterParams."""

    def __init__(self, n: int, params: CounterParams,
                 registers: np.ndarray | None = None):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self.params = params
        if registers is None:
            registers = np.zeros((n, params.row_bytes), dtype=np.uint8)
        else:
            registers = np.asarray(registers, dtype=np.uint8)
            if registers.shape != (n, params.row_bytes):
                raise ValueError(
                    f"registers shape {registers.shape} does not match "
                    f"(n={n}, row_bytes={params.row_bytes})")
        self.registers = registers

    # -- representation ---------------------------------------------------

    @property
    def nbytes(self) -> int:
        return self.registers.nbytes

    @classmethod
    def from_dense(cls, dense: np.ndarray, params: CounterParams) -> "CounterArray":
        dense = np.atleast_2d(np.asarray(dense, dtype=np.uint8))
        if dense.shape[1] != params.p:
            raise ValueError("dense register matrix has wrong register count")
        if dense.size and dense.max() > params.saturation:
            raise ValueError("register value exceeds saturation for this width")
        return cls(dense.shape[0], params, pack_rows(dense, params.register_width))

    def to_dense(self, rows: np.ndarray | None = None) -> np.ndarray:
        packed = self.registers if rows is None else self.registers[rows]
        if packed.shape[0] == 0:
            return np.zeros((0, self.params.p), dtype=np.uint8)
        return unpack_rows(packed, self.params.p, self.params.register_width)

    def copy(self) -> "CounterArray":
        return CounterArray(self.n, self.params, self.registers.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CounterArray):
            return NotImplemented
        return (self.params == other.params and self.n == other.n
                and np.array_equal(self.registers, other.registers))

    # -- counter operations ------------------------------------------------

    def add(self, index: int, item: int, replica: int = 0) -> bool:
        """Feed one item to counter `index`; True if a register grew."""
        h = hash_items(np.array([item], dtype=np.uint64),
                       np.array([replica], dtype=np.uint64), self.params.seed)
        return self.add_hashed(index, h)

    def add_hashed(self, index: int, hashes: np.ndarray) -> bool:
        """Feed pre-hashed 64-bit values to counter `index`."""
        idx, rho = register_values(hashes, self.params)
        row = self.to_dense(np.array([index]))
        changed = bool(_kernels.max_into_row(row, 0, idx, rho))
        if changed:
            self.registers[index] = pack_rows(row, self.params.register_width)[0]
        return changed

    def estimate_size(self, index: int) -> float:
        """Estimated number of distinct items fed to counter `index`.

        Depends only on the final register values, so any order of add and
        union operations reaching the same registers estimates identically.
        """
        row = self.to_dense(np.array([index]))
        p = self.params.p
        return float(_kernels.estimate_register_row(
            row, 0, POW2NEG, alpha(p) * p * p, 2.5 * p, float(p)))

    def estimate_all(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.float64)
        if self.n:
            dense = self.to_dense()
            p = self.params.p
            _kernels.estimate_register_rows(
                dense, 0, self.n, POW2NEG, alpha(p) * p * p, 2.5 * p,
                float(p), out)
        return out

    def union_into(self, index: int, source: "CounterArray",
                   source_index: int) -> bool:
        """target[index] |= source[source_index], register-wise max.

        Afterwards the target slot represents the union of both underlying
        sets. Returns True if any target register increased.
        """
        if source.params != self.params:
            raise ValueError("counter parameters differ; union is undefined")
        mine = self.registers[index]
        theirs = source.registers[source_index]
        if np.array_equal(mine, theirs):
            return False
        merged = np.maximum(
            self.to_dense(np.array([index])),
            source.to_dense(np.array([source_index])))
        packed = pack_rows(merged, self.params.register_width)[0]
        changed = not np.array_equal(packed, mine)
        self.registers[index] = packed
        return changed

    # -- serialization -----------------------------------------------------

    def to_blob(self) -> bytes:
        header = BLOB_MAGIC + struct.pack(
            "<HBBQQ", BLOB_VERSION, self.params.b, self.params.register_width,
            self.n, self.params.seed & _U64_MASK)
        return header + self.registers.tobytes()

    @classmethod
    def from_blob(cls, blob: bytes) -> "CounterArray":
        if len(blob) < 24 or blob[:4] != BLOB_MAGIC:
            raise BlobFormatError("bad counter-array magic")
        version, b, width, n, seed = struct.unpack("<HBBQQ", blob[4:24])
        if version != BLOB_VERSION:
            raise BlobFormatError(f"unsupported blob version {version}")
        params = CounterParams(b=b, register_width=width, seed=seed)
        expected = 24 + n * params.row_bytes
        if len(blob) != expected:
            raise BlobFormatError(
                f"blob length {len(blob)} != expected {expected}")
        registers = np.frombuffer(
            blob, dtype=np.uint8, offset=24).reshape(n, params.row_bytes).copy()
        return cls(n, params, registers)

    def write(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_blob())

    @classmethod
    def read(cls, path) -> "CounterArray":
        with open(path, "rb") as fh:
            return cls.from_blob(fh.read())
