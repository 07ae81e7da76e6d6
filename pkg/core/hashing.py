"""Index derivation for every filter layout.

One element maps to k indices. How those indices are obtained is the
`HashScheme`; where they land is the `IndexLayout`:

- Flat(m): every index ranges over the whole m-bit vector (standard filter).
- PerPart(k, m/k): index i ranges over [0, m/k) inside part i (partitioned).

All hashing is MurmurHash3 x64/128 (`mmh3`), seeded through a SplitMix64
finalizer so that one 64-bit scheme seed fans out to independent 32-bit
Murmur seeds. The 128-bit output is split into two 64-bit halves whenever a
scheme needs (h1, h2).
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import mmh3

from .errors import BitBudgetError, GeometryError

MASK64 = (1 << 64) - 1
WIDE_HASH_BITS = 128

# Salts keep the hash streams of the different roles apart.
DOUBLE_SALT = 0
INDEX_SALT = 1
BLOCK_SALT = 0x424C4F434B  # "BLOCK"

Element = Union[bytes, bytearray, memoryview, str]


# ----------------------------------------------------------------------
# Seed mixing
# ----------------------------------------------------------------------

def u64(x: int) -> int:
    return x & MASK64


def mix64(x: int) -> int:
    """SplitMix64 finalizer: mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF."""
    z = u64(x)
    z = u64((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9)
    z = u64((z ^ (z >> 27)) * 0x94D049BB133111EB)
    return z ^ (z >> 31)


def derive_seed(base: int, salt: int) -> int:
    """Independent 64-bit seed for role `salt` under master seed `base`."""
    return mix64(u64(base) ^ mix64(u64(salt) + 0x9E3779B97F4A7C15))


def _murmur_seed(seed: int, salt: int) -> int:
    z = derive_seed(seed, salt)
    return (z ^ (z >> 32)) & 0xFFFFFFFF


def as_bytes(element: Element) -> bytes:
    if isinstance(element, str):
        return element.encode("utf-8")
    return bytes(element)


def wide_hash(element: Element, seed: int, salt: int = DOUBLE_SALT) -> int:
    """Unsigned 128-bit MurmurHash3 of `element` for role `salt`."""
    return mmh3.hash128(as_bytes(element), _murmur_seed(seed, salt), True, False)


def map_to_range(h: int, r: int) -> int:
    """Multiply-high reduction of a 64-bit hash onto [0, r)."""
    return (u64(h) * r) >> 64


def is_power_of_two(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def log2_exact(x: int) -> int:
    if not is_power_of_two(x):
        raise GeometryError(f"{x} is not a power of two")
    return x.bit_length() - 1


# ----------------------------------------------------------------------
# Types
# ----------------------------------------------------------------------

class SchemeTag(str, Enum):
    INDEPENDENT = "independent"
    WIDE_SPLIT = "wide-split"
    NAIVE_DOUBLE = "naive-double"
    SAFE_DOUBLE = "safe-double"


# File-format codes, in order.
SCHEME_CODES = (
    SchemeTag.INDEPENDENT,
    SchemeTag.WIDE_SPLIT,
    SchemeTag.NAIVE_DOUBLE,
    SchemeTag.SAFE_DOUBLE,
)


@dataclass(frozen=True)
class HashScheme:
    tag: SchemeTag = SchemeTag.INDEPENDENT
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", SchemeTag(self.tag))
        if not 0 <= int(self.seed) <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def is_double(self) -> bool:
        return self.tag in (SchemeTag.NAIVE_DOUBLE, SchemeTag.SAFE_DOUBLE)


class LayoutMode(str, Enum):
    FLAT = "flat"
    PER_PART = "per-part"


@dataclass(frozen=True)
class IndexLayout:
    mode: LayoutMode
    m: int
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", LayoutMode(self.mode))
        if self.m < 1 or self.k < 1:
            raise GeometryError(f"layout needs m >= 1 and k >= 1, got m={self.m} k={self.k}")
        if self.mode is LayoutMode.PER_PART and self.m % self.k != 0:
            raise GeometryError(f"per-part layout needs k | m, got m={self.m} k={self.k}")

    @classmethod
    def flat(cls, m: int, k: int) -> "IndexLayout":
        return cls(LayoutMode.FLAT, m, k)

    @classmethod
    def per_part(cls, m: int, k: int) -> "IndexLayout":
        return cls(LayoutMode.PER_PART, m, k)

    @property
    def index_range(self) -> int:
        return self.m if self.mode is LayoutMode.FLAT else self.m // self.k

    def global_position(self, i: int, index: int) -> int:
        if self.mode is LayoutMode.FLAT:
            return index
        return i * (self.m // self.k) + index


@dataclass(frozen=True)
class IndexSequence:
    indices: Tuple[int, ...]
    layout: IndexLayout

    def __len__(self) -> int:
        return len(self.indices)

    def positions(self) -> Tuple[int, ...]:
        """Global bit positions, in hash order."""
        return tuple(self.layout.global_position(i, x) for i, x in enumerate(self.indices))


# ----------------------------------------------------------------------
# Derivation
# ----------------------------------------------------------------------

def double_hash_pair(scheme: HashScheme, element: Element) -> Tuple[int, int]:
    """(h1, h2): low and high 64-bit halves of one 128-bit hash."""
    w = wide_hash(element, scheme.seed, DOUBLE_SALT)
    return w & MASK64, w >> 64


def check_scheme(scheme: HashScheme, layout: IndexLayout) -> None:
    """Raise if `scheme` cannot address `layout` (only WideSplit has limits)."""
    if scheme.tag is not SchemeTag.WIDE_SPLIT:
        return
    r = layout.index_range
    if not is_power_of_two(r):
        raise GeometryError(f"wide-split needs a power-of-two index range, got {r}")
    need = layout.k * log2_exact(r)
    if need > WIDE_HASH_BITS:
        raise BitBudgetError(
            f"wide-split needs {need} hash bits (k={layout.k}, range={r}), "
            f"only {WIDE_HASH_BITS} available"
        )


def derive_indices(scheme: HashScheme, element: Element, layout: IndexLayout) -> IndexSequence:
    r = layout.index_range
    k = layout.k
    tag = scheme.tag

    if tag is SchemeTag.INDEPENDENT:
        data = as_bytes(element)
        indices = tuple(
            map_to_range(wide_hash(data, scheme.seed, INDEX_SALT + i), r) for i in range(k)
        )
    elif tag is SchemeTag.WIDE_SPLIT:
        check_scheme(scheme, layout)
        width = log2_exact(r)
        w = wide_hash(element, scheme.seed, DOUBLE_SALT)
        indices = tuple((w >> (i * width)) & (r - 1) for i in range(k))
    else:
        h1, h2 = double_hash_pair(scheme, element)
        if tag is SchemeTag.SAFE_DOUBLE and is_power_of_two(r):
            h2 |= 1
        indices = tuple((h1 + i * h2) % r for i in range(k))

    return IndexSequence(indices=indices, layout=layout)


def distinct_count(seq: IndexSequence) -> int:
    return len(set(seq.positions()))


def select_block(scheme: HashScheme, element: Element, n_blocks: int) -> int:
    """Block chosen by a hash stream disjoint from the index hashes."""
    return map_to_range(wide_hash(element, scheme.seed, BLOCK_SALT) & MASK64, n_blocks)


# ----------------------------------------------------------------------
# Hash-bit accounting
# ----------------------------------------------------------------------

def hash_bits_needed(variant: str, m_block: int, k: int) -> int:
    """Bits needed to address one block: k*log2(m) standard, k*log2(m/k) partitioned."""
    width = log2_exact(m_block)
    if variant == "standard":
        return k * width
    if variant == "partitioned":
        if k < 1 or m_block % k != 0:
            raise GeometryError(f"partitioned block needs k | m_block, got m_block={m_block} k={k}")
        return k * log2_exact(m_block // k)
    raise ValueError(f"variant must be 'standard' or 'partitioned', got {variant!r}")


def max_blocks_single_word(variant: str, m_block: int, k: int, word_bits: int = 64) -> int:
    """Blocks addressable when one hash word feeds both the block and the k indices."""
    spare = word_bits - hash_bits_needed(variant, m_block, k)
    return 1 << spare if spare >= 0 else 0
