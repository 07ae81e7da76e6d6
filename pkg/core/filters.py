"""Standard, partitioned and blocked Bloom filters.

All variants share one bit vector of m bits and differ only in where the k
bits of an element land:

- StandardFilter: anywhere in [0, m); index collisions possible.
- PartitionedFilter: part i owns bits [i*m/k, (i+1)*m/k); always k distinct bits.
- BlockedFilter: an extra hash picks one block of `block_bits`; inside the
  block the layout is standard or partitioned.

Set operations and size reductions are module-level functions that return
new filters and never touch their inputs.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import ClassVar, Dict, Iterable, List, Optional, Tuple, Type

from bitarray import bitarray

from .bitvector import new_bitvector, popcount
from .errors import GeometryError, ParamsMismatchError, VariantError
from .hashing import (
    Element,
    HashScheme,
    IndexLayout,
    IndexSequence,
    check_scheme,
    derive_indices,
    select_block,
)

DEFAULT_BLOCK_BITS = 512
# The file header keeps fold_factor - 1 in a u16.
MAX_FOLD_FACTOR = 1 << 16


class Variant(str, Enum):
    STANDARD = "standard"
    PARTITIONED = "partitioned"
    BLOCKED_STANDARD = "blocked-standard"
    BLOCKED_PARTITIONED = "blocked-partitioned"


# File-format codes, in order.
VARIANT_CODES = (
    Variant.STANDARD,
    Variant.PARTITIONED,
    Variant.BLOCKED_STANDARD,
    Variant.BLOCKED_PARTITIONED,
)


@dataclass(frozen=True)
class FilterParams:
    m: int
    k: int
    variant: Variant = Variant.STANDARD
    block_bits: int = 0
    scheme: HashScheme = field(default_factory=HashScheme)
    # m * fold_factor is the range a folded standard filter still hashes over.
    fold_factor: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        m, k, b = int(self.m), int(self.k), int(self.block_bits)

        if not (m >= k >= 1):
            raise GeometryError(f"need m >= k >= 1, got m={m} k={k}")
        if self.variant is Variant.PARTITIONED and m % k != 0:
            raise GeometryError(f"partitioned filter needs k | m, got m={m} k={k}")

        if self.is_blocked:
            if b < k or m % b != 0:
                raise GeometryError(f"blocked filter needs k <= block_bits and block_bits | m, got m={m} block_bits={b} k={k}")
            if self.variant is Variant.BLOCKED_PARTITIONED and b % k != 0:
                raise GeometryError(f"blocked-partitioned filter needs k | block_bits, got block_bits={b} k={k}")
        elif b != 0:
            raise GeometryError(f"block_bits is only meaningful for blocked variants, got {b}")

        if not 1 <= self.fold_factor <= MAX_FOLD_FACTOR:
            raise GeometryError(f"fold_factor must lie in [1, {MAX_FOLD_FACTOR}], got {self.fold_factor}")
        if self.fold_factor > 1 and self.variant is not Variant.STANDARD:
            raise VariantError("only standard filters can be folded")

        check_scheme(self.scheme, self.layout())

    @property
    def is_blocked(self) -> bool:
        return self.variant in (Variant.BLOCKED_STANDARD, Variant.BLOCKED_PARTITIONED)

    @property
    def is_partitioned(self) -> bool:
        return self.variant in (Variant.PARTITIONED, Variant.BLOCKED_PARTITIONED)

    @property
    def n_blocks(self) -> int:
        return self.m // self.block_bits if self.is_blocked else 1

    @property
    def hash_range(self) -> int:
        return self.m * self.fold_factor

    def layout(self) -> IndexLayout:
        """Layout of the k indices: whole filter, or one block for blocked variants."""
        span = self.block_bits if self.is_blocked else self.hash_range
        if self.is_partitioned:
            return IndexLayout.per_part(span, self.k)
        return IndexLayout.flat(span, self.k)


class BloomFilter:
    variants: ClassVar[Tuple[Variant, ...]]

    def __init__(
        self,
        params: FilterParams,
        bits: Optional[bitarray] = None,
        inserted_count: int = 0,
    ) -> None:
        if params.variant not in self.variants:
            raise VariantError(f"{type(self).__name__} cannot hold a {params.variant.value} filter")
        if bits is None:
            bits = new_bitvector(params.m)
        elif len(bits) != params.m:
            raise GeometryError(f"bit vector has {len(bits)} bits, params say m={params.m}")
        self.params = params
        self.bits = bits
        self.inserted_count = int(inserted_count)
        self._layout = params.layout()

    # --- addressing ------------------------------------------------------

    def index_sequence(self, element: Element) -> IndexSequence:
        return derive_indices(self.params.scheme, element, self._layout)

    def positions(self, element: Element) -> Tuple[int, ...]:
        return self.index_sequence(element).positions()

    # --- membership ------------------------------------------------------

    def insert(self, element: Element) -> "BloomFilter":
        bits = self.bits
        for p in self.positions(element):
            bits[p] = 1
        self.inserted_count += 1
        return self

    def insert_many(self, elements: Iterable[Element]) -> "BloomFilter":
        for e in elements:
            self.insert(e)
        return self

    def query(self, element: Element) -> bool:
        bits = self.bits
        return all(bits[p] for p in self.positions(element))

    def __contains__(self, element: Element) -> bool:
        return self.query(element)

    # --- bookkeeping -----------------------------------------------------

    @property
    def popcount(self) -> int:
        return popcount(self.bits)

    def clear(self) -> None:
        self.bits.setall(0)
        self.inserted_count = 0

    def copy(self) -> "BloomFilter":
        return type(self)(self.params, self.bits.copy(), self.inserted_count)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.params == other.params
            and self.inserted_count == other.inserted_count
            and self.bits == other.bits
        )

    def __repr__(self) -> str:
        p = self.params
        return (
            f"{type(self).__name__}(m={p.m}, k={p.k}, scheme={p.scheme.tag.value}, "
            f"seed={p.scheme.seed}, popcount={self.popcount}, inserted={self.inserted_count})"
        )


class StandardFilter(BloomFilter):
    variants = (Variant.STANDARD,)

    def positions(self, element: Element) -> Tuple[int, ...]:
        pos = self.index_sequence(element).positions()
        if self.params.fold_factor > 1:
            m = self.params.m
            return tuple(p % m for p in pos)
        return pos


class PartitionedFilter(BloomFilter):
    variants = (Variant.PARTITIONED,)

    @property
    def part_bits(self) -> int:
        return self.params.m // self.params.k

    def part(self, i: int) -> bitarray:
        pb = self.part_bits
        return self.bits[i * pb:(i + 1) * pb]


class BlockedFilter(BloomFilter):
    variants = (Variant.BLOCKED_STANDARD, Variant.BLOCKED_PARTITIONED)

    def block_of(self, element: Element) -> int:
        return select_block(self.params.scheme, element, self.params.n_blocks)

    def positions(self, element: Element) -> Tuple[int, ...]:
        base = self.block_of(element) * self.params.block_bits
        return tuple(base + p for p in self.index_sequence(element).positions())

    def block(self, b: int) -> bitarray:
        bb = self.params.block_bits
        return self.bits[b * bb:(b + 1) * bb]


_FILTER_CLASSES: Dict[Variant, Type[BloomFilter]] = {
    Variant.STANDARD: StandardFilter,
    Variant.PARTITIONED: PartitionedFilter,
    Variant.BLOCKED_STANDARD: BlockedFilter,
    Variant.BLOCKED_PARTITIONED: BlockedFilter,
}


def make_filter(params: FilterParams, bits: Optional[bitarray] = None, inserted_count: int = 0) -> BloomFilter:
    return _FILTER_CLASSES[params.variant](params, bits, inserted_count)


# ----------------------------------------------------------------------
# Set operations
# ----------------------------------------------------------------------

def _check_compatible(a: BloomFilter, b: BloomFilter) -> None:
    if a.params == b.params:
        return
    if a.params.scheme.seed != b.params.scheme.seed:
        raise ParamsMismatchError(
            f"filters use different seeds ({a.params.scheme.seed} vs {b.params.scheme.seed})"
        )
    raise ParamsMismatchError(f"filter parameters differ: {a.params} vs {b.params}")


def union(a: BloomFilter, b: BloomFilter) -> BloomFilter:
    """Bitwise OR; exactly the filter of the union of the two sets."""
    _check_compatible(a, b)
    return make_filter(a.params, a.bits | b.bits, a.inserted_count + b.inserted_count)


def intersect(a: BloomFilter, b: BloomFilter) -> BloomFilter:
    """Bitwise AND; a superset (bitwise) of the filter of the intersection."""
    _check_compatible(a, b)
    return make_filter(a.params, a.bits & b.bits, min(a.inserted_count, b.inserted_count))


def _has_empty_part(bits: bitarray, offset: int, span: int, k: int) -> bool:
    pb = span // k
    return any(not bits[offset + i * pb:offset + (i + 1) * pb].any() for i in range(k))


def provably_disjoint(a: BloomFilter, b: BloomFilter) -> bool:
    """True only when the underlying sets cannot share an element.

    Standard-style filters need an all-zero intersection. Partitioned filters
    need one empty part; blocked-partitioned ones one empty part per block.
    """
    _check_compatible(a, b)
    inter = a.bits & b.bits
    p = a.params
    if p.variant is Variant.PARTITIONED:
        return _has_empty_part(inter, 0, p.m, p.k)
    if p.variant is Variant.BLOCKED_PARTITIONED:
        bb = p.block_bits
        return all(_has_empty_part(inter, blk * bb, bb, p.k) for blk in range(p.n_blocks))
    return not inter.any()


# ----------------------------------------------------------------------
# Size reduction
# ----------------------------------------------------------------------

def fold_standard(f: BloomFilter, m_prime: int) -> StandardFilter:
    """Move bit i to i mod m'; the folded filter keeps hashing over the old range."""
    p = f.params
    if p.variant is not Variant.STANDARD:
        raise VariantError(f"fold needs a standard filter, got {p.variant.value}")
    if m_prime < 1 or p.m % m_prime != 0:
        raise GeometryError(f"fold target m'={m_prime} must divide m={p.m}")

    new_params = replace(p, m=m_prime, fold_factor=p.fold_factor * (p.m // m_prime))
    folded = new_bitvector(m_prime)
    for j in range(p.m // m_prime):
        folded |= f.bits[j * m_prime:(j + 1) * m_prime]
    return StandardFilter(new_params, folded, f.inserted_count)


def truncate_parts(f: BloomFilter, k_prime: int) -> PartitionedFilter:
    """Keep the first k' parts verbatim as a smaller partitioned filter."""
    p = f.params
    if p.variant is not Variant.PARTITIONED:
        raise VariantError(f"truncate needs a partitioned filter, got {p.variant.value}")
    if not 1 <= k_prime <= p.k:
        raise GeometryError(f"k'={k_prime} must lie in [1, {p.k}]")
    m_new = (p.m // p.k) * k_prime
    new_params = replace(p, m=m_new, k=k_prime)
    return PartitionedFilter(new_params, f.bits[:m_new], f.inserted_count)


# ----------------------------------------------------------------------
# Fill
# ----------------------------------------------------------------------

def fill_ratio(f: BloomFilter) -> float:
    return f.popcount / f.params.m


def per_part_fill(f: BloomFilter) -> List[float]:
    if f.params.variant is not Variant.PARTITIONED:
        raise VariantError(f"per-part fill needs a partitioned filter, got {f.params.variant.value}")
    pb = f.params.m // f.params.k
    return [popcount(f.bits[i * pb:(i + 1) * pb]) / pb for i in range(f.params.k)]
