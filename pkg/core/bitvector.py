from bitarray import bitarray

# Bit i lives at byte i // 8, bit i % 8 (LSB first): little-endian bitarray.
ENDIAN = "little"


def new_bitvector(length: int) -> bitarray:
    bits = bitarray(length, endian=ENDIAN)
    bits.setall(0)
    return bits


def bitvector_to_bytes(bits: bitarray) -> bytes:
    """Packed payload, ceil(len/8) bytes, padding bits zero."""
    return bits.tobytes()


def bitvector_from_bytes(payload: bytes, length: int) -> bitarray:
    bits = bitarray(endian=ENDIAN)
    bits.frombytes(payload)
    return bits[:length]


def padding_is_clear(payload: bytes, length: int) -> bool:
    spare = (-length) % 8
    if spare == 0 or not payload:
        return True
    return (payload[-1] >> (8 - spare)) == 0


def popcount(bits: bitarray) -> int:
    return bits.count(1)
