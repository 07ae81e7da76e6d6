"""PBF1 filter files.

Layout (little-endian):

    offset  size  field
    0       4     magic "PBF1"
    4       1     variant code (standard, partitioned, blocked-standard, blocked-partitioned)
    5       1     scheme code (independent, wide-split, naive-double, safe-double)
    6       2     reserved; fold_factor - 1 for folded standard filters, else 0
    8       4     k
    12      8     m
    20      8     block_bits (0 if unblocked)
    28      8     seed
    36      8     inserted_count
    44      ...   payload, ceil(m/8) bytes, bit i at byte i//8 bit i%8
    end-4   4     CRC32 (zlib polynomial) of every preceding byte
"""
import os
import struct
import zlib
from typing import Union

from .bitvector import bitvector_from_bytes, bitvector_to_bytes, padding_is_clear
from .errors import (
    BadMagicError,
    BloomError,
    ChecksumError,
    FilterFormatError,
    LengthMismatchError,
    UnsupportedVersionError,
)
from .filters import VARIANT_CODES, BloomFilter, FilterParams, make_filter
from .hashing import SCHEME_CODES, HashScheme

MAGIC = b"PBF1"
_FAMILY = MAGIC[:3]
HEADER = struct.Struct("<4sBBHIQQQQ")
CRC = struct.Struct("<I")


def payload_size(m: int) -> int:
    return (m + 7) // 8


def serialize(f: BloomFilter) -> bytes:
    p = f.params
    header = HEADER.pack(
        MAGIC,
        VARIANT_CODES.index(p.variant),
        SCHEME_CODES.index(p.scheme.tag),
        p.fold_factor - 1,
        p.k,
        p.m,
        p.block_bits,
        p.scheme.seed,
        f.inserted_count,
    )
    body = header + bitvector_to_bytes(f.bits)
    return body + CRC.pack(zlib.crc32(body) & 0xFFFFFFFF)


def deserialize(data: bytes) -> BloomFilter:
    data = bytes(data)
    if len(data) < len(MAGIC):
        raise LengthMismatchError(f"file too short for a header: {len(data)} bytes")
    if data[:4] != MAGIC:
        if data[:3] == _FAMILY:
            raise UnsupportedVersionError(f"unsupported format version {data[3:4]!r}")
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < HEADER.size + CRC.size:
        raise LengthMismatchError(f"file too short for a header: {len(data)} bytes")

    _, variant_code, scheme_code, reserved, k, m, block_bits, seed, count = HEADER.unpack_from(data)
    expected = HEADER.size + payload_size(m) + CRC.size
    if len(data) != expected:
        raise LengthMismatchError(f"m={m} needs {expected} bytes, file has {len(data)}")

    body, (stored_crc,) = data[:-CRC.size], CRC.unpack_from(data, len(data) - CRC.size)
    actual_crc = zlib.crc32(body) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(f"CRC32 mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}")

    if variant_code >= len(VARIANT_CODES) or scheme_code >= len(SCHEME_CODES):
        raise FilterFormatError(f"unknown variant/scheme code {variant_code}/{scheme_code}")
    payload = body[HEADER.size:]
    if not padding_is_clear(payload, m):
        raise FilterFormatError("padding bits after bit m-1 are not zero")

    try:
        params = FilterParams(
            m=m,
            k=k,
            variant=VARIANT_CODES[variant_code],
            block_bits=block_bits,
            scheme=HashScheme(SCHEME_CODES[scheme_code], seed),
            fold_factor=reserved + 1,
        )
    except BloomError as exc:
        raise FilterFormatError(f"header describes an invalid filter: {exc}") from exc
    return make_filter(params, bitvector_from_bytes(payload, m), count)


def save_filter(f: BloomFilter, path: Union[str, os.PathLike]) -> None:
    path = os.fspath(path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(serialize(f))


def load_filter(path: Union[str, os.PathLike]) -> BloomFilter:
    with open(os.fspath(path), "rb") as fh:
        return deserialize(fh.read())
