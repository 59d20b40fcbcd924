"""MSB-first bit packing with order-0 exp-Golomb codes."""

from __future__ import annotations

from .errors import TruncatedStream

# A ue() code longer than this is garbage, not data.
_MAX_UE_ZEROS = 32


def exp_golomb_bits(value: int) -> str:
    """Order-0 exp-Golomb code of a nonnegative integer, as a bit string."""
    if value < 0:
        raise ValueError("exp-Golomb codes nonnegative integers only")
    code = bin(value + 1)[2:]
    return "0" * (len(code) - 1) + code


def signed_exp_golomb_bits(value: int) -> str:
    """Signed variant via the 0,1,-1,2,-2,... to 0,1,2,3,4,... mapping."""
    return exp_golomb_bits(signed_to_unsigned(value))


def signed_to_unsigned(value: int) -> int:
    return 2 * value - 1 if value > 0 else -2 * value


def unsigned_to_signed(value: int) -> int:
    return (value + 1) // 2 if value % 2 else -(value // 2)


class BitWriter:
    """Accumulates bits MSB-first; bit_count excludes alignment padding."""

    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._nacc = 0
        self.bit_count = 0
        self.padding_bits = 0

    def write_bit(self, bit: int) -> None:
        self._acc = (self._acc << 1) | (1 if bit else 0)
        self._nacc += 1
        self.bit_count += 1
        if self._nacc == 8:
            self._bytes.append(self._acc)
            self._acc = 0
            self._nacc = 0

    def write_bits(self, value: int, count: int) -> None:
        for shift in range(count - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def write_ue(self, value: int) -> None:
        code = value + 1
        length = code.bit_length()
        self.write_bits(0, length - 1)
        self.write_bits(code, length)

    def write_se(self, value: int) -> None:
        self.write_ue(signed_to_unsigned(value))

    def write_bytes(self, data: bytes) -> None:
        if self._nacc != 0:
            raise ValueError("byte writes require byte alignment")
        self._bytes.extend(data)
        self.bit_count += 8 * len(data)

    def align(self) -> None:
        while self._nacc != 0:
            self._acc <<= 1
            self._nacc += 1
            self.padding_bits += 1
            if self._nacc == 8:
                self._bytes.append(self._acc)
                self._acc = 0
                self._nacc = 0

    def getvalue(self) -> bytes:
        if self._nacc != 0:
            raise ValueError("stream is not byte aligned; call align() first")
        return bytes(self._bytes)


class BitReader:
    """Reads bits MSB-first from a byte string."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0  # bit position

    @property
    def bits_left(self) -> int:
        return 8 * len(self._data) - self._pos

    def read_bit(self) -> int:
        if self._pos >= 8 * len(self._data):
            raise TruncatedStream("bitstream exhausted")
        byte = self._data[self._pos >> 3]
        bit = (byte >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def read_bits(self, count: int) -> int:
        value = 0
        for _ in range(count):
            value = (value << 1) | self.read_bit()
        return value

    def read_ue(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
            if zeros > _MAX_UE_ZEROS:
                raise TruncatedStream("runaway exp-Golomb prefix")
        return (1 << zeros | self.read_bits(zeros)) - 1

    def read_se(self) -> int:
        return unsigned_to_signed(self.read_ue())

    def read_bytes(self, count: int) -> bytes:
        if self._pos & 7:
            raise ValueError("byte reads require byte alignment")
        start = self._pos >> 3
        if start + count > len(self._data):
            raise TruncatedStream(f"wanted {count} bytes, stream ended")
        self._pos += 8 * count
        return self._data[start:start + count]

    def align(self) -> None:
        self._pos = (self._pos + 7) & ~7
