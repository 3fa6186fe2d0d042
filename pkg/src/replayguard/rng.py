"""Portable deterministic generator: xorshift64* seeded through splitmix64.

Constants (all 64-bit)::

    splitmix64:  gamma 0x9E3779B97F4A7C15, mix 0xBF58476D1CE4E5B9, 0x94D049BB133111EB
    xorshift64*: x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 0x2545F4914F6CDD1D

Derived draws:

* ``random()``   = ``(next() >> 11) * 2**-53``
* ``randint(a, b)`` = ``a + x % span`` for the first ``x < 2**64 - 2**64 % span``
* ``randbytes(n)`` = big-endian bytes of ``ceil(n/8)`` outputs, truncated to n
"""

from __future__ import annotations

_M64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int = 0):
        self.state = splitmix64(seed & _M64) or 1

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _M64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _M64

    def random(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in ``[a, b]``, both ends inclusive."""
        if a > b:
            raise ValueError(f"empty range [{a}, {b}]")
        span = b - a + 1
        if span == 1:
            return a
        limit = (1 << 64) - (1 << 64) % span
        while True:
            x = self.next()
            if x < limit:
                return a + x % span

    def randbytes(self, n: int) -> bytes:
        out = b"".join(self.next().to_bytes(8, "big") for _ in range((n + 7) // 8))
        return out[:n]
