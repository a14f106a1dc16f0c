"""Arithmetic over GF(2^v) via log/antilog tables, plus GF(2)[x] helpers.

Polynomials over GF(2) are represented as Python ints (bit i = coefficient
of x^i), which makes remainder/multiply cheap for the codeword lengths used
here.
"""

from __future__ import annotations

import numpy as np

# One canonical primitive polynomial per extension degree, so that field
# tables (and therefore codewords) are bit-reproducible everywhere.
PRIMITIVE_POLYS = {
    2: 0x7,        # x^2 + x + 1
    3: 0xB,        # x^3 + x + 1
    4: 0x13,       # x^4 + x + 1
    5: 0x25,       # x^5 + x^2 + 1
    6: 0x43,       # x^6 + x + 1
    7: 0x89,       # x^7 + x^3 + 1
    8: 0x11D,      # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,      # x^9 + x^4 + 1
    10: 0x409,     # x^10 + x^3 + 1
    11: 0x805,     # x^11 + x^2 + 1
    12: 0x1053,    # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,    # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,    # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,    # x^15 + x + 1
    16: 0x1100B,   # x^16 + x^12 + x^3 + x + 1
}


class GfField:
    """GF(2^v) with log/antilog tables over the canonical primitive polynomial.

    ``exp`` is doubled in length so products of two logs index without a
    modulo. Zero has no logarithm; the vectorized helpers mask it explicitly.
    """

    def __init__(self, v: int):
        if v not in PRIMITIVE_POLYS:
            raise ValueError(f"extension degree v={v} outside supported range 2..16")
        self.v = v
        self.order = (1 << v) - 1  # size of the multiplicative group
        self.prim_poly = PRIMITIVE_POLYS[v]

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(1 << v, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & (1 << v):
                x ^= self.prim_poly
        if x != 1:
            raise ValueError(f"0x{self.prim_poly:x} is not primitive for v={v}")
        exp[self.order:] = exp[: self.order]
        self.exp = exp
        self.log = log  # log[0] stays 0 and must never be used unmasked

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^v)")
        return int(self.exp[self.order - self.log[a]])

    def pow_alpha(self, e: int) -> int:
        """alpha^e for any integer exponent."""
        return int(self.exp[e % self.order])

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Element-wise product of arrays of field elements (0 handled)."""
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_vec(self, a: np.ndarray) -> np.ndarray:
        """Element-wise inverse; entries equal to 0 are left as 0."""
        out = self.exp[self.order - self.log[a]]
        return np.where(a == 0, 0, out)

    def minimal_polynomial(self, elem_log: int) -> int:
        """Minimal polynomial over GF(2) of alpha^elem_log, as a GF(2)[x] int.

        Product of (x - alpha^(elem_log * 2^j)) over the cyclotomic coset;
        the result always has coefficients in {0, 1}.
        """
        coset = cyclotomic_coset(elem_log, self.order)
        # poly coefficients live in GF(2^v) during the product
        poly = [1]
        for e in coset:
            root = self.pow_alpha(e)
            nxt = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] ^= c
                nxt[i] ^= self.mul(c, root)
            poly = nxt
        out = 0
        for i, c in enumerate(poly):
            if c not in (0, 1):
                raise ArithmeticError("minimal polynomial has non-binary coefficient")
            out |= c << i
        return out


def cyclotomic_coset(e: int, order: int) -> list[int]:
    """Cyclotomic coset of e under doubling modulo ``order``."""
    coset = []
    cur = e % order
    while cur not in coset:
        coset.append(cur)
        cur = (2 * cur) % order
    return coset


def poly_degree(p: int) -> int:
    """Degree of a GF(2)[x] int polynomial; -1 for the zero polynomial."""
    return p.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    """Remainder of a GF(2)[x] division."""
    dm = poly_degree(m)
    da = poly_degree(a)
    while da >= dm:
        a ^= m << (da - dm)
        da = poly_degree(a)
    return a


def poly_mul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] ints."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_lcm(polys: list[int]) -> int:
    """Least common multiple of GF(2)[x] polynomials (product over distinct)."""
    out = 1
    seen = set()
    for p in polys:
        if p not in seen:
            seen.add(p)
            out = poly_mul(out, p)
    return out


_FIELD_CACHE: dict[int, GfField] = {}


def get_field(v: int) -> GfField:
    """Shared immutable field instance per extension degree."""
    if v not in _FIELD_CACHE:
        _FIELD_CACHE[v] = GfField(v)
    return _FIELD_CACHE[v]
