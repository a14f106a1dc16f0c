"""Shortened binary BCH component codes: construction, systematic encoding,
and bounded-distance decoding (syndromes, Berlekamp-Massey, Chien search).

Wire format of a codeword: index 0 is the first systematic (information)
bit, the last ``n_c - k_c`` bits are the parity remainder. Internally bit
index ``i`` corresponds to polynomial degree ``n_c - 1 - i``; the shortened
positions are the leading information positions of the parent code (degrees
``n_c`` and above), which are identically zero and never transmitted.

Decoding is implemented as a batch kernel over many words at once (the rows
or columns of a product-code array); the scalar entry point wraps a batch
of one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf import GfField, get_field, poly_degree, poly_lcm, poly_mod


class DegreeMismatchError(ValueError):
    """Generator degree differs from v*t, so the dimension formula is wrong."""


@dataclass(frozen=True)
class BddOutcome:
    """Result of one bounded-distance decode.

    ``word`` is the corrected codeword on success and ``None`` on failure;
    ``flips`` counts changed positions (0 on failure).
    """

    success: bool
    word: np.ndarray | None
    flips: int


class BchCode:
    """A shortened binary BCH code with parameters (v, t, s).

    Immutable after construction; all lookup tables are precomputed so that
    concurrent decodes share them without synchronization.
    """

    def __init__(self, v: int, t: int, s: int, field: GfField, generator: int):
        self.v = v
        self.t = t
        self.s = s
        self.field = field
        self.generator = generator
        self.n_c = (1 << v) - 1 - s
        self.k_c = (1 << v) - v * t - 1 - s
        self._init_tables()

    def _init_tables(self) -> None:
        f = self.field
        n, t = self.n_c, self.t
        order = f.order
        # degree of wire index i is n-1-i
        degs = (self.n_c - 1 - np.arange(n, dtype=np.int64)) % order
        # odd syndromes S_1, S_3, ..., S_{2t-1}; the even ones follow by squaring
        odd = np.arange(1, 2 * t, 2, dtype=np.int64)
        self._synd_pow_odd = f.exp[(odd[:, None] * degs[None, :]) % order].astype(np.int32)
        # Chien evaluation at x = alpha^{-degree}, laid out in wire order
        ks = np.arange(1, t + 1, dtype=np.int64)
        self._chien_pow = f.exp[(-ks[:, None] * degs[None, :]) % order].astype(np.int32)

        # parity rows: remainder of x^d mod g for every info degree d,
        # built incrementally from x^{vt} upward
        vt = self.n_c - self.k_c
        g = self.generator
        rems = np.zeros((self.k_c, vt), dtype=np.uint8)
        r = poly_mod(1 << vt, g)
        for d in range(vt, self.n_c):
            if d >= vt:
                # info wire index for degree d is n-1-d
                i = self.n_c - 1 - d
                rems[i] = [(r >> (vt - 1 - j)) & 1 for j in range(vt)]
            r <<= 1
            if r >> vt:
                r ^= g
        self._parity_rows = rems

    @property
    def parity_matrix(self) -> np.ndarray:
        """(k_c, n_c - k_c) matrix P with parity(u) = u @ P over GF(2)."""
        return self._parity_rows

    def __repr__(self) -> str:
        return f"BchCode(v={self.v}, t={self.t}, s={self.s}, n={self.n_c}, k={self.k_c})"


def build_bch(v: int, t: int, s: int) -> BchCode:
    """Construct the shortened BCH code with the given parameters.

    The generator polynomial is the LCM of the minimal polynomials of
    alpha^1 .. alpha^{2t}. Construction is rejected with
    ``DegreeMismatchError`` when that LCM does not have degree exactly v*t
    (overlapping cyclotomic cosets), because the dimension and rate
    bookkeeping downstream depend on it.
    """
    if not 2 <= v <= 16:
        raise ValueError(f"v={v} outside supported range 2..16")
    if t < 1:
        raise ValueError(f"t={t} must be at least 1")
    field = get_field(v)
    if 2 * t > field.order - 1:
        raise ValueError(f"t={t} too large for field order {field.order}")
    s_max = (1 << v) - v * t - 2
    if not 0 <= s <= s_max:
        raise ValueError(f"s={s} outside [0, {s_max}] for (v={v}, t={t})")

    minpolys = [field.minimal_polynomial(i) for i in range(1, 2 * t + 1)]
    g = poly_lcm(minpolys)
    if poly_degree(g) != v * t:
        raise DegreeMismatchError(
            f"generator degree {poly_degree(g)} != v*t = {v * t} for (v={v}, t={t})"
        )
    return BchCode(v, t, s, field, g)


def bch_encode(code: BchCode, info: np.ndarray) -> np.ndarray:
    """Systematically encode ``info`` (length k_c) into a codeword (length n_c).

    Polynomial-division encoding: the parity tail is the remainder of
    x^{n_c-k_c} * u(x) modulo the generator.
    """
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (code.k_c,):
        raise ValueError(f"info length {info.shape} != ({code.k_c},)")
    vt = code.n_c - code.k_c
    # u(x) with info wire index i at degree k_c-1-i, shifted up by vt
    u_int = 0
    for i in np.flatnonzero(info):
        u_int |= 1 << (code.n_c - 1 - int(i))
    rem = poly_mod(u_int, code.generator)
    word = np.zeros(code.n_c, dtype=np.uint8)
    word[: code.k_c] = info
    for j in range(vt):
        word[code.k_c + j] = (rem >> (vt - 1 - j)) & 1
    return word


def _batch_syndromes(code: BchCode, words: np.ndarray) -> np.ndarray:
    """Syndromes S_1..S_2t for each word; shape (W, 2t) int32."""
    f = code.field
    t = code.t
    masked = np.where(words[:, None, :] != 0, code._synd_pow_odd[None, :, :], 0)
    s_odd = np.bitwise_xor.reduce(masked, axis=2)
    synd = np.zeros((words.shape[0], 2 * t), dtype=np.int32)
    synd[:, 0::2] = s_odd
    for j in range(2, 2 * t + 1, 2):
        half = synd[:, j // 2 - 1]
        sq = f.exp[2 * f.log[half]].astype(np.int32)
        synd[:, j - 1] = np.where(half == 0, 0, sq)
    return synd


def _batch_berlekamp_massey(code: BchCode, synd: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Berlekamp-Massey over a batch of syndrome rows.

    Returns (sigma, L): error-locator coefficients (W, 2t+1) with
    sigma[:, 0] = 1, and the LFSR length per word.
    """
    f = code.field
    two_t = 2 * code.t
    w = synd.shape[0]
    sigma = np.zeros((w, two_t + 1), dtype=np.int32)
    sigma[:, 0] = 1
    # correction polynomial, pre-scaled by the inverse of the discrepancy
    # at the last length change and pre-multiplied by x
    corr = np.zeros((w, two_t + 1), dtype=np.int32)
    corr[:, 1] = 1
    length = np.zeros(w, dtype=np.int32)

    for r in range(two_t):
        d = synd[:, r].copy()
        for i in range(1, min(r, two_t) + 1):
            d ^= f.mul_vec(sigma[:, i], synd[:, r - i]).astype(np.int32)
        nz = d != 0
        grow = nz & (2 * length <= r)

        delta = f.mul_vec(d[:, None], corr).astype(np.int32)
        prev_sigma = sigma.copy()
        sigma = np.where(nz[:, None], sigma ^ delta, sigma)

        d_safe = np.where(nz, d, 1)
        scaled = f.mul_vec(f.inv_vec(d_safe)[:, None], prev_sigma).astype(np.int32)
        shifted_scaled = np.zeros_like(scaled)
        shifted_scaled[:, 1:] = scaled[:, :-1]
        shifted_corr = np.zeros_like(corr)
        shifted_corr[:, 1:] = corr[:, :-1]
        corr = np.where(grow[:, None], shifted_scaled, shifted_corr)
        length = np.where(grow, r + 1 - length, length)
    return sigma, length


def bdd_decode_batch(code: BchCode, words: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bounded-distance decode every row of ``words`` ((W, n_c) in {0,1}).

    Returns (success, corrected, flips). Failed rows keep their input bits
    in ``corrected`` but must be treated as undefined by the caller.
    """
    words = np.ascontiguousarray(words, dtype=np.uint8)
    if words.ndim != 2 or words.shape[1] != code.n_c:
        raise ValueError(f"expected (W, {code.n_c}) array, got {words.shape}")
    w = words.shape[0]
    t = code.t
    f = code.field

    synd = _batch_syndromes(code, words)
    dirty = np.any(synd != 0, axis=1)
    success = ~dirty
    corrected = words.copy()
    flips = np.zeros(w, dtype=np.int32)
    if not np.any(dirty):
        return success, corrected, flips

    idx = np.flatnonzero(dirty)
    sigma, length = _batch_berlekamp_massey(code, synd[idx])
    plausible = (length >= 1) & (length <= t)

    # Chien search over the unshortened wire positions only; roots falling
    # in the shortened prefix simply never show up and fail the count check.
    acc = np.ones((idx.size, code.n_c), dtype=np.int32)
    for k in range(1, t + 1):
        acc ^= f.mul_vec(sigma[:, k][:, None], code._chien_pow[k - 1][None, :]).astype(np.int32)
    roots = acc == 0
    nroots = roots.sum(axis=1, dtype=np.int32)
    ok = plausible & (nroots == length)

    if np.any(ok):
        ok_rows = idx[ok]
        cand = corrected[ok_rows] ^ roots[ok].astype(np.uint8)
        # a located pattern must actually restore a codeword (beyond-t inputs
        # can yield locators whose formal error values are not 1)
        resid = _batch_syndromes(code, cand)
        verified = ~np.any(resid != 0, axis=1)
        good = ok_rows[verified]
        corrected[good] = cand[verified]
        success[good] = True
        flips[good] = nroots[ok][verified]
    return success, corrected, flips


def bdd_decode(code: BchCode, word: np.ndarray) -> BddOutcome:
    """Decode one word; see ``bdd_decode_batch`` for the semantics."""
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (code.n_c,):
        raise ValueError(f"word length {word.shape} != ({code.n_c},)")
    success, corrected, flips = bdd_decode_batch(code, word[None, :])
    if success[0]:
        return BddOutcome(True, corrected[0], int(flips[0]))
    return BddOutcome(False, None, 0)
