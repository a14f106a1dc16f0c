"""Amplitude shaping: Maxwell-Boltzmann distributions over ASK alphabets,
constant composition distribution matching (CCDM), and the reflected Gray
labeling of amplitudes and signed symbols.

The distribution matcher is realized by exact big-integer unranking of the
lexicographically ordered constant-composition sequences: bit-exact, and
trivially invertible. Amplitudes are always ordered increasing (1, 3, 5, ...)
for Gray coding, composition indexing, and lexicographic comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class CompositionMismatchError(ValueError):
    """Sequence does not realize the codec's amplitude composition."""


class DematchError(ValueError):
    """Sequence is outside the matcher image (rank >= 2^k)."""


@dataclass(frozen=True)
class MbDistribution:
    """Maxwell-Boltzmann PMF over a 2^m-ASK constellation.

    ``delta`` scales the constellation so that the mean transmit power of
    ``delta * X`` equals the target SNR against unit-variance noise; it is
    1.0 until ``scaled_to_snr`` is applied.
    """

    m: int
    lam: float
    symbols: np.ndarray  # signed levels -(2^m-1) .. -1, 1 .. 2^m-1
    pmf: np.ndarray  # symbol probabilities, aligned with ``symbols``
    amplitudes: np.ndarray  # 1, 3, ..., 2^m-1
    amp_pmf: np.ndarray  # amplitude probabilities (twice the symbol ones)
    delta: float = 1.0

    @property
    def mean_power(self) -> float:
        """E[(delta*X)^2]."""
        return float(np.sum(self.pmf * (self.delta * self.symbols) ** 2))

    def scaled_to_snr(self, snr_db: float) -> "MbDistribution":
        """Copy with delta chosen so mean transmit power equals the SNR."""
        snr = 10.0 ** (snr_db / 10.0)
        base = float(np.sum(self.pmf * self.symbols.astype(float) ** 2))
        return MbDistribution(
            self.m, self.lam, self.symbols, self.pmf, self.amplitudes, self.amp_pmf,
            delta=math.sqrt(snr / base),
        )

    def amplitude_entropy(self) -> float:
        """H(A) in bits."""
        p = self.amp_pmf[self.amp_pmf > 0]
        return float(-np.sum(p * np.log2(p)))

    def symbol_entropy(self) -> float:
        """H(X) in bits; equals H(A) + 1 because signs are uniform."""
        p = self.pmf[self.pmf > 0]
        return float(-np.sum(p * np.log2(p)))


def mb_pmf(lam: float, m: int) -> MbDistribution:
    """Maxwell-Boltzmann distribution exp(-lam*x^2), normalized over 2^m-ASK."""
    if lam < 0:
        raise ValueError(f"shaping parameter must be nonnegative, got {lam}")
    if m < 1:
        raise ValueError(f"m={m} must be at least 1")
    amplitudes = np.arange(1, 1 << m, 2, dtype=np.int64)
    symbols = np.concatenate([-amplitudes[::-1], amplitudes])
    # normalize in a shifted exponent for numerical safety at large lam
    w = np.exp(-lam * (symbols.astype(float) ** 2 - 1.0))
    pmf = w / w.sum()
    amp_pmf = 2.0 * pmf[len(amplitudes):]
    return MbDistribution(m, float(lam), symbols, pmf, amplitudes, amp_pmf)


@dataclass(frozen=True)
class AmplitudeComposition:
    """Exact per-amplitude counts for sequences of length n."""

    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")
        if sum(self.counts) != self.n:
            raise ValueError(f"counts sum {sum(self.counts)} != n = {self.n}")


def quantize_composition(dist: MbDistribution, n: int) -> AmplitudeComposition:
    """Best n-type approximation of the amplitude PMF.

    Largest-remainder rounding: start from floor(n * P_A) and hand the
    missing units to the entries with the largest remainders, ties going to
    the smaller amplitude. This minimizes the total variation distance to
    n * P_A among integer compositions of n.
    """
    if n < 1:
        raise ValueError(f"n={n} must be positive")
    target = n * dist.amp_pmf
    base = np.floor(target).astype(np.int64)
    remainder = target - base
    deficit = n - int(base.sum())
    # stable sort keeps the smaller amplitude first among equal remainders
    order = np.argsort(-remainder, kind="stable")
    base[order[:deficit]] += 1
    return AmplitudeComposition(n, tuple(int(c) for c in base))


@lru_cache(maxsize=256)
def _multinomial(counts: tuple[int, ...]) -> int:
    total = sum(counts)
    out = math.factorial(total)
    for c in counts:
        out //= math.factorial(c)
    return out


def ccdm_rate(comp: AmplitudeComposition) -> int:
    """Input length in bits: floor(log2 of the number of sequences), exact."""
    mult = _multinomial(comp.counts)
    return mult.bit_length() - 1


@dataclass(frozen=True)
class CcdmCodec:
    """Fixed-to-fixed matcher for one amplitude composition."""

    composition: AmplitudeComposition
    k: int

    @classmethod
    def for_composition(cls, comp: AmplitudeComposition) -> "CcdmCodec":
        return cls(comp, ccdm_rate(comp))


def _bits_to_int(bits: np.ndarray) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def ccdm_match(codec: CcdmCodec, u: np.ndarray) -> np.ndarray:
    """Map k input bits to the rank-u sequence (lexicographic unranking).

    The bits are read MSB-first as an integer rank; position by position the
    smallest amplitude whose subtree still contains the rank is emitted.
    Every output realizes the composition exactly.
    """
    u = np.asarray(u, dtype=np.uint8)
    if u.shape != (codec.k,):
        raise ValueError(f"input length {u.shape} != ({codec.k},)")
    rank = _bits_to_int(u)
    comp = codec.composition
    counts = list(comp.counts)
    remaining = comp.n
    seqs = _multinomial(comp.counts)  # sequences with the current remainder
    out = np.empty(comp.n, dtype=np.int64)
    for pos in range(comp.n):
        for a_idx, c in enumerate(counts):
            if c == 0:
                continue
            # sequences starting with amplitude a_idx at this position
            sub = seqs * c // remaining
            if rank < sub:
                out[pos] = 2 * a_idx + 1
                counts[a_idx] -= 1
                remaining -= 1
                seqs = sub
                break
            rank -= sub
        else:
            raise AssertionError("rank exhausted the sequence set")
    return out


def ccdm_dematch(codec: CcdmCodec, a: np.ndarray) -> np.ndarray:
    """Invert ``ccdm_match``: recover the k input bits from a sequence.

    Raises ``CompositionMismatchError`` if the sequence does not have the
    codec composition and ``DematchError`` if its lexicographic rank falls
    outside the 2^k matcher image (both can happen after decoding errors).
    """
    a = np.asarray(a, dtype=np.int64)
    comp = codec.composition
    if a.shape != (comp.n,):
        raise CompositionMismatchError(f"sequence length {a.shape} != ({comp.n},)")
    idx = (a - 1) // 2
    if np.any(a < 1) or np.any(a != 2 * idx + 1) or np.any(idx >= len(comp.counts)):
        raise CompositionMismatchError("sequence contains out-of-alphabet values")
    hist = np.bincount(idx, minlength=len(comp.counts))
    if tuple(int(h) for h in hist) != comp.counts:
        raise CompositionMismatchError(
            f"sequence composition {tuple(hist)} != {comp.counts}"
        )
    counts = list(comp.counts)
    remaining = comp.n
    seqs = _multinomial(comp.counts)
    rank = 0
    for pos in range(comp.n):
        chosen = int(idx[pos])
        for a_idx in range(chosen):
            c = counts[a_idx]
            if c:
                rank += seqs * c // remaining
        sub = seqs * counts[chosen] // remaining
        counts[chosen] -= 1
        remaining -= 1
        seqs = sub
    if rank >= (1 << codec.k):
        raise DematchError(f"rank {rank} outside the 2^{codec.k} matcher image")
    return _int_to_bits(rank, codec.k)


def brgc_amplitude_bits(a: int, m: int) -> np.ndarray:
    """(m-1) Gray-code bits of an amplitude, MSB first."""
    if m < 1:
        raise ValueError(f"m={m} must be at least 1")
    if not (1 <= a <= (1 << m) - 1 and a % 2 == 1):
        raise ValueError(f"amplitude {a} not in the 2^{m}-ASK alphabet")
    idx = (a - 1) // 2
    gray = idx ^ (idx >> 1)
    return _int_to_bits(gray, m - 1)


def brgc_label(x: int, m: int) -> np.ndarray:
    """Full m-bit label of a signed symbol: sign bit, then amplitude bits.

    Sign bit 0 for positive symbols; 8-ASK reproduces the usual reflected
    Gray table (1 -> 000, 7 -> 010, -5 -> 111, ...).
    """
    if x == 0 or abs(x) > (1 << m) - 1 or x % 2 == 0:
        raise ValueError(f"symbol {x} not in the 2^{m}-ASK alphabet")
    sign = np.array([0 if x > 0 else 1], dtype=np.uint8)
    if m == 1:
        return sign
    return np.concatenate([sign, brgc_amplitude_bits(abs(x), m)])


def amplitude_bits_table(m: int) -> np.ndarray:
    """(2^(m-1), m-1) Gray bits for amplitudes in increasing order."""
    amps = np.arange(1, 1 << m, 2)
    if m == 1:
        return np.zeros((1, 0), dtype=np.uint8)
    return np.stack([brgc_amplitude_bits(int(a), m) for a in amps])


def amplitude_from_gray(bits: np.ndarray, m: int) -> np.ndarray:
    """Inverse Gray map for an (..., m-1) bit array, back to amplitudes."""
    bits = np.asarray(bits, dtype=np.int64)
    gray = np.zeros(bits.shape[:-1], dtype=np.int64)
    for j in range(m - 1):
        gray = (gray << 1) | bits[..., j]
    idx = gray.copy()
    shift = 1
    while shift < m - 1:
        idx ^= idx >> shift
        shift <<= 1
    return 2 * idx + 1
