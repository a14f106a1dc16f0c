"""The amplitude-shaping transmit/receive chain over one product codeword.

One frame carries one product-code array per real dimension: the matcher
output's Gray bits plus the information part of the sign stream fill the
systematic block (spread by a seeded interleaver), the array parities
complete the sign stream, and each symbol transmits one sign bit and m-1
amplitude bits. Quadrature signaling is two independent frames, so rates
are per real dimension here and doubled only at reporting.

Framing identities enforced at construction:

* rate = k_c^2 / n_c^2 = (m - 1 + gamma) / m
* n = n_c^2 / m symbols per frame (must divide exactly)
* gamma * n = k_c^2 - (m - 1) * n information sign bits (must be >= 0)
* parity count n_c^2 - k_c^2 = n * (1 - gamma)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .bch import build_bch
from .product import DecodeReport, DecoderConfig, ProductCode, ibdd_cr_decode, ibdd_decode, pc_encode
from .shaping import (
    CcdmCodec,
    CompositionMismatchError,
    DematchError,
    MbDistribution,
    amplitude_bits_table,
    amplitude_from_gray,
    brgc_label,
    ccdm_dematch,
    ccdm_match,
    quantize_composition,
)

DEFAULT_LLR_CLIP = 40.0


class FeasibilityError(ValueError):
    """Component-code parameters cannot frame an amplitude-shaped stream."""


@dataclass(frozen=True)
class PasParams:
    """Derived framing parameters for one (v, t, s, m) configuration.

    ``k`` (the matcher input length) additionally depends on the amplitude
    distribution; it is filled in once a distribution is bound and left
    ``None`` otherwise.
    """

    v: int
    t: int
    s: int
    m: int
    n_c: int
    k_c: int
    gamma: float
    n: int
    gamma_n: int
    rate: float
    seed: int = 0
    k: int | None = None


def derive_frame_params(v: int, t: int, s: int, m: int, seed: int = 0) -> PasParams:
    """Check feasibility of (v, t, s) with 2^m-ASK and derive the frame layout.

    Raises ``FeasibilityError`` naming the violated condition when the
    symbol count is not an integer or the sign-information share would be
    negative.
    """
    if m < 1:
        raise ValueError(f"m={m} must be at least 1")
    n_c = (1 << v) - 1 - s
    k_c = (1 << v) - v * t - 1 - s
    if k_c < 1:
        raise ValueError(f"(v={v}, t={t}, s={s}) leaves no information bits")
    rate = (k_c / n_c) ** 2
    gamma = m * rate - (m - 1)
    if (n_c * n_c) % m != 0:
        raise FeasibilityError(
            f"n = n_c^2/m = {n_c}^2/{m} is not an integer (s={s})"
        )
    n = (n_c * n_c) // m
    gamma_n = k_c * k_c - (m - 1) * n
    if gamma_n < 0:
        raise FeasibilityError(
            f"gamma*n = {gamma_n} < 0: rate {rate:.4f} below (m-1)/m = {(m - 1) / m:.4f} (s={s})"
        )
    return PasParams(v, t, s, m, n_c, k_c, gamma, n, gamma_n, rate, seed=seed)


def enumerate_feasible(v: int, t: int, m: int) -> list[PasParams]:
    """All feasible shortenings for (v, t) with 2^m-ASK, in increasing s."""
    build_bch(v, t, 0)  # validates v, t and the generator degree once
    out = []
    for s in range((1 << v) - v * t - 1):
        try:
            out.append(derive_frame_params(v, t, s, m))
        except FeasibilityError:
            continue
    return out


@dataclass(frozen=True)
class InterleaverMap:
    """Seeded permutation spreading matcher bits and sign-information bits.

    ``perm`` is a Fisher-Yates shuffle drawn from a PCG64 generator seeded
    with ``seed`` (numpy's ``Generator.permutation``); transmitter and
    receiver agree by sharing the seed. Interleaving places source index
    ``perm[j]`` at interleaved index ``j``.
    """

    seed: int
    perm: np.ndarray
    inverse: np.ndarray

    @classmethod
    def create(cls, length: int, seed: int) -> "InterleaverMap":
        rng = np.random.Generator(np.random.PCG64(seed))
        perm = rng.permutation(length)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(length)
        return cls(seed, perm, inverse)


@dataclass(frozen=True)
class TxFrame:
    """One encoded frame: inputs, shaped symbols, and the code array."""

    u: np.ndarray  # k + gamma*n information bits
    amplitudes: np.ndarray  # n matcher outputs
    signs: np.ndarray  # n values in {+1, -1}
    x: np.ndarray  # n scaled channel symbols delta * a * sign
    array: np.ndarray  # (n_c, n_c) product codeword


@dataclass(frozen=True)
class DemapperOutput:
    """Per-symbol hard bits/LLRs and their product-array layout."""

    hard: np.ndarray  # (n, m) hard bits, level 0 = sign bit
    llr: np.ndarray  # (n, m) LLRs, positive means bit 0
    bit_array: np.ndarray  # (n_c, n_c) hard bits in array coordinates
    llr_array: np.ndarray  # (n_c, n_c) LLRs in array coordinates


@dataclass(frozen=True)
class FrameReport:
    """Receiver-side outcome for one frame."""

    converged: bool
    iterations_used: int
    half_iterations_used: int
    dematch_failed: bool


@lru_cache(maxsize=16)
def _label_tables(m: int) -> tuple[np.ndarray, tuple[tuple[np.ndarray, np.ndarray], ...]]:
    """Labels for the symbol order used by ``MbDistribution`` plus, per bit
    level, the index sets with that bit 0 and 1."""
    amplitudes = np.arange(1, 1 << m, 2, dtype=np.int64)
    symbols = np.concatenate([-amplitudes[::-1], amplitudes])
    labels = np.stack([brgc_label(int(x), m) for x in symbols])  # (2^m, m)
    sets = tuple(
        (np.flatnonzero(labels[:, level] == 0), np.flatnonzero(labels[:, level] == 1))
        for level in range(m)
    )
    return labels, sets


def demap_symbols(
    y: np.ndarray,
    dist: MbDistribution,
    clip: float = DEFAULT_LLR_CLIP,
    rule: str = "bitwise",
) -> tuple[np.ndarray, np.ndarray]:
    """MAP demapping of received samples against a scaled constellation.

    Per symbol and bit level, the LLR is the log-ratio of summed posteriors
    over the label sets with that bit 0 versus 1 (positive means bit 0),
    clipped to ``clip``. Hard decisions follow the LLR signs (ties to bit 0)
    under the default ``bitwise`` rule; ``symbol_map`` instead takes the
    label of the a-posteriori most likely symbol and is provided for
    comparison only.
    """
    y = np.asarray(y, dtype=np.float64)
    m = dist.m
    labels, level_sets = _label_tables(m)
    logp = np.where(dist.pmf > 0, np.log(np.where(dist.pmf > 0, dist.pmf, 1.0)), -np.inf)
    logw = -((y[:, None] - dist.delta * dist.symbols[None, :].astype(float)) ** 2) / 2.0
    logw = logw + logp[None, :]
    llr = np.empty((len(y), m), dtype=np.float64)
    for level in range(m):
        zero_set, one_set = level_sets[level]
        num = logsumexp(logw[:, zero_set], axis=1)
        den = logsumexp(logw[:, one_set], axis=1)
        llr[:, level] = num - den
    llr = np.clip(llr, -clip, clip)
    if rule == "bitwise":
        hard = (llr < 0).astype(np.uint8)
    elif rule == "symbol_map":
        hard = labels[np.argmax(logw, axis=1)].astype(np.uint8)
    else:
        raise ValueError(f"unknown demapping rule {rule!r}")
    return hard, llr


class PasFrameCodec:
    """Bound transmit/receive chain for one parameter set and distribution.

    Precomputes the matcher composition, the interleaver, and the bijection
    between array positions and (symbol, bit level); frames are then encoded
    and decoded without shared mutable state.
    """

    def __init__(
        self,
        params: PasParams,
        pc: ProductCode,
        dist: MbDistribution,
        clip: float = DEFAULT_LLR_CLIP,
    ):
        if pc.n_c != params.n_c or pc.k_c != params.k_c:
            raise ValueError("product code does not match frame parameters")
        if dist.m != params.m:
            raise ValueError(f"distribution is for m={dist.m}, frame needs m={params.m}")
        self.pc = pc
        self.dist = dist
        self.clip = clip
        m, n, k_c, n_c = params.m, params.n, params.k_c, params.n_c
        assert n * m == n_c * n_c

        self.composition = quantize_composition(dist, n)
        self.ccdm = CcdmCodec.for_composition(self.composition)
        self.params = replace(params, k=self.ccdm.k)
        self.u_len = self.ccdm.k + params.gamma_n

        self.interleaver = InterleaverMap.create(k_c * k_c, params.seed)
        self._amp_bits = amplitude_bits_table(m)

        # flat array position of interleaved index j
        rows, cols = np.divmod(np.arange(k_c * k_c, dtype=np.int64), k_c)
        info_flat = rows * n_c + cols
        # flat array position of source (pre-interleaver) index
        source_flat = info_flat[self.interleaver.inverse]
        parity_mask = np.ones((n_c, n_c), dtype=bool)
        parity_mask[:k_c, :k_c] = False
        parity_flat = np.flatnonzero(parity_mask.ravel())

        gamma_n = params.gamma_n
        pos = np.empty((n, m), dtype=np.int64)
        pos[:gamma_n, 0] = source_flat[n * (m - 1) :]
        pos[gamma_n:, 0] = parity_flat
        if m > 1:
            pos[:, 1:] = source_flat[: n * (m - 1)].reshape(n, m - 1)
        self.position_map = pos
        self._parity_flat = parity_flat
        self._source_flat = source_flat

    def encode(self, u: np.ndarray) -> TxFrame:
        """Encode information bits into one shaped frame."""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape != (self.u_len,):
            raise ValueError(f"u length {u.shape} != ({self.u_len},)")
        p = self.params
        u_k = u[: self.ccdm.k]
        u_g = u[self.ccdm.k :]
        amplitudes = ccdm_match(self.ccdm, u_k)
        amp_bits = self._amp_bits[(amplitudes - 1) // 2]  # (n, m-1)
        concat = np.concatenate([amp_bits.ravel(), u_g])
        interleaved = concat[self.interleaver.perm]
        array = pc_encode(self.pc, interleaved.reshape(p.k_c, p.k_c))
        parity = array.ravel()[self._parity_flat]
        sign_bits = np.concatenate([u_g, parity])
        signs = 1 - 2 * sign_bits.astype(np.int64)
        x = self.dist.delta * amplitudes.astype(np.float64) * signs
        return TxFrame(u=u, amplitudes=amplitudes, signs=signs, x=x, array=array)

    def map_demap(self, y: np.ndarray, rule: str = "bitwise") -> DemapperOutput:
        """Demap received samples and scatter them into array coordinates."""
        y = np.asarray(y, dtype=np.float64)
        p = self.params
        if y.shape != (p.n,):
            raise ValueError(f"y length {y.shape} != ({p.n},)")
        hard, llr = demap_symbols(y, self.dist, clip=self.clip, rule=rule)
        bit_array = np.zeros(p.n_c * p.n_c, dtype=np.uint8)
        llr_array = np.zeros(p.n_c * p.n_c, dtype=np.float64)
        bit_array[self.position_map.ravel()] = hard.ravel()
        llr_array[self.position_map.ravel()] = llr.ravel()
        return DemapperOutput(
            hard=hard,
            llr=llr,
            bit_array=bit_array.reshape(p.n_c, p.n_c),
            llr_array=llr_array.reshape(p.n_c, p.n_c),
        )

    def decode(self, y: np.ndarray, cfg: DecoderConfig) -> tuple[np.ndarray, FrameReport]:
        """Demap, decode the product array, de-shape, and rebuild the bits.

        A matcher inversion failure after residual decoding errors flags the
        frame (``dematch_failed``) and zero-fills the matcher part; the frame
        then counts as a block error, never silently disappears.
        """
        return self.decode_demapped(self.map_demap(y), cfg)

    def decode_demapped(
        self, demapped: DemapperOutput, cfg: DecoderConfig
    ) -> tuple[np.ndarray, FrameReport]:
        """Decode starting from an existing demapper output."""
        if cfg.mode == "ibdd":
            report = ibdd_decode(self.pc, demapped.bit_array, cfg)
        else:
            report = ibdd_cr_decode(self.pc, demapped.bit_array, demapped.llr_array, cfg)
        u_hat, dematch_failed = self._deframe(report)
        return u_hat, FrameReport(
            converged=report.converged,
            iterations_used=report.iterations_used,
            half_iterations_used=report.half_iterations_used,
            dematch_failed=dematch_failed,
        )

    def _deframe(self, report: DecodeReport) -> tuple[np.ndarray, bool]:
        p = self.params
        interleaved = report.info.ravel()
        concat = np.empty(p.k_c * p.k_c, dtype=np.uint8)
        concat[self.interleaver.perm] = interleaved
        u_g = concat[p.n * (p.m - 1) :]
        amp_bits = concat[: p.n * (p.m - 1)].reshape(p.n, p.m - 1)
        amplitudes = amplitude_from_gray(amp_bits, p.m)
        try:
            u_k = ccdm_dematch(self.ccdm, amplitudes)
            failed = False
        except (CompositionMismatchError, DematchError):
            u_k = np.zeros(self.ccdm.k, dtype=np.uint8)
            failed = True
        return np.concatenate([u_k, u_g]), failed


def pas_encode(params: PasParams, pc: ProductCode, dist: MbDistribution, u: np.ndarray) -> TxFrame:
    """One-shot frame encoding (builds a codec; reuse ``PasFrameCodec`` in loops)."""
    return PasFrameCodec(params, pc, dist).encode(u)


def pas_decode(
    params: PasParams,
    pc: ProductCode,
    dist: MbDistribution,
    y: np.ndarray,
    cfg: DecoderConfig,
) -> tuple[np.ndarray, FrameReport]:
    """One-shot frame decoding (builds a codec; reuse ``PasFrameCodec`` in loops)."""
    return PasFrameCodec(params, pc, dist).decode(y, cfg)


class UniformCmCodec:
    """Conventional coded modulation baseline: uniform signaling, no shaping.

    The product codeword's n_c^2 bits are spread over n = n_c^2/m symbols by
    a seeded position permutation (so every component codeword sees all bit
    levels); information length is k_c^2 and the spectral efficiency per
    real dimension is m * rate.
    """

    def __init__(
        self,
        params: PasParams,
        pc: ProductCode,
        dist: MbDistribution,
        clip: float = DEFAULT_LLR_CLIP,
    ):
        if dist.lam != 0.0:
            raise ValueError("uniform signaling requires the lam=0 distribution")
        if pc.n_c != params.n_c:
            raise ValueError("product code does not match frame parameters")
        self.pc = pc
        self.dist = dist
        self.clip = clip
        self.params = params
        self.u_len = params.k_c * params.k_c
        rng = np.random.Generator(np.random.PCG64(params.seed))
        self.position_map = rng.permutation(params.n_c * params.n_c).reshape(params.n, params.m)
        self._amp_bits = amplitude_bits_table(params.m)

    def encode(self, u: np.ndarray) -> TxFrame:
        u = np.asarray(u, dtype=np.uint8)
        if u.shape != (self.u_len,):
            raise ValueError(f"u length {u.shape} != ({self.u_len},)")
        p = self.params
        array = pc_encode(self.pc, u.reshape(p.k_c, p.k_c))
        label_bits = array.ravel()[self.position_map]  # (n, m)
        amplitudes = amplitude_from_gray(label_bits[:, 1:], p.m)
        signs = 1 - 2 * label_bits[:, 0].astype(np.int64)
        x = self.dist.delta * amplitudes.astype(np.float64) * signs
        return TxFrame(u=u, amplitudes=amplitudes, signs=signs, x=x, array=array)

    def map_demap(self, y: np.ndarray, rule: str = "bitwise") -> DemapperOutput:
        y = np.asarray(y, dtype=np.float64)
        p = self.params
        if y.shape != (p.n,):
            raise ValueError(f"y length {y.shape} != ({p.n},)")
        hard, llr = demap_symbols(y, self.dist, clip=self.clip, rule=rule)
        bit_array = np.zeros(p.n_c * p.n_c, dtype=np.uint8)
        llr_array = np.zeros(p.n_c * p.n_c, dtype=np.float64)
        bit_array[self.position_map.ravel()] = hard.ravel()
        llr_array[self.position_map.ravel()] = llr.ravel()
        return DemapperOutput(
            hard=hard,
            llr=llr,
            bit_array=bit_array.reshape(p.n_c, p.n_c),
            llr_array=llr_array.reshape(p.n_c, p.n_c),
        )

    def decode(self, y: np.ndarray, cfg: DecoderConfig) -> tuple[np.ndarray, FrameReport]:
        return self.decode_demapped(self.map_demap(y), cfg)

    def decode_demapped(
        self, demapped: DemapperOutput, cfg: DecoderConfig
    ) -> tuple[np.ndarray, FrameReport]:
        if cfg.mode == "ibdd":
            report = ibdd_decode(self.pc, demapped.bit_array, cfg)
        else:
            report = ibdd_cr_decode(self.pc, demapped.bit_array, demapped.llr_array, cfg)
        return report.info.ravel().copy(), FrameReport(
            converged=report.converged,
            iterations_used=report.iterations_used,
            half_iterations_used=report.half_iterations_used,
            dematch_failed=False,
        )


_FRAME_MAGIC = b"PASF"


def write_frame(fp, frame: TxFrame, params: PasParams) -> None:
    """Serialize one frame in the flat little-endian layout.

    Layout: magic ``PASF``, format version u8, then v, t, s, m as u16, the
    interleaver seed as u64, the bit length of u as u64, the symbol count n
    as u64, the u bits packed MSB-first (``numpy.packbits``), and finally
    the n channel symbols x as float64.
    """
    own = isinstance(fp, (str, bytes))
    f = open(fp, "wb") if own else fp
    try:
        p = params
        f.write(_FRAME_MAGIC)
        f.write(struct.pack("<BHHHHQQQ", 1, p.v, p.t, p.s, p.m, p.seed, len(frame.u), len(frame.x)))
        f.write(np.packbits(frame.u).tobytes())
        f.write(frame.x.astype("<f8").tobytes())
    finally:
        if own:
            f.close()


@dataclass(frozen=True)
class FrameRecord:
    """Deserialized frame: header fields plus payloads."""

    v: int
    t: int
    s: int
    m: int
    seed: int
    u: np.ndarray
    x: np.ndarray


def read_frame(fp) -> FrameRecord:
    """Inverse of ``write_frame``."""
    own = isinstance(fp, (str, bytes))
    f = open(fp, "rb") if own else fp
    try:
        if f.read(4) != _FRAME_MAGIC:
            raise ValueError("not a frame file (bad magic)")
        version, v, t, s, m, seed, u_len, n = struct.unpack("<BHHHHQQQ", f.read(33))
        if version != 1:
            raise ValueError(f"unsupported frame format version {version}")
        u = np.unpackbits(
            np.frombuffer(f.read((u_len + 7) // 8), dtype=np.uint8), count=u_len
        )
        x = np.frombuffer(f.read(8 * n), dtype="<f8").astype(np.float64)
        return FrameRecord(v, t, s, m, seed, u, x)
    finally:
        if own:
            f.close()
