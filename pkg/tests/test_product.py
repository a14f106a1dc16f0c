"""Product-code encoding and the two iterative decoders."""

import numpy as np
import pytest

from paspc.bch import bch_encode, bdd_decode, build_bch
from paspc.product import (
    DecoderConfig,
    ProductCode,
    ibdd_cr_decode,
    ibdd_decode,
    is_pc_codeword,
    pc_encode,
)

rng = np.random.default_rng(0x9C)

# all three rows (and columns) of this 3x3 error grid are the same weight-3
# word, chosen so the (63,51) component decoder fails on it; the grid is the
# classical minimal stopping set for t=2
STALL_POSITIONS = (0, 1, 2)


@pytest.fixture(scope="module")
def toy_pc():
    return ProductCode(build_bch(4, 1, 0))


@pytest.fixture(scope="module")
def pc63():
    return ProductCode(build_bch(6, 2, 0))


def test_rate_identity(toy_pc):
    assert toy_pc.rate == pytest.approx((11 / 15) ** 2)


def test_encode_zero_and_linearity(toy_pc):
    zero = pc_encode(toy_pc, np.zeros((11, 11), dtype=np.uint8))
    assert not zero.any()
    a = rng.integers(0, 2, (11, 11)).astype(np.uint8)
    b = rng.integers(0, 2, (11, 11)).astype(np.uint8)
    assert np.array_equal(pc_encode(toy_pc, a) ^ pc_encode(toy_pc, b), pc_encode(toy_pc, a ^ b))


def test_encode_validity_and_commutativity(toy_pc):
    info = rng.integers(0, 2, (11, 11)).astype(np.uint8)
    arr = pc_encode(toy_pc, info)
    assert np.array_equal(arr[:11, :11], info)
    assert is_pc_codeword(toy_pc, arr)
    # encoding columns first is encoding the transpose rows-first
    assert np.array_equal(pc_encode(toy_pc, info.T).T, arr)


def test_encode_single_pivot_outer_product(toy_pc):
    code = toy_pc.component
    e0 = np.zeros(code.k_c, dtype=np.uint8)
    e0[0] = 1
    row = bch_encode(code, e0)
    info = np.zeros((code.k_c, code.k_c), dtype=np.uint8)
    info[0, 0] = 1
    assert np.array_equal(pc_encode(toy_pc, info), np.outer(row, row))


def test_encode_dimension_mismatch(toy_pc):
    with pytest.raises(ValueError):
        pc_encode(toy_pc, np.zeros((10, 11), dtype=np.uint8))


def test_ibdd_error_free_converges_first_half(toy_pc):
    info = rng.integers(0, 2, (11, 11)).astype(np.uint8)
    arr = pc_encode(toy_pc, info)
    rep = ibdd_decode(toy_pc, arr, DecoderConfig("ibdd", 8))
    assert rep.converged
    assert rep.half_iterations_used == 1
    assert rep.iterations_used == 1
    assert np.array_equal(rep.info, info)


def test_ibdd_single_flip_all_positions(toy_pc):
    info = rng.integers(0, 2, (11, 11)).astype(np.uint8)
    arr = pc_encode(toy_pc, info)
    cfg = DecoderConfig("ibdd", 8)
    for flat in range(arr.size):
        noisy = arr.copy()
        noisy.flat[flat] ^= 1
        rep = ibdd_decode(toy_pc, noisy, cfg)
        assert rep.converged and rep.iterations_used == 1
        assert np.array_equal(rep.info, info), f"flip at {divmod(flat, 15)}"


def test_ibdd_deterministic(pc63):
    info = rng.integers(0, 2, (51, 51)).astype(np.uint8)
    arr = pc_encode(pc63, info)
    noise = (rng.random(arr.shape) < 0.03).astype(np.uint8)
    cfg = DecoderConfig("ibdd", 8)
    r1 = ibdd_decode(pc63, arr ^ noise, cfg)
    r2 = ibdd_decode(pc63, arr ^ noise, cfg)
    assert np.array_equal(r1.info, r2.info)
    assert r1.converged == r2.converged
    assert r1.half_iterations_used == r2.half_iterations_used


def test_converged_output_is_codeword(pc63):
    cfg = DecoderConfig("ibdd", 8)
    hits = 0
    for _ in range(20):
        info = rng.integers(0, 2, (51, 51)).astype(np.uint8)
        arr = pc_encode(pc63, info)
        noise = (rng.random(arr.shape) < 0.02).astype(np.uint8)
        rep = ibdd_decode(pc63, arr ^ noise, cfg)
        if rep.converged:
            hits += 1
            assert is_pc_codeword(pc63, pc_encode(pc63, rep.info))
    assert hits > 0


def _stall_arrays(pc):
    """Codeword plus the minimal stopping-set error pattern."""
    code = pc.component
    word = np.zeros(code.n_c, dtype=np.uint8)
    word[list(STALL_POSITIONS)] = 1
    assert not bdd_decode(code, word).success, "stall rows must fail component BDD"
    info = rng.integers(0, 2, (pc.k_c, pc.k_c)).astype(np.uint8)
    arr = pc_encode(pc, info)
    err = np.zeros_like(arr)
    err[np.ix_(STALL_POSITIONS, STALL_POSITIONS)] = 1
    return info, arr, err


def test_ibdd_minimal_stall_pattern_survives(pc63):
    info, arr, err = _stall_arrays(pc63)
    rep = ibdd_decode(pc63, arr ^ err, DecoderConfig("ibdd", 8))
    assert not rep.converged
    # the pattern sits in the information block and survives verbatim
    assert np.array_equal(rep.info ^ info, err[:51, :51])


def test_ibdd_cr_requires_weights():
    with pytest.raises(ValueError):
        DecoderConfig("ibdd_cr", 8)
    with pytest.raises(ValueError):
        DecoderConfig("ibdd_cr", 8, weights=(1.0,) * 15)
    with pytest.raises(ValueError):
        DecoderConfig("nope", 8)


def test_ibdd_cr_all_fail_resets_to_channel_llr_signs(pc63):
    """With every component failing, psi = L, so messages stay at sign(L)."""
    info, arr, err = _stall_arrays(pc63)
    hd = arr ^ err
    llr = (1.0 - 2.0 * arr.astype(float)) * 10.0
    llr[err == 1] = (1.0 - 2.0 * hd[err == 1].astype(float)) * 0.5  # weak, match hd
    cfg = DecoderConfig("ibdd_cr", 8, weights=(3.0,) * 16)
    rep = ibdd_cr_decode(pc63, hd, llr, cfg)
    assert not rep.converged
    assert np.array_equal(rep.info, (llr < 0).astype(np.uint8)[:51, :51])


def test_ibdd_cr_channel_dominance(pc63):
    """|L| > w with error-free hard decisions pins the output to the channel."""
    info = rng.integers(0, 2, (51, 51)).astype(np.uint8)
    arr = pc_encode(pc63, info)
    w = 3.0
    llr = (1.0 - 2.0 * arr.astype(float)) * (w + 1.0)
    rep = ibdd_cr_decode(pc63, arr, llr, DecoderConfig("ibdd_cr", 8, weights=(w,) * 16))
    assert rep.converged
    assert np.array_equal(rep.info, info)


def test_ibdd_cr_breaks_stall_with_one_ambiguous_bit(pc63):
    """Channel-reliability combining recovers the stopping set.

    Exact LLR assignment: every correct bit gets a strong correct-sign LLR
    (|L| = 10 > w), the nine erroneous bits get weak LLRs (|L| = 0.5 < w)
    agreeing with the wrong hard decision, except the corner bit whose weak
    LLR lies on the correct side (a hard-detector/LLR tie-break mismatch).
    The corner row then starts with t errors, its component decode succeeds,
    the weak wrong bits accept the correction (w > |L|), and the column pass
    clears the rest. Plain iBDD on the same hard decisions stalls forever.
    """
    info, arr, err = _stall_arrays(pc63)
    hd = arr ^ err
    w = 3.0
    llr = (1.0 - 2.0 * arr.astype(float)) * 10.0
    llr[err == 1] = (1.0 - 2.0 * hd[err == 1].astype(float)) * 0.5
    r0, c0 = STALL_POSITIONS[0], STALL_POSITIONS[0]
    llr[r0, c0] = (1.0 - 2.0 * arr[r0, c0].astype(float)) * 0.5

    rep_cr = ibdd_cr_decode(pc63, hd, llr, DecoderConfig("ibdd_cr", 8, weights=(w,) * 16))
    assert rep_cr.converged
    assert np.array_equal(rep_cr.info, info)

    rep_ibdd = ibdd_decode(pc63, hd, DecoderConfig("ibdd", 8))
    assert not rep_ibdd.converged


def test_ibdd_cr_large_weights_reproduce_ibdd(pc63):
    """Above the LLR clip the channel can never override a verdict, so the
    message sequences coincide with iBDD whenever no component fails."""
    info = rng.integers(0, 2, (51, 51)).astype(np.uint8)
    arr = pc_encode(pc63, info)
    noise = (rng.random(arr.shape) < 0.015).astype(np.uint8)
    hd = arr ^ noise
    llr = (1.0 - 2.0 * hd.astype(float)) * rng.uniform(0.2, 30.0, arr.shape)
    cfg_cr = DecoderConfig("ibdd_cr", 8, weights=(1e6,) * 16)
    cfg_hd = DecoderConfig("ibdd", 8)
    rep_cr = ibdd_cr_decode(pc63, hd, llr, cfg_cr)
    rep_hd = ibdd_decode(pc63, hd, cfg_hd)
    assert np.array_equal(rep_cr.info, rep_hd.info)
    assert rep_cr.converged == rep_hd.converged


def test_ibdd_cr_rejects_nonfinite_llrs(pc63):
    llr = np.zeros((63, 63))
    llr[0, 0] = np.inf
    with pytest.raises(ValueError):
        ibdd_cr_decode(pc63, np.zeros((63, 63), np.uint8), llr,
                       DecoderConfig("ibdd_cr", 8, weights=(3.0,) * 16))
