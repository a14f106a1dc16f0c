"""Maxwell-Boltzmann PMFs, composition quantization, CCDM, Gray labels."""

import itertools
import math

import numpy as np
import pytest

from paspc.shaping import (
    AmplitudeComposition,
    CcdmCodec,
    CompositionMismatchError,
    DematchError,
    amplitude_bits_table,
    amplitude_from_gray,
    brgc_amplitude_bits,
    brgc_label,
    ccdm_dematch,
    ccdm_match,
    ccdm_rate,
    mb_pmf,
    quantize_composition,
)

rng = np.random.default_rng(0x5A)


def test_mb_pmf_uniform_at_zero():
    d = mb_pmf(0.0, 3)
    assert np.allclose(d.pmf, 1 / 8)
    assert np.allclose(d.amp_pmf, 1 / 4)


def test_mb_pmf_printed_formula():
    d = mb_pmf(0.05, 2)
    z = 2 * (math.exp(-0.05) + math.exp(-0.45))
    assert d.pmf[d.symbols == 1] == pytest.approx(math.exp(-0.05) / z)
    assert d.pmf[d.symbols == -3] == pytest.approx(math.exp(-0.45) / z)


def test_mb_pmf_symmetry_and_amplitude_relation():
    d = mb_pmf(0.13, 4)
    assert d.pmf.sum() == pytest.approx(1.0)
    assert np.allclose(d.pmf, d.pmf[::-1])  # P(x) = P(-x)
    assert np.allclose(d.amp_pmf, 2 * d.pmf[len(d.amplitudes):])


def test_mb_pmf_large_lambda_concentrates():
    d = mb_pmf(60.0, 2)
    inner = d.pmf[np.abs(d.symbols) == 1]
    assert inner.sum() > 1 - 1e-12
    assert inner == pytest.approx([0.5, 0.5])


def test_mb_pmf_monotone_in_lambda():
    for lam1, lam2 in [(0.0, 0.01), (0.01, 0.1), (0.1, 0.5)]:
        d1, d2 = mb_pmf(lam1, 4), mb_pmf(lam2, 4)
        assert d2.pmf[d2.symbols == 1] >= d1.pmf[d1.symbols == 1]
        assert d2.pmf[d2.symbols == 15] <= d1.pmf[d1.symbols == 15]


def test_mb_pmf_rejects_negative_lambda():
    with pytest.raises(ValueError):
        mb_pmf(-0.1, 2)


def test_scaled_to_snr_sets_power():
    d = mb_pmf(0.07, 3).scaled_to_snr(12.0)
    assert d.mean_power == pytest.approx(10 ** 1.2)


def test_quantize_uniform():
    comp = quantize_composition(mb_pmf(0.0, 3), 8)
    assert comp.counts == (2, 2, 2, 2)


def test_quantize_largest_remainder_minimizes_tv():
    d = mb_pmf(0.0, 3)
    object.__setattr__(d, "amp_pmf", np.array([0.7, 0.2, 0.07, 0.03]))
    comp = quantize_composition(d, 10)
    assert sum(comp.counts) == 10 and comp.counts[0] == 7
    target = 10 * d.amp_pmf
    best = min(
        (c for c in itertools.product(range(11), repeat=4) if sum(c) == 10),
        key=lambda c: np.abs(np.array(c) - target).sum(),
    )
    assert np.abs(np.array(comp.counts) - target).sum() == pytest.approx(
        np.abs(np.array(best) - target).sum()
    )


def test_quantize_n1_argmax_ties_to_smaller():
    d = mb_pmf(0.0, 2)  # exact tie between the two amplitudes
    assert quantize_composition(d, 1).counts == (1, 0)
    d2 = mb_pmf(0.3, 2)
    assert quantize_composition(d2, 1).counts == (1, 0)


def test_composition_validation():
    with pytest.raises(ValueError):
        AmplitudeComposition(4, (2, 3))
    with pytest.raises(ValueError):
        AmplitudeComposition(4, (5, -1))


@pytest.mark.parametrize(
    "n,counts,k",
    [(4, (2, 2), 2), (8, (2, 2, 2, 2), 11), (5, (5,), 0), (6, (6, 0), 0)],
)
def test_ccdm_rate_examples(n, counts, k):
    assert ccdm_rate(AmplitudeComposition(n, counts)) == k


def test_ccdm_match_lexicographic_exhaustive():
    codec = CcdmCodec.for_composition(AmplitudeComposition(4, (2, 2)))
    assert codec.k == 2
    all_seqs = sorted(set(itertools.permutations([1, 1, 3, 3])))
    outputs = []
    for val in range(4):
        u = np.array([(val >> 1) & 1, val & 1], dtype=np.uint8)
        seq = ccdm_match(codec, u)
        outputs.append(tuple(int(a) for a in seq))
        assert np.array_equal(ccdm_dematch(codec, seq), u)
    assert outputs == all_seqs[:4]
    assert outputs[0] == (1, 1, 3, 3)


def test_ccdm_single_sequence_composition():
    codec = CcdmCodec.for_composition(AmplitudeComposition(5, (0, 5)))
    assert codec.k == 0
    seq = ccdm_match(codec, np.zeros(0, dtype=np.uint8))
    assert np.array_equal(seq, [3] * 5)


@pytest.mark.parametrize("m,n", [(2, 33), (3, 64), (4, 100)])
def test_ccdm_roundtrip_and_exact_composition(m, n):
    dist = mb_pmf(0.04, m)
    comp = quantize_composition(dist, n)
    codec = CcdmCodec.for_composition(comp)
    for _ in range(40):
        u = rng.integers(0, 2, codec.k).astype(np.uint8)
        seq = ccdm_match(codec, u)
        hist = np.bincount((seq - 1) // 2, minlength=len(comp.counts))
        assert tuple(int(h) for h in hist) == comp.counts
        assert np.array_equal(ccdm_dematch(codec, seq), u)


def test_ccdm_dematch_errors():
    codec = CcdmCodec.for_composition(AmplitudeComposition(4, (2, 2)))
    with pytest.raises(CompositionMismatchError):
        ccdm_dematch(codec, np.array([1, 1, 1, 3]))
    with pytest.raises(CompositionMismatchError):
        ccdm_dematch(codec, np.array([1, 1, 3, 4]))
    with pytest.raises(CompositionMismatchError):
        ccdm_dematch(codec, np.array([1, 1, 3]))
    # ranks 4 and 5 of the 6 sequences fall outside the 2^2 image
    all_seqs = sorted(set(itertools.permutations([1, 1, 3, 3])))
    with pytest.raises(DematchError):
        ccdm_dematch(codec, np.array(all_seqs[5]))


def test_ccdm_rate_type_counting_bound():
    # k >= n*H(counts/n) - |A|*log2(n+1)
    for m, n in [(2, 50), (3, 120), (4, 200)]:
        comp = quantize_composition(mb_pmf(0.08, m), n)
        k = ccdm_rate(comp)
        p = np.array(comp.counts, dtype=float) / n
        h = float(-np.sum(p[p > 0] * np.log2(p[p > 0])))
        assert k >= n * h - len(comp.counts) * math.log2(n + 1)


def test_brgc_labels_8ask_table():
    expected = {
        -7: "110", -5: "111", -3: "101", -1: "100",
        1: "000", 3: "001", 5: "011", 7: "010",
    }
    for x, bits in expected.items():
        assert "".join(map(str, brgc_label(x, 3))) == bits


def test_brgc_bijection_and_gray_property():
    for m in (1, 2, 3, 4):
        symbols = [x for x in range(-(2 ** m) + 1, 2 ** m, 2)]
        labels = {tuple(brgc_label(x, m)) for x in symbols}
        assert len(labels) == 2 ** m
        amps = list(range(1, 2 ** m, 2))
        for a, b in zip(amps, amps[1:]):
            diff = brgc_amplitude_bits(a, m) ^ brgc_amplitude_bits(b, m)
            assert diff.sum() == 1


def test_brgc_rejects_out_of_alphabet():
    with pytest.raises(ValueError):
        brgc_label(0, 3)
    with pytest.raises(ValueError):
        brgc_label(9, 3)
    with pytest.raises(ValueError):
        brgc_amplitude_bits(2, 3)


def test_amplitude_gray_inverse():
    for m in (2, 3, 4):
        table = amplitude_bits_table(m)
        rec = amplitude_from_gray(table, m)
        assert np.array_equal(rec, np.arange(1, 2 ** m, 2))
