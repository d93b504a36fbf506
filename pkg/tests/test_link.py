import itertools

import numpy as np
import pytest

from cpafdm.channel import ChannelScenarioConfig, PathParams, build_channel, sample_channel
from cpafdm.link import (Constellation, LinkError, demap_symbols, demodulate, direct_effective_channel,
                         effective_channel, hard_decision, map_bits, ml_detect, mmse_equalize, modulate,
                         receive)
from cpafdm.transforms import ChirpProfile, PermutationKey, daft, default_c1, dft_matrix, rank_to_perm


@pytest.fixture
def prof():
    return ChirpProfile(16, default_c1(16))


class TestConstellation:
    def test_qpsk_zero_label(self):
        q = Constellation.from_name("qpsk")
        np.testing.assert_allclose(map_bits(np.array([0, 0]), q), [(1 + 1j) / np.sqrt(2)])

    @pytest.mark.parametrize("name", ["bpsk", "qpsk", "16qam", "64qam"])
    def test_unit_energy_and_round_trip(self, name, rng):
        c = Constellation.from_name(name)
        assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0)
        bits = rng.integers(0, 2, size=(3, c.bits_per_symbol * 20))
        np.testing.assert_array_equal(demap_symbols(map_bits(bits, c), c), bits)

    @pytest.mark.parametrize("name", ["qpsk", "16qam", "64qam"])
    def test_gray_neighbours(self, name):
        c = Constellation.from_name(name)
        d = np.abs(c.points[:, None] - c.points[None, :])
        dmin = np.min(d[d > 0])
        for a, b in zip(*np.nonzero(np.isclose(d, dmin))):
            assert bin(a ^ b).count("1") == 1

    def test_small_perturbation_demaps(self, rng):
        c = Constellation.from_name("4qam")
        dmin = np.sqrt(2)
        for label, pt in enumerate(c.points):
            angle = rng.uniform(0, 2 * np.pi)
            assert hard_decision(pt + 0.49 * dmin / 2 * np.exp(1j * angle), c) == label

    def test_bad_inputs(self):
        with pytest.raises(LinkError):
            Constellation.from_name("8psk")
        with pytest.raises(LinkError):
            map_bits(np.zeros(3, int), Constellation.from_name("qpsk"))


class TestModulation:
    def test_ofdm_degenerate(self):
        p = ChirpProfile.__new__(ChirpProfile)
        for k, v in (("N", 8), ("c1", 0.0), ("c2", 0.0)):
            object.__setattr__(p, k, v)
        x = np.arange(8) + 1j
        np.testing.assert_allclose(modulate(x, p, PermutationKey.identity(8)),
                                   dft_matrix(8).conj().T @ x, atol=1e-12)

    def test_norm_preserved(self, prof, rng):
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        key = PermutationKey.random(16, rng)
        assert np.linalg.norm(modulate(x, prof, key)) == pytest.approx(np.linalg.norm(x))
        assert np.linalg.norm(demodulate(x, prof, key)) == pytest.approx(np.linalg.norm(x))

    def test_distinct_keys_distinct_waveforms(self, prof, rng):
        x = map_bits(rng.integers(0, 2, 32), Constellation.from_name("qpsk"))
        s0 = modulate(x, prof, rank_to_perm(0, 16))
        s1 = modulate(x, prof, rank_to_perm(1, 16))
        assert np.linalg.norm(s0 - s1) > 1e-6


class TestReceive:
    def test_noiseless(self, prof, rng):
        ch = build_channel([PathParams(0.9, 1, 1.0), PathParams(0.2j, 3, -1.0)], 16, prof.c1)
        s = rng.standard_normal(16) + 0j
        np.testing.assert_allclose(receive(s, ch, 0.0), ch.matrix @ s)
        np.testing.assert_array_equal(receive(s, np.eye(16), 0.0), s)

    def test_noise_power(self, rng):
        w = receive(np.zeros((1000, 100)), np.eye(100), 0.3, rng)
        assert np.mean(np.abs(w) ** 2) == pytest.approx(0.3, rel=0.02)

    def test_needs_rng(self):
        with pytest.raises(LinkError):
            receive(np.ones(4), np.eye(4), 0.1)


class TestDemodulation:
    def test_matched_identity(self, prof, rng):
        key = PermutationKey.random(16, rng)
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        np.testing.assert_allclose(demodulate(modulate(x, prof, key), prof, key), x, atol=1e-12)

    def test_mismatched_is_diagonal_phase(self, prof, rng):
        k, k2 = PermutationKey.random(16, rng), PermutationKey.random(16, rng)
        x = np.arange(1, 17) * (1 + 0.5j)
        y = demodulate(modulate(x, prof, k), prof, k2)
        op = daft(prof, k2).matrix @ daft(prof, k, "inverse").matrix
        np.testing.assert_allclose(y, op @ x, atol=1e-11)
        assert not np.allclose(y, x)
        np.testing.assert_allclose(np.abs(y), np.abs(x), atol=1e-11)


class TestEffectiveChannel:
    def test_identity_channel(self, prof, rng):
        for key in (PermutationKey.identity(16), PermutationKey.random(16, rng)):
            np.testing.assert_allclose(effective_channel(np.eye(16), prof, key).matrix, np.eye(16), atol=1e-12)

    def test_equals_direct_product(self, prof, rng):
        ch, _ = sample_channel(ChannelScenarioConfig(N=16), rng)
        key = PermutationKey.random(16, rng)
        np.testing.assert_allclose(effective_channel(ch, prof, key).matrix,
                                   direct_effective_channel(ch, prof, key), atol=1e-11)


def ml_oracle(y, G, points):
    best, arg = np.inf, None
    for cand in itertools.product(points, repeat=G.shape[1]):
        m = np.sum(np.abs(y - G @ np.array(cand)) ** 2)
        if m < best:
            best, arg = m, np.array(cand)
    return arg


class TestMl:
    def test_noiseless_recovers(self, rng):
        prof = ChirpProfile(4, default_c1(4))
        q = Constellation.from_name("qpsk")
        key = PermutationKey.random(4, rng)
        ch = build_channel([PathParams(1.0, 0, 0), PathParams(0.4j, 1, 1.0)], 4, prof.c1)
        G = effective_channel(ch, prof, key)
        x = q.points[rng.integers(0, 4, 4)]
        np.testing.assert_allclose(ml_detect(G.matrix @ x, G, q), x)

    def test_matches_oracle_n2_bpsk(self, rng):
        b = Constellation.bpsk()
        for _ in range(200):
            G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            x = b.points[rng.integers(0, 2, 2)]
            y = G @ x + 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            np.testing.assert_array_equal(ml_detect(y, G, b, chunk=3), ml_oracle(y, G, b.points))

    def test_qpsk_high_snr(self, rng):
        prof = ChirpProfile(4, default_c1(4))
        q = Constellation.from_name("qpsk")
        errors = 0
        for _ in range(1000):
            key = PermutationKey.random(4, rng)
            ch = build_channel([PathParams(1.0, 0, 0), PathParams(0.3, 1, 1.0)], 4, prof.c1)
            G = effective_channel(ch, prof, key)
            x = q.points[rng.integers(0, 4, 4)]
            y = G.matrix @ x + np.sqrt(1e-3 / 2) * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            errors += np.sum(ml_detect(y, G, q) != x)
        assert errors / 4000 < 0.01

    def test_refuses_huge_search(self):
        with pytest.raises(LinkError, match="mmse"):
            ml_detect(np.zeros(16), np.eye(16), Constellation.from_name("qpsk"))


class TestMmse:
    def test_identity_shrinkage(self, prof, rng):
        key = PermutationKey.random(16, rng)
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        r = modulate(x, prof, key)
        np.testing.assert_allclose(mmse_equalize(r, np.eye(16), 0.25, prof, key), x / 1.25, atol=1e-12)

    def test_zero_forcing_limit(self, prof, rng):
        ch, _ = sample_channel(ChannelScenarioConfig(N=16), rng)
        key = PermutationKey.random(16, rng)
        x = map_bits(rng.integers(0, 2, 32), Constellation.from_name("qpsk"))
        r = receive(modulate(x, prof, key), ch, 0.0)
        np.testing.assert_allclose(mmse_equalize(r, ch, 1e-12, prof, key), x, atol=1e-5)

    def test_singular_noiseless_raises(self, prof):
        with pytest.raises(LinkError):
            mmse_equalize(np.ones(16), np.zeros((16, 16)), 0.0, prof, PermutationKey.identity(16))

    def test_mismatched_noiseless_chance(self, rng):
        N = 64
        prof = ChirpProfile(N, default_c1(N))
        q = Constellation.from_name("qpsk")
        errs = bits = 0
        for _ in range(20):
            ch, _ = sample_channel(ChannelScenarioConfig(N=N), rng)
            k, k2 = PermutationKey.random(N, rng), PermutationKey.random(N, rng)
            b = rng.integers(0, 2, 2 * N)
            r = receive(modulate(map_bits(b, q), prof, k), ch, 0.0)
            est = demap_symbols(mmse_equalize(r, ch, 1e-9, prof, k2), q)
            errs += np.sum(est != b)
            bits += b.size
        assert abs(errs / bits - 0.5) < 0.05


def test_key_sensitivity():
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(1000):
        N = int(rng.integers(4, 65))
        prof = ChirpProfile(N, default_c1(N))
        k = PermutationKey.random(N, rng)
        k2 = PermutationKey.random(N, rng)
        while k2 == k:
            k2 = PermutationKey.random(N, rng)
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        y = demodulate(modulate(x, prof, k), prof, k2)
        hits += np.linalg.norm(y - x) / np.linalg.norm(x) > 0.1
    assert hits / 1000 > 0.99
