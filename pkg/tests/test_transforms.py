import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpafdm.transforms import (DEFAULT_C2, ChirpProfile, PermutationKey, TransformError, chirp_vector, daft,
                               daft_apply, default_c1, dft_matrix, idaft_apply, min_chirp_distance,
                               perm_to_lehmer, perm_to_rank, permuted_chirp, random_perm, rank_to_perm)


def naive_dft(N):
    return np.array([[np.exp(-2j * np.pi * m * n / N) for n in range(N)] for m in range(N)]) / np.sqrt(N)


class TestDft:
    def test_single_point(self):
        assert np.array_equal(dft_matrix(1), np.array([[1.0 + 0j]]))

    def test_two_point(self):
        np.testing.assert_allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("N", [3, 8, 17, 64])
    def test_matches_definition_and_unitary(self, N):
        F = dft_matrix(N)
        np.testing.assert_allclose(F, naive_dft(N), atol=1e-12)
        assert np.max(np.abs(F @ F.conj().T - np.eye(N))) < 1e-12


class TestChirp:
    def test_zero_frequency(self):
        np.testing.assert_array_equal(chirp_vector(0.0, 4), np.ones(4))

    def test_first_entry_is_one(self):
        assert chirp_vector(0.3141, 11)[0] == 1

    def test_quarter_frequency(self):
        np.testing.assert_allclose(chirp_vector(0.25, 2), [1, -1j], atol=1e-15)

    def test_default_c1(self):
        assert default_c1(64, 1.0) == pytest.approx(3 / 128)
        assert default_c1(64, 1.3) == pytest.approx(5 / 128)

    def test_distinct_default_second_chirp(self):
        for N in (4, 64, 1024):
            assert min_chirp_distance(DEFAULT_C2, N) > 1e-9
            lam = ChirpProfile(N, default_c1(N)).lambda_c2
            assert len(np.unique(np.round(lam, 12))) == N

    def test_repeated_entries_rejected(self):
        # c2 = 0 makes every entry 1, so permutations would be invisible
        with pytest.raises(TransformError):
            ChirpProfile(8, 0.1, 0.0)

    def test_small_N_rejected(self):
        with pytest.raises(TransformError):
            ChirpProfile(1, 0.1)


class TestCodec:
    @pytest.mark.parametrize("rank,perm", [(0, [0, 1, 2]), (1, [0, 2, 1]), (2, [1, 0, 2])])
    def test_ascending_order_cases(self, rank, perm):
        key = rank_to_perm(rank, 3)
        assert list(key.perm) == perm
        assert key.order == rank + 1
        assert perm_to_rank(perm) == rank

    @pytest.mark.parametrize("N", range(1, 8))
    def test_matches_itertools_order(self, N):
        # itertools.permutations emits lexicographic order: the independent oracle
        for rank, perm in enumerate(itertools.permutations(range(N))):
            assert rank_to_perm(rank, N).perm == perm
            assert perm_to_rank(perm) == rank

    def test_round_trip_N4(self):
        assert [perm_to_rank(rank_to_perm(r, 4).perm) for r in range(24)] == list(range(24))

    def test_rank_out_of_range(self):
        with pytest.raises(TransformError):
            rank_to_perm(6, 3)
        with pytest.raises(TransformError):
            rank_to_perm(-1, 3)

    def test_invalid_perm_names_problem(self):
        with pytest.raises(TransformError, match="duplicate"):
            perm_to_rank([0, 0, 2])

    def test_large_rank_round_trip(self):
        N = 3300
        r = math.factorial(N) - 12345
        assert perm_to_rank(rank_to_perm(r, N).perm) == r
        assert rank_to_perm(math.factorial(N) - 1, N).perm == tuple(range(N - 1, -1, -1))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, math.factorial(n) - 1))))
    def test_round_trip_property(self, nr):
        N, r = nr
        key = rank_to_perm(r, N)
        assert sorted(key.perm) == list(range(N))
        assert perm_to_rank(key.perm) == r

    def test_lehmer_digits_bounded(self, rng):
        p = random_perm(50, rng)
        d = perm_to_lehmer(p)
        assert all(0 <= x <= 49 - i for i, x in enumerate(d))

    def test_random_perm_uniform_small(self, rng):
        counts = np.zeros(6)
        for _ in range(6000):
            counts[perm_to_rank(random_perm(3, rng))] += 1
        # chi-square with 5 dof, 99.9% quantile ~ 20.5
        assert np.sum((counts - 1000) ** 2 / 1000) < 20.5

    def test_key_fields(self):
        key = PermutationKey((2, 0, 1))
        assert key.rank == 4 and key.order == 5 and key.N == 3
        assert PermutationKey.identity(5).is_identity
        assert len(key.fingerprint()) == 16
        with pytest.raises(TransformError):
            PermutationKey((2, 0, 1), rank=3)


def _profile(rng, N):
    return ChirpProfile(N, float(rng.uniform(0, 0.5)), float(rng.uniform(0.01, 0.99)) / np.sqrt(7))


class TestDaft:
    def test_degenerate_to_dft(self):
        p = ChirpProfile.__new__(ChirpProfile)
        object.__setattr__(p, "N", 4)
        object.__setattr__(p, "c1", 0.0)
        object.__setattr__(p, "c2", 0.0)
        np.testing.assert_allclose(daft(p).matrix, dft_matrix(4), atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_unitary(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(4, 129))
        p, key = _profile(rng, N), PermutationKey.random(N, rng)
        A = daft(p, key).matrix
        Ainv = daft(p, key, "inverse").matrix
        assert np.max(np.abs(A @ A.conj().T - np.eye(N))) < 1e-10
        assert np.max(np.abs(A @ Ainv - np.eye(N))) < 1e-10

    def test_matches_definition(self, rng):
        N = 12
        p, key = _profile(rng, N), PermutationKey.random(N, rng)
        lam2 = np.exp(-2j * np.pi * p.c2 * np.arange(N) ** 2)[list(key.perm)]
        ref = np.diag(lam2) @ naive_dft(N) @ np.diag(np.exp(-2j * np.pi * p.c1 * np.arange(N) ** 2))
        np.testing.assert_allclose(daft(p, key).matrix, ref, atol=1e-11)

    def test_key_changes_only_second_chirp(self):
        p = ChirpProfile(4, default_c1(4))
        A0, A1 = daft(p, rank_to_perm(0, 4)).matrix, daft(p, rank_to_perm(1, 4)).matrix
        inner = dft_matrix(4) * p.lambda_c1[None, :]
        # every row is the same row of F*Lambda_c1 up to a unit phase
        for A in (A0, A1):
            ratio = A / inner
            np.testing.assert_allclose(np.abs(ratio), 1, atol=1e-12)
            np.testing.assert_allclose(ratio, ratio[:, :1] * np.ones((1, 4)), atol=1e-12)
        assert not np.allclose(A0, A1)
        np.testing.assert_allclose((A1 / inner)[:, 0], permuted_chirp(p, rank_to_perm(1, 4)), atol=1e-12)

    def test_fast_path_matches_dense(self, rng):
        N = 37
        p, key = _profile(rng, N), PermutationKey.random(N, rng)
        x = rng.standard_normal((5, N)) + 1j * rng.standard_normal((5, N))
        np.testing.assert_allclose(daft_apply(x, p, key), x @ daft(p, key).matrix.T, atol=1e-12)
        np.testing.assert_allclose(idaft_apply(daft_apply(x, p, key), p, key), x, atol=1e-12)

    def test_batched_keys(self, rng):
        N = 16
        p = _profile(rng, N)
        perms = np.stack([random_perm(N, rng) for _ in range(3)])
        x = rng.standard_normal((3, N)) + 0j
        y = daft_apply(x, p, perms)
        for i in range(3):
            np.testing.assert_allclose(y[i], daft_apply(x[i], p, perms[i]), atol=1e-13)

    def test_length_mismatch(self):
        with pytest.raises(TransformError):
            daft_apply(np.ones(5), ChirpProfile(4, 0.1), PermutationKey.identity(4))
