"""DFT, chirp and (permuted) DAFT matrices plus the permutation-key codec.

Permutation ranks are zero-based and follow lexicographic order of the
element indices, so rank 0 is the identity (classic AFDM) and the
user-facing "order" is ``rank + 1``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

#: Default second-chirp frequency. Irrational and O(1) so that ``c2 * n**2 mod 1``
#: is equidistributed: mismatched keys then rotate symbols by near-uniform phases.
DEFAULT_C2 = math.sqrt(2.0) - 1.0

#: Minimum distance allowed between two entries of the second chirp vector.
CHIRP_DISTINCTNESS_TOL = 1e-9

#: Keys longer than this skip the redundant rank/perm consistency re-check.
CODEC_BOUND = 4096


class TransformError(ValueError):
    """Raised for invalid transform parameters or key/profile mismatches."""


def default_c1(N: int, max_doppler: float = 1.0) -> float:
    """Full-diversity first chirp frequency ``(2*ceil(f_max) + 1) / (2N)``."""
    return (2 * math.ceil(max_doppler) + 1) / (2 * N)


def dft_matrix(N: int) -> np.ndarray:
    """Unitary ``N``-point DFT matrix with entries ``exp(-2j*pi*m*n/N)/sqrt(N)``."""
    if N < 1:
        raise TransformError(f"DFT size must be >= 1, got {N}")
    n = np.arange(N)
    # reduce m*n mod N before the exponential to keep the phase exact
    return np.exp(-2j * np.pi * (np.outer(n, n) % N) / N) / np.sqrt(N)


def chirp_vector(c: float, N: int) -> np.ndarray:
    """Chirp sequence ``exp(-2j*pi*c*n**2)`` for ``n = 0..N-1``."""
    n = np.arange(N, dtype=np.float64)
    return np.exp(-2j * np.pi * np.mod(c * n * n, 1.0))


def min_chirp_distance(c: float, N: int) -> float:
    """Smallest pairwise distance between entries of ``chirp_vector(c, N)``.

    Sorts the phases on the unit circle, so it is ``O(N log N)`` rather
    than quadratic.
    """
    n = np.arange(N, dtype=np.float64)
    phases = np.sort(np.mod(c * n * n, 1.0))
    gaps = np.diff(np.append(phases, phases[0] + 1.0))
    return float(2.0 * np.sin(np.pi * gaps.min()))


@dataclass(frozen=True)
class ChirpProfile:
    """Waveform parameters of the DAFT: size ``N`` and chirp frequencies."""

    N: int
    c1: float
    c2: float = DEFAULT_C2

    def __post_init__(self) -> None:
        if self.N < 2:
            raise TransformError(f"ChirpProfile needs N >= 2, got {self.N}")
        gap = min_chirp_distance(self.c2, self.N)
        if gap <= CHIRP_DISTINCTNESS_TOL:
            raise TransformError(
                f"c2={self.c2!r} gives repeated second-chirp entries for N={self.N} "
                f"(min distance {gap:.3g}); distinct keys would collapse to one waveform"
            )

    @classmethod
    def for_scenario(cls, N: int, max_doppler: float = 1.0, c2: float | None = None) -> "ChirpProfile":
        return cls(N=N, c1=default_c1(N, max_doppler), c2=DEFAULT_C2 if c2 is None else c2)

    @property
    def lambda_c1(self) -> np.ndarray:
        return chirp_vector(self.c1, self.N)

    @property
    def lambda_c2(self) -> np.ndarray:
        return chirp_vector(self.c2, self.N)


# ---------------------------------------------------------------------------
# permutation codec


def _check_rank_range(rank: int, N: int) -> None:
    if rank < 0:
        raise TransformError(f"rank must lie in [0, {N}! - 1], got negative {rank}")
    # log-domain screen first: rank.bit_length() - 1 <= log2(rank)
    log2_nfact = math.lgamma(N + 1) / math.log(2)
    if rank.bit_length() - 1 > log2_nfact + 1:
        raise TransformError(f"rank out of range: must lie in [0, {N}! - 1]")
    if rank >= math.factorial(N):
        raise TransformError(f"rank out of range: must lie in [0, {N}! - 1]")


def lehmer_to_perm(digits: Sequence[int]) -> list[int]:
    """Decode a Lehmer code (digit ``i`` in ``[0, N-i)``) to a permutation."""
    pool = list(range(len(digits)))
    return [pool.pop(d) for d in digits]


def perm_to_lehmer(perm: Sequence[int]) -> list[int]:
    pool = list(range(len(perm)))
    digits = []
    for p in perm:
        i = pool.index(p)
        digits.append(i)
        del pool[i]
    return digits


def rank_to_lehmer(rank: int, N: int) -> list[int]:
    digits = [0] * N
    for i in range(N - 1, -1, -1):
        rank, digits[i] = divmod(rank, N - i)
    return digits


def validate_perm(perm: Sequence[int]) -> list[int]:
    """Return ``perm`` as a list of ints, raising if it is not a bijection."""
    p = [int(v) for v in perm]
    N = len(p)
    if N == 0:
        raise TransformError("permutation must be non-empty")
    seen = [False] * N
    for pos, v in enumerate(p):
        if not 0 <= v < N:
            raise TransformError(f"permutation entry {v} at position {pos} outside [0, {N - 1}]")
        if seen[v]:
            missing = sorted(set(range(N)) - set(p))
            raise TransformError(
                f"permutation is not a bijection: index {v} duplicated, missing {missing}"
            )
        seen[v] = True
    return p


def rank_to_perm(rank: int, N: int) -> "PermutationKey":
    """The ``rank``-th permutation of ``0..N-1`` in lexicographic order."""
    rank = int(rank)
    if N < 1:
        raise TransformError(f"N must be >= 1, got {N}")
    _check_rank_range(rank, N)
    perm = lehmer_to_perm(rank_to_lehmer(rank, N))
    return PermutationKey(perm=tuple(perm), rank=rank)


def perm_to_rank(perm: Sequence[int]) -> int:
    """Lexicographic rank of a permutation (inverse of :func:`rank_to_perm`)."""
    p = validate_perm(perm)
    N = len(p)
    rank = 0
    for i, d in enumerate(perm_to_lehmer(p)):
        rank = rank * (N - i) + d
    return rank


@dataclass(frozen=True)
class PermutationKey:
    """A chirp permutation together with its zero-based lexicographic rank."""

    perm: tuple[int, ...]
    rank: int = field(default=-1)

    def __post_init__(self) -> None:
        p = tuple(validate_perm(self.perm))
        object.__setattr__(self, "perm", p)
        if self.rank == -1:
            object.__setattr__(self, "rank", perm_to_rank(p))
        elif len(p) <= CODEC_BOUND and self.rank != perm_to_rank(p):
            raise TransformError(f"rank {self.rank} is inconsistent with the given permutation")

    @property
    def N(self) -> int:
        return len(self.perm)

    @property
    def order(self) -> int:
        """One-based permutation order, ``rank + 1``."""
        return self.rank + 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.perm, dtype=np.intp)

    @property
    def is_identity(self) -> bool:
        return self.rank == 0

    def fingerprint(self) -> str:
        """Short SHA-256 digest of the permutation, safe to put in logs."""
        text = ",".join(map(str, self.perm))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @classmethod
    def identity(cls, N: int) -> "PermutationKey":
        return cls(perm=tuple(range(N)), rank=0)

    @classmethod
    def from_rank(cls, rank: int, N: int) -> "PermutationKey":
        return rank_to_perm(rank, N)

    @classmethod
    def random(cls, N: int, rng: np.random.Generator) -> "PermutationKey":
        return cls(perm=tuple(random_perm(N, rng)))


def random_perm(N: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation drawn digit by digit in the factorial number system."""
    digits = rng.integers(0, np.arange(N, 0, -1))
    return np.array(lehmer_to_perm(digits.tolist()), dtype=np.intp)


KeyLike = Union[PermutationKey, Sequence[int], np.ndarray]


def as_perm_array(key: KeyLike) -> np.ndarray:
    """Permutation index array of shape ``(..., N)`` for a key or raw perm(s)."""
    if isinstance(key, PermutationKey):
        return key.array
    return np.asarray(key, dtype=np.intp)


def permuted_chirp(profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """``perm(lambda_c2, key)``: entry ``n`` is ``lambda_c2[perm[n]]``."""
    perm = as_perm_array(key)
    if perm.shape[-1] != profile.N:
        raise TransformError(f"key length {perm.shape[-1]} does not match N={profile.N}")
    return profile.lambda_c2[perm]


# ---------------------------------------------------------------------------
# DAFT matrices and the FFT fast path


class Direction(str, Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


@dataclass(frozen=True, eq=False)
class DaftMatrix:
    matrix: np.ndarray
    profile: ChirpProfile
    key: PermutationKey
    direction: Direction


def daft(profile: ChirpProfile, key: PermutationKey | None = None,
         direction: Direction | str = Direction.FORWARD) -> DaftMatrix:
    """Dense permuted DAFT ``diag(perm(lambda_c2)) @ F_N @ diag(lambda_c1)`` or its inverse.

    The inverse is the conjugate transpose of the forward matrix.
    """
    key = PermutationKey.identity(profile.N) if key is None else key
    if key.N != profile.N:
        raise TransformError(f"key has N={key.N} but profile has N={profile.N}")
    direction = Direction(direction)
    forward = (permuted_chirp(profile, key)[:, None]
               * dft_matrix(profile.N)
               * profile.lambda_c1[None, :])
    matrix = forward if direction is Direction.FORWARD else forward.conj().T
    return DaftMatrix(matrix=matrix, profile=profile, key=key, direction=direction)


def daft_apply(x: np.ndarray, profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """``A_key @ x`` along the last axis in ``O(N log N)``; ``key`` may be batched."""
    x = np.asarray(x)
    _check_len(x, profile)
    lam2 = permuted_chirp(profile, key)
    return lam2 * np.fft.fft(profile.lambda_c1 * x, axis=-1, norm="ortho")


def idaft_apply(y: np.ndarray, profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """``A_key^-1 @ y`` along the last axis in ``O(N log N)``."""
    y = np.asarray(y)
    _check_len(y, profile)
    lam2 = permuted_chirp(profile, key)
    return profile.lambda_c1.conj() * np.fft.ifft(lam2.conj() * y, axis=-1, norm="ortho")


def _check_len(v: np.ndarray, profile: ChirpProfile) -> None:
    if v.shape[-1] != profile.N:
        raise TransformError(f"vector length {v.shape[-1]} does not match N={profile.N}")
