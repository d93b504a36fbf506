"""CP-AFDM transceiver: mapping, (de)modulation, effective channels and detection."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import DelayDopplerChannel
from .transforms import (ChirpProfile, KeyLike, PermutationKey, daft, daft_apply, dft_matrix,
                         idaft_apply, permuted_chirp)

#: Exhaustive ML search is refused above this many candidate vectors.
ML_MAX_CANDIDATES = 2 ** 20


class LinkError(ValueError):
    pass


def _gray_pam(m: int) -> np.ndarray:
    """Amplitudes indexed by Gray label for an ``m``-level PAM, label 0 at the top."""
    levels = (m - 1) - 2 * np.arange(m, dtype=np.float64)
    gray = np.arange(m) ^ (np.arange(m) >> 1)
    out = np.empty(m)
    out[gray] = levels
    return out


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-energy constellation; ``points[label]`` is the symbol for bit label ``label``.

    Labels are read MSB first. For square QAM the upper half of the bits
    selects the in-phase Gray level and the lower half the quadrature one,
    so QPSK maps ``00`` to ``(1+1j)/sqrt(2)``.
    """

    name: str
    points: np.ndarray

    @property
    def M(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.M))

    @classmethod
    def bpsk(cls) -> "Constellation":
        return cls("bpsk", np.array([1.0 + 0j, -1.0 + 0j]))

    @classmethod
    def qam(cls, M: int) -> "Constellation":
        m = int(round(np.sqrt(M)))
        if m * m != M or m < 2 or m & (m - 1):
            raise LinkError(f"square QAM needs M = 4**k, got {M}")
        pam = _gray_pam(m)
        labels = np.arange(M)
        k = int(np.log2(m))
        pts = pam[labels >> k] + 1j * pam[labels & (m - 1)]
        pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
        return cls("qpsk" if M == 4 else f"{M}qam", pts)

    @classmethod
    def from_name(cls, name: str) -> "Constellation":
        key = name.lower().replace("-", "")
        if key == "bpsk":
            return cls.bpsk()
        table = {"qpsk": 4, "4qam": 4, "16qam": 16, "64qam": 64}
        if key not in table:
            raise LinkError(f"unknown modulation {name!r}; choose from bpsk, qpsk, 16qam, 64qam")
        return cls.qam(table[key])

    @property
    def label_bits(self) -> np.ndarray:
        """``(M, bits_per_symbol)`` table of bit labels, MSB first."""
        return _label_bits(self.M)


@lru_cache(maxsize=None)
def _label_bits(M: int) -> np.ndarray:
    k = int(np.log2(M))
    table = ((np.arange(M)[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    table.setflags(write=False)
    return table


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Gray-map a bit array of shape ``(..., L)`` to symbols of shape ``(..., L/k)``."""
    bits = np.asarray(bits)
    k = constellation.bits_per_symbol
    if bits.shape[-1] % k:
        raise LinkError(f"bit length {bits.shape[-1]} is not a multiple of {k}")
    groups = bits.reshape(*bits.shape[:-1], -1, k).astype(np.intp)
    labels = groups @ (1 << np.arange(k - 1, -1, -1))
    return constellation.points[labels]


def hard_decision(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Nearest-point labels; exact ties resolve to the lowest label."""
    d = np.abs(np.asarray(symbols)[..., None] - constellation.points) ** 2
    return np.argmin(d, axis=-1)


def demap_symbols(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    labels = hard_decision(symbols, constellation)
    bits = constellation.label_bits[labels]
    return bits.reshape(*bits.shape[:-2], -1)


@dataclass(frozen=True, eq=False)
class Frame:
    bits: np.ndarray
    symbols: np.ndarray
    tx_signal: np.ndarray
    noise_variance: float = 0.0


def make_frame(bits: np.ndarray, constellation: Constellation, profile: ChirpProfile,
               key: KeyLike, noise_variance: float = 0.0) -> Frame:
    x = map_bits(bits, constellation)
    return Frame(np.asarray(bits), x, modulate(x, profile, key), noise_variance)


def _channel_matrix(channel: DelayDopplerChannel | np.ndarray) -> np.ndarray:
    return channel.matrix if isinstance(channel, DelayDopplerChannel) else np.asarray(channel)


def modulate(x: np.ndarray, profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """Transmit signal ``s = A_key^-1 x``."""
    return idaft_apply(x, profile, key)


def demodulate(r: np.ndarray, profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """Demodulated vector ``y = A_key r``."""
    return daft_apply(r, profile, key)


def receive(s: np.ndarray, channel: DelayDopplerChannel | np.ndarray, sigma2: float,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """``r = H s + w`` with ``w ~ CN(0, sigma2 I)``."""
    if sigma2 < 0:
        raise LinkError(f"noise variance must be >= 0, got {sigma2}")
    H = _channel_matrix(channel)
    r = np.einsum("...ij,...j->...i", H, s)
    if sigma2 == 0:
        return r
    if rng is None:
        raise LinkError("a random generator is required when sigma2 > 0")
    w = rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)
    return r + np.sqrt(sigma2 / 2) * w


@dataclass(frozen=True, eq=False)
class EffectiveChannel:
    """``matrix = Lambda_c2,key @ intermediate @ Lambda_c2,key^H``."""

    matrix: np.ndarray
    intermediate: np.ndarray
    key: PermutationKey


def intermediate_channel(channel: DelayDopplerChannel | np.ndarray, profile: ChirpProfile) -> np.ndarray:
    """``F Lambda_c1 H Lambda_c1^H F^H``, the effective channel before the second chirp."""
    H = _channel_matrix(channel)
    if H.shape != (profile.N, profile.N):
        raise LinkError(f"channel shape {H.shape} does not match N={profile.N}")
    F = dft_matrix(profile.N)
    lam1 = profile.lambda_c1
    inner = lam1[:, None] * H * lam1.conj()[None, :]
    return F @ inner @ F.conj().T


def effective_channel(channel: DelayDopplerChannel | np.ndarray, profile: ChirpProfile,
                      key: PermutationKey) -> EffectiveChannel:
    xi = intermediate_channel(channel, profile)
    lam2 = permuted_chirp(profile, key)
    G = lam2[:, None] * xi * lam2.conj()[None, :]
    return EffectiveChannel(matrix=G, intermediate=xi, key=key)


def direct_effective_channel(channel: DelayDopplerChannel | np.ndarray, profile: ChirpProfile,
                             tx_key: PermutationKey, rx_key: PermutationKey | None = None) -> np.ndarray:
    """``A_rx H A_tx^-1`` from dense DAFT matrices; ``rx_key`` defaults to ``tx_key``.

    With ``rx_key != tx_key`` this is the channel seen by a receiver using the
    wrong permutation.
    """
    H = _channel_matrix(channel)
    rx_key = tx_key if rx_key is None else rx_key
    return daft(profile, rx_key).matrix @ H @ daft(profile, tx_key, "inverse").matrix


def ml_detect(y: np.ndarray, effective: EffectiveChannel | np.ndarray,
              constellation: Constellation, chunk: int = 4096) -> np.ndarray:
    """Exhaustive ``argmin_x ||y - G x||^2`` over ``constellation**N``.

    Candidates are enumerated with symbol 0 as the most significant digit;
    ties go to the lowest candidate index.
    """
    G = effective.matrix if isinstance(effective, EffectiveChannel) else np.asarray(effective)
    N = G.shape[1]
    M = constellation.M
    total = M ** N
    if total > ML_MAX_CANDIDATES:
        raise LinkError(f"ML search over {M}^{N} candidates exceeds {ML_MAX_CANDIDATES}; use mmse_equalize")
    weights = M ** np.arange(N - 1, -1, -1)
    best_idx, best_metric = 0, np.inf
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        cand = constellation.points[(idx[:, None] // weights) % M]
        metric = np.sum(np.abs(y[None, :] - cand @ G.T) ** 2, axis=1)
        i = int(np.argmin(metric))
        if metric[i] < best_metric:
            best_metric, best_idx = metric[i], start + i
    return constellation.points[(best_idx // weights) % M]


def mmse_time_domain(r: np.ndarray, H: np.ndarray, sigma2: float) -> np.ndarray:
    """``H^H (H H^H + sigma2 I)^-1 r``; batched over leading axes."""
    N = H.shape[-1]
    HH = H.conj().swapaxes(-1, -2)
    gram = H @ HH + sigma2 * np.eye(N)
    if sigma2 == 0:
        cond = np.linalg.cond(gram)
        if np.any(~np.isfinite(cond)) or np.any(cond > 1e14):
            raise LinkError("singular channel at sigma2 = 0; use a ridge sigma2 > 0")
    try:
        z = np.linalg.solve(gram, r[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise LinkError("singular MMSE system; use a ridge sigma2 > 0") from exc
    return np.einsum("...ij,...j->...i", HH, z)


def mmse_equalize(r: np.ndarray, channel: DelayDopplerChannel | np.ndarray, sigma2: float,
                  profile: ChirpProfile, key: KeyLike) -> np.ndarray:
    """Soft MMSE estimate ``A_key H^H (H H^H + sigma2 I)^-1 r``."""
    if sigma2 < 0:
        raise LinkError(f"noise variance must be >= 0, got {sigma2}")
    return daft_apply(mmse_time_domain(r, _channel_matrix(channel), sigma2), profile, key)
