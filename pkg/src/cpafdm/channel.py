"""Doubly-dispersive circular-convolution channel.

Each path contributes ``h * Phi(delay) @ Z**doppler @ Pi**delay`` where ``Pi``
delays the sample vector circularly by one sample (``(Pi @ s)[n] = s[n-1]``),
``Z`` is the diagonal roots-of-unity Doppler matrix and ``Phi`` applies the
chirp-periodic-prefix phase to the ``delay`` wrapped-around samples.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Iterable, Literal, Sequence

import numpy as np

PrefixKind = Literal["cpp", "cp"]


class ChannelError(ValueError):
    pass


def shift_matrix_power(N: int, delay: int) -> np.ndarray:
    """``Pi**delay``: ``(Pi**delay @ s)[n] = s[(n - delay) mod N]``."""
    if not 0 <= delay < N:
        raise ChannelError(f"delay must lie in [0, {N - 1}], got {delay}; reduce mod N explicitly")
    return np.roll(np.eye(N), delay, axis=0)


def doppler_matrix_power(N: int, doppler: float) -> np.ndarray:
    n = np.arange(N)
    return np.diag(np.exp(-2j * np.pi * np.mod(n * doppler, N) / N))


def prefix_phase(n: np.ndarray | int, N: int, c1: float) -> np.ndarray:
    """Chirp-periodic-prefix phase ``phi(n) = c1 * (N**2 - 2*N*n)``."""
    return c1 * (N * N - 2 * N * np.asarray(n, dtype=np.float64))


def prefix_phase_diagonal(N: int, delay: int, c1: float, kind: PrefixKind = "cpp") -> np.ndarray:
    if not 0 <= delay < N:
        raise ChannelError(f"delay must lie in [0, {N - 1}], got {delay}")
    d = np.ones(N, dtype=np.complex128)
    if kind == "cpp" and delay:
        # first `delay` entries carry phi(delay), ..., phi(1)
        d[:delay] = np.exp(-2j * np.pi * np.mod(prefix_phase(np.arange(delay, 0, -1), N, c1), 1.0))
    elif kind not in ("cpp", "cp"):
        raise ChannelError(f"unknown prefix kind {kind!r}")
    return d


def prefix_phase_matrix(N: int, delay: int, c1: float, kind: PrefixKind = "cpp") -> np.ndarray:
    return np.diag(prefix_phase_diagonal(N, delay, c1, kind))


@dataclass(frozen=True)
class PathParams:
    gain: complex
    delay: int
    doppler: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "gain", complex(self.gain))
        object.__setattr__(self, "delay", int(self.delay))
        object.__setattr__(self, "doppler", float(self.doppler))
        if self.delay < 0:
            raise ChannelError(f"path delay must be nonnegative, got {self.delay}")


@dataclass(frozen=True)
class DelayDopplerChannel:
    """A set of paths and the lazily assembled ``N x N`` channel matrix."""

    paths: tuple[PathParams, ...]
    N: int
    c1: float
    prefix: PrefixKind = "cpp"

    @cached_property
    def matrix(self) -> np.ndarray:
        return channel_matrix(self.paths, self.N, self.c1, self.prefix)

    @property
    def P(self) -> int:
        return len(self.paths)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "c1": self.c1,
            "prefix": self.prefix,
            "paths": [
                {"gain_re": p.gain.real, "gain_im": p.gain.imag, "delay": p.delay, "doppler": p.doppler}
                for p in self.paths
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "DelayDopplerChannel":
        paths = [PathParams(complex(p["gain_re"], p["gain_im"]), p["delay"], p["doppler"])
                 for p in d["paths"]]
        return build_channel(paths, int(d["N"]), float(d["c1"]), d.get("prefix", "cpp"))

    @classmethod
    def from_json(cls, text: str) -> "DelayDopplerChannel":
        return cls.from_dict(json.loads(text))


def channel_matrix(paths: Sequence[PathParams], N: int, c1: float, prefix: PrefixKind = "cpp") -> np.ndarray:
    H = np.zeros((N, N), dtype=np.complex128)
    rows = np.arange(N)
    for p in paths:
        coef = (p.gain
                * prefix_phase_diagonal(N, p.delay, c1, prefix)
                * np.exp(-2j * np.pi * np.mod(rows * p.doppler, N) / N))
        H[rows, (rows - p.delay) % N] += coef
    return H


def build_channel(paths: Iterable[PathParams], N: int, c1: float,
                  prefix: PrefixKind = "cpp") -> DelayDopplerChannel:
    """Assemble ``H = sum_p h_p Phi_p Z**f_p Pi**l_p`` for the given paths."""
    paths = tuple(paths)
    if not paths:
        raise ChannelError("channel needs at least one path")
    for p in paths:
        if p.delay >= N:
            raise ChannelError(f"path delay {p.delay} must be < N={N}")
    if prefix not in ("cpp", "cp"):
        raise ChannelError(f"unknown prefix kind {prefix!r}")
    return DelayDopplerChannel(paths=paths, N=N, c1=c1, prefix=prefix)


class ChannelBatch:
    """A stack of ``B`` channels kept in path form, never materialized unless asked.

    ``coef[b, p, n]`` is the row-``n`` coefficient of path ``p`` (gain, Doppler
    and prefix phase folded together), sitting in column ``(n - delays[b, p]) mod N``.
    """

    def __init__(self, gains: np.ndarray, delays: np.ndarray, dopplers: np.ndarray,
                 N: int, c1: float, prefix: PrefixKind = "cpp") -> None:
        gains = np.asarray(gains, dtype=np.complex128)
        self.N = N
        self.delays = np.asarray(delays, dtype=np.intp)
        rows = np.arange(N)
        coef = gains[..., None] * np.exp(
            -2j * np.pi * np.mod(rows * np.asarray(dopplers, dtype=np.float64)[..., None], N) / N)
        if prefix == "cpp":
            k = self.delays[..., None] - rows          # phi index of the wrapped rows
            wrapped = k > 0
            ph = np.exp(-2j * np.pi * np.mod(prefix_phase(np.where(wrapped, k, 0), N, c1), 1.0))
            coef = coef * np.where(wrapped, ph, 1.0)
        elif prefix != "cp":
            raise ChannelError(f"unknown prefix kind {prefix!r}")
        self.coef = coef
        self._cols = (rows - self.delays[..., None]) % N

    @property
    def B(self) -> int:
        return self.coef.shape[0]

    def apply(self, s: np.ndarray) -> np.ndarray:
        """``H @ s`` for each batch member."""
        gathered = np.take_along_axis(s[:, None, :], self._cols, axis=-1)
        return np.sum(self.coef * gathered, axis=1)

    def apply_adjoint(self, z: np.ndarray) -> np.ndarray:
        """``H^H @ z`` for each batch member."""
        src = (np.arange(self.N) + self.delays[..., None]) % self.N
        c = np.take_along_axis(self.coef, src, axis=-1).conj()
        zz = np.take_along_axis(z[:, None, :], src, axis=-1)
        return np.sum(c * zz, axis=1)

    def gram(self) -> np.ndarray:
        """``H @ H^H`` built from path pairs in ``O(B N P^2)``."""
        B, P, N = self.coef.shape
        G = np.zeros((B, N, N), dtype=np.complex128)
        rows = np.arange(N)
        b_idx = np.arange(B)[:, None]
        for p in range(P):
            for q in range(P):
                cols = (rows - self.delays[:, p, None] + self.delays[:, q, None]) % N
                G[b_idx, rows, cols] += self.coef[:, p, :] * np.take_along_axis(
                    self.coef[:, q, :], cols, axis=-1).conj()
        return G

    def dense(self) -> np.ndarray:
        B, P, N = self.coef.shape
        H = np.zeros((B, N, N), dtype=np.complex128)
        rows = np.arange(N)
        b_idx = np.arange(B)[:, None]
        for p in range(P):
            H[b_idx, rows, self._cols[:, p, :]] += self.coef[:, p, :]
        return H


@dataclass(frozen=True)
class ChannelScenarioConfig:
    """Random channel scenario: path count, spreads and co-location flag."""

    N: int = 64
    P: int = 3
    max_delay: int = 3
    max_doppler: float = 1.0
    fractional_doppler: bool = False
    seed: int | None = None
    colocated: bool = False
    prefix: PrefixKind = "cpp"

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ChannelError(f"N must be >= 2, got {self.N}")
        if self.P < 1:
            raise ChannelError(f"P must be >= 1, got {self.P}")
        if not 0 <= self.max_delay < self.N:
            raise ChannelError(f"max_delay must lie in [0, N-1], got {self.max_delay}")
        if self.max_doppler < 0:
            raise ChannelError(f"max_doppler must be >= 0, got {self.max_doppler}")
        if self.prefix not in ("cpp", "cp"):
            raise ChannelError(f"unknown prefix kind {self.prefix!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def draw_paths(config: ChannelScenarioConfig, rng: np.random.Generator
               ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw ``(gains, delays, dopplers)`` arrays of length ``P`` for one channel.

    Gains are CN(0, 1/P); the first path is the zero-delay reference.
    """
    P = config.P
    gains = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) * np.sqrt(0.5 / P)
    delays = rng.integers(0, config.max_delay + 1, size=P)
    delays[0] = 0
    dopplers = rng.uniform(-config.max_doppler, config.max_doppler, size=P)
    if not config.fractional_doppler:
        dopplers = np.round(dopplers)
    return gains, delays, dopplers


def sample_channel(config: ChannelScenarioConfig, rng: np.random.Generator | None = None,
                   c1: float | None = None) -> tuple[DelayDopplerChannel, DelayDopplerChannel]:
    """Draw Bob's and Eve's channels; Eve gets Bob's realization when co-located.

    Without ``rng`` the draw is seeded from ``config.seed``.
    """
    from .transforms import default_c1

    if rng is None:
        if config.seed is None:
            raise ChannelError("pass an rng or set config.seed")
        rng = np.random.default_rng(config.seed)

    c1 = default_c1(config.N, config.max_doppler) if c1 is None else c1

    def one() -> DelayDopplerChannel:
        g, d, f = draw_paths(config, rng)
        return build_channel([PathParams(*t) for t in zip(g, d, f)], config.N, c1, config.prefix)

    bob = one()
    eve = bob if config.colocated else one()
    return bob, eve
