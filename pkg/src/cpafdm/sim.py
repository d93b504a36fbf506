"""Seeded Monte Carlo BER engine for Bob (matched key) and Eve (guessed key).

Every trial owns an RNG stream seeded from ``(master_seed, snr_index, trial)``
and trials are processed in fixed-size blocks, so a report depends only on
its config: never on the number of worker processes or their scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelBatch, ChannelScenarioConfig, draw_paths
from .link import Constellation, LinkError, demap_symbols, map_bits
from .security import perm_with_fixed_points, sample_fixed_point_count, truncated_pmf
from .transforms import DEFAULT_C2, ChirpProfile, daft_apply, default_c1, idaft_apply, random_perm, rank_to_perm

WORKERS_ENV = "CPAFDM_WORKERS"
WILSON_Z = 1.959963984540054
CSV_COLUMNS = ("snr_db", "receiver", "ber", "errors", "bits", "ci_low", "ci_high")


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class EveStrategy:
    """How Eve picks her key.

    ``random_key``: uniform over all ``N!`` keys. ``fixed_point_bounded``: uniform
    among keys with at most ``value`` positions matching Alice's.
    ``fixed_points``: exactly ``value`` matching positions. ``fixed_key``: the
    key of rank ``value``.
    """

    kind: str = "random_key"
    value: int | None = None

    KINDS = ("random_key", "fixed_point_bounded", "fixed_points", "fixed_key")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown Eve strategy {self.kind!r}")
        if self.kind != "random_key" and (self.value is None or self.value < 0):
            raise ValueError(f"Eve strategy {self.kind} needs a nonnegative value")

    @classmethod
    def parse(cls, text: str) -> "EveStrategy":
        """Parse ``random``, ``bounded:L``, ``exact:L`` or ``key:RANK``."""
        name, _, arg = text.partition(":")
        kind = {"random": "random_key", "random_key": "random_key",
                "bounded": "fixed_point_bounded", "fixed_point_bounded": "fixed_point_bounded",
                "exact": "fixed_points", "fixed_points": "fixed_points",
                "key": "fixed_key", "fixed_key": "fixed_key"}.get(name)
        if kind is None:
            raise ValueError(f"unknown Eve strategy {text!r}")
        return cls(kind, int(arg) if arg else None)

    def __str__(self) -> str:
        short = {"random_key": "random", "fixed_point_bounded": "bounded",
                 "fixed_points": "exact", "fixed_key": "key"}[self.kind]
        return short if self.value is None else f"{short}:{self.value}"


def default_snr_grid() -> tuple[float, ...]:
    return tuple(float(s) for s in range(0, 31, 2))


@dataclass(frozen=True)
class BerConfig:
    N: int = 64
    modulation: str = "qpsk"
    snr_grid_db: tuple[float, ...] = field(default_factory=default_snr_grid)
    trials_per_point: int = 10_000
    scenario: str = "remote"
    eve_strategy: EveStrategy = field(default_factory=EveStrategy)
    channel: ChannelScenarioConfig = field(default_factory=ChannelScenarioConfig)
    master_seed: int = 0
    c1: float | None = None
    c2: float = DEFAULT_C2
    alice_key: int | None = None
    channel_policy: str = "per_trial"
    block_size: int = 250

    def __post_init__(self) -> None:
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be nonempty")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.scenario not in ("remote", "colocated"):
            raise ValueError(f"scenario must be 'remote' or 'colocated', got {self.scenario!r}")
        if self.channel_policy not in ("per_trial", "fixed"):
            raise ValueError(f"channel_policy must be 'per_trial' or 'fixed', got {self.channel_policy!r}")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.channel.N != self.N:
            object.__setattr__(self, "channel", replace(self.channel, N=self.N))
        colocated = self.scenario == "colocated"
        if self.channel.colocated != colocated:
            object.__setattr__(self, "channel", replace(self.channel, colocated=colocated))
        Constellation.from_name(self.modulation)
        s = self.eve_strategy
        if s.kind in ("fixed_points", "fixed_point_bounded") and s.value > self.N:
            raise ValueError(f"fixed-point count {s.value} exceeds N={self.N}")
        if s.kind == "fixed_points" and s.value == self.N - 1:
            raise ValueError("exactly N-1 matching positions is impossible")
        if s.kind == "fixed_key":
            rank_to_perm(s.value, self.N)
        if self.alice_key is not None:
            rank_to_perm(self.alice_key, self.N)

    @property
    def profile(self) -> ChirpProfile:
        c1 = default_c1(self.N, self.channel.max_doppler) if self.c1 is None else self.c1
        return ChirpProfile(self.N, c1, self.c2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["eve_strategy"] = str(self.eve_strategy)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BerConfig":
        d = dict(d)
        if isinstance(d.get("eve_strategy"), str):
            d["eve_strategy"] = EveStrategy.parse(d["eve_strategy"])
        elif isinstance(d.get("eve_strategy"), dict):
            d["eve_strategy"] = EveStrategy(**d["eve_strategy"])
        if isinstance(d.get("channel"), dict):
            d["channel"] = ChannelScenarioConfig(**d["channel"])
        if "snr_grid_db" in d:
            d["snr_grid_db"] = tuple(d["snr_grid_db"])
        return cls(**d)


def snr_to_sigma2(snr_db: float) -> float:
    """Noise variance for unit symbol energy and a unitary modulator."""
    return 10.0 ** (-snr_db / 10.0)


def wilson_interval(errors: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = errors / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bob_errors: int
    eve_errors: int
    total_bits: int

    @property
    def bob_ber(self) -> float:
        return self.bob_errors / self.total_bits

    @property
    def eve_ber(self) -> float:
        return self.eve_errors / self.total_bits


@dataclass
class BerReport:
    points: list[BerPoint]
    config: BerConfig | None = None
    wall_time: float = 0.0

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def bob_ber(self) -> np.ndarray:
        return np.array([p.bob_ber for p in self.points])

    @property
    def eve_ber(self) -> np.ndarray:
        return np.array([p.eve_ber for p in self.points])

    def rows(self) -> list[dict]:
        out = []
        for p in self.points:
            for receiver, errors in (("bob", p.bob_errors), ("eve", p.eve_errors)):
                lo, hi = wilson_interval(errors, p.total_bits)
                out.append({"snr_db": p.snr_db, "receiver": receiver, "ber": errors / p.total_bits,
                            "errors": errors, "bits": p.total_bits, "ci_low": lo, "ci_high": hi})
        return out

    def to_csv(self, extra: dict | None = None) -> str:
        buf = io.StringIO()
        cols = tuple(extra or ()) + CSV_COLUMNS
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows():
            row = {**(extra or {}), **row}
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict() if self.config else None,
            "wall_time_s": self.wall_time,
            "points": [asdict(p) | {"bob_ber": p.bob_ber, "eve_ber": p.eve_ber} for p in self.points],
        }


def read_ber_csv(text: str) -> BerReport:
    """Parse :meth:`BerReport.to_csv` output back into a report (config not included)."""
    by_snr: dict[float, dict] = {}
    for row in csv.DictReader(io.StringIO(text)):
        snr = float(row["snr_db"])
        entry = by_snr.setdefault(snr, {"bits": int(row["bits"])})
        entry[row["receiver"]] = int(row["errors"])
    return BerReport([BerPoint(s, e["bob"], e["eve"], e["bits"]) for s, e in by_snr.items()])


# ---------------------------------------------------------------------------
# trial execution


def _trial_rng(config: BerConfig, snr_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([config.master_seed, snr_index, trial])


def _eve_perm(config: BerConfig, alice: np.ndarray, rng: np.random.Generator,
              bounded_pmf: np.ndarray | None) -> np.ndarray:
    s = config.eve_strategy
    if s.kind == "random_key":
        return random_perm(config.N, rng)
    if s.kind == "fixed_key":
        return np.array(rank_to_perm(s.value, config.N).perm, dtype=np.intp)
    l = s.value if s.kind == "fixed_points" else sample_fixed_point_count(bounded_pmf, rng)
    return perm_with_fixed_points(alice, l, rng)


def run_block(config: BerConfig, snr_index: int, start: int, stop: int) -> tuple[int, int, int, int]:
    """Run trials ``[start, stop)`` at one SNR; returns ``(snr_index, bob_err, eve_err, bits)``."""
    N = config.N
    const = Constellation.from_name(config.modulation)
    k = const.bits_per_symbol
    profile = config.profile
    ch = config.channel
    colocated = config.scenario == "colocated"
    sigma2 = snr_to_sigma2(config.snr_grid_db[snr_index])
    fixed_alice = (None if config.alice_key is None
                   else np.array(rank_to_perm(config.alice_key, N).perm, dtype=np.intp))
    bounded_pmf = None
    if config.eve_strategy.kind == "fixed_point_bounded":
        bounded_pmf = truncated_pmf(N, min(config.eve_strategy.value, N))
    fixed_channels = None
    if config.channel_policy == "fixed":
        crng = np.random.default_rng([config.master_seed, 0x43484E])
        fixed_channels = (draw_paths(ch, crng), draw_paths(ch, crng))

    B = stop - start
    gains_b = np.empty((B, ch.P), complex)
    delays_b = np.empty((B, ch.P), np.intp)
    dop_b = np.empty((B, ch.P))
    gains_e, delays_e, dop_e = np.empty_like(gains_b), np.empty_like(delays_b), np.empty_like(dop_b)
    alice = np.empty((B, N), np.intp)
    eve = np.empty((B, N), np.intp)
    bits = np.empty((B, N * k), np.uint8)
    w_b = np.empty((B, N), complex)
    w_e = np.empty((B, N), complex)

    for i, t in enumerate(range(start, stop)):
        rng = _trial_rng(config, snr_index, t)
        if fixed_channels is None:
            gb = draw_paths(ch, rng)
            ge = gb if colocated else draw_paths(ch, rng)
        else:
            gb = fixed_channels[0]
            ge = gb if colocated else fixed_channels[1]
        gains_b[i], delays_b[i], dop_b[i] = gb
        gains_e[i], delays_e[i], dop_e[i] = ge
        alice[i] = random_perm(N, rng) if fixed_alice is None else fixed_alice
        eve[i] = _eve_perm(config, alice[i], rng, bounded_pmf)
        bits[i] = rng.integers(0, 2, N * k)
        w_b[i] = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        if not colocated:
            w_e[i] = rng.standard_normal(N) + 1j * rng.standard_normal(N)

    noise_scale = math.sqrt(sigma2 / 2)
    x = map_bits(bits, const)
    s = idaft_apply(x, profile, alice)

    hb = ChannelBatch(gains_b, delays_b, dop_b, N, profile.c1, ch.prefix)
    r_b = hb.apply(s) + noise_scale * w_b
    try:
        z_b = _mmse_sparse(hb, r_b, sigma2)
        if colocated:
            r_e = r_b
            # co-located Eve observes the very same received vector as Bob
            assert np.array_equal(r_e, r_b)
            z_e = z_b
        else:
            he = ChannelBatch(gains_e, delays_e, dop_e, N, profile.c1, ch.prefix)
            r_e = he.apply(s) + noise_scale * w_e
            z_e = _mmse_sparse(he, r_e, sigma2)
    except LinkError as exc:
        raise SimulationError(
            f"numerical failure at snr_index={snr_index} trials [{start}, {stop}) "
            f"master_seed={config.master_seed}: {exc}") from exc

    bob_bits = demap_symbols(daft_apply(z_b, profile, alice), const)
    eve_bits = demap_symbols(daft_apply(z_e, profile, eve), const)
    return (snr_index, int(np.count_nonzero(bob_bits != bits)),
            int(np.count_nonzero(eve_bits != bits)), bits.size)


def _mmse_sparse(h: ChannelBatch, r: np.ndarray, sigma2: float) -> np.ndarray:
    """``H^H (H H^H + sigma2 I)^-1 r`` using the sparse path form of ``H``."""
    gram = h.gram()
    gram[:, np.arange(h.N), np.arange(h.N)] += sigma2
    try:
        z = np.linalg.solve(gram, r[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise LinkError("singular MMSE system") from exc
    if sigma2 == 0 and not np.all(np.isfinite(z)):
        raise LinkError("singular MMSE system at sigma2 = 0")
    return h.apply_adjoint(z)


def _tasks(config: BerConfig) -> list[tuple[int, int, int]]:
    T, bs = config.trials_per_point, config.block_size
    return [(i, a, min(a + bs, T)) for i in range(len(config.snr_grid_db)) for a in range(0, T, bs)]


def _run_task(args: tuple[BerConfig, int, int, int]) -> tuple[int, int, int, int]:
    return run_block(*args)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, int(workers))


def run_ber(config: BerConfig, workers: int | None = None) -> BerReport:
    """Simulate Bob's and Eve's MMSE bit error rates over the SNR grid."""
    t0 = time.perf_counter()
    workers = resolve_workers(workers)
    tasks = [(config, *t) for t in _tasks(config)]
    bob = [0] * len(config.snr_grid_db)
    eve = [0] * len(config.snr_grid_db)
    bits = [0] * len(config.snr_grid_db)
    if workers == 1:
        results: Iterable = map(_run_task, tasks)
        _accumulate(results, bob, eve, bits)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            _accumulate(pool.map(_run_task, tasks, chunksize=4), bob, eve, bits)
    points = [BerPoint(snr, bob[i], eve[i], bits[i]) for i, snr in enumerate(config.snr_grid_db)]
    return BerReport(points, config, time.perf_counter() - t0)


def _accumulate(results: Iterable, bob: list, eve: list, bits: list) -> None:
    for i, be, ee, nb in results:
        bob[i] += be
        eve[i] += ee
        bits[i] += nb


def run_fixed_point_sweep(config: BerConfig, l_values: Sequence[int],
                          workers: int | None = None) -> dict[int, BerReport]:
    """Eve's BER when her key matches Alice's at exactly ``l`` positions, per ``l``."""
    for l in l_values:
        if not 0 <= l <= config.N:
            raise ValueError(f"l={l} outside [0, {config.N}]")
        if l == config.N - 1:
            raise ValueError("exactly N-1 matching positions is impossible")
    return {l: run_ber(replace(config, eve_strategy=EveStrategy("fixed_points", l)), workers)
            for l in l_values}


def sweep_to_csv(reports: dict[int, BerReport]) -> str:
    parts = []
    for i, (l, rep) in enumerate(reports.items()):
        text = rep.to_csv(extra={"l": l})
        parts.append(text if i == 0 else text.split("\n", 1)[1])
    return "".join(parts)


def report_json(report: BerReport) -> str:
    return json.dumps(report.summary(), indent=2)
