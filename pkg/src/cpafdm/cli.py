"""``cpafdm`` command line: effective-channel dumps, guess tables, attack costs, BER runs, key tools."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import mpmath
import numpy as np

from . import __version__
from .channel import ChannelScenarioConfig, DelayDopplerChannel, PathParams, build_channel, sample_channel
from .link import direct_effective_channel, effective_channel
from .security import HIGH_PRECISION_DPS, guess_cdf_wrong, guess_distribution, quantum_cost, sci_from_log10
from .sim import WORKERS_ENV, SimulationError, BerConfig, EveStrategy, run_ber, run_fixed_point_sweep, sweep_to_csv
from .transforms import DEFAULT_C2, ChirpProfile, PermutationKey, default_c1, rank_to_perm

CSV_SCHEMA_VERSION = "1"


class CliError(Exception):
    """Bad flags or config values; reported as a one-line error."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        sys.stderr.write(f"error: usage: {message.splitlines()[0]}\n")
        raise SystemExit(2)


# ---------------------------------------------------------------------------
# config handling

DEFAULTS: dict[str, dict[str, Any]] = {
    "key": {"N": None, "rank": None, "perm": None, "random": False, "seed": 0},
    "attack-cost": {"N": 3300, "overhead_low": 1e3, "overhead_high": 1e4, "lambda_order": None,
                    "qubit_budget": None},
    "guess-prob": {"N": [64, 3300], "l_max": 10, "table_l_max": None},
    "effective-channel": {"N": 64, "c1": None, "c2": DEFAULT_C2, "rank": None, "perm": None,
                          "eve_rank": None, "eve_perm": None, "channel": None, "identity_channel": False,
                          "paths": 3, "max_delay": 3, "max_doppler": 1.0, "fractional_doppler": False,
                          "prefix": "cpp", "threshold": 1e-9, "seed": 0},
    "ber": {"N": 64, "modulation": "qpsk", "snr": "0:30:2", "trials": 10_000, "scenario": "remote",
            "eve": "random", "paths": 3, "max_delay": 3, "max_doppler": 1.0, "fractional_doppler": False,
            "prefix": "cpp", "c1": None, "c2": DEFAULT_C2, "alice_rank": None, "channel_policy": "per_trial",
            "block_size": 250, "seed": 0},
}
DEFAULTS["ber-sweep-l"] = {**DEFAULTS["ber"], "l": "0,2,4,6,8,10"}
del DEFAULTS["ber-sweep-l"]["eve"]


def load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise CliError(f"config file {path} must hold a mapping")
    # a run manifest carries the resolved config under "config"
    if "subcommand" in data and "config" in data:
        data = data["config"]
    return data


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        for k, v in load_config_file(args.config).items():
            k = k.replace("-", "_")
            if k not in cfg:
                raise CliError(f"unknown config key {k!r} for {command}")
            cfg[k] = v
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _parse_snr(text: str | list) -> list[float]:
    if isinstance(text, list):
        return [float(v) for v in text]
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise CliError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return [float(v) for v in text.split(",") if v]


def _parse_int_list(text: str | list | int) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v]


def _parse_perm(text: str | list) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(v) for v in text.strip("[]").split(",") if v.strip()]


def _key_from(cfg: dict, rank_field: str, perm_field: str, N: int,
              rng: np.random.Generator) -> PermutationKey:
    if cfg.get(rank_field) is not None and cfg.get(perm_field) is not None:
        raise CliError(f"give either {rank_field} or {perm_field}, not both")
    if cfg.get(rank_field) is not None:
        return rank_to_perm(int(str(cfg[rank_field])), N)
    if cfg.get(perm_field) is not None:
        key = PermutationKey(perm=tuple(_parse_perm(cfg[perm_field])))
        if key.N != N:
            raise CliError(f"{perm_field} has length {key.N}, expected N={N}")
        return key
    return PermutationKey.random(N, rng)


# ---------------------------------------------------------------------------
# output helpers


class Run:
    """Collects outputs of one subcommand and writes the manifest next to them."""

    def __init__(self, command: str, cfg: dict, args: argparse.Namespace) -> None:
        self.command = command
        self.cfg = cfg
        self.out = Path(args.out) if args.out else None
        self.fmt = args.format or "csv"
        self.plot = bool(args.plot)
        self.outputs: list[str] = []
        self.started = datetime.now(timezone.utc).isoformat()
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if not self.out:
            return
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.outputs.append(str(path))

    def add_file(self, path: Path) -> None:
        self.outputs.append(str(path))

    def finish(self) -> None:
        if not self.out:
            return
        manifest = {
            "subcommand": self.command,
            "config": self.cfg,
            "tool_version": __version__,
            "master_seed": self.cfg.get("seed"),
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "outputs": self.outputs,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
        }
        (self.out / f"{self.command}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v: Any) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _kv_text(d: dict) -> str:
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in d.items())


# ---------------------------------------------------------------------------
# subcommands


def cmd_key(cfg: dict, run: Run) -> None:
    if cfg["N"] is None:
        raise CliError("key needs --N")
    N = int(cfg["N"])
    modes = sum([cfg["rank"] is not None, cfg["perm"] is not None, bool(cfg["random"])])
    if modes != 1:
        raise CliError("key needs exactly one of --rank, --perm, --random")
    if cfg["random"]:
        key = PermutationKey.random(N, np.random.default_rng(int(cfg["seed"])))
    else:
        key = _key_from(cfg, "rank", "perm", N, np.random.default_rng(0))
        if key.N != N:
            raise CliError(f"permutation length {key.N} does not match N={N}")
    info = {"perm": "[" + ",".join(map(str, key.perm)) + "]", "rank": str(key.rank),
            "order": str(key.order), "fingerprint": key.fingerprint()}
    if run.fmt == "json":
        text = json.dumps(info, indent=2) + "\n"
    else:
        text = (f"perm: {info['perm']} (paper order {key.order})\n"
                f"rank: {key.rank}\n"
                f"fingerprint: {info['fingerprint']}\n")
    sys.stdout.write(text)
    run.write("key.json" if run.fmt == "json" else "key.txt", text)


def attack_cost_lines(cfg: dict) -> dict:
    N = int(cfg["N"])
    rep = quantum_cost(N, float(cfg["overhead_low"]), float(cfg["overhead_high"]),
                       None if cfg["lambda_order"] is None else float(cfg["lambda_order"]))
    d = {
        "N": N,
        "permutations": str(math.factorial(N)) if N <= 30 else sci_from_log10(rep.classical_log10_evals),
        "classical_evals": sci_from_log10(rep.classical_log10_evals),
        "log10_classical_evals": rep.classical_log10_evals,
        "lambda_order": rep.per_eval_cost_order,
        "log10_classical_total": rep.classical_log10_total,
        "gas_queries": sci_from_log10(rep.gas_log10_queries),
        "log10_gas_queries": rep.gas_log10_queries,
        "log10_gas_queries_closed_form": rep.gas_log10_queries_closed_form,
        "logical_qubits": rep.logical_qubits,
        "logical_qubits_stirling": rep.logical_qubits_stirling,
        "overhead_low": rep.overheads[0],
        "overhead_high": rep.overheads[1],
        "physical_qubits_low": rep.physical_qubits_range[0],
        "physical_qubits_high": rep.physical_qubits_range[1],
        "physical_qubits": f"{sci_from_log10(np.log10(rep.physical_qubits_range[0]))} ~ "
                           f"{sci_from_log10(np.log10(rep.physical_qubits_range[1]))}",
    }
    if cfg["qubit_budget"] is not None:
        d["qubit_budget"] = float(cfg["qubit_budget"])
        d["budget_covers_low_estimate"] = rep.meets_qubit_budget(float(cfg["qubit_budget"]))
    return d


def cmd_attack_cost(cfg: dict, run: Run) -> None:
    d = attack_cost_lines(cfg)
    text = json.dumps(d, indent=2) + "\n" if run.fmt == "json" else _kv_text(d)
    sys.stdout.write(text)
    run.write("attack_cost.json" if run.fmt == "json" else "attack_cost.txt", text)


def to_mpf(x) -> mpmath.mpf:
    """Round a Fraction or mpf to the working high-precision float."""
    with mpmath.workdps(HIGH_PRECISION_DPS):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return +mpmath.mpf(x)


def _mp_str(x) -> str:
    # 55 digits exceed the 50-dps mantissa, so parsing restores the value exactly
    with mpmath.workdps(HIGH_PRECISION_DPS):
        return mpmath.nstr(to_mpf(x), HIGH_PRECISION_DPS + 5, strip_zeros=False)


def guess_table(N: int, l_max: int | None) -> list[list[str]]:
    dist = guess_distribution(N, l_max)
    return [[str(l), _mp_str(p), _mp_str(c)] for l, (p, c) in enumerate(zip(dist.pmf, dist.cdf_wrong))]


GUESS_HEADER = ["l", "P_l", "CDF_at_least_N_minus_l_wrong"]


def cmd_guess_prob(cfg: dict, run: Run) -> None:
    l_max = int(cfg["l_max"])
    for N in _parse_int_list(cfg["N"]):
        if not 0 <= l_max <= N:
            raise CliError(f"l_max={l_max} outside [0, {N}]")
        cdf = guess_cdf_wrong(N, l_max)
        with mpmath.workdps(HIGH_PRECISION_DPS):
            cdf_text = mpmath.nstr(to_mpf(cdf), 15)
        sys.stdout.write(f"N={N} l_max={l_max} cdf_at_least_N_minus_l_wrong: {cdf_text}\n")
        table_l = N if cfg["table_l_max"] is None else min(int(cfg["table_l_max"]), N)
        rows = guess_table(N, table_l)
        if run.fmt == "json":
            run.write(f"guess_prob_N{N}.json", json.dumps({"N": N, "columns": GUESS_HEADER, "rows": rows}) + "\n")
        else:
            run.write(f"guess_prob_N{N}.csv", _csv_text(GUESS_HEADER, rows))
        if run.plot and run.out:
            from .plotting import plot_guess_distribution
            pmf = [float(r[1]) for r in rows]
            cdfv = [float(r[2]) for r in rows]
            run.add_file(plot_guess_distribution(N, pmf, cdfv, run.out / f"guess_prob_N{N}.png"))


def _support(G: np.ndarray, threshold: float) -> np.ndarray:
    return np.abs(G) > threshold


def effective_channel_grids(cfg: dict) -> tuple[dict[str, np.ndarray], DelayDopplerChannel,
                                                 PermutationKey, PermutationKey]:
    N = int(cfg["N"])
    rng = np.random.default_rng(int(cfg["seed"]))
    c1 = default_c1(N, float(cfg["max_doppler"])) if cfg["c1"] is None else float(cfg["c1"])
    profile = ChirpProfile(N, c1, float(cfg["c2"]))
    if cfg["channel"] and cfg["identity_channel"]:
        raise CliError("give either --channel or --identity-channel, not both")
    if cfg["channel"]:
        ch = DelayDopplerChannel.from_json(Path(cfg["channel"]).read_text())
        if ch.N != N:
            raise CliError(f"channel file has N={ch.N}, expected N={N}")
    elif cfg["identity_channel"]:
        ch = build_channel([PathParams(1.0, 0, 0.0)], N, c1, cfg["prefix"])
    else:
        scen = ChannelScenarioConfig(N=N, P=int(cfg["paths"]), max_delay=int(cfg["max_delay"]),
                                     max_doppler=float(cfg["max_doppler"]),
                                     fractional_doppler=bool(cfg["fractional_doppler"]),
                                     colocated=True, prefix=cfg["prefix"])
        ch, _ = sample_channel(scen, rng, c1=c1)
    alice = _key_from(cfg, "rank", "perm", N, rng)
    eve = _key_from(cfg, "eve_rank", "eve_perm", N, rng)
    grids = {
        "classic": effective_channel(ch, profile, PermutationKey.identity(N)).matrix,
        "matched": effective_channel(ch, profile, alice).matrix,
        "mismatched": direct_effective_channel(ch, profile, alice, eve),
    }
    return grids, ch, alice, eve


def cmd_effective_channel(cfg: dict, run: Run) -> None:
    grids, ch, alice, eve = effective_channel_grids(cfg)
    thr = float(cfg["threshold"])
    N = ch.N
    run.write("channel.json", ch.to_json() + "\n")
    sparsity = []
    for name, G in grids.items():
        if run.fmt == "json":
            run.write(f"effective_channel_{name}.json", json.dumps(
                {"abs": np.abs(G).tolist(), "arg": np.angle(G).tolist()}) + "\n")
        else:
            rows = [[m, n, repr(float(abs(G[m, n]))), repr(float(np.angle(G[m, n])))]
                    for m in range(N) for n in range(N)]
            run.write(f"effective_channel_{name}.csv", _csv_text(["row", "col", "abs", "arg"], rows))
            run.write(f"effective_channel_{name}_grid.csv",
                      _csv_text([f"c{n}" for n in range(N)], [[repr(float(v)) for v in r] for r in np.abs(G)]))
        counts = _support(G, thr).sum(axis=1)
        sparsity.extend([name, m, int(c)] for m, c in enumerate(counts))
    run.write("sparsity.csv", _csv_text(["variant", "row", "nonzeros"], sparsity))
    same = bool(np.array_equal(_support(grids["classic"], thr), _support(grids["matched"], thr)))
    summary = {
        "N": N,
        "alice_rank": str(alice.rank),
        "alice_fingerprint": alice.fingerprint(),
        "eve_rank": str(eve.rank),
        "eve_fingerprint": eve.fingerprint(),
        "threshold": thr,
        "matched_support_equals_classic": same,
        "max_abs_magnitude_difference_matched_vs_classic":
            float(np.max(np.abs(np.abs(grids["matched"]) - np.abs(grids["classic"])))),
        **{f"nonzeros_{k}": int(_support(G, thr).sum()) for k, G in grids.items()},
    }
    sys.stdout.write(_kv_text(summary))
    run.write("effective_channel_summary.txt", _kv_text(summary))
    if run.plot and run.out:
        from .plotting import plot_effective_channels
        run.add_file(plot_effective_channels(grids, run.out / "effective_channels.png"))


def ber_config(cfg: dict, eve: str | None = None) -> BerConfig:
    N = int(cfg["N"])
    channel = ChannelScenarioConfig(N=N, P=int(cfg["paths"]), max_delay=int(cfg["max_delay"]),
                                    max_doppler=float(cfg["max_doppler"]),
                                    fractional_doppler=bool(cfg["fractional_doppler"]),
                                    seed=int(cfg["seed"]), colocated=cfg["scenario"] == "colocated",
                                    prefix=cfg["prefix"])
    return BerConfig(
        N=N, modulation=cfg["modulation"], snr_grid_db=tuple(_parse_snr(cfg["snr"])),
        trials_per_point=int(cfg["trials"]), scenario=cfg["scenario"],
        eve_strategy=EveStrategy.parse(eve if eve is not None else cfg["eve"]),
        channel=channel, master_seed=int(cfg["seed"]),
        c1=None if cfg["c1"] is None else float(cfg["c1"]), c2=float(cfg["c2"]),
        alice_key=None if cfg["alice_rank"] is None else int(str(cfg["alice_rank"])),
        channel_policy=cfg["channel_policy"], block_size=int(cfg["block_size"]),
    )


def cmd_ber(cfg: dict, run: Run, workers: int | None) -> None:
    config = ber_config(cfg)
    report = run_ber(config, workers)
    summary = report.summary()
    if run.fmt == "json":
        run.write("ber.json", json.dumps([r for r in report.rows()], indent=2) + "\n")
    else:
        run.write("ber.csv", report.to_csv())
    run.write("ber_summary.json", json.dumps(summary, indent=2) + "\n")
    for p in report.points:
        sys.stdout.write(f"snr_db={p.snr_db:g} bob_ber={p.bob_ber:.6g} eve_ber={p.eve_ber:.6g} bits={p.total_bits}\n")
    if run.plot and run.out:
        from .plotting import plot_ber
        run.add_file(plot_ber({"Bob": (report.snr_db, report.bob_ber),
                               f"Eve ({config.eve_strategy})": (report.snr_db, report.eve_ber)},
                              run.out / "ber.png", title=f"{config.scenario}, N = {config.N}"))


def cmd_ber_sweep_l(cfg: dict, run: Run, workers: int | None) -> None:
    config = ber_config(cfg, eve="random")
    l_values = _parse_int_list(cfg["l"])
    reports = run_fixed_point_sweep(config, l_values, workers)
    if run.fmt == "json":
        run.write("ber_sweep_l.json", json.dumps({str(l): r.rows() for l, r in reports.items()}, indent=2) + "\n")
    else:
        run.write("ber_sweep_l.csv", sweep_to_csv(reports))
    for l, rep in reports.items():
        sys.stdout.write(f"l={l} eve_ber=" + ",".join(f"{b:.4g}" for b in rep.eve_ber) + "\n")
    if run.plot and run.out:
        from .plotting import plot_ber
        first = next(iter(reports.values()))
        curves = {"Bob": (first.snr_db, first.bob_ber)}
        curves.update({f"Eve l={l}": (r.snr_db, r.eve_ber) for l, r in reports.items()})
        run.add_file(plot_ber(curves, run.out / "ber_sweep_l.png", title=f"{config.scenario}, N = {config.N}"))


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--config", metavar="PATH", help="JSON/YAML config or a previous run manifest")
    g.add_argument("--seed", type=int, metavar="U64", help="master seed")
    g.add_argument("--out", metavar="DIR", help="output directory (files are only written when given)")
    g.add_argument("--format", choices=("csv", "json"), help="file format for tables (default csv)")
    g.add_argument("--plot", action="store_true", default=None, help="also render matplotlib figures into --out")


def _channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--paths", type=int, help="number of propagation paths P (default 3)")
    p.add_argument("--max-delay", dest="max_delay", type=int, help="maximum integer delay (default 3)")
    p.add_argument("--max-doppler", dest="max_doppler", type=float, help="maximum digital Doppler (default 1)")
    p.add_argument("--fractional-doppler", dest="fractional_doppler", action="store_true", default=None,
                   help="keep Doppler shifts fractional instead of rounding them")
    p.add_argument("--prefix", choices=("cpp", "cp"), help="chirp-periodic (default) or plain cyclic prefix")
    p.add_argument("--c1", type=float, help="first chirp frequency (default (2*ceil(max_doppler)+1)/(2N))")
    p.add_argument("--c2", type=float, help=f"second chirp frequency (default {DEFAULT_C2!r})")


def _ber_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, help="subcarriers (default 64)")
    p.add_argument("--modulation", choices=("qpsk", "4qam", "16qam", "64qam", "bpsk"), help="default qpsk")
    p.add_argument("--snr", help="SNR grid in dB: 'start:stop:step' or a comma list (default 0:30:2)")
    p.add_argument("--trials", type=int, help="trials per SNR point (default 10000)")
    p.add_argument("--scenario", choices=("remote", "colocated"), help="eavesdropper placement")
    p.add_argument("--alice-rank", dest="alice_rank", help="fixed secret key rank (default: fresh key per trial)")
    p.add_argument("--channel-policy", dest="channel_policy", choices=("per_trial", "fixed"),
                   help="redraw the channel each trial (default) or keep one realization")
    p.add_argument("--block-size", dest="block_size", type=int, help="trials per work unit (default 250)")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    _channel_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpafdm", description="Chirp-permuted AFDM secure-link simulator.")
    parser.add_argument("--version", action="version", version=f"cpafdm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("effective-channel", help="dump classic / matched / mismatched effective channels")
    p.add_argument("--N", type=int, help="subcarriers (default 64)")
    p.add_argument("--rank", help="Alice's key rank (decimal string; default random from --seed)")
    p.add_argument("--perm", help="Alice's key as a comma-separated permutation")
    p.add_argument("--eve-rank", dest="eve_rank", help="mismatched receiver key rank")
    p.add_argument("--eve-perm", dest="eve_perm", help="mismatched receiver key permutation")
    p.add_argument("--channel", help="channel JSON file (default: random from --seed)")
    p.add_argument("--identity-channel", dest="identity_channel", action="store_true", default=None,
                   help="use H = I")
    p.add_argument("--threshold", type=float, help="support threshold (default 1e-9)")
    _channel_flags(p)
    _common(p)

    p = sub.add_parser("guess-prob", help="random-guess PMF/CDF tables")
    p.add_argument("--N", type=lambda s: _parse_int_list(s), help="comma-separated sizes (default 64,3300)")
    p.add_argument("--l-max", dest="l_max", type=int, help="CDF cut-off for the summary line (default 10)")
    p.add_argument("--table-l-max", dest="table_l_max", type=int, help="last l written to the table (default N)")
    _common(p)

    p = sub.add_parser("attack-cost", help="classical and Grover-search cost of exhaustive key search")
    p.add_argument("--N", type=int, help="subcarriers (default 3300)")
    p.add_argument("--overhead-low", dest="overhead_low", type=float, help="physical/logical qubits, low (1e3)")
    p.add_argument("--overhead-high", dest="overhead_high", type=float, help="physical/logical qubits, high (1e4)")
    p.add_argument("--lambda-order", dest="lambda_order", type=float, help="cost per candidate (default N^2)")
    p.add_argument("--qubit-budget", dest="qubit_budget", type=float,
                   help="compare the physical-qubit estimate against this many available qubits")
    _common(p)

    p = sub.add_parser("ber", help="Monte Carlo BER of Bob and Eve")
    _ber_flags(p)
    p.add_argument("--eve", help="Eve's key: random | bounded:L | exact:L | key:RANK (default random)")
    _common(p)

    p = sub.add_parser("ber-sweep-l", help="Eve's BER versus the number of correct key positions")
    _ber_flags(p)
    p.add_argument("--l", help="comma-separated matching-position counts (default 0,2,4,6,8,10)")
    _common(p)

    p = sub.add_parser("key", help="rank <-> permutation conversion and key generation")
    p.add_argument("--N", type=int, help="key length")
    p.add_argument("--rank", help="zero-based rank (decimal string)")
    p.add_argument("--perm", help="comma-separated permutation")
    p.add_argument("--random", action="store_true", default=None, help="draw a uniform key from --seed")
    _common(p)
    return parser


COMMANDS: dict[str, Callable] = {
    "key": cmd_key,
    "attack-cost": cmd_attack_cost,
    "guess-prob": cmd_guess_prob,
    "effective-channel": cmd_effective_channel,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        run = Run(args.command, cfg, args)
        if args.command == "ber":
            cmd_ber(cfg, run, args.workers)
        elif args.command == "ber-sweep-l":
            cmd_ber_sweep_l(cfg, run, args.workers)
        else:
            COMMANDS[args.command](cfg, run)
        run.finish()
    except (CliError, SimulationError, ValueError, OSError, KeyError) as exc:
        msg = str(exc).replace("\n", " ")
        sys.stderr.write(f"error: {type(exc).__name__}: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
