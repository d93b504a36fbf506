import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from cpafdm.channel import PathParams, build_channel, draw_paths
from cpafdm.link import Constellation, demap_symbols, map_bits, mmse_equalize, modulate
from cpafdm.sim import (BerConfig, EveStrategy, read_ber_csv, run_ber, run_block, run_fixed_point_sweep,
                        snr_to_sigma2, sweep_to_csv, wilson_interval)
from cpafdm.transforms import random_perm


def small(**kw):
    base = dict(N=16, snr_grid_db=(0.0, 10.0, 20.0), trials_per_point=60, block_size=25, master_seed=7)
    base.update(kw)
    return BerConfig(**base)


def reference_trial(config, snr_index, t):
    """One trial through the dense public link API, replaying the engine's draw order."""
    N = config.N
    const = Constellation.from_name(config.modulation)
    prof = config.profile
    rng = np.random.default_rng([config.master_seed, snr_index, t])
    colocated = config.scenario == "colocated"
    pb = draw_paths(config.channel, rng)
    pe = pb if colocated else draw_paths(config.channel, rng)
    alice = random_perm(N, rng)
    assert config.eve_strategy.kind == "random_key"
    eve = random_perm(N, rng)
    bits = rng.integers(0, 2, N * const.bits_per_symbol)
    sigma2 = snr_to_sigma2(config.snr_grid_db[snr_index])
    w_b = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    w_e = w_b if colocated else rng.standard_normal(N) + 1j * rng.standard_normal(N)
    s = modulate(map_bits(bits, const), prof, alice)

    def chan(p):
        return build_channel([PathParams(*x) for x in zip(*p)], N, prof.c1)

    hb, he = chan(pb), chan(pe)
    r_b = hb.matrix @ s + np.sqrt(sigma2 / 2) * w_b
    r_e = r_b if colocated else he.matrix @ s + np.sqrt(sigma2 / 2) * w_e
    bob = demap_symbols(mmse_equalize(r_b, hb, sigma2, prof, alice), const)
    ev = demap_symbols(mmse_equalize(r_e, he, sigma2, prof, eve), const)
    return int(np.sum(bob != bits)), int(np.sum(ev != bits)), bits.size


class TestEngine:
    @pytest.mark.parametrize("scenario", ["remote", "colocated"])
    def test_batched_engine_matches_reference(self, scenario):
        cfg = small(scenario=scenario, trials_per_point=12)
        for si in range(3):
            ref = np.sum([reference_trial(cfg, si, t) for t in range(12)], axis=0)
            _, be, ee, nb = run_block(cfg, si, 0, 12)
            assert (be, ee, nb) == tuple(ref)

    def test_deterministic_and_worker_independent(self):
        cfg = small()
        a = run_ber(cfg, workers=1).to_csv()
        assert run_ber(cfg, workers=1).to_csv() == a
        assert run_ber(cfg, workers=3).to_csv() == a

    def test_block_size_independent(self):
        assert run_ber(small(block_size=7)).to_csv() == run_ber(small(block_size=60)).to_csv()

    def test_seed_matters(self):
        assert run_ber(small()).to_csv() != run_ber(small(master_seed=8)).to_csv()

    def test_report_invariants(self):
        rep = run_ber(small())
        for p in rep.points:
            assert 0 <= p.bob_errors <= p.total_bits and 0 <= p.eve_errors <= p.total_bits
            assert p.total_bits == 60 * 32
        assert rep.config == small()

    def test_csv_round_trip(self):
        rep = run_ber(small())
        assert read_ber_csv(rep.to_csv()).points == rep.points

    def test_high_snr_bob(self):
        rep = run_ber(BerConfig(N=64, snr_grid_db=(60.0,), trials_per_point=7813, master_seed=1))
        assert rep.points[0].total_bits >= 10 ** 6
        assert rep.bob_ber[0] < 1e-4

    def test_eve_random_at_chance(self):
        rep = run_ber(BerConfig(N=64, snr_grid_db=(0.0, 30.0), trials_per_point=200))
        assert np.all((rep.eve_ber > 0.45) & (rep.eve_ber < 0.55))

    def test_other_strategies_run(self):
        for eve in ("bounded:10", "exact:3", "key:5"):
            rep = run_ber(small(eve_strategy=EveStrategy.parse(eve), trials_per_point=20))
            assert rep.points[0].total_bits == 640

    def test_fixed_alice_key_and_channel(self):
        rep = run_ber(small(alice_key=12345, channel_policy="fixed", trials_per_point=20))
        assert len(rep.points) == 3


class TestSweep:
    def test_full_match_equals_bob_colocated(self):
        reps = run_fixed_point_sweep(small(scenario="colocated"), [16])
        r = reps[16]
        assert [p.eve_errors for p in r.points] == [p.bob_errors for p in r.points]

    def test_trend(self):
        cfg = BerConfig(N=64, snr_grid_db=(20.0,), trials_per_point=150, scenario="colocated")
        reps = run_fixed_point_sweep(cfg, [0, 16, 32, 48, 64])
        ber = [r.eve_ber[0] for r in reps.values()]
        bits = reps[0].points[0].total_bits
        sigma = np.sqrt(0.25 / bits)
        assert all(b2 <= b1 + 3 * sigma for b1, b2 in zip(ber, ber[1:]))
        assert ber[0] > 0.45 and ber[-1] < 0.01

    def test_matches_analytic_prediction(self):
        # matched positions decode like Bob, the rest at chance
        cfg = BerConfig(N=64, snr_grid_db=(30.0,), trials_per_point=300, scenario="colocated")
        for l, rep in run_fixed_point_sweep(cfg, [10, 32]).items():
            predicted = 0.5 * (64 - l) / 64 + (l / 64) * rep.bob_ber[0]
            assert abs(rep.eve_ber[0] - predicted) < 4 * np.sqrt(0.25 / rep.points[0].total_bits)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            run_fixed_point_sweep(small(), [15])
        with pytest.raises(ValueError):
            run_fixed_point_sweep(small(), [17])

    def test_sweep_csv(self):
        text = sweep_to_csv(run_fixed_point_sweep(small(trials_per_point=10), [0, 4]))
        lines = text.strip().split("\n")
        assert lines[0].startswith("l,snr_db") and len(lines) == 1 + 2 * 3 * 2


class TestConfig:
    def test_strategy_round_trip(self):
        for text in ("random", "bounded:10", "exact:3", "key:99"):
            assert str(EveStrategy.parse(text)) == text
        with pytest.raises(ValueError):
            EveStrategy.parse("clever")
        with pytest.raises(ValueError):
            EveStrategy("fixed_points", None)

    def test_dict_round_trip(self):
        cfg = small(eve_strategy=EveStrategy.parse("bounded:10"), scenario="colocated")
        assert BerConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize("kw", [dict(snr_grid_db=()), dict(trials_per_point=0), dict(scenario="nearby"),
                                    dict(modulation="8psk"), dict(eve_strategy=EveStrategy("fixed_points", 15)),
                                    dict(alice_key=10 ** 20)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            small(**kw)

    def test_scenario_syncs_channel(self):
        assert small(scenario="colocated").channel.colocated
        assert small().channel.N == 16


class TestWilson:
    @pytest.mark.parametrize("k,n", [(0, 50), (3, 50), (25, 50), (50, 50), (12345, 100000)])
    def test_against_statsmodels(self, k, n):
        lo, hi = proportion_confint(k, n, alpha=0.05, method="wilson")
        assert wilson_interval(k, n) == pytest.approx((lo, hi), abs=1e-12)
