"""Tests for the Monte Carlo simulator: RNG streams, sampling maps,
the reference trial, the chunk kernels, and the estimator."""

import math

import numpy as np
import pytest

from wpbft.channel import NetworkGeometry, avg_success_prob, preset
from wpbft.consensus import FaultBudget, consensus_success
from wpbft.simulator import (
    SimConfig,
    SimEstimate,
    TrialStream,
    estimate_consensus_rate,
    run_trial,
)
from wpbft.simulator import _pure, _rng
from wpbft.simulator.core import (
    backend_name,
    distance_from_uniform,
    fading_from_uniform,
    sample_distance,
    sample_fading,
    wilson_interval,
)

from oracles import wilson_reference

B10 = FaultBudget.from_node_count(10)


class TestBitStream:
    def test_known_splitmix_vectors(self):
        # trial_key(seed, t) is the (t+1)-th output of the splitmix64
        # stream seeded with `seed`; these are the published test values.
        assert _rng.trial_key(0, 0) == 16294208416658607535
        assert _rng.trial_key(1234567, 0) == 6457827717110365317
        assert _rng.trial_key(1234567, 1) == 3203168211198807973
        assert _rng.trial_key(1234567, 2) == 9817491932198370423

    def test_slot_draws_are_the_key_stream(self):
        key = _rng.trial_key(42, 17)
        state, outputs = key, []
        for _ in range(5):
            state = (state + 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
            outputs.append(_rng.mix64(state))
        assert [_rng.draw_bits(key, s) for s in range(5)] == outputs

    def test_stream_slot_and_sequential_access_agree(self):
        a = TrialStream(907, 3)
        b = TrialStream(907, 3)
        assert [b.uniform() for _ in range(6)] == [a.uniform_at(s) for s in range(6)]

    def test_streams_differ_across_trials_and_seeds(self):
        base = [TrialStream(5, 0).uniform_at(s) for s in range(4)]
        assert base != [TrialStream(5, 1).uniform_at(s) for s in range(4)]
        assert base != [TrialStream(6, 0).uniform_at(s) for s in range(4)]

    def test_uniform_ranges(self):
        # Extremes of the bit patterns must respect each map's interval.
        full = (1 << 64) - 1
        assert _rng.bits_to_uniform(0) == 0.0
        assert _rng.bits_to_uniform(full) < 1.0
        assert _rng.bits_to_positive_uniform(full) == 1.0
        assert _rng.bits_to_positive_uniform(0) == 2.0 ** -53
        assert _rng.bits_to_open_uniform(0) == 2.0 ** -53
        assert _rng.bits_to_open_uniform(full) == 1.0 - 2.0 ** -53

    def test_vectorised_helpers_match_scalars(self):
        keys = _rng.trial_keys(99, 5, 9)
        slots = np.arange(7)
        bits = _rng.slot_bits(keys, slots)
        for row, trial in enumerate(range(5, 9)):
            stream = TrialStream(99, trial)
            assert [int(v) for v in bits[row]] == [stream.bits_at(s) for s in range(7)]
        uniforms = _rng.uniforms(bits)
        positives = _rng.positive_uniforms(bits)
        opens = _rng.open_uniforms(bits)
        for row, trial in enumerate(range(5, 9)):
            stream = TrialStream(99, trial)
            for s in range(7):
                assert uniforms[row, s] == stream.uniform_at(s)
                assert positives[row, s] == stream.positive_uniform_at(s)
                assert opens[row, s] == stream.open_uniform_at(s)


class TestSamplingMaps:
    def test_distance_endpoints(self):
        assert distance_from_uniform(1.0, 3.0) == 3.0
        assert distance_from_uniform(0.25, 3.0) == 1.5

    def test_fading_values_and_domain(self):
        # -ln(u) for an Exp(1) draw; the endpoints are excluded on purpose
        # because u = 1 would give a zero gain and u = 0 an infinite one.
        assert fading_from_uniform(1.0 / math.e) == pytest.approx(1.0, rel=1e-12)
        assert fading_from_uniform(0.5) == pytest.approx(math.log(2.0), rel=1e-12)
        with pytest.raises(ValueError):
            fading_from_uniform(0.0)
        with pytest.raises(ValueError):
            fading_from_uniform(1.0)

    def test_distance_mean_is_two_thirds_radius(self):
        # E[r] for density 2r/R^2 is 2R/3; SD is R/sqrt(18).
        radius = 2.0
        draws = 1_000_000
        bits = _rng.slot_bits(_rng.trial_keys(314159, 0, draws), np.arange(1))
        u = _rng.positive_uniforms(bits)[:, 0]
        samples = radius * np.sqrt(u)
        se = radius / math.sqrt(18.0 * draws)
        assert abs(samples.mean() - 2.0 * radius / 3.0) < 4.0 * se

    def test_fading_mean_is_one(self):
        draws = 1_000_000
        bits = _rng.slot_bits(_rng.trial_keys(271828, 0, draws), np.arange(1))
        samples = -np.log(_rng.open_uniforms(bits)[:, 0])
        assert abs(samples.mean() - 1.0) < 4.0 / math.sqrt(draws)

    def test_stream_wrappers(self):
        stream = TrialStream(7, 0)
        expected = 1.4 * math.sqrt(TrialStream(7, 0).positive_uniform())
        assert sample_distance(stream, 1.4) == expected
        fresh = TrialStream(7, 0)
        fresh.positive_uniform()
        assert sample_fading(stream) == -math.log(fresh.open_uniform())


class TestWilsonInterval:
    @pytest.mark.parametrize("successes,trials", [(0, 50), (1, 50), (25, 50),
                                                  (49, 50), (50, 50), (811, 1000)])
    def test_matches_reference(self, successes, trials):
        low, high = wilson_interval(successes, trials)
        ref_low, ref_high = wilson_reference(successes, trials, 0.99)
        assert low == pytest.approx(ref_low, abs=1e-9)
        assert high == pytest.approx(ref_high, abs=1e-9)

    def test_bounds_and_ordering(self):
        low, high = wilson_interval(3, 10, confidence_level=0.95)
        assert 0.0 <= low < 0.3 < high <= 1.0

    def test_extremes_stay_in_unit_interval(self):
        low, high = wilson_interval(0, 20)
        assert low == 0.0 and 0.0 < high < 1.0
        low, high = wilson_interval(20, 20)
        assert 0.0 < low < 1.0 and high == 1.0

    def test_tighter_with_more_trials(self):
        narrow = wilson_interval(900, 1000)
        wide = wilson_interval(90, 100)
        assert narrow[1] - narrow[0] < wide[1] - wide[0]

    def test_domain(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(6, 5)


class TestRunTrial:
    def test_perfect_links_always_succeed(self):
        outcome = run_trial(TrialStream(1, 0), B10, 1.0)
        assert outcome.success
        assert outcome.failures == (0, 0, 0, 0)

    def test_dead_links_abort_in_stage_one(self):
        outcome = run_trial(TrialStream(1, 0), B10, 0.0)
        assert not outcome.success
        assert outcome.failures == (9, None, None, None)

    def test_success_means_budget_was_respected(self):
        wins = 0
        for t in range(500):
            outcome = run_trial(TrialStream(33, t), B10, 0.85)
            if outcome.success:
                wins += 1
                assert sum(outcome.failures) <= B10.fault_tolerance
            else:
                seen = [c for c in outcome.failures if c is not None]
                assert sum(seen) > B10.fault_tolerance
                assert outcome.failures[len(seen):] == (None,) * (4 - len(seen))
        assert 0 < wins < 500

    def test_geometric_mode_runs(self):
        profile = preset("thz-0.22")
        geometry = NetworkGeometry(node_count=10, density=5.0, snr_threshold_db=4.0)
        outcome = run_trial(TrialStream(2, 5), B10, (profile, geometry),
                            mode="geometric")
        assert outcome.success in (True, False)

    def test_reference_matches_iid_kernel(self):
        for t in range(300):
            hist = np.zeros((4, 11), dtype=np.int64)
            kernel_win = _pure.run_chunk_iid(4811, t, t + 1, 10, 3, 0.85, hist)
            outcome = run_trial(TrialStream(4811, t), B10, 0.85)
            assert bool(kernel_win) == outcome.success

    def test_reference_matches_geometric_kernel(self):
        profile = preset("mmwave-28")
        geometry = NetworkGeometry(node_count=10, density=2.0, snr_threshold_db=4.0)
        coefficient = (geometry.z_linear * profile.noise_power_w
                       / profile.transmit_power_w)
        for t in range(200):
            hist = np.zeros((4, 11), dtype=np.int64)
            kernel_win = _pure.run_chunk_geometric(
                913, t, t + 1, 10, 3, geometry.radius, coefficient,
                profile.path_loss_exponent, hist)
            outcome = run_trial(TrialStream(913, t), B10, (profile, geometry),
                                mode="geometric")
            assert bool(kernel_win) == outcome.success

    def test_mode_and_link_model_validation(self):
        profile = preset("thz-0.22")
        geometry = NetworkGeometry(node_count=10, density=5.0, snr_threshold_db=4.0)
        with pytest.raises(ValueError):
            run_trial(TrialStream(1, 0), B10, 0.9, mode="quantum")
        with pytest.raises(ValueError):
            run_trial(TrialStream(1, 0), B10, (profile, geometry), mode="iid-link")
        with pytest.raises(ValueError):
            run_trial(TrialStream(1, 0), B10, 0.9, mode="geometric")
        with pytest.raises(ValueError):
            run_trial(TrialStream(1, 0), B10, True)
        bad_geometry = NetworkGeometry(node_count=13, density=5.0,
                                       snr_threshold_db=4.0)
        with pytest.raises(ValueError):
            run_trial(TrialStream(1, 0), B10, (profile, bad_geometry),
                      mode="geometric")


class TestEstimator:
    def test_deterministic_for_fixed_seed(self):
        config = SimConfig(trials=30_000, seed=2718)
        a = estimate_consensus_rate(config, B10, 0.9)
        b = estimate_consensus_rate(config, B10, 0.9)
        assert a == b

    def test_worker_count_does_not_change_anything(self):
        config = SimConfig(trials=30_000, seed=2718)
        serial = estimate_consensus_rate(config, B10, 0.9, workers=1)
        threaded = estimate_consensus_rate(config, B10, 0.9, workers=4)
        assert serial == threaded

    def test_seed_matters(self):
        a = estimate_consensus_rate(SimConfig(trials=30_000, seed=1), B10, 0.9)
        b = estimate_consensus_rate(SimConfig(trials=30_000, seed=2), B10, 0.9)
        assert a.successes != b.successes

    def test_partial_chunk_boundaries(self):
        # 5000 spans one full 4096 chunk plus a ragged tail.
        est = estimate_consensus_rate(SimConfig(trials=5_000, seed=11), B10, 0.9)
        assert est.trials == 5_000
        assert est.successes == sum(
            run_trial(TrialStream(11, t), B10, 0.9).success for t in range(5_000))

    def test_analytic_rate_inside_interval(self):
        analytic = consensus_success(B10, 0.9)
        est = estimate_consensus_rate(SimConfig(trials=100_000, seed=424242), B10, 0.9)
        assert est.ci_low <= analytic <= est.ci_high

    def test_geometric_mode_tracks_averaged_link_rate(self):
        # Per-message redraws of position and fading are exactly the
        # averaged-link Bernoulli model, so the analytic chain applies.
        profile = preset("thz-0.22")
        geometry = NetworkGeometry(node_count=10, density=5.0, snr_threshold_db=4.0)
        analytic = consensus_success(B10, avg_success_prob(profile, geometry))
        est = estimate_consensus_rate(SimConfig(trials=100_000, seed=5150,
                                                mode="geometric"),
                                      B10, (profile, geometry), workers=2)
        assert est.ci_low <= analytic <= est.ci_high

    def test_stage_histogram_is_binomial(self):
        # Stage one tallies every trial: failure counts ~ Binomial(9, 0.1).
        trials = 100_000
        est = estimate_consensus_rate(SimConfig(trials=trials, seed=8086), B10, 0.9)
        hist = est.stage_failure_histogram["pre_prepare"]
        assert sum(hist.values()) == trials
        probs = [math.comb(9, i) * 0.1 ** i * 0.9 ** (9 - i) for i in range(10)]
        expected = [trials * p for p in probs]
        # Collapse the sparse tail so every cell expects >= 5 counts.
        cells = []
        tail_obs, tail_exp = 0, 0.0
        for i, exp_count in enumerate(expected):
            if exp_count >= 5.0:
                cells.append((hist.get(i, 0), exp_count))
            else:
                tail_obs += hist.get(i, 0)
                tail_exp += exp_count
        cells.append((tail_obs, tail_exp))
        statistic = sum((obs - exp) ** 2 / exp for obs, exp in cells)
        from oracles import chi2_quantile_wilson_hilferty
        assert statistic < chi2_quantile_wilson_hilferty(len(cells) - 1, 0.999)

    def test_histogram_totals_shrink_monotonically(self):
        est = estimate_consensus_rate(SimConfig(trials=20_000, seed=606), B10, 0.8)
        totals = [sum(est.stage_failure_histogram[s].values())
                  for s in ("pre_prepare", "prepare", "commit", "reply")]
        assert totals[0] == 20_000
        assert all(a >= b for a, b in zip(totals, totals[1:]))
        assert est.successes <= totals[-1]

    def test_fixed_positions_variant(self):
        profile = preset("thz-0.22")
        geometry = NetworkGeometry(node_count=10, density=5.0, snr_threshold_db=4.0)
        config = SimConfig(trials=20_000, seed=1337, mode="geometric")
        frozen = estimate_consensus_rate(config, B10, (profile, geometry),
                                         fixed_positions=True)
        redrawn = estimate_consensus_rate(config, B10, (profile, geometry))
        assert isinstance(frozen, SimEstimate)
        assert 0.0 <= frozen.p_hat <= 1.0
        # Shared positions correlate the stages; the two samplers are
        # genuinely different processes under the same seed.
        assert frozen.successes != redrawn.successes

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(trials=0, seed=1)
        with pytest.raises(ValueError):
            SimConfig(trials=100, seed=-1)
        with pytest.raises(ValueError):
            SimConfig(trials=100, seed=1, mode="hybrid")
        with pytest.raises(ValueError):
            SimConfig(trials=100, seed=1, confidence_level=1.0)

    def test_estimator_rejects_mismatched_model(self):
        with pytest.raises(ValueError):
            estimate_consensus_rate(SimConfig(trials=10, seed=1, mode="geometric"),
                                    B10, 0.9)


class TestBackends:
    def test_backend_is_reported(self):
        assert backend_name() in ("pure", "compiled")

    def test_compiled_matches_pure_bit_for_bit(self):
        kernel = pytest.importorskip("wpbft.simulator._kernel")
        profile = preset("thz-0.22")
        geometry = NetworkGeometry(node_count=13, density=2.0, snr_threshold_db=6.0)
        coefficient = (geometry.z_linear * profile.noise_power_w
                       / profile.transmit_power_w)
        for start, stop in ((0, 997), (997, 5000)):
            a = np.zeros((4, 14), dtype=np.int64)
            b = np.zeros((4, 14), dtype=np.int64)
            wins_a = _pure.run_chunk_iid(77, start, stop, 13, 4, 0.88, a)
            wins_b = kernel.run_chunk_iid(77, start, stop, 13, 4, 0.88, b)
            assert wins_a == wins_b
            assert (a == b).all()
            a[:] = 0
            b[:] = 0
            wins_a = _pure.run_chunk_geometric(
                78, start, stop, 13, 4, geometry.radius, coefficient,
                profile.path_loss_exponent, a)
            wins_b = kernel.run_chunk_geometric(
                78, start, stop, 13, 4, geometry.radius, coefficient,
                profile.path_loss_exponent, b)
            assert wins_a == wins_b
            assert (a == b).all()
