import math

import numpy as np
import pytest

from risjrc.channels import (
    PhaseProfile,
    build_channels,
    draw_fading,
    make_transmit_block,
    path_gains,
    radar_receive,
)
from risjrc.codebook import build_matched_codebook
from risjrc.geometry import DirectionCosine, direction_grid
from risjrc.localization import (
    SnapshotSchedule,
    StageEnsemble,
    beam_2d_index,
    beam_statistic,
    calibrate_snapshots,
    exhaustive_localize,
    exhaustive_transmissions,
    hierarchical_localize,
    hierarchical_transmissions,
    make_scene,
    overall_error_bound,
    snapshot_rule_literal,
    stage_candidates,
    stage_error,
    trial_coefficients,
    true_axis_partition,
    true_cell,
)

from conftest import desk_cfg, tiny_cfg


class TestBeamStatistic:
    def test_zero_input(self):
        assert beam_statistic(np.zeros((8, 5), complex), np.ones(5, complex), 45.0) == 0.0

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
        s_r = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        rot = np.exp(1j * 1.234)
        a = beam_statistic(y, s_r, 45.0)
        b = beam_statistic(y * rot, s_r * rot, 45.0)
        assert a == pytest.approx(b, rel=1e-12)

    def test_noiseless_closed_form_against_pipeline(self):
        # single-stream transmit makes the statistic a pure coherent term
        cfg = tiny_cfg(p_r_watts=4.0, p_u_watts=0.0, power=10 * math.log10(4.0) + 30)
        rng = np.random.default_rng(1)
        fad = draw_fading(rng)
        cs = build_channels(cfg, fad)
        cb = build_matched_codebook(cfg)
        book = cb.stage(1)
        omega = PhaseProfile(book.w_x[:, 0], book.w_y[:, 0])
        x = make_transmit_block(cfg, 9, rng)
        y = radar_receive(x, omega, cfg.v_t, cs.gamma, cs, cfg, 0.0, rng)
        stat_pipeline = beam_statistic(y, x.s_r, cfg.theta_r_deg)

        scene = make_scene(cfg)
        coh, _ = trial_coefficients(scene, fad)
        a_x = scene.q_x @ book.w_x[:, 0]
        a_y = scene.q_y @ book.w_y[:, 0]
        stat_engine = abs((a_x * a_y) ** 2 * coh) ** 2
        assert stat_pipeline == pytest.approx(stat_engine, rel=1e-9)


class TestDescentIndexing:
    def test_child_set_of_third_quadrant(self):
        pairs = stage_candidates(2, (2, 1))
        assert [beam_2d_index(2, p) for p in pairs] == [9, 10, 13, 14]

    def test_stage_one_candidates(self):
        assert [beam_2d_index(1, p) for p in stage_candidates(1, None)] == [1, 2, 3, 4]

    def test_axis_partition_of_cell(self):
        assert true_axis_partition(7, 1, 16) == 1
        assert true_axis_partition(9, 1, 16) == 2
        assert true_axis_partition(7, 4, 16) == 7


class TestNoiselessOracle:
    def test_all_cells_small_grid(self):
        # brute-force every on-grid target on a small instance
        d = 8
        grid = direction_grid(d)
        base = desk_cfg(n_ris=256, grid_size=d, sigma_b2_dbm=-math.inf)
        cb = build_matched_codebook(base)
        sched = SnapshotSchedule((1,) * base.n_stages)
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                cfg = desk_cfg(
                    n_ris=256,
                    grid_size=d,
                    sigma_b2_dbm=-math.inf,
                    v_t=DirectionCosine(grid[i - 1], grid[j - 1]),
                )
                scene = make_scene(cfg)
                rec = hierarchical_localize(scene, cb, sched, np.random.default_rng(1))
                assert rec.est_cell == (i, j)
                assert rec.success
                rec_ex = exhaustive_localize(scene, np.random.default_rng(2))
                assert rec_ex.est_cell == (i, j)

    def test_descent_consistency(self):
        cfg = desk_cfg()
        cb = build_matched_codebook(cfg)
        sched = SnapshotSchedule((2,) * cfg.n_stages)
        scene = make_scene(cfg)
        for seed in range(20):
            rec = hierarchical_localize(scene, cb, sched, np.random.default_rng(seed))
            prev = None
            for dec in rec.stages:
                s = dec.stage
                idx = dec.beam_indices[dec.chosen - 1] - 1
                a, b = idx // 2**s + 1, idx % 2**s + 1
                if prev is not None:
                    pa, pb = prev
                    assert (a + 1) // 2 == pa and (b + 1) // 2 == pb
                prev = (a, b)


class TestTransmissionAccounting:
    def test_schedule_totals(self):
        sched = SnapshotSchedule((36, 1, 1, 1, 1))
        assert hierarchical_transmissions(sched) == 160

    def test_exhaustive_totals(self):
        assert exhaustive_transmissions(32, 1) == 1024
        assert exhaustive_transmissions(16, 1) == 256

    def test_trial_record_totals(self):
        cfg = desk_cfg()
        cb = build_matched_codebook(cfg)
        sched = SnapshotSchedule((8, 2, 1, 1))
        scene = make_scene(cfg)
        rec = hierarchical_localize(scene, cb, sched, np.random.default_rng(3))
        assert rec.total_transmissions == 4 * (8 + 2 + 1 + 1)


class TestSnapshotRule:
    def test_kappa_value(self):
        rule = snapshot_rule_literal(0.05, 1.0, 4, 64, 1e-3, 1e-3, 1e-12)
        assert rule.kappa == pytest.approx(29 / 15, abs=1e-12)
        assert rule.kappa == pytest.approx(1.9333, abs=1e-4)

    def test_literal_product_flagged_negative(self):
        rule = snapshot_rule_literal(0.05, 1.0, 4, 64, 1e-3, 1e-3, 1e-12)
        assert rule.ratio == pytest.approx(-29 / 14, abs=1e-12)
        assert rule.product_signed < 0
        assert not rule.physical
        assert rule.t_literal is None

    def test_magnitude_variant_scales_as_inverse_eighth_power(self):
        a = snapshot_rule_literal(0.05, 1e-9, 4, 64, 1e-3, 1e-3, 1e-12)
        b = snapshot_rule_literal(0.05, 1e-9, 8, 64, 1e-3, 1e-3, 1e-12)
        assert a.product_magnitude / b.product_magnitude == pytest.approx(256.0, rel=1e-12)
        assert a.t_magnitude == math.ceil(a.product_magnitude / 1e-9)

    def test_delta_bounds(self):
        with pytest.raises(ValueError):
            snapshot_rule_literal(0.0, 1.0, 4, 64, 1e-3, 1e-3, 1e-12)
        with pytest.raises(ValueError):
            snapshot_rule_literal(1.0, 1.0, 4, 64, 1e-3, 1e-3, 1e-12)


class TestOverallBound:
    def test_values(self):
        assert overall_error_bound(0.05, 5) == pytest.approx(0.25)
        assert overall_error_bound(0.0, 7) == 0.0


class TestCalibration:
    def test_noiseless_calibrates_to_one(self, desk_codebook):
        cfg = desk_cfg(sigma_b2_dbm=-math.inf)
        scene = make_scene(cfg)
        for s in range(1, cfg.n_stages + 1):
            res = calibrate_snapshots(scene, desk_codebook, s, 0.05, np.random.default_rng(s), trials=1000, t_max=8)
            assert res.feasible and res.t_s == 1

    def test_error_monotone_in_snapshots(self, desk_codebook):
        cfg = desk_cfg(36.0)
        scene = make_scene(cfg)
        ens = StageEnsemble(scene, desk_codebook, 1, 10_000, np.random.default_rng(0))
        errs = [ens.error_rate(t) for t in (1, 4, 16, 64)]
        hw = 2 * 1.96 * math.sqrt(0.25 / 10_000)
        for lo, hi in zip(errs[1:], errs[:-1]):
            assert lo <= hi + hw

    def test_infeasible_reported(self, desk_codebook):
        cfg = desk_cfg(20.0)  # far too little power for one-snapshot accuracy
        scene = make_scene(cfg)
        res = calibrate_snapshots(scene, desk_codebook, 1, 0.05, np.random.default_rng(1), trials=500, t_max=2)
        assert not res.feasible
        assert res.t_s is None

    def test_error_decreases_with_power(self, desk_codebook):
        errs = []
        for p in (36.0, 42.0, 48.0):
            scene = make_scene(desk_cfg(p))
            errs.append(stage_error(scene, desk_codebook, 1, 4, 10_000, np.random.default_rng(11)))
        hw = 2 * 1.96 * math.sqrt(0.25 / 10_000)
        assert errs[1] <= errs[0] + hw
        assert errs[2] <= errs[1] + hw


class TestEngineAgainstPipeline:
    def test_stage_one_error_rates_agree(self, desk_codebook):
        # the vectorized ensemble and the per-trial engine sample the same law
        cfg = desk_cfg(39.0)
        scene = make_scene(cfg)
        trials = 4000
        err_batch = stage_error(scene, desk_codebook, 1, 2, trials, np.random.default_rng(21))
        sched = SnapshotSchedule((2, 1, 1, 1))
        wrong = 0
        for t in range(trials):
            rec = hierarchical_localize(scene, desk_codebook, sched, np.random.default_rng(10_000 + t))
            cell = rec.true_cell
            want = beam_2d_index(
                1,
                (true_axis_partition(cell[0], 1, cfg.grid_size), true_axis_partition(cell[1], 1, cfg.grid_size)),
            )
            got = rec.stages[0].beam_indices[rec.stages[0].chosen - 1]
            wrong += got != want
        err_trial = wrong / trials
        hw = 2 * 1.96 * math.sqrt(0.25 / trials)
        assert err_trial == pytest.approx(err_batch, abs=hw)
