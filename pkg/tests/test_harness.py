import numpy as np
import pytest

from risjrc.harness import (
    ExperimentPlan,
    ResultTable,
    config_hash,
    emit_csv,
    load_config,
    resolve_schedule,
    run_experiment,
    run_localization_trials,
    trial_rng,
    trial_trace_csv,
    wilson_halfwidth,
    write_default_config,
)
from risjrc.localization import SnapshotSchedule, hierarchical_localize, make_scene

from conftest import desk_cfg


class TestConfigIO:
    def test_default_roundtrip(self, tmp_path):
        path = tmp_path / "default.cfg"
        write_default_config(str(path))
        cfg, plan = load_config(str(path))
        assert (cfg.n_b, cfg.n_u, cfg.n_ris, cfg.grid_size) == (64, 16, 4096, 32)
        assert (cfg.d_bu, cfg.d_br, cfg.d_ru, cfg.d_rt) == (20.0, 10.0, 10.0, 5.0)
        assert (cfg.theta_r_deg, cfg.theta_u_deg) == (45.0, -25.0)
        assert (cfg.sigma_b2_dbm, cfg.sigma_u2_dbm) == (-94.0, -80.0)
        assert plan.schedule_ls == (4, 8, 16, 16, 16)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[arrays]\nn_b = 8\nbogus = 1\n")
        with pytest.raises(ValueError, match="bogus"):
            load_config(str(path))

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad2.cfg"
        path.write_text("[nonsense]\nx = 1\n")
        with pytest.raises(ValueError, match="nonsense"):
            load_config(str(path))

    def test_inconsistent_power_split_rejected(self, tmp_path):
        path = tmp_path / "bad3.cfg"
        path.write_text("[power]\ntotal = 30\nunits = dBm\np_r_watts = 0.9\np_u_watts = 0.9\n")
        with pytest.raises(ValueError, match="p_r_watts"):
            load_config(str(path))

    def test_bad_value_reports_location(self, tmp_path):
        path = tmp_path / "bad4.cfg"
        path.write_text("[arrays]\nn_b = sixty-four\n")
        with pytest.raises(ValueError, match=r"\[arrays\] n_b"):
            load_config(str(path))


class TestWilson:
    def test_known_value(self):
        # k=5, n=100, z=1.96: textbook Wilson interval half-width
        hw = wilson_halfwidth(5, 100)
        assert hw == pytest.approx(0.0455, abs=5e-4)

    def test_zero_and_full(self):
        assert 0 < wilson_halfwidth(0, 50) < 0.11
        assert wilson_halfwidth(50, 50) == pytest.approx(wilson_halfwidth(0, 50), rel=1e-12)


class TestConfigHash:
    def test_sensitive_to_every_field(self):
        cfg = desk_cfg()
        plan = ExperimentPlan()
        base = config_hash(cfg, plan)
        assert config_hash(desk_cfg(sigma_u2_dbm=-79.0), plan) != base
        plan2 = ExperimentPlan(master_seed=4321)
        assert config_hash(cfg, plan2) != base


class TestResultTable:
    def test_empty_table_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv(ResultTable(), str(path))
        text = path.read_text()
        assert text.count("\n") == 1
        assert text.startswith("experiment,power,metric")

    def test_float_roundtrip(self, tmp_path):
        t = ResultTable()
        value = 0.1 + 0.2  # not exactly representable in decimal
        t.add(experiment="x", power=1.0, metric="m", value=value)
        path = tmp_path / "t.csv"
        emit_csv(t, str(path))
        cell = path.read_text().splitlines()[1].split(",")[4]
        assert float(cell) == value


def small_plan(**overrides):
    kwargs = dict(
        kind="overall-error-vs-P",
        power_list=(42.0,),
        trials=60,
        master_seed=77,
        schedule_source="manual",
        snapshots=(2, 1, 1, 1),
    )
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)


class TestExperiments:
    def test_rerun_byte_identical(self, tmp_path, oracle_codebook_16):
        cfg = desk_cfg(n_ris=256, grid_size=16)
        paths = []
        for k in (1, 2):
            table = run_experiment(small_plan(), cfg, oracle_codebook_16)
            p = tmp_path / f"run{k}.csv"
            emit_csv(table, str(p))
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_parallel_degree_independence(self, oracle_codebook_16):
        cfg = desk_cfg(n_ris=256, grid_size=16)
        sched = SnapshotSchedule((2, 1, 1, 1))
        serial = run_localization_trials(cfg, oracle_codebook_16, sched, small_plan(parallel=1), 0)
        parallel = run_localization_trials(cfg, oracle_codebook_16, sched, small_plan(parallel=2), 0)
        assert serial == parallel

    def test_row_count_stage_error(self, oracle_codebook_16):
        cfg = desk_cfg(n_ris=256, grid_size=16)
        plan = small_plan(kind="stage-error-vs-P", power_list=(39.0, 42.0), trials=200)
        table = run_experiment(plan, cfg, oracle_codebook_16)
        # one row per (power point, stage)
        assert len(table.rows) == 2 * cfg.n_stages

    def test_single_snapshot_fails_error_target_at_low_power(self, desk_codebook):
        cfg = desk_cfg()
        plan = small_plan(
            kind="stage-error-vs-P", power_list=(33.0,), trials=2000, snapshots=(1, 1, 1, 1)
        )
        table = run_experiment(plan, cfg, desk_codebook)
        stage1 = next(r for r in table.rows if r["detail"].startswith("stage=1"))
        assert stage1["value"] > 3 * 0.05

    def test_transmission_count_rows(self, oracle_codebook_16):
        cfg = desk_cfg(n_ris=256, grid_size=16)
        plan = small_plan(kind="transmission-count", power_list=(42.0,), snapshots=(36, 1, 1, 1))
        table = run_experiment(plan, cfg, oracle_codebook_16)
        values = {r["metric"]: r["value"] for r in table.rows}
        assert values["transmissions_hierarchical"] == 4 * 39
        assert values["transmissions_exhaustive"] == 256.0

    def test_codebook_mismatch_rejected(self, oracle_codebook_16):
        cfg = desk_cfg(n_ris=1024, grid_size=16)
        with pytest.raises(ValueError, match="codebook"):
            run_experiment(small_plan(), cfg, oracle_codebook_16)

    def test_trace_csv(self, tmp_path, oracle_codebook_16):
        cfg = desk_cfg(n_ris=256, grid_size=16)
        scene = make_scene(cfg)
        rec = hierarchical_localize(
            scene, oracle_codebook_16, SnapshotSchedule((2, 1, 1, 1)), trial_rng(1, "overall-error-vs-P", 0, 0)
        )
        path = tmp_path / "trace.csv"
        trial_trace_csv([rec], str(path), 42.0, 1)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("trial,seed,power,stage")
        assert len(lines) == 1 + cfg.n_stages


class TestRngStreams:
    def test_trial_streams_distinct(self):
        a = trial_rng(1, "se-vs-P", 0, 0).standard_normal(4)
        b = trial_rng(1, "se-vs-P", 0, 1).standard_normal(4)
        c = trial_rng(1, "se-vs-P", 1, 0).standard_normal(4)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)

    def test_trial_streams_reproducible(self):
        a = trial_rng(9, "se-vs-P", 2, 3).standard_normal(4)
        b = trial_rng(9, "se-vs-P", 2, 3).standard_normal(4)
        np.testing.assert_array_equal(a, b)
