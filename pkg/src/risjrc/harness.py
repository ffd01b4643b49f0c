"""Experiment orchestration: config files, RNG discipline, sweeps, CSV.

Every random quantity in an experiment flows through a generator derived
from (master seed, experiment id, power-point index, trial index), so
results are bit-reproducible and independent of the parallelism degree.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import comms
from .channels import ScenarioConfig, db_to_linear, dbm_to_watts, path_gains
from .codebook import Codebook, SolverParams, build_codebook, mask_fidelity, half_power_width, sensing_response
from .geometry import DirectionCosine, direction_grid
from .localization import (
    SnapshotSchedule,
    beam_2d_index,
    calibrate_snapshots,
    exhaustive_transmissions,
    hierarchical_localize,
    hierarchical_transmissions,
    make_scene,
    snapshot_rule_literal,
    stage_error,
    true_axis_partition,
)

EXPERIMENT_KINDS = (
    "stage-error-vs-P",
    "snapshots-vs-P",
    "overall-error-vs-P",
    "se-vs-P",
    "transmission-count",
    "codebook-report",
)
_EXPERIMENT_IDS = {kind: n for n, kind in enumerate(EXPERIMENT_KINDS, start=1)}

SCHEDULE_SOURCES = ("manual", "literal-rule", "calibrated")

CSV_COLUMNS = (
    "experiment",
    "power",
    "metric",
    "detail",
    "value",
    "ci_halfwidth",
    "trials",
    "master_seed",
    "config_hash",
)

TRACE_COLUMNS = (
    "trial",
    "seed",
    "power",
    "stage",
    "beam_indices",
    "statistics",
    "chosen",
    "t_s",
    "success",
)


@dataclass
class ExperimentPlan:
    """What to run: experiment kind, sweep, budgets, and seeds."""

    kind: str = "overall-error-vs-P"
    power_list: tuple = (39.0, 42.0, 45.0)
    trials: int = 2000
    master_seed: int = 1234
    parallel: int = 1
    delta: float = 0.05
    t_max: int = 512
    calib_trials: int = 4000
    schedule_source: str = "calibrated"
    snapshots: tuple | None = None  # manual per-stage counts
    t_per_beam: int = 1
    schedule_ls: tuple | None = None  # codebook sensing-element schedule
    design_seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)

    def validate(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not self.power_list:
            raise ValueError("power_list must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.schedule_source not in SCHEDULE_SOURCES:
            raise ValueError(f"schedule_source must be one of {SCHEDULE_SOURCES}")
        if self.parallel < 1:
            raise ValueError("parallel must be >= 1")


def trial_rng(master_seed: int, experiment: str, point_index: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of one sweep point."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(_EXPERIMENT_IDS[experiment], point_index, trial))
    return np.random.default_rng(ss)


def aux_rng(master_seed: int, experiment: str, point_index: int, tag: int) -> np.random.Generator:
    """Generator for non-trial randomness (calibration etc.); tag >= 0."""
    ss = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(_EXPERIMENT_IDS[experiment], point_index, 1_000_000_000 + tag)
    )
    return np.random.default_rng(ss)


def wilson_halfwidth(k: int, n: int, z: float = 1.96) -> float:
    """Half-width of the Wilson score interval for k successes in n trials."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = k / n
    denom = 1.0 + z**2 / n
    return z * math.sqrt(p * (1.0 - p) / n + z**2 / (4.0 * n**2)) / denom


# ---------------------------------------------------------------------------
# config file I/O

_CONFIG_SCHEMA = {
    "arrays": {"n_b": int, "n_u": int, "n_ris": int},
    "grid": {"grid_size": int},
    "angles_deg": {"theta_r": float, "theta_u": float, "zeta_b": float, "zeta_r": float},
    "directions": {
        "v_bx": float,
        "v_by": float,
        "v_ux": float,
        "v_uy": float,
        "v_tx": float,
        "v_ty": float,
    },
    "distances_m": {"d_bu": float, "d_br": float, "d_ru": float, "d_rt": float},
    "pathloss": {
        "alpha_bu": float,
        "alpha_br": float,
        "alpha_ru": float,
        "alpha_rt": float,
        "eta0_db": float,
        "model": str,
    },
    "noise_dbm": {"sigma_b2": float, "sigma_u2": float},
    "power": {"total": float, "units": str, "p_r_watts": float, "p_u_watts": float},
    "ris": {"spacing_wavelengths": float},
    "codebook": {
        "schedule": str,
        "design_seed": int,
        "max_iters": int,
        "tol": float,
        "mu": str,
        "target_phase": str,
        "on_weight": str,
        "n_starts": int,
    },
    "experiment": {
        "kind": str,
        "power_list": str,
        "trials": int,
        "master_seed": int,
        "parallel": int,
        "delta": float,
        "t_max": int,
        "calib_trials": int,
        "schedule_source": str,
        "snapshots": str,
        "t_per_beam": int,
    },
}


def _int_tuple(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _float_tuple(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def load_config(path: str) -> tuple[ScenarioConfig, ExperimentPlan]:
    """Parse and validate a scenario + experiment config file.

    Unknown sections or keys are rejected with their location; invariant
    violations surface as named-field errors from the dataclasses.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as f:
        parser.read_file(f, source=path)

    raw = {}
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ValueError(f"{path}: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in _CONFIG_SCHEMA[section]:
                raise ValueError(f"{path}: unknown key {key!r} in section [{section}]")
            typ = _CONFIG_SCHEMA[section][key]
            try:
                raw[(section, key)] = typ(value)
            except ValueError as e:
                raise ValueError(f"{path}: bad value for [{section}] {key}: {e}") from None

    def get(section, key, default):
        return raw.get((section, key), default)

    base = ScenarioConfig()
    power = get("power", "total", base.power)
    units = get("power", "units", base.power_units)
    total_w = dbm_to_watts(power) if units == "dBm" else db_to_linear(power)
    cfg = ScenarioConfig(
        n_b=get("arrays", "n_b", base.n_b),
        n_u=get("arrays", "n_u", base.n_u),
        n_ris=get("arrays", "n_ris", base.n_ris),
        grid_size=get("grid", "grid_size", base.grid_size),
        theta_r_deg=get("angles_deg", "theta_r", base.theta_r_deg),
        theta_u_deg=get("angles_deg", "theta_u", base.theta_u_deg),
        zeta_b_deg=get("angles_deg", "zeta_b", base.zeta_b_deg),
        zeta_r_deg=get("angles_deg", "zeta_r", base.zeta_r_deg),
        v_b=DirectionCosine(get("directions", "v_bx", base.v_b.vx), get("directions", "v_by", base.v_b.vy)),
        v_u=DirectionCosine(get("directions", "v_ux", base.v_u.vx), get("directions", "v_uy", base.v_u.vy)),
        v_t=DirectionCosine(get("directions", "v_tx", base.v_t.vx), get("directions", "v_ty", base.v_t.vy)),
        d_bu=get("distances_m", "d_bu", base.d_bu),
        d_br=get("distances_m", "d_br", base.d_br),
        d_ru=get("distances_m", "d_ru", base.d_ru),
        d_rt=get("distances_m", "d_rt", base.d_rt),
        alpha_bu=get("pathloss", "alpha_bu", base.alpha_bu),
        alpha_br=get("pathloss", "alpha_br", base.alpha_br),
        alpha_ru=get("pathloss", "alpha_ru", base.alpha_ru),
        alpha_rt=get("pathloss", "alpha_rt", base.alpha_rt),
        eta0_db=get("pathloss", "eta0_db", base.eta0_db),
        pathloss_model=get("pathloss", "model", base.pathloss_model),
        sigma_b2_dbm=get("noise_dbm", "sigma_b2", base.sigma_b2_dbm),
        sigma_u2_dbm=get("noise_dbm", "sigma_u2", base.sigma_u2_dbm),
        power=power,
        power_units=units,
        p_r_watts=get("power", "p_r_watts", total_w / 2),
        p_u_watts=get("power", "p_u_watts", total_w / 2),
        ris_spacing=get("ris", "spacing_wavelengths", base.ris_spacing),
    )

    solver = SolverParams(
        max_iters=get("codebook", "max_iters", 500),
        tol=get("codebook", "tol", 1e-8),
        n_starts=get("codebook", "n_starts", 4),
        target_phase=get("codebook", "target_phase", "free"),
    )
    mu = get("codebook", "mu", "auto")
    if mu != "auto":
        solver.mu = float(mu)
    on_weight = get("codebook", "on_weight", "auto")
    if on_weight != "auto":
        solver.on_weight = float(on_weight)

    dflt = ExperimentPlan()
    schedule_ls = get("codebook", "schedule", None)
    snapshots = get("experiment", "snapshots", None)
    plan = ExperimentPlan(
        kind=get("experiment", "kind", dflt.kind),
        power_list=_float_tuple(get("experiment", "power_list", "")) or dflt.power_list,
        trials=get("experiment", "trials", dflt.trials),
        master_seed=get("experiment", "master_seed", dflt.master_seed),
        parallel=get("experiment", "parallel", dflt.parallel),
        delta=get("experiment", "delta", dflt.delta),
        t_max=get("experiment", "t_max", dflt.t_max),
        calib_trials=get("experiment", "calib_trials", dflt.calib_trials),
        schedule_source=get("experiment", "schedule_source", dflt.schedule_source),
        snapshots=_int_tuple(snapshots) if snapshots else None,
        t_per_beam=get("experiment", "t_per_beam", dflt.t_per_beam),
        schedule_ls=_int_tuple(schedule_ls) if schedule_ls else None,
        design_seed=get("codebook", "design_seed", dflt.design_seed),
        solver=solver,
    )
    plan.validate()
    return cfg, plan


def write_default_config(path: str):
    """Write the shipped default scenario config."""
    cfg = ScenarioConfig()
    text = f"""# RIS joint radar-communication scenario
[arrays]
n_b = {cfg.n_b}
n_u = {cfg.n_u}
n_ris = {cfg.n_ris}

[grid]
grid_size = {cfg.grid_size}

[angles_deg]
theta_r = {cfg.theta_r_deg}
theta_u = {cfg.theta_u_deg}
zeta_b = {cfg.zeta_b_deg}
zeta_r = {cfg.zeta_r_deg}

[directions]
v_bx = {cfg.v_b.vx}
v_by = {cfg.v_b.vy}
v_ux = {cfg.v_u.vx}
v_uy = {cfg.v_u.vy}
v_tx = {cfg.v_t.vx}
v_ty = {cfg.v_t.vy}

[distances_m]
d_bu = {cfg.d_bu}
d_br = {cfg.d_br}
d_ru = {cfg.d_ru}
d_rt = {cfg.d_rt}

[pathloss]
alpha_bu = {cfg.alpha_bu}
alpha_br = {cfg.alpha_br}
alpha_ru = {cfg.alpha_ru}
alpha_rt = {cfg.alpha_rt}
eta0_db = {cfg.eta0_db}
model = {cfg.pathloss_model}

[noise_dbm]
sigma_b2 = {cfg.sigma_b2_dbm}
sigma_u2 = {cfg.sigma_u2_dbm}

[power]
total = {cfg.power}
units = {cfg.power_units}
p_r_watts = {cfg.p_r_watts!r}
p_u_watts = {cfg.p_u_watts!r}

[ris]
spacing_wavelengths = {cfg.ris_spacing}

[codebook]
schedule = 4, 8, 16, 16, 16
design_seed = 0

[experiment]
kind = overall-error-vs-P
power_list = 39, 42, 45
trials = 2000
master_seed = 1234
schedule_source = calibrated
delta = 0.05
"""
    with open(path, "w") as f:
        f.write(text)


def config_hash(cfg: ScenarioConfig, plan: ExperimentPlan) -> str:
    """Short digest over every result-affecting config and plan field.

    The parallelism degree is excluded: outputs are independent of it.
    """
    parts = []
    for f_ in fields(cfg):
        parts.append(f"{f_.name}={getattr(cfg, f_.name)!r}")
    for f_ in fields(plan):
        if f_.name == "parallel":
            continue
        parts.append(f"{f_.name}={getattr(plan, f_.name)!r}")
    return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# result table

@dataclass
class ResultTable:
    """Append-only experiment results, sorted before emission."""

    rows: list = field(default_factory=list)

    def add(self, **kwargs):
        row = {c: kwargs.get(c, "") for c in CSV_COLUMNS}
        self.rows.append(row)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: tuple(str(r[c]) for c in CSV_COLUMNS))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(table: ResultTable, path: str):
    """Write the table as RFC-4180 CSV with round-trippable floats."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in table.sorted_rows():
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def trial_trace_csv(records: list, path: str, power: float, master_seed: int):
    """Per-stage trace rows of localization trials."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for t, rec in enumerate(records):
            for dec in rec.stages:
                writer.writerow(
                    [
                        t,
                        master_seed,
                        _fmt(power),
                        dec.stage,
                        ";".join(str(b) for b in dec.beam_indices),
                        ";".join(repr(v) for v in dec.statistics),
                        dec.chosen,
                        dec.t_s,
                        int(rec.success),
                    ]
                )


# ---------------------------------------------------------------------------
# experiment execution

def get_codebook(cfg: ScenarioConfig, plan: ExperimentPlan, cb: Codebook | None = None) -> Codebook:
    if cb is not None:
        if cb.d != cfg.grid_size or cb.n_ris != cfg.n_ris:
            raise ValueError(
                f"codebook designed for D={cb.d}, N_r={cb.n_ris}; "
                f"scenario has D={cfg.grid_size}, N_r={cfg.n_ris}"
            )
        return cb
    return build_codebook(cfg, schedule=plan.schedule_ls, solver=plan.solver, seed=plan.design_seed)


def resolve_schedule(cfg: ScenarioConfig, plan: ExperimentPlan, cb: Codebook) -> tuple[SnapshotSchedule, list]:
    """Per-stage snapshot counts for one power point, per the plan's source.

    Returns the schedule and the list of CalibrationResults (empty unless
    calibrated).  The literal-rule source uses the magnitude reading of
    the closed-form rule, since the signed form is non-physical.
    """
    n_stages = cfg.n_stages
    calibs = []
    if plan.schedule_source == "manual":
        t_s = plan.snapshots if plan.snapshots is not None else (1,) * n_stages
        if len(t_s) != n_stages:
            raise ValueError(f"snapshots must have {n_stages} entries, got {len(t_s)}")
        return SnapshotSchedule(tuple(t_s), "manual"), calibs
    if plan.schedule_source == "literal-rule":
        eta = path_gains(cfg)
        t_s = []
        for s in range(1, n_stages + 1):
            l_s = cb.schedule[s - 1]
            rule = snapshot_rule_literal(
                plan.delta, cfg.p_r_watts, l_s, cfg.n_b, eta.eta_br, eta.eta_rt, cfg.sigma_b2_watts
            )
            t_s.append(rule.t_magnitude)
        return SnapshotSchedule(tuple(t_s), "literal-rule"), calibs
    # calibrated; streams keyed by stage only so power points share draws,
    # which keeps the calibrated counts smoothly monotone across the sweep
    scene = make_scene(cfg)
    t_s = []
    for s in range(1, n_stages + 1):
        rng = aux_rng(plan.master_seed, plan.kind, 0, s)
        res = calibrate_snapshots(scene, cb, s, plan.delta, rng, plan.calib_trials, plan.t_max)
        calibs.append(res)
        t_s.append(res.t_s if res.feasible else plan.t_max)
    return SnapshotSchedule(tuple(t_s), "calibrated"), calibs


def _run_trial_block(args) -> list:
    """Worker: run a block of localization trials, return compact outcomes."""
    cfg, cb, schedule, master_seed, kind, point_index, trial_indices = args
    scene = make_scene(cfg)
    out = []
    for t in trial_indices:
        rng = trial_rng(master_seed, kind, point_index, t)
        rec = hierarchical_localize(scene, cb, schedule, rng)
        tc = rec.true_cell
        stage_correct = []
        for dec in rec.stages:
            s = dec.stage
            truth = (
                true_axis_partition(tc[0], s, cfg.grid_size),
                true_axis_partition(tc[1], s, cfg.grid_size),
            )
            chosen_idx = dec.beam_indices[dec.chosen - 1]
            stage_correct.append(chosen_idx == beam_2d_index(s, truth))
        out.append((t, rec.success, tuple(stage_correct), rec.total_transmissions))
    return out


def run_localization_trials(
    cfg: ScenarioConfig,
    cb: Codebook,
    schedule: SnapshotSchedule,
    plan: ExperimentPlan,
    point_index: int,
) -> list:
    """All trials of one power point; order-stable under any parallel degree."""
    indices = list(range(plan.trials))
    if plan.parallel <= 1:
        blocks = [_run_trial_block((cfg, cb, schedule, plan.master_seed, plan.kind, point_index, indices))]
    else:
        n_chunks = min(plan.parallel * 4, max(1, plan.trials))
        chunks = [indices[i::n_chunks] for i in range(n_chunks)]
        args = [
            (cfg, cb, schedule, plan.master_seed, plan.kind, point_index, chunk)
            for chunk in chunks
            if chunk
        ]
        with ProcessPoolExecutor(max_workers=plan.parallel) as pool:
            blocks = list(pool.map(_run_trial_block, args))
    merged = [r for block in blocks for r in block]
    merged.sort(key=lambda r: r[0])
    return merged


def run_experiment(plan: ExperimentPlan, cfg: ScenarioConfig, cb: Codebook | None = None) -> ResultTable:
    """Execute the planned sweep and return the result table."""
    plan.validate()
    table = ResultTable()
    chash = config_hash(cfg, plan)
    meta = dict(experiment=plan.kind, trials=plan.trials, master_seed=plan.master_seed, config_hash=chash)

    if plan.kind == "codebook-report":
        book = get_codebook(cfg, plan, cb)
        stats = mask_fidelity(book, cfg)
        for st in stats:
            detail = f"stage={st.stage};beam={st.beam};axis={st.axis}"
            table.add(metric="mask_on_mean", detail=detail, value=st.on_mean, power="", **meta)
            table.add(metric="mask_off_mean", detail=detail, value=st.off_mean, power="", **meta)
        for sb in book.stages:
            v_b_axis = cfg.v_b.vx
            hpw = half_power_width(sb.w_x[: sb.l_s, 0], v_b_axis, book.spacing)
            table.add(
                metric="half_power_width",
                detail=f"stage={sb.stage};beam=1;axis=x",
                value=hpw,
                power="",
                **meta,
            )
            for i in range(sb.n_beams_axis):
                table.add(
                    metric="design_residual",
                    detail=f"stage={sb.stage};beam={i + 1};axis=x",
                    value=float(sb.residuals_x[i]),
                    power="",
                    **meta,
                )
        return table

    book = get_codebook(cfg, plan, cb)

    for p_idx, power in enumerate(plan.power_list):
        cfg_p = cfg.with_power(power)

        if plan.kind == "stage-error-vs-P":
            schedule, _ = resolve_schedule(cfg_p, plan, book)
            scene = make_scene(cfg_p)
            for s in range(1, cfg_p.n_stages + 1):
                rng = aux_rng(plan.master_seed, plan.kind, p_idx, 100 + s)
                err = stage_error(scene, book, s, schedule.t_s[s - 1], plan.trials, rng)
                hw = wilson_halfwidth(int(round(err * plan.trials)), plan.trials)
                table.add(
                    power=power,
                    metric="stage_error",
                    detail=f"stage={s};T={schedule.t_s[s - 1]}",
                    value=err,
                    ci_halfwidth=hw,
                    **meta,
                )

        elif plan.kind == "snapshots-vs-P":
            schedule, calibs = resolve_schedule(cfg_p, plan, book)
            for s, res in enumerate(calibs, start=1):
                detail = f"stage={s};feasible={int(res.feasible)}"
                table.add(
                    power=power,
                    metric="calibrated_snapshots",
                    detail=detail,
                    value=float(res.t_s) if res.feasible else float("nan"),
                    **meta,
                )
                if res.feasible:
                    hw = wilson_halfwidth(int(round(res.error_at_t * res.trials)), res.trials)
                    table.add(
                        power=power,
                        metric="stage_error_at_calibrated_T",
                        detail=f"stage={s};T={res.t_s}",
                        value=res.error_at_t,
                        ci_halfwidth=hw,
                        **meta,
                    )

        elif plan.kind == "overall-error-vs-P":
            schedule, _ = resolve_schedule(cfg_p, plan, book)
            outcomes = run_localization_trials(cfg_p, book, schedule, plan, p_idx)
            n = len(outcomes)
            wrong = sum(1 for o in outcomes if not o[1])
            table.add(
                power=power,
                metric="overall_error",
                detail=f"schedule={'/'.join(str(t) for t in schedule.t_s)}",
                value=wrong / n,
                ci_halfwidth=wilson_halfwidth(wrong, n),
                **meta,
            )
            n_stages = cfg_p.n_stages
            for s in range(1, n_stages + 1):
                eligible = [o for o in outcomes if all(o[2][: s - 1])]
                errs = sum(1 for o in eligible if not o[2][s - 1])
                if eligible:
                    table.add(
                        power=power,
                        metric="stage_error_conditional",
                        detail=f"stage={s};T={schedule.t_s[s - 1]};n={len(eligible)}",
                        value=errs / len(eligible),
                        ci_halfwidth=wilson_halfwidth(errs, len(eligible)),
                        **meta,
                    )
            table.add(
                power=power,
                metric="transmissions_hierarchical",
                detail="",
                value=float(hierarchical_transmissions(schedule)),
                **meta,
            )

        elif plan.kind == "se-vs-P":
            scenarios = [
                ("benchmark", comms.comm_phase_profile(cfg_p)),
                ("stage-1", comms.stage_phase_profile(book, 1)),
                (f"stage-{book.n_stages}", comms.stage_phase_profile(book, book.n_stages)),
                ("no-ris", None),
            ]
            for tag_idx, (tag, omega) in enumerate(scenarios):
                rng = aux_rng(plan.master_seed, plan.kind, p_idx, 200 + tag_idx)
                est = comms.average_se(cfg_p, omega, plan.trials, rng)
                table.add(
                    power=power,
                    metric="spectral_efficiency",
                    detail=f"scenario={tag}",
                    value=est.mean,
                    ci_halfwidth=est.halfwidth,
                    **meta,
                )

        elif plan.kind == "transmission-count":
            schedule, _ = resolve_schedule(cfg_p, plan, book)
            table.add(
                power=power,
                metric="transmissions_hierarchical",
                detail=f"schedule={'/'.join(str(t) for t in schedule.t_s)}",
                value=float(hierarchical_transmissions(schedule)),
                **meta,
            )
            table.add(
                power=power,
                metric="transmissions_exhaustive",
                detail=f"t_per_beam={plan.t_per_beam}",
                value=float(exhaustive_transmissions(cfg_p.grid_size, plan.t_per_beam)),
                **meta,
            )

    return table


def beampattern_table(cfg: ScenarioConfig, cb: Codebook) -> list:
    """Raw per-beam axis response magnitudes over the grid, for plotting."""
    grid = direction_grid(cb.d)
    rows = []
    for book in cb.stages:
        for axis, v_b_axis in (("x", cfg.v_b.vx), ("y", cfg.v_b.vy)):
            resp = sensing_response(book, v_b_axis, grid, cb.spacing, axis)
            for i in range(book.n_beams_axis):
                for j in range(cb.d):
                    rows.append(
                        {
                            "stage": book.stage,
                            "axis": axis,
                            "beam": i + 1,
                            "grid_index": j + 1,
                            "v": float(grid[j]),
                            "response_mag": float(resp[j, i]),
                        }
                    )
    return rows


def beampattern_csv(cfg: ScenarioConfig, cb: Codebook, path: str):
    rows = beampattern_table(cfg, cb)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["stage", "axis", "beam", "grid_index", "v", "response_mag"])
        writer.writeheader()
        for row in rows:
            row = dict(row, v=_fmt(row["v"]), response_mag=_fmt(row["response_mag"]))
            writer.writerow(row)
