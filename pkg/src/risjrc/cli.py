"""Command-line front end over the experiment harness."""

from __future__ import annotations

import argparse
import sys

from .channels import ScenarioConfig
from .codebook import build_codebook, load_codebook, save_codebook
from .harness import (
    ExperimentPlan,
    beampattern_csv,
    config_hash,
    emit_csv,
    get_codebook,
    load_config,
    resolve_schedule,
    run_experiment,
    trial_rng,
    trial_trace_csv,
    write_default_config,
)
from .localization import hierarchical_localize, make_scene


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="scenario/experiment config file (defaults apply if omitted)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--trials", type=int, help="trials-per-point override")
    p.add_argument("--out", help="output file path")
    p.add_argument("--codebook", help="load a previously designed codebook file")
    p.add_argument("--parallel", type=int, help="worker process count")


def _load(args, kind: str | None = None):
    if args.config:
        cfg, plan = load_config(args.config)
    else:
        cfg, plan = ScenarioConfig(), ExperimentPlan()
    if kind is not None:
        plan.kind = kind
    if args.seed is not None:
        plan.master_seed = args.seed
    if args.trials is not None:
        plan.trials = args.trials
    if args.parallel is not None:
        plan.parallel = args.parallel
    cb = load_codebook(args.codebook) if args.codebook else None
    return cfg, plan, cb


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="risjrc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("design-codebook", "design the hierarchical codebook and write it to a file"),
        ("localize", "run one localization trial and write its verbose trace"),
        ("stage-error", "isolated per-stage error probabilities over the power sweep"),
        ("calibrate", "calibrated per-stage snapshot counts over the power sweep"),
        ("overall-error", "full-run localization error over the power sweep"),
        ("se-sweep", "average user spectral efficiency per scenario over the sweep"),
        ("count-transmissions", "hierarchical vs exhaustive transmission counts"),
        ("beampattern", "dump per-beam axis response magnitudes over the grid"),
        ("write-config", "write the default config file"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    args = parser.parse_args(argv)

    if args.command == "write-config":
        path = args.out or "risjrc.cfg"
        write_default_config(path)
        print(f"wrote {path}")
        return 0

    kind_map = {
        "stage-error": "stage-error-vs-P",
        "calibrate": "snapshots-vs-P",
        "overall-error": "overall-error-vs-P",
        "se-sweep": "se-vs-P",
        "count-transmissions": "transmission-count",
        "beampattern": "codebook-report",
        "design-codebook": "codebook-report",
        "localize": "overall-error-vs-P",
    }
    cfg, plan, cb = _load(args, kind_map[args.command])

    if args.command == "design-codebook":
        out = args.out or "codebook.riscb"
        book = build_codebook(cfg, schedule=plan.schedule_ls, solver=plan.solver, seed=plan.design_seed)
        save_codebook(book, out)
        warn = sum(len(b.quality_warnings) for b in book.stages)
        print(f"wrote {out} (D={book.d}, N_r={book.n_ris}, schedule={book.schedule}, warnings={warn})")
        return 0

    if args.command == "localize":
        book = get_codebook(cfg, plan, cb)
        power = plan.power_list[0]
        cfg_p = cfg.with_power(power)
        schedule, _ = resolve_schedule(cfg_p, plan, book)
        scene = make_scene(cfg_p)
        rng = trial_rng(plan.master_seed, plan.kind, 0, 0)
        rec = hierarchical_localize(scene, book, schedule, rng)
        for dec in rec.stages:
            print(
                f"stage {dec.stage}: beams {dec.beam_indices} "
                f"stats {[f'{v:.3e}' for v in dec.statistics]} -> chose {dec.chosen} (T={dec.t_s})"
            )
        print(
            f"true cell {rec.true_cell}, estimated {rec.est_cell}, "
            f"success={rec.success}, transmissions={rec.total_transmissions}"
        )
        if args.out:
            trial_trace_csv([rec], args.out, power, plan.master_seed)
            print(f"wrote {args.out}")
        return 0

    if args.command == "beampattern":
        book = get_codebook(cfg, plan, cb)
        out = args.out or "beampattern.csv"
        beampattern_csv(cfg, book, out)
        print(f"wrote {out}")
        return 0

    table = run_experiment(plan, cfg, cb)
    out = args.out or f"{plan.kind}.csv"
    emit_csv(table, out)
    print(f"wrote {out} ({len(table.rows)} rows, config {config_hash(cfg, plan)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
