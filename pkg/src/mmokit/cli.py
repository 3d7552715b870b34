"""Command line entry points: run experiments, generate location instances,
build reference sets, and render ranking tables."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import LocationDatasetSpec, generate_location_dataset, load_location_json, save_location_json
from .harness import ExperimentConfig, METRICS, aggregate_rank_table, load_records, render_table, run_experiment
from .metrics import build_location_reference, save_reference_json

# facility counts (primary, middle, shopping, subway) of the four bundled
# district presets
DISTRICT_PRESETS = {
    "tianhe": (40, 23, 27, 17),
    "haizhu": (50, 30, 14, 12),
    "yuexiu": (98, 61, 34, 22),
    "panyu": (7, 1, 4, 4),
}


def _parse_counts(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated counts: P,M,S,U")
    try:
        counts = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"counts must be integers, got {text!r}") from None
    return counts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmokit", description="Multimodal multiobjective optimization toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config and persist run records")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.add_argument("--out", required=True, help="directory for run record files")
    p_run.add_argument("--workers", type=int, default=1, help="concurrent runs (default 1)")

    p_gen = sub.add_parser("gen-location", help="generate a seeded location instance")
    p_gen.add_argument("--name", help="instance name (defaults to the district)")
    p_gen.add_argument("--counts", type=_parse_counts, help="facility counts P,M,S,U")
    p_gen.add_argument("--district", choices=sorted(DISTRICT_PRESETS), help="preset counts by district")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output JSON file")

    p_ref = sub.add_parser("reference", help="build a grid reference set for a location instance")
    p_ref.add_argument("--dataset", required=True, help="location instance JSON")
    p_ref.add_argument("--grid", type=int, default=300)
    p_ref.add_argument("--out", required=True, help="output reference JSON file")

    p_tab = sub.add_parser("table", help="aggregate persisted records into a ranking table")
    p_tab.add_argument("--records", required=True, help="directory of run record files")
    p_tab.add_argument("--metric", required=True, choices=sorted(METRICS))
    p_tab.add_argument("--format", default="markdown", choices=["csv", "markdown"])
    p_tab.add_argument("--out", required=True, help="output text file")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        config = ExperimentConfig.from_json(args.config)
        records = run_experiment(config, output_dir=args.out, workers=args.workers)
        print(f"wrote {len(records)} run records to {args.out}")
        return 0
    if args.command == "gen-location":
        if args.counts is None and args.district is None:
            print("gen-location needs --counts or --district", file=sys.stderr)
            return 2
        counts = args.counts if args.counts is not None else DISTRICT_PRESETS[args.district]
        name = args.name or args.district or "location"
        inst = generate_location_dataset(LocationDatasetSpec(name, counts, seed=args.seed))
        save_location_json(inst, args.out)
        print(f"wrote instance {name!r} ({sum(counts)} facilities) to {args.out}")
        return 0
    if args.command == "reference":
        inst = load_location_json(args.dataset)
        ref = build_location_reference(inst, args.grid)
        save_reference_json(ref, args.out)
        print(f"wrote reference set with {len(ref)} points to {args.out}")
        return 0
    # table
    records = load_records(args.records)
    table = aggregate_rank_table(records, args.metric)
    text = render_table(table, args.format)
    Path(args.out).write_text(text)
    print(f"wrote {args.format} table for {args.metric} to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
