"""Run the simulated studies and write one markdown table per model.

    python3 scripts/run_simulations.py --replications 50 --workers 1 --out results
"""

import argparse
import time
from dataclasses import replace
from pathlib import Path

from fdepth.experiments import emit_cv_table, emit_table, load_config, run_experiment, summarize_results

CONFIGS = Path(__file__).parent / "configs"
MODELS = ("cgp1", "cgp2", "cgp1_out", "cgp2_out", "cgp3", "cgp4")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--models", nargs="+", default=list(MODELS), choices=MODELS)
    parser.add_argument("--replications", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.models:
        cfg = load_config(CONFIGS / f"{name}.ini")
        if args.replications:
            cfg = replace(cfg, replications=args.replications)
        if args.seed is not None:
            cfg = replace(cfg, master_seed=args.seed)
        start = time.perf_counter()
        summary = summarize_results(run_experiment(cfg, workers=args.workers), cfg)
        text = f"# {cfg.source.name}, {cfg.replications} replications\n\n"
        text += emit_table(summary) + "\n" + emit_cv_table(summary)
        (out / f"{name}.md").write_text(text, encoding="utf-8")
        print(f"{name}: {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
