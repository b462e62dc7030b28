"""Write the local-versus-global ranking scenario as CSV series for plotting.

Two files: the 21 shifted curves, and every depth of every curve.

    python3 scripts/global_vs_local.py --seed 0 --out results
"""

import argparse
from pathlib import Path

from fdepth.datasets import write_curves_csv
from fdepth.experiments import global_vs_local


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sc = global_vs_local(args.seed)
    write_curves_csv(out / "global_vs_local_curves.csv", sc.sample.grid.points, sc.sample.values)
    names = list(sc.depths)
    lines = ["curve," + ",".join(names)]
    for i in range(sc.sample.n):
        lines.append(f"{i}," + ",".join(f"{sc.depths[k][i]:.10g}" for k in names))
    (out / "global_vs_local_depths.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for k in names:
        where = "deepest" if sc.is_deepest(k) else "least deep" if sc.is_least_deep(k) else "in between"
        print(f"{k}: lone curve is {where}")


if __name__ == "__main__":
    main()
