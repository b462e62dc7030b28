"""Time the within-group depths of a 50-curve training sample, plus the
7-percentile KFSD sweep with and without the cross validation step.

    python3 scripts/timing.py --repeats 20
"""

import argparse
import time

import numpy as np

from fdepth.classify import ClassifierSpec, Method, group_depths
from fdepth.core import DEPTH_ORDER, DepthKind, DepthSpec
from fdepth.modelselect import DEFAULT_PERCENTILES, cv_select_percentile, make_cv_plan
from fdepth.simulate import CgpSpec, generate_cgp


def clock(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    train = generate_cgp(CgpSpec("CGP1", n0=25, n1=25, seed=args.seed))
    print("| Task | seconds |\n|---|---|")
    for kind in DEPTH_ORDER:
        spec = DepthSpec.default(kind, percentile=50.0 if kind is DepthKind.KFSD else None, seed=args.seed)
        t = clock(lambda: [group_depths(train, g, spec) for g in (0, 1)], args.repeats)
        print(f"| {kind.value} within-group depths | {t:.4f} |")

    def sweep():
        for p in DEFAULT_PERCENTILES:
            for g in (0, 1):
                group_depths(train, g, DepthSpec(DepthKind.KFSD, bandwidth_percentile=p))

    print(f"| KFSD, 7 percentiles | {clock(sweep, args.repeats):.4f} |")
    wmd = ClassifierSpec(Method.WMD, DepthSpec(DepthKind.KFSD, bandwidth_percentile=15.0))
    plan = make_cv_plan(train, 5, args.seed)
    t = clock(lambda: cv_select_percentile(train, wmd, DEFAULT_PERCENTILES, plan), max(1, args.repeats // 4))
    print(f"| KFSD, 7 percentiles with 5-fold CV (WMD) | {t:.4f} |")


if __name__ == "__main__":
    main()
