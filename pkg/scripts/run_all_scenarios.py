"""Run every scenario with its committed defaults and write results/<id>/."""
import argparse
import time
from pathlib import Path

from hydrogauge.scenarios import SCENARIO_IDS, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("ids", nargs="*", default=list(SCENARIO_IDS))
    args = ap.parse_args()
    for sid in args.ids:
        t0 = time.perf_counter()
        paths = run_scenario(sid).write(args.out / sid)
        print(f"{sid}: {len(paths)} files in {time.perf_counter() - t0:.1f} s -> {args.out / sid}")


if __name__ == "__main__":
    main()
