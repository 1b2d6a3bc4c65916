#!/usr/bin/env python3
"""Support-scale sweep: T*_eta decreasing, T* W0 ~ const (1/W0 law).

Usage: python scripts/sweep_eta.py [--workers 2]
"""

import argparse

from elwave.config import dump_config, preset_paper_desk
from elwave.pipeline import run_tasks_cached, sweep_configs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    tasks = [{"name": name, "kind": "preset", "config": text}
             for name, text in sweep_configs(preset_paper_desk(), "eta")]
    results = run_tasks_cached(tasks, workers=args.workers)
    print(f"\n{'eta':>8} {'W0':>10} {'T_num':>10} {'T_num*W0':>10}")
    for t in tasks:
        r = results[t["name"]]
        s = r["shock"]
        print(f"{r['eta']:>8} {r['w0']:>10.5f} {s['T_num']:>10.4f} "
              f"{s['T_num'] * r['w0']:>10.5f}")


if __name__ == "__main__":
    main()
