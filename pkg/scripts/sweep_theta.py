#!/usr/bin/env python3
"""Amplitude sweep: bracket product P(theta) and its approach to 1.

Usage: python scripts/sweep_theta.py [--workers 2]
"""

import argparse

from elwave.config import dump_config, preset_paper_desk
from elwave.pipeline import run_tasks_cached, sweep_configs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    tasks = [{"name": name, "kind": "preset", "config": text}
             for name, text in sweep_configs(preset_paper_desk(), "theta")]
    results = run_tasks_cached(tasks, workers=args.workers)
    print(f"\n{'theta':>8} {'W0':>10} {'T_num':>10} {'P':>8} {'|P-1|':>8}")
    for name, _ in [(t["name"], None) for t in tasks]:
        r = results[name]
        s = r["shock"]
        print(f"{r['theta']:>8} {r['w0']:>10.5f} {s['T_num']:>10.4f} "
              f"{s['product_P']:>8.4f} {abs(s['product_P'] - 1):>8.4f}")


if __name__ == "__main__":
    main()
