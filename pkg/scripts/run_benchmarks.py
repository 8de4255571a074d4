#!/usr/bin/env python3
"""Run the kernel timing harness across sizes and worker counts.

Prints the human-readable table and optionally writes the full JSON report.
Every timed run is checksum-verified against the single-worker reference, so
a wrong-but-fast kernel cannot produce a report.
"""

import argparse
import os
from pathlib import Path

from blurkit.bench import KERNELS, BenchCase, run_bench


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kernels", nargs="+", default=sorted(KERNELS),
                        choices=sorted(KERNELS))
    parser.add_argument("--sizes", nargs="+", type=int, default=[256, 512, 1024])
    parser.add_argument("--workers", nargs="+", type=int,
                        default=sorted({1, 2, len(os.sched_getaffinity(0))}))
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", dest="json_out", default=None)
    args = parser.parse_args()

    cases = [BenchCase(kernel, size, workers)
             for kernel in args.kernels
             for size in args.sizes
             for workers in args.workers]
    report = run_bench(cases, repeats=args.repeats)
    print(report.format_table())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json())
        print(f"\nfull report written to {args.json_out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
