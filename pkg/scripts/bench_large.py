#!/usr/bin/env python3
"""Timing harness for the large-scale path: orbit scan, coloring, raster,
PNG encode and CSV dump for a 9-million-point set.

Usage: python scripts/bench_large.py [--n 9114361 --omega 3082638]
"""

import argparse
import io
import sys
import time

from gaussianperiods import RenderSpec, compute_period_set, rasterize


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=9_114_361)
    parser.add_argument("--omega", type=int, default=3_082_638)
    parser.add_argument("--c", type=int, default=1)
    parser.add_argument("--size", type=int, default=2000)
    parser.add_argument("--csv", action="store_true", help="also time the CSV dump")
    args = parser.parse_args()

    t0 = time.time()
    pset = compute_period_set(args.n, args.omega, args.c)
    t_compute = time.time() - t0
    print(f"compute: {t_compute:.2f}s ({len(pset.reps)} orbits, d={pset.params.d})")

    t0 = time.time()
    img = rasterize(pset, RenderSpec(width=args.size, height=args.size, point_radius=1))
    t_raster = time.time() - t0
    print(f"raster:  {t_raster:.2f}s ({args.size}x{args.size})")

    t0 = time.time()
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    print(f"encode:  {time.time() - t0:.2f}s ({len(buf.getvalue()) / 1e6:.1f} MB PNG)")

    if args.csv:
        t0 = time.time()
        sink = io.StringIO()
        pset.to_csv(sink)
        print(f"csv:     {time.time() - t0:.2f}s ({sink.tell() / 1e6:.1f} MB)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
