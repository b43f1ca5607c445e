#!/usr/bin/env python3
"""Render a gallery of showcase parameter sets to PNG.

Each entry is (n, omega, c); the big ones take a few seconds each.
Usage: python scripts/render_gallery.py [outdir] [--size 1200]
"""

import argparse
import sys
import time
from pathlib import Path

from gaussianperiods import RenderSpec, compute_period_set, render_to_file

GALLERY = [
    (27, 2, 9),
    (12, 5, 3),
    (12, 5, 4),
    (29070, 1189, 3),
    (70091, 21792, 7),
    (255255, 254, 7),
    (1481151, 54184, 21),
    (37367, 608, 11),
    (185925, 766, 25),
    (82677, 8147, 21),
    (3019, 239, 1),
    (13063, 1347, 1),
    (9114361, 3082638, 1),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="gallery")
    parser.add_argument("--size", type=int, default=1200)
    parser.add_argument("--point-radius", type=int, default=1)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = RenderSpec(width=args.size, height=args.size, point_radius=args.point_radius)
    for n, omega, c in GALLERY:
        t0 = time.time()
        pset = compute_period_set(n, omega, c)
        path = outdir / f"n{n}_w{omega}_c{c}.png"
        render_to_file(pset, spec, path)
        print(
            f"{path} d={pset.params.d} orbits={len(pset.reps)} "
            f"classes={pset.class_count} {time.time() - t0:.2f}s"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
