"""Standalone figure generation: `make_figures <bundle_dir> <out_dir>`.

Reads aggregate.csv, histograms.csv, and crosstab.csv from a bundle directory
and writes curves.svg, histograms.svg, and crosstab.svg.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import FigureError, plot_crosstab, plot_curves, plot_histograms

BUNDLE_PLOTS = (
    ("aggregate.csv", "curves.svg", plot_curves),
    ("histograms.csv", "histograms.svg", plot_histograms),
    ("crosstab.csv", "crosstab.svg", plot_crosstab),
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="make_figures",
        description="Render figures from a siggame CSV bundle",
    )
    parser.add_argument("bundle_dir", help="directory containing the CSV bundle")
    parser.add_argument("out_dir", help="directory to write figures into")
    args = parser.parse_args(argv)

    bundle = Path(args.bundle_dir)
    if not bundle.is_dir():
        print(f"figure error: {bundle} is not a directory", file=sys.stderr)
        return 2
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    made = 0
    for csv_name, image_name, plot in BUNDLE_PLOTS:
        source = bundle / csv_name
        if not source.exists():
            print(f"skipping {image_name}: {source} not present")
            continue
        try:
            written = plot(source, out / image_name)
        except FigureError as exc:
            print(f"figure error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {written}")
        made += 1
    if made == 0:
        print(f"figure error: no bundle CSVs found in {bundle}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
