"""Command line entry point: ``plot <experiment> --in CSV --out FILE``.

Output is SVG unless ``--png`` asks for a raster.  The config hash recorded
in the CSV's sidecar is embedded in the image metadata so a figure can be
traced back to the sweep that produced it, and timestamps are suppressed so
rerunning the same table yields a byte-identical file.
"""

from __future__ import annotations

import argparse
import sys

from . import figures, io

_NORMALIZED_OK = ("threshold", "alpha")


def build_figure(family: str, table, normalized: bool = False):
    if family == "meas-error":
        return figures.plot_measurement_error(table)
    if family == "chain1d":
        return figures.plot_chain1d(table)
    if family == "threshold":
        return figures.plot_threshold_scatter(table, normalized=normalized)
    if family == "alpha":
        return figures.plot_alpha(table, normalized=normalized)
    raise ValueError(f"unknown figure family {family!r}")


def save_figure(fig, out: str, config_hash: str = "", png: bool = False):
    """Write ``fig`` deterministically, tagging it with the config hash."""
    import matplotlib.pyplot as plt

    metadata = {"Description": f"config_sha256={config_hash}"}
    if png:
        fig.savefig(out, format="png", dpi=160, metadata=metadata)
    else:
        # Date=None drops the creation timestamp the SVG backend would embed.
        metadata["Date"] = None
        fig.savefig(out, format="svg", metadata=metadata)
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot",
        description="Regenerate a figure family from a sweep CSV table.")
    ap.add_argument("experiment", choices=sorted(io.FAMILY_TABLES),
                    help="which figure family to draw")
    ap.add_argument("--in", dest="table", required=True, metavar="CSV",
                    help="harness output table")
    ap.add_argument("--out", required=True, metavar="FILE",
                    help="image file to write")
    ap.add_argument("--png", action="store_true",
                    help="rasterize instead of the default SVG")
    ap.add_argument("--normalized", action="store_true",
                    help="threshold: scale gamma_c by nbar; "
                         "alpha: plot against (gamma_c-gamma)/gamma_c")
    args = ap.parse_args(argv)

    if args.normalized and args.experiment not in _NORMALIZED_OK:
        print(f"plot: --normalized does not apply to {args.experiment}",
              file=sys.stderr)
        return 2
    try:
        table = io.read_table(args.table, args.experiment)
        fig = build_figure(args.experiment, table, normalized=args.normalized)
    except (OSError, ValueError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 1
    save_figure(fig, args.out, config_hash=table.config_hash, png=args.png)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
