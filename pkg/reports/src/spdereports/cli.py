"""spde-report: figures from a stableheat run directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import BundleError, ReportBundle
from .figures import plot_diagnostic_ladder, plot_field, plot_holder, plot_moment_decay


def _eta_c(bundle: ReportBundle) -> float | None:
    # A7's lag CSV comes from the alpha = 1.5 ensemble
    val = bundle.verdict_statistic("A7", "median_eta_1.5")
    alpha = 1.5 if val is not None else bundle.config_value("model.alpha")
    return None if alpha is None else 2.0 / float(alpha) - 1.0


def run_one(kind: str, bundle: ReportBundle, figdir: Path) -> dict:
    figdir.mkdir(parents=True, exist_ok=True)
    if kind == "holder":
        return plot_holder(bundle.csv_path(bundle.HOLDER), figdir / "holder.png",
                           eta_c=_eta_c(bundle))
    if kind == "decay":
        return plot_moment_decay(bundle.csv_path(bundle.DECAY), figdir / "moment_decay.png",
                                 harness_slope=bundle.verdict_statistic("A6", "slope"))
    if kind == "field":
        return plot_field(bundle.csv_path(bundle.FIELD), figdir / "field.png")
    if kind == "ladder":
        return plot_diagnostic_ladder(bundle.csv_path(bundle.LADDER), figdir / "ladder.png")
    raise ValueError(kind)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="spde-report", description=__doc__)
    parser.add_argument("command", choices=["holder", "decay", "field", "ladder", "all"])
    parser.add_argument("--in", dest="input_dir", required=True, metavar="DIR",
                        help="harness output directory (contains manifest.json)")
    parser.add_argument("--figures", default=None, metavar="DIR",
                        help="where to write images (default: DIR/figures)")
    args = parser.parse_args(argv)

    try:
        bundle = ReportBundle(args.input_dir)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    figdir = Path(args.figures) if args.figures else Path(args.input_dir) / "figures"
    kinds = ["holder", "decay", "field", "ladder"] if args.command == "all" else [args.command]
    for kind in kinds:
        try:
            info = run_one(kind, bundle, figdir)
        except BundleError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"{kind}: {info}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
