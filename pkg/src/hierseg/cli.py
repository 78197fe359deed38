"""Command-line surface: build hierarchies, export curves, render cuts.

Subcommands:
    cluster   Ward clustering of the input image's pixels -> hierarchy dump
    segment   conventional adjacent-region merging         -> hierarchy dump
    convert   adjacent merging + immediate restructuring   -> hierarchy dump
    asi       fixed-g improvement of a hierarchy            -> hierarchy dump
    curve     error/sigma curve of a dumped hierarchy       -> CSV
    render    approximation image at a given cluster count  -> PGM/PPM
    oracle    exhaustive optimum for tiny images            -> text
    dump      validate and re-emit a hierarchy dump         -> dump

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys

from .asi import asi_improve
from .hierarchy import REL_EPSILON
from .io import (
    export_curve,
    read_hierarchy_dump,
    render_partition,
    write_hierarchy_dump,
)
from .oracle import optimal_connected_partition, optimal_partition
from .pnm import PnmError, image_stats, load_image
from .segmentation import greedy_segment, segment_restructured
from .stats import ClusterStats, cluster_error
from .ward import ward_cluster

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="input file path")
    common.add_argument("--output", help="output file path")
    common.add_argument("--epsilon", type=float, default=REL_EPSILON,
                        help="relative convexity tolerance (default 1e-9)")

    p = _Parser(prog="hierseg",
                description="hierarchical pixel clustering and image segmentation")
    sub = p.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("cluster", parents=[common],
                        help="Ward clustering of the image pixels")
    sp.set_defaults(func=_cmd_cluster)

    sp = sub.add_parser("segment", parents=[common],
                        help="conventional adjacent-segment merging")
    sp.set_defaults(func=_cmd_segment)

    sp = sub.add_parser("convert", parents=[common],
                        help="segmentation-to-clustering conversion (restructured)")
    sp.set_defaults(func=_cmd_convert)

    sp = sub.add_parser("asi", parents=[common],
                        help="improve the g-cluster partition of a hierarchy")
    sp.add_argument("--g", type=int, required=True, help="cluster count to keep")
    sp.add_argument("--mode", choices=["clustering", "segmentation"],
                    default="clustering")
    sp.add_argument("--hierarchy",
                    help="hierarchy dump to improve (default: run convert)")
    sp.set_defaults(func=_cmd_asi)

    sp = sub.add_parser("curve", parents=[common],
                        help="export the error curve of a hierarchy dump")
    sp.add_argument("--gmax", type=int, default=1000,
                    help="largest cluster count to export (default 1000)")
    sp.set_defaults(func=_cmd_curve)

    sp = sub.add_parser("render", parents=[common],
                        help="render the g-cluster approximation of the image")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--hierarchy",
                    help="hierarchy dump to cut (default: run convert)")
    sp.set_defaults(func=_cmd_render)

    sp = sub.add_parser("oracle", parents=[common],
                        help="exhaustive optimal partition of a tiny image")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--mode", choices=["clustering", "segmentation"],
                    default="clustering")
    sp.set_defaults(func=_cmd_oracle)

    sp = sub.add_parser("dump", parents=[common],
                        help="validate a hierarchy dump and re-emit it")
    sp.set_defaults(func=_cmd_dump)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (PnmError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _pixel_items(image) -> list[ClusterStats]:
    return [
        ClusterStats(1, tuple(int(v) for v in p), sum(int(v) * int(v) for v in p))
        for p in image.pixel_rows()
    ]


def _require_output(args) -> str:
    if not args.output:
        raise ValueError("this command needs --output")
    return args.output


def _cmd_cluster(args) -> int:
    image = load_image(args.input)
    h = ward_cluster(_pixel_items(image))
    write_hierarchy_dump(h, _require_output(args))
    return 0


def _cmd_segment(args) -> int:
    image = load_image(args.input)
    h = greedy_segment(image)
    write_hierarchy_dump(h, _require_output(args))
    return 0


def _cmd_convert(args) -> int:
    image = load_image(args.input)
    h = segment_restructured(image, epsilon=_abs_eps(args, image))
    write_hierarchy_dump(h, _require_output(args))
    return 0


def _abs_eps(args, image):
    return args.epsilon * cluster_error(image_stats(image))


def _hierarchy_for(args, image):
    """The hierarchy to operate on: a rebuilt dump, or a fresh conversion."""
    if args.hierarchy:
        dump = read_hierarchy_dump(args.hierarchy)
        return dump.rebuild(_pixel_items(image))
    return segment_restructured(image, epsilon=_abs_eps(args, image))


def _cmd_asi(args) -> int:
    image = load_image(args.input)
    h = _hierarchy_for(args, image)
    shape = (image.width, image.height)
    out, _ = asi_improve(h, args.g, mode=args.mode, shape=shape,
                         epsilon=_abs_eps(args, image))
    write_hierarchy_dump(out, _require_output(args))
    return 0


def _cmd_curve(args) -> int:
    dump = read_hierarchy_dump(args.input)
    if args.gmax < 1:
        raise ValueError("--gmax must be at least 1")
    curve = dump.error_curve(min(args.gmax, dump.n_leaves))
    export_curve(curve, _require_output(args))
    return 0


def _cmd_render(args) -> int:
    image = load_image(args.input)
    h = _hierarchy_for(args, image)
    partition = h.cut_at(args.g)
    render_partition(image, partition, _require_output(args))
    return 0


def _cmd_oracle(args) -> int:
    image = load_image(args.input)
    if args.mode == "clustering":
        labels, e = optimal_partition(_pixel_items(image), args.g)
    else:
        labels, e = optimal_connected_partition(image, args.g)
    text = f"E {e!r}\nlabels {' '.join(str(int(v)) for v in labels)}\n"
    if args.output:
        with open(args.output, "w", encoding="ascii") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_dump(args) -> int:
    dump = read_hierarchy_dump(args.input)
    write_hierarchy_dump(dump, _require_output(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
