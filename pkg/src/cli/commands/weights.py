# src/cli/commands/weights.py
"""
`weights` subcommand: build weights from an edge list or coordinates,
normalize them, write the canonical edge list and report islands.
"""
from pathlib import Path

from src.cli.commands import CommandResult
from src.cli.services.data_manager import DataManager
from src.core import ConfigError, RunConfig
from src.spatial.weights import (
    detect_islands,
    from_edge_list,
    inverse_distance_weights,
    knn_weights,
    normalize,
)


def add_parser(subparsers, parents):
    parser = subparsers.add_parser(
        "weights",
        parents=parents,
        help="Build, normalize and write a spatial weights edge list"
    )
    parser.add_argument("--edges", type=Path, help="CSV with header src,dst[,weight]")
    parser.add_argument("--coords", type=Path, help="CSV with header id,x,y")
    parser.add_argument("--units", type=Path, help="CSV with an id column listing every unit (keeps islands)")
    parser.add_argument("--symmetrize", action="store_true", help="Add (dst, src) for every (src, dst)")
    parser.add_argument("--knn", type=int, help="k nearest neighbours from --coords")
    parser.add_argument("--inverse-distance", action="store_true", help="Inverse-distance band from --coords")
    parser.add_argument("--alpha", type=float, default=1.0, help="Distance decay exponent")
    parser.add_argument("--cutoff", type=float, default=float("inf"), help="Maximum neighbour distance")
    parser.add_argument("--report", type=Path, help="Write the island report here instead of stdout")
    parser.set_defaults(handler=handle)
    return parser


def _validate(args) -> None:
    if args.edges and args.coords:
        raise ConfigError("use either --edges or --coords, not both")
    if not args.edges and not args.coords:
        raise ConfigError("one of --edges or --coords is required")
    if args.out is None:
        raise ConfigError("--out is required for the weights edge list")
    if args.edges and (args.knn is not None or args.inverse_distance):
        raise ConfigError("--knn and --inverse-distance apply to --coords only")
    if args.coords and (args.knn is not None) == args.inverse_distance:
        raise ConfigError("with --coords choose exactly one of --knn K or --inverse-distance")


def handle(args, manager: DataManager) -> CommandResult:
    _validate(args)
    inputs = {"edges": args.edges, "coords": args.coords, "units": args.units}
    run = RunConfig(
        subcommand="weights",
        input_paths={role: path for role, path in inputs.items() if path is not None},
        options={"knn": args.knn, "inverse_distance": args.inverse_distance, "symmetrize": args.symmetrize},
        normalize=args.normalize,
        seed=args.seed,
        out=args.out,
        output_format=args.format,
    )

    units = manager.csv.read_units(run.input_paths["units"]) if args.units else None
    if args.edges:
        W = from_edge_list(manager.csv.read_edges(args.edges), symmetrize=args.symmetrize, ids=units)
    else:
        ids, coords = manager.csv.read_coords(args.coords)
        if args.knn is not None:
            W = knn_weights(coords, args.knn, ids=ids)
        else:
            W = inverse_distance_weights(coords, alpha=args.alpha, cutoff=args.cutoff, ids=ids)
        if units is not None:
            W = W.reorder(units)

    W = normalize(W, run.normalize)
    manager.csv.write_edges(W, run.out)
    report = detect_islands(W)

    payload = {
        "weights": str(run.out),
        "n": W.n,
        "nnz": W.nnz,
        "normalization": W.normalization.value,
        "s0": W.s0,
        "islands": report,
    }
    text = (
        f"weights: {run.out}\n"
        f"units: {W.n}  links: {W.nnz}  normalization: {W.normalization.value}\n"
        f"islands: {report.count}" + (f" ({', '.join(report.island_ids[:20])})" if report.count else "") + "\n"
    )
    return CommandResult(payload=payload, text=text, out=args.report)
