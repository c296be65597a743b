# src/cli/commands/impacts.py
"""
`impacts` subcommand: direct, indirect and total effects of saved fits,
optionally with simulated dispersion and a per-unit breakdown.
"""
from pathlib import Path
from typing import Any, Dict, List

from src.cli.commands import CommandResult, format_number
from src.cli.services.data_manager import DataManager
from src.core import ConfigError, ImpactsSummary, ImpactType, Normalization, RunConfig, config
from src.spatial.impacts import impacts_inference, impacts_summary, unit_impacts


def add_parser(subparsers, parents):
    parser = subparsers.add_parser("impacts", parents=parents, help="Direct, indirect and total impacts")
    parser.add_argument("--fit", type=Path, required=True, help="Fits file written by `fit`")
    parser.add_argument("--model", help="Which fit to use (default: every fit in the file)")
    parser.add_argument("--weights", type=Path, help="Edge-list CSV the fit was estimated with")
    parser.add_argument("--draws", type=int, help="Simulation draws for standard deviations and intervals")
    parser.add_argument("--unit-impacts", metavar="COVARIATE", help="Per-unit own/on/from impacts of one covariate")
    parser.set_defaults(handler=handle)
    return parser


def render_text(summaries: List[ImpactsSummary]) -> str:
    lines: List[str] = []
    for summary in summaries:
        rho = f"  rho = {format_number(summary.rho)}" if summary.rho is not None else ""
        lines.append(f"{summary.model.value} ({summary.impact_type.value} spillovers){rho}")
        lines.append(f"{'covariate':<16}{'direct':>12}{'indirect':>12}{'total':>12}")
        for impact in summary.impacts:
            lines.append(
                f"{impact.covariate:<16}{format_number(impact.direct):>12}"
                f"{format_number(impact.indirect):>12}{format_number(impact.total):>12}"
            )
            if impact.direct_inference is not None:
                sds = [getattr(impact, f"{part}_inference").sd for part in ("direct", "indirect", "total")]
                lines.append(f"{'':<16}" + "".join(f"({format_number(sd)})".rjust(12) for sd in sds))
        if summary.n_draws:
            lines.append(f"standard deviations from {summary.n_draws} draws (seed {summary.seed})")
        lines.append("")
    return "\n".join(lines)


def handle(args, manager: DataManager) -> CommandResult:
    inputs = {"fit": args.fit, "weights": args.weights}
    run = RunConfig(
        subcommand="impacts",
        input_paths={role: path for role, path in inputs.items() if path is not None},
        options={"draws": args.draws, "unit_impacts": args.unit_impacts},
        normalize=args.normalize,
        seed=args.seed,
        out=args.out,
        output_format=args.format,
    )
    fits = manager.load_fits(args.fit, args.model)
    needs_weights = any(fit.kind.impact_type == ImpactType.GLOBAL for fit in fits) or args.unit_impacts
    if needs_weights and args.weights is None:
        raise ConfigError("--weights is required for models with a spatial lag of y and for --unit-impacts")

    W = None
    if args.weights is not None:
        saved = fits[0].normalization
        how = run.normalize or (saved if saved != Normalization.RAW else None)
        W = manager.load_fit_weights(args.weights, fits[0].ids, how=how)

    seed = run.seed if run.seed is not None else config.default_seed
    summaries = [
        impacts_inference(fit, W, args.draws, seed) if args.draws else impacts_summary(fit, W)
        for fit in fits
    ]

    results: List[Dict[str, Any]] = []
    for fit, summary in zip(fits, summaries):
        record: Dict[str, Any] = {
            "model": summary.model,
            "impact_type": summary.impact_type,
            "rho": summary.rho,
            "n_draws": summary.n_draws,
            "seed": summary.seed,
            "impacts": [impact.to_flat() for impact in summary.impacts],
        }
        if args.unit_impacts:
            record["units"] = unit_impacts(fit, W, args.unit_impacts)
        results.append(record)

    return CommandResult(payload={"results": results}, text=render_text(summaries), out=run.out)
