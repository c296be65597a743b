# src/cli/commands/diagnose.py
"""
`diagnose` subcommand: Moran's I of a column or of saved residuals, and
the LM tests with the OLS/SAR/SEM selection rule.
"""
from pathlib import Path
from typing import Any, Dict, List

import structlog

from src.cli.commands import CommandResult, format_number
from src.cli.services.data_manager import DataManager
from src.core import ConfigError, MoranResult, Normalization, RunConfig, config, parse_name_list
from src.spatial.diagnostics import lm_tests, morans_i, morans_i_residuals, select_specification
from src.spatial.estimators import fit_ols

logger = structlog.get_logger(__name__)


def add_parser(subparsers, parents):
    parser = subparsers.add_parser("diagnose", parents=parents, help="Spatial autocorrelation diagnostics")
    parser.add_argument("--weights", type=Path, required=True, help="Edge-list CSV")
    parser.add_argument("--data", type=Path, help="CSV dataset")
    parser.add_argument("--id-column", help="Unit identifier column matching the weights file")
    parser.add_argument("--variable", help="Column to test with Moran's I")
    parser.add_argument("--residuals-of", type=Path, help="Fits file whose residuals are tested")
    parser.add_argument("--model", help="Which fit in --residuals-of to use (default: all)")
    parser.add_argument("--lm", action="store_true", help="LM tests on the OLS residuals of --outcome on --covariates")
    parser.add_argument("--outcome", help="Outcome column for --lm")
    parser.add_argument("--covariates", help="Comma-separated covariates for --lm")
    parser.add_argument("--permutations", type=int, help="Permutation draws for Moran's I")
    parser.add_argument(
        "--alternative", choices=["two-sided", "greater", "less"], default="two-sided",
        help="Tail of the permutation test"
    )
    parser.add_argument("--alpha", type=float, default=0.05, help="Significance level of the selection rule")
    parser.set_defaults(handler=handle)
    return parser


def _validate(args) -> None:
    if args.variable and args.residuals_of:
        raise ConfigError("use either --variable or --residuals-of, not both")
    if not (args.variable or args.residuals_of or args.lm):
        raise ConfigError("nothing to diagnose: give --variable, --residuals-of or --lm")
    if (args.variable or args.lm) and args.data is None:
        raise ConfigError("--data is required with --variable and --lm")
    if args.lm and not (args.outcome and args.covariates):
        raise ConfigError("--lm needs --outcome and --covariates")


def render_text(payload: Dict[str, Any]) -> str:
    lines: List[str] = []
    for label, result in payload.get("moran", []):
        lines.append(
            f"Moran's I [{label}]: I = {format_number(result.statistic)}  E[I] = {format_number(result.expectation)}  "
            f"p = {format_number(result.p_value)} ({result.n_permutations} permutations, {result.alternative})"
        )
    if "lm" in payload:
        lm = payload["lm"]
        for name in ("lm_lag", "lm_err", "robust_lm_lag", "robust_lm_err", "sarma"):
            test = getattr(lm, name)
            lines.append(f"{name:<14} {format_number(test.statistic):>10}  df={test.df}  p={format_number(test.p_value)}")
        selection = payload["selection"]
        lines.append(f"selected: {selection.model.value}  ({selection.reason})")
    return "\n".join(lines) + "\n"


def handle(args, manager: DataManager) -> CommandResult:
    _validate(args)
    inputs = {"weights": args.weights, "data": args.data, "residuals_of": args.residuals_of}
    run = RunConfig(
        subcommand="diagnose",
        input_paths={role: path for role, path in inputs.items() if path is not None},
        options={"alternative": args.alternative, "lm": args.lm},
        normalize=args.normalize,
        seed=args.seed,
        out=args.out,
        output_format=args.format,
    )
    n_permutations = args.permutations if args.permutations is not None else config.diagnostics.default_permutations
    seed = run.seed if run.seed is not None else config.default_seed

    moran: List[tuple] = []
    payload: Dict[str, Any] = {}

    if args.variable or args.lm:
        covariates = parse_name_list(args.covariates) if args.lm else []
        outcome = args.outcome if args.lm else args.variable
        data = manager.load_dataset(args.data, outcome, covariates, args.id_column)
        W = manager.load_weights(args.weights, ids=data.ids, how=run.normalize)
        if args.variable:
            values = data.y if args.variable == outcome else manager.load_dataset(
                args.data, args.variable, [], args.id_column
            ).y
            moran.append((args.variable, morans_i(W, values, n_permutations, seed, args.alternative,
                                                  what=f"column '{args.variable}'")))
        if args.lm:
            ols = fit_ols(data)
            lm = lm_tests(ols, W)
            payload["lm"] = lm
            payload["selection"] = select_specification(lm, args.alpha)
            logger.info("lm_tests_completed", selected=payload["selection"].model.value)

    if args.residuals_of:
        fits = manager.load_fits(args.residuals_of, args.model)
        saved = fits[0].normalization
        how = run.normalize or (saved if saved != Normalization.RAW else None)
        W = manager.load_fit_weights(args.weights, fits[0].ids, how=how)
        for fit in fits:
            moran.append((f"{fit.kind.value} residuals", morans_i_residuals(fit, W, n_permutations, seed, args.alternative)))

    output: Dict[str, Any] = {}
    if moran:
        output["moran"] = [{"target": label, **_moran_record(result)} for label, result in moran]
    output.update(payload)
    text = render_text({**payload, "moran": moran})
    return CommandResult(payload=output, text=text, out=run.out)


def _moran_record(result: MoranResult) -> Dict[str, Any]:
    return {"I": result.I, **result.model_dump()}
