# src/cli/commands/fit.py
"""
`fit` subcommand: estimate one or all of OLS, SAR, SEM, SLX, SDM, SDEM
and attach likelihood ratio tests against the nested restrictions.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog

from src.cli.commands import CommandResult, float_list, format_number
from src.cli.services.data_manager import DataManager
from src.core import (
    MODEL_ORDER,
    ConfigError,
    EstimationOptions,
    FitResult,
    ModelKind,
    ModelSpec,
    RunConfig,
    ordered_map,
    parse_name_list,
)
from src.spatial.estimators import fit_model, lr_test

logger = structlog.get_logger(__name__)

MODEL_CHOICES = ["ols", "slx", "sar", "sem", "sdm", "sdem", "all"]

# Model each specification is tested against for its spatial terms
SPATIAL_RESTRICTION = {
    ModelKind.SAR: ModelKind.OLS,
    ModelKind.SEM: ModelKind.OLS,
    ModelKind.SLX: ModelKind.OLS,
    ModelKind.SDM: ModelKind.SLX,
    ModelKind.SDEM: ModelKind.SLX,
}


def add_parser(subparsers, parents):
    parser = subparsers.add_parser("fit", parents=parents, help="Estimate spatial regression models")
    parser.add_argument("--data", type=Path, required=True, help="CSV dataset")
    parser.add_argument("--outcome", required=True, help="Outcome column")
    parser.add_argument("--covariates", required=True, help="Comma-separated covariate columns")
    parser.add_argument("--id-column", help="Unit identifier column matching the weights file")
    parser.add_argument("--weights", type=Path, help="Edge-list CSV (required for spatial models)")
    parser.add_argument("--model", choices=MODEL_CHOICES, default="all", help="Model to estimate")
    parser.add_argument("--standardize", action="store_true", help="z-score outcome and covariates")
    parser.add_argument("--drop-islands", action="store_true", help="Remove units without neighbours")
    parser.add_argument("--lag-covariates", help="Comma-separated subset of covariates entering WX")
    parser.add_argument("--rho-bounds", help="Search interval for rho/lambda as lo,hi")
    parser.add_argument("--grid-size", type=int, help="Grid points before refinement")
    parser.set_defaults(handler=handle)
    return parser


def requested_models(choice: str) -> List[ModelKind]:
    return list(MODEL_ORDER) if choice == "all" else [ModelKind.parse(choice)]


def required_models(requested: List[ModelKind]) -> List[ModelKind]:
    """Requested models plus the restrictions their LR tests need, in output order"""
    needed = set(requested) | {ModelKind.OLS}
    needed |= {SPATIAL_RESTRICTION[kind] for kind in requested if kind in SPATIAL_RESTRICTION}
    return [kind for kind in MODEL_ORDER if kind in needed]


def _options(args) -> EstimationOptions:
    bounds = None
    if args.rho_bounds:
        values = float_list(args.rho_bounds, "--rho-bounds")
        if len(values) != 2:
            raise ConfigError("--rho-bounds expects two numbers lo,hi", {"value": args.rho_bounds})
        bounds = (values[0], values[1])
    return EstimationOptions(rho_bounds=bounds, grid_size=args.grid_size)


def _tests(fit: FitResult, by_kind: Dict[ModelKind, FitResult]) -> Dict[str, Any]:
    extra: Dict[str, Any] = {"coefficients": fit.coefficients(), "lr_vs_ols": None, "lr_spatial": None}
    if fit.kind != ModelKind.OLS:
        extra["lr_vs_ols"] = lr_test(by_kind[ModelKind.OLS], fit)
        extra["lr_spatial"] = lr_test(by_kind[SPATIAL_RESTRICTION[fit.kind]], fit)
    return extra


def render_table(fits: List[FitResult], extras: List[Dict[str, Any]]) -> str:
    """Side-by-side coefficient table, estimates over standard errors"""
    terms: List[str] = []
    for fit in fits:
        terms.extend(name for name in fit.param_names if name not in terms)
    label_width = max([len(term) for term in terms] + [12])
    header = "term".ljust(label_width) + "".join(fit.kind.value.rjust(14) for fit in fits)
    lines = [header, "-" * len(header)]

    for term in terms:
        estimates, errors = [], []
        for fit in fits:
            if term in fit.param_names:
                row = fit.coefficients()[fit.param_index(term)]
                estimates.append(format_number(row.estimate))
                errors.append(f"({format_number(row.std_error)})")
            else:
                estimates.append("")
                errors.append("")
        lines.append(term.ljust(label_width) + "".join(e.rjust(14) for e in estimates))
        lines.append("".ljust(label_width) + "".join(e.rjust(14) for e in errors))

    lines.append("-" * len(header))
    stats = [
        ("n", lambda f, x: str(f.n)),
        ("log-likelihood", lambda f, x: format_number(f.loglik, 3)),
        ("AIC", lambda f, x: format_number(f.aic, 3)),
        ("BIC", lambda f, x: format_number(f.bic, 3)),
        ("R2", lambda f, x: format_number(f.r2)),
        ("LR vs OLS", lambda f, x: format_number(x["lr_vs_ols"].statistic, 3) if x["lr_vs_ols"] else "-"),
        ("LR spatial p", lambda f, x: format_number(x["lr_spatial"].p_value) if x["lr_spatial"] else "-"),
    ]
    for label, value in stats:
        lines.append(label.ljust(label_width) + "".join(value(f, x).rjust(14) for f, x in zip(fits, extras)))
    return "\n".join(lines) + "\n"


def handle(args, manager: DataManager) -> CommandResult:
    inputs = {"data": args.data, "weights": args.weights}
    run = RunConfig(
        subcommand="fit",
        input_paths={role: path for role, path in inputs.items() if path is not None},
        options={"model": args.model, "drop_islands": args.drop_islands},
        normalize=args.normalize,
        standardize=args.standardize,
        seed=args.seed,
        out=args.out,
        output_format=args.format,
    )
    covariates = parse_name_list(args.covariates)
    if not covariates:
        raise ConfigError("--covariates names no columns")

    requested = requested_models(args.model)
    spatial = [kind for kind in requested if kind != ModelKind.OLS]
    if spatial and args.weights is None:
        raise ConfigError(f"--weights is required for {', '.join(kind.value for kind in spatial)}")

    data = manager.load_dataset(args.data, args.outcome, covariates, args.id_column, run.standardize)
    W = None
    if args.weights is not None:
        W = manager.load_weights(args.weights, ids=data.ids, how=run.normalize)
        data, W = manager.align(data, W, args.drop_islands)

    lagged = parse_name_list(args.lag_covariates)
    options = _options(args)
    kinds = required_models(requested) if W is not None else [ModelKind.OLS]

    def estimate(kind: ModelKind) -> FitResult:
        spec = ModelSpec(kind=kind, lag_all_covariates=not lagged, lagged_covariates=lagged)
        return fit_model(kind, data, W, options, spec)

    by_kind = dict(zip(kinds, ordered_map(estimate, kinds)))
    fits = [by_kind[kind] for kind in requested]
    extras = [_tests(fit, by_kind) for fit in fits]
    logger.info("models_fitted", models=[fit.kind.value for fit in fits], n=data.n)

    header = {
        "outcome": data.outcome,
        "n": data.n,
        "standardized": run.standardize,
        "normalization": W.normalization.value if W is not None else None,
    }
    payload = manager.json.fits_payload(fits, extras, header)
    return CommandResult(payload=payload, text=render_table(fits, extras), out=run.out)
