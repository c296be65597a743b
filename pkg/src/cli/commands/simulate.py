# src/cli/commands/simulate.py
"""
`simulate` subcommand: draw datasets from a spatial data generating
process, or run the OLS bias and parameter recovery experiments.
"""
import re
from pathlib import Path
from typing import Any, Dict, List

import structlog

from src.cli.commands import CommandResult, float_list, format_number
from src.cli.services.data_manager import DataManager
from src.core import BiasReport, ConfigError, DgpSpec, RecoveryReport, RunConfig, config
from src.spatial.simulate import generate, ols_bias_experiment, recovery_experiment
from src.spatial.weights import SpatialWeights, lattice_weights, normalize

logger = structlog.get_logger(__name__)

LATTICE_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def add_parser(subparsers, parents):
    parser = subparsers.add_parser("simulate", parents=parents, help="Simulate spatial datasets and experiments")
    parser.add_argument("--model", required=True, help="Data generating model: ols, slx, sar, sem, sdm, sdem")
    parser.add_argument("--rho", type=float, default=0.0, help="Spatial lag parameter (SAR, SDM)")
    parser.add_argument("--lambda", dest="lambda_", type=float, default=0.0, help="Spatial error parameter (SEM, SDEM)")
    parser.add_argument("--beta", required=True, help="Comma-separated covariate coefficients")
    parser.add_argument("--theta", help="Comma-separated WX coefficients (SLX, SDM, SDEM)")
    parser.add_argument("--sigma", type=float, default=1.0, help="Innovation standard deviation")
    parser.add_argument("--intercept", type=float, default=0.0, help="Intercept alpha")
    parser.add_argument("--weights", type=Path, help="Edge-list CSV defining the units")
    parser.add_argument("--lattice", default="20x20", help="Regular grid ROWSxCOLS used without --weights")
    parser.add_argument("--contiguity", choices=["rook", "queen"], default="rook", help="Lattice neighbour rule")
    parser.add_argument("--replications", type=int, default=1, help="Datasets or Monte Carlo replications")
    parser.add_argument("--bias-experiment", action="store_true", help="OLS omitted-variable bias on SAR data")
    parser.add_argument(
        "--recovery", nargs="?", const="", metavar="MODEL",
        help="Parameter recovery; fits MODEL (default: the generating model)"
    )
    parser.set_defaults(handler=handle)
    return parser


def _weights(args, manager: DataManager, how) -> SpatialWeights:
    if args.weights is not None:
        return manager.load_weights(args.weights, how=how)
    match = LATTICE_PATTERN.match(args.lattice or "")
    if match is None:
        raise ConfigError("--lattice expects ROWSxCOLS, for example 20x20", {"value": args.lattice})
    return normalize(lattice_weights(int(match.group(1)), int(match.group(2)), args.contiguity), how)


def _spec(args, seed: int) -> DgpSpec:
    return DgpSpec(
        kind=args.model,
        rho=args.rho,
        lambda_=args.lambda_,
        alpha=args.intercept,
        beta=float_list(args.beta, "--beta"),
        theta=float_list(args.theta, "--theta"),
        sigma=args.sigma,
        seed=seed,
    )


def render_bias(report: BiasReport) -> str:
    lines = [f"OLS on SAR data: rho = {report.rho}, n = {report.n}, {report.n_reps} replications (seed {report.seed})"]
    lines.append(f"{'covariate':<12}{'true':>10}{'mean OLS':>12}{'bias':>10}{'MC se':>10}{'cov(x,Wy)':>12}{'sign ok':>9}")
    for item in report.covariates:
        lines.append(
            f"{item.name:<12}{format_number(item.true_beta):>10}{format_number(item.mean_estimate):>12}"
            f"{format_number(item.mean_bias):>10}{format_number(item.mc_se):>10}"
            f"{format_number(item.mean_cov_x_wy):>12}{str(item.sign_agrees):>9}"
        )
    if report.naive_rho_mean is not None:
        lines.append(f"naive Wy coefficient: mean {format_number(report.naive_rho_mean)}, bias {format_number(report.naive_rho_bias)}")
    if report.sar_rho_mean is not None:
        lines.append(f"SAR maximum likelihood rho: mean {format_number(report.sar_rho_mean)}")
    return "\n".join(lines) + "\n"


def render_recovery(report: RecoveryReport) -> str:
    lines = [f"{report.model.value} recovery: n = {report.n}, {report.n_reps} replications (seed {report.seed})"]
    lines.append(f"{'parameter':<16}{'true':>10}{'mean':>10}{'bias':>10}{'rmse':>10}{'coverage':>10}")
    for item in report.parameters:
        lines.append(
            f"{item.name:<16}{format_number(item.true_value):>10}{format_number(item.mean_estimate):>10}"
            f"{format_number(item.bias):>10}{format_number(item.rmse):>10}{format_number(item.coverage, 3):>10}"
        )
    return "\n".join(lines) + "\n"


def _write_datasets(spec: DgpSpec, W: SpatialWeights, replications: int, out: Path, manager: DataManager) -> Dict[str, Any]:
    files: List[str] = []
    for rep in range(replications):
        data = generate(spec, W, replication=rep)
        name = f"data_{rep:04d}.csv"
        manager.csv.write_dataset(data, out / name)
        files.append(name)
    manager.csv.write_edges(W, out / "weights.csv")
    manifest = {
        "spec": spec,
        "n": W.n,
        "replications": replications,
        "normalization": W.normalization.value,
        "weights": "weights.csv",
        "datasets": files,
    }
    manager.json.write(manifest, out / "manifest.json")
    logger.info("datasets_written", directory=str(out), replications=replications, n=W.n)
    return manifest


def handle(args, manager: DataManager) -> CommandResult:
    if args.bias_experiment and args.recovery is not None:
        raise ConfigError("use either --bias-experiment or --recovery, not both")
    if args.replications < 1:
        raise ConfigError("--replications must be at least 1", {"value": args.replications})
    experiment = args.bias_experiment or args.recovery is not None
    if not experiment and args.out is None:
        raise ConfigError("--out DIR is required when writing simulated datasets")

    run = RunConfig(
        subcommand="simulate",
        input_paths={"weights": args.weights} if args.weights is not None else {},
        options={"model": args.model, "replications": args.replications},
        normalize=args.normalize or "row",
        seed=args.seed,
        out=args.out,
        output_format=args.format,
    )
    seed = run.seed if run.seed is not None else config.default_seed
    spec = _spec(args, seed)
    W = _weights(args, manager, run.normalize)

    if args.bias_experiment:
        report = ols_bias_experiment(spec, W, args.replications)
        return CommandResult(payload=report, text=render_bias(report), out=run.out)
    if args.recovery is not None:
        report = recovery_experiment(spec, W, model=args.recovery or None, n_reps=args.replications)
        return CommandResult(payload=report, text=render_recovery(report), out=run.out)

    manifest = _write_datasets(spec, W, args.replications, run.out, manager)
    text = f"wrote {len(manifest['datasets'])} dataset(s) of {W.n} units to {run.out}\n"
    return CommandResult(payload=manifest, text=text, out=None)
