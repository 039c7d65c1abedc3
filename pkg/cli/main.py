"""
Command-line front end.

    python -m cli fit --data train.csv --response y --select cp
    python -m cli predict --model model.json --data new.csv
    python -m cli path --data train.csv --response y > path.csv
    python -m cli gensynth --n 150 --p 200 --seed 1 --out synth.csv
    python -m cli benchmark --p 128,256 --n-grid 50,100,150,200,250 --trials 20

stdout carries only the payload (JSON or CSV); diagnostics go to stderr.
Exit codes: 0 success, 1 input error, 2 numeric failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from shared.config import config, env_config
from shared.exceptions import InputError, NumericError, PathFitError
from shared.models import BasisKind, CovariateLaw, Family, FitConfig, SmootherKind, SmootherSpec, SyntheticSpec
from shared.observability import TraceContext, configure_logging, observability
from datasets import augment_irrelevant, generate_synthetic, load_csv, read_numeric_csv, write_csv, write_ground_truth
from selection import BINOMIAL_DISPERSION, compute_path, export_path_csv, risk_estimates, select_model
from selection.path import default_grid, default_sigma2
from selection.risk import effective_df
from smoothers import fit_smoother
from solvers import (
    GroupedDesign,
    fit_model,
    fit_smoothers,
    grouped_lasso,
    lambda_max,
    lasso_cd,
    load_model,
    logistic_lambda_max,
    predict,
)
from benchmark import export_recovery_csv, run_benchmark


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class CliArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    try:
        env_seed = env_config.seed
    except ValueError:
        raise InputError(f"SPAM_SEED must be an integer, got '{env_config.SPAM_SEED}'")
    return env_seed if env_seed is not None else 0


def _emit(payload: str, out: Optional[str]):
    if out:
        Path(out).write_text(payload, encoding='utf-8')
        logger.info(f"wrote {out}")
    else:
        sys.stdout.write(payload)
        if not payload.endswith('\n'):
            sys.stdout.write('\n')
        sys.stdout.flush()


def _smoother_spec(args) -> SmootherSpec:
    fields = {}
    if args.smoother:
        fields['kind'] = SmootherKind(args.smoother)
    if args.truncation is not None:
        fields['truncation'] = args.truncation
    if args.bandwidth is not None:
        fields['bandwidth'] = args.bandwidth
    if args.basis:
        fields['basis'] = BasisKind(args.basis)
    return SmootherSpec(**fields)


def _add_smoother_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--smoother', choices=[k.value for k in SmootherKind])
    parser.add_argument('--truncation', type=int, help="basis size d for the series smoother")
    parser.add_argument('--bandwidth', type=float, help="bandwidth h for the local linear smoother")
    parser.add_argument('--basis', choices=[b.value for b in BasisKind])


def _summary(label: str, support: Sequence[int], fields: dict):
    parts = [f"{label}: active={{{','.join(str(j) for j in support)}}}"]
    parts += [f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in fields.items()]
    print(' '.join(parts), file=sys.stderr)


def cmd_fit(args) -> int:
    if args.mode == 'lasso':
        return _fit_lasso(args)
    if args.mode == 'group-lasso':
        return _fit_group_lasso(args)

    data = load_csv(args.data, args.response, scale=True)
    family = Family.LOGISTIC if args.mode == 'logistic' else Family.GAUSSIAN
    cfg = FitConfig(lambda_=args.lambda_ or 0.0, smoother=_smoother_spec(args), family=family)
    smoothers = fit_smoothers(data, cfg.smoother)

    if args.lambda_ is not None:
        model = fit_model(data, cfg, smoothers=smoothers)
        df = effective_df(model, smoothers)
        if args.sigma2 is not None:
            sigma2 = args.sigma2
        elif family == Family.LOGISTIC:
            sigma2 = BINOMIAL_DISPERSION
        else:
            sigma2 = default_sigma2(data, [model], [df])
        risk = risk_estimates(data, model, smoothers, sigma2)
    else:
        criterion = args.select or config.path.get('criterion', 'cp')
        holdout = None
        if args.holdout:
            # unscaled: hold-out predictions are made in original units
            holdout = load_csv(args.holdout, args.response, scale=False)
            if holdout.p != data.p:
                raise InputError(f"hold-out data has {holdout.p} columns, training data has {data.p}")
        path = compute_path(data, cfg, sigma2=args.sigma2, holdout=holdout, smoothers=smoothers)
        index, model = select_model(path, criterion)
        risk = path.risk[index]
        logger.info(f"selected lambda={model.lambda_:.6g} by {criterion} (grid index {index})")

    _emit(model.to_json(), args.out)
    _summary("fit", model.support, {
        "df": risk.df, "cp": risk.cp, "gcv": risk.gcv,
        "lambda": model.lambda_, "converged": model.converged,
    })
    return EXIT_OK


def _require_lambda(args):
    if args.lambda_ is None:
        raise InputError(f"--mode {args.mode} needs an explicit --lambda")


def _fit_lasso(args) -> int:
    _require_lambda(args)
    data = load_csv(args.data, args.response, scale=False)
    solution = lasso_cd(data.X, data.Y, args.lambda_)
    support = [j + 1 for j in np.flatnonzero(solution.beta)]
    payload = {
        "mode": "lasso",
        "lambda": solution.lambda_,
        "converged": solution.converged,
        "n_iters": solution.n_iters,
        "objective": solution.objective,
        "features": data.feature_names,
        "beta": solution.beta.tolist(),
        "scale": solution.scale.tolist(),
    }
    _emit(json.dumps(payload, indent=2), args.out)
    _summary("lasso", support, {"lambda": solution.lambda_, "converged": solution.converged})
    return EXIT_OK


def _fit_group_lasso(args) -> int:
    """Grouped lasso on the centred basis expansion of every column, one group per column."""
    _require_lambda(args)
    data = load_csv(args.data, args.response, scale=True)
    spec = _smoother_spec(args)
    if spec.kind != SmootherKind.ORTHOGONAL_SERIES:
        raise InputError("--mode group-lasso expands columns in the series basis; use --smoother series")
    groups = []
    columns = []
    for j in range(data.p):
        if data.is_constant(j):
            continue
        groups.append((data.feature_names[j], fit_smoother(spec, data.X[:, j]).Psi))
        columns.append(j)
    design = GroupedDesign(groups=groups, Y=data.Y - data.y_mean)
    solution = grouped_lasso(design, args.lambda_)
    support = [columns[k] + 1 for k in solution.active_groups]
    payload = {
        "mode": "group-lasso",
        "lambda": solution.lambda_,
        "intercept": data.y_mean,
        "converged": solution.converged,
        "n_iters": solution.n_iters,
        "objective": solution.objective,
        "kkt_residual": solution.kkt_residual,
        "groups": [
            {"j": columns[k] + 1, "label": label, "beta": beta.tolist()}
            for k, (label, beta) in enumerate(zip(solution.labels, solution.beta))
        ],
    }
    _emit(json.dumps(payload, indent=2), args.out)
    _summary("group-lasso", support, {"lambda": solution.lambda_, "kkt_residual": solution.kkt_residual})
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    frame = read_numeric_csv(args.data)
    if args.response and args.response in frame.columns:
        frame = frame.drop(columns=[args.response])
    predictions = predict(model, frame.to_numpy(dtype=float))
    table = pd.DataFrame({"prediction": predictions})
    _emit(table.to_csv(index=False, lineterminator='\n'), args.out)
    print(f"predict: {len(predictions)} rows, link={model.link}", file=sys.stderr)
    return EXIT_OK


def cmd_path(args) -> int:
    data = load_csv(args.data, args.response, scale=True)
    family = Family.LOGISTIC if args.mode == 'logistic' else Family.GAUSSIAN
    cfg = FitConfig(lambda_=0.0, smoother=_smoother_spec(args), family=family)
    smoothers = fit_smoothers(data, cfg.smoother)
    grid = None
    if args.n_lambdas or args.min_ratio:
        lam_max = logistic_lambda_max(data, smoothers) if family == Family.LOGISTIC else lambda_max(data, smoothers)
        grid = default_grid(lam_max, args.n_lambdas, args.min_ratio)
    path = compute_path(data, cfg, grid=grid, sigma2=args.sigma2, smoothers=smoothers)
    _emit(export_path_csv(path), args.out)
    fields = {"points": len(path), "lambda_max": float(path.lambdas[0])}
    _, model = select_model(path, "cp")
    fields["cp_lambda"] = model.lambda_
    _summary("path", model.support, fields)
    return EXIT_OK


def cmd_gensynth(args) -> int:
    seed = _resolve_seed(args.seed)
    synthetic = generate_synthetic(
        SyntheticSpec(
            n=args.n, p=args.p, noise_sd=args.noise_sd, seed=seed, covariate_law=CovariateLaw(args.covariate_law)
        )
    )
    dataset = synthetic.dataset
    if args.augment_uniform or args.augment_permuted:
        dataset = augment_irrelevant(dataset, args.augment_uniform, args.augment_permuted, seed + 1)

    if args.out:
        write_csv(dataset, args.out, original_units=True)
        truth_path = args.truth or str(Path(args.out).with_suffix('.truth.json'))
    else:
        write_csv(dataset, sys.stdout, original_units=True)
        truth_path = args.truth
    if truth_path:
        write_ground_truth(synthetic.truth, truth_path)
    print(f"gensynth: n={dataset.n} p={dataset.p} seed={seed} law={args.covariate_law}", file=sys.stderr)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    seed = _resolve_seed(args.seed)
    rows = run_benchmark(
        p_list=args.p or config.benchmark.get('p_list', [128, 256]),
        n_grid=args.n_grid or config.benchmark.get('n_grid', [50, 100, 150, 200, 250]),
        trials=args.trials,
        seed=seed,
        workers=args.workers,
        noise_sd=args.noise_sd,
        truncation=args.truncation,
        criterion=args.criterion,
        covariate_law=CovariateLaw(args.covariate_law) if args.covariate_law else None,
    )
    _emit(export_recovery_csv(rows), args.out)
    failures = sum(r.failures for r in rows)
    print(f"benchmark: {len(rows)} cells, {failures} failed trials, seed={seed}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog='spam', description="Sparse additive models")
    parser.add_argument('--log-level', help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest='command', required=True, parser_class=CliArgumentParser)

    fit = sub.add_parser('fit', help="fit one model")
    fit.add_argument('--data', required=True)
    fit.add_argument('--response', required=True)
    how = fit.add_mutually_exclusive_group()
    how.add_argument('--lambda', dest='lambda_', type=float)
    how.add_argument('--select', choices=['cp', 'gcv', 'holdout'])
    fit.add_argument('--mode', choices=['gaussian', 'logistic', 'lasso', 'group-lasso'], default='gaussian')
    fit.add_argument('--holdout', help="CSV used for hold-out selection")
    fit.add_argument('--sigma2', type=float)
    fit.add_argument('--out')
    _add_smoother_flags(fit)
    fit.set_defaults(handler=cmd_fit)

    pred = sub.add_parser('predict', help="predict from a saved model")
    pred.add_argument('--model', required=True)
    pred.add_argument('--data', required=True)
    pred.add_argument('--response', help="column to ignore if present")
    pred.add_argument('--out')
    pred.set_defaults(handler=cmd_predict)

    path = sub.add_parser('path', help="regularization path as CSV")
    path.add_argument('--data', required=True)
    path.add_argument('--response', required=True)
    path.add_argument('--mode', choices=['gaussian', 'logistic'], default='gaussian')
    path.add_argument('--n-lambdas', type=int)
    path.add_argument('--min-ratio', type=float)
    path.add_argument('--sigma2', type=float)
    path.add_argument('--out')
    _add_smoother_flags(path)
    path.set_defaults(handler=cmd_path)

    gen = sub.add_parser('gensynth', help="synthetic four-component dataset")
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('--p', type=int, required=True)
    gen.add_argument('--noise-sd', type=float, default=1.0)
    gen.add_argument('--seed', type=int)
    gen.add_argument('--covariate-law', choices=[c.value for c in CovariateLaw], default=CovariateLaw.UNIFORM_IID.value)
    gen.add_argument('--augment-uniform', type=int, default=0)
    gen.add_argument('--augment-permuted', type=int, default=0)
    gen.add_argument('--out')
    gen.add_argument('--truth', help="ground-truth JSON path")
    gen.set_defaults(handler=cmd_gensynth)

    bench = sub.add_parser('benchmark', help="support recovery table")
    bench.add_argument('--p', type=_int_list)
    bench.add_argument('--n-grid', type=_int_list)
    bench.add_argument('--trials', type=int)
    bench.add_argument('--seed', type=int)
    bench.add_argument('--workers', type=int)
    bench.add_argument('--noise-sd', type=float)
    bench.add_argument('--truncation', type=int)
    bench.add_argument('--criterion', choices=['cp', 'gcv'], default='cp')
    bench.add_argument('--covariate-law', choices=[c.value for c in CovariateLaw])
    bench.add_argument('--out')
    bench.set_defaults(handler=cmd_benchmark)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    with TraceContext(f"cli_{args.command}", {"argv": list(argv) if argv is not None else sys.argv[1:]}):
        try:
            return args.handler(args)
        except PathFitError as e:
            cause = e.cause
            observability.log_error(e, {"command": args.command, "lambda": e.lambda_})
            if isinstance(cause, (NumericError, np.linalg.LinAlgError)):
                return EXIT_NUMERIC
            return EXIT_INPUT
        except (NumericError, np.linalg.LinAlgError) as e:
            observability.log_error(e, {"command": args.command})
            return EXIT_NUMERIC
        except (InputError, ValidationError, FileNotFoundError, ValueError) as e:
            observability.log_error(e, {"command": args.command})
            return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
