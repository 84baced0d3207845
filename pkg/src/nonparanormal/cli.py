"""Command line interface.

Subcommands: simulate, fit, predict, evaluate, replicate.  Exit codes:
0 success, 1 usage problems (including bad manifests), 2 malformed data or
model files, 3 numerical failures during fitting.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .classifier import (
    Dataset,
    FitError,
    ModelFormatError,
    load_model,
    make_dataset,
    predict,
    save_model,
    select_and_fit,
)
from .dataio import (
    DataFormatError,
    read_data_csv,
    read_predictions_csv,
    write_data_csv,
    write_predictions_csv,
)
from .gibbs import MISSING, InitializationError
from .metrics import Rates, confusion, format_table, mean_rates, rates
from .numeric import FactorizationError, RngStream
from .simulate import (
    ManifestError,
    SimScenario,
    gen_dataset,
    parse_manifest,
    scenario_grid,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_SCALES = {
    "desk": {"reps": 5, "pilot": 300, "final": 1500, "test": 1000},
    "paper": {"reps": 30, "pilot": 500, "final": 10000, "test": 5000},
}

_TABLES = ("logistic", "probit", "mixed", "real")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _sizes_arg(text: str) -> range:
    parts = text.split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a size like '10' or a range like '8..15', got {text!r}"
        ) from None
    if lo < 5 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid size range {text!r} (need 5 <= lo <= hi)")
    return range(lo, hi + 1)


def _lambda_arg(text: str) -> float | None:
    if text == "learn":
        return None
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'learn' or a number in (0, 1), got {text!r}"
        ) from None
    if not 0.0 < val < 1.0:
        raise argparse.ArgumentTypeError(f"fixed class weight {val} outside (0, 1)")
    return val


def _fraction_arg(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a fraction, got {text!r}") from None
    if not 0.0 < val < 1.0:
        raise argparse.ArgumentTypeError(f"fraction {val} outside (0, 1)")
    return val


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _build_parser() -> _Parser:
    top = _Parser(prog="npn", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic datasets from a manifest")
    sim.add_argument("manifest", help="key = value scenario file")
    sim.add_argument("out", help="output directory")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="select a basis size and fit the classifier")
    fit.add_argument("train", help="training data CSV (labels 0, 1, or ?)")
    fit.add_argument("--out", required=True, help="where to write the model JSON")
    fit.add_argument("--sizes", type=_sizes_arg, default=range(8, 16),
                     help="basis sizes to try, e.g. 8..15 or 10 (default 8..15)")
    fit.add_argument("--pilot-iters", type=int, default=500)
    fit.add_argument("--final-iters", type=int, default=10000)
    fit.add_argument("--m", type=float, default=3.0, help="boundary odds factor (default 3)")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--lambda", dest="lambda_fixed", type=_lambda_arg, default=None,
                     metavar="LAMBDA", help="'learn' (default) or a fixed class-0 weight")
    fit.add_argument("--nu", type=float, default=0.0, help="prior center location")
    fit.add_argument("--tau", type=float, default=1.0, help="prior center spread")
    fit.add_argument("--sigma2", type=float, default=1.0, help="prior coefficient variance")
    fit.add_argument("--burn-in", type=int, default=None,
                     help="iterations to discard (default: half)")
    fit.add_argument("--wishart-df", choices=("conjugate", "classcount"), default="conjugate")
    fit.add_argument("--sweeps", type=int, default=1, help="coefficient sweeps per iteration")
    fit.set_defaults(func=cmd_fit)

    prd = sub.add_parser("predict", help="classify rows with a fitted model")
    prd.add_argument("model", help="model JSON from 'fit'")
    prd.add_argument("data", help="data CSV (any labels are ignored)")
    prd.add_argument("--out", required=True, help="where to write predictions CSV")
    prd.set_defaults(func=cmd_predict)

    ev = sub.add_parser("evaluate", help="score predictions against labeled data")
    ev.add_argument("predictions", help="predictions CSV from 'predict'")
    ev.add_argument("truth", help="fully labeled data CSV")
    ev.add_argument("--out", default=None, help="optional metrics CSV")
    ev.set_defaults(func=cmd_evaluate)

    rep = sub.add_parser("replicate", help="run a benchmark table or a real-data study")
    rep.add_argument("table", choices=_TABLES,
                     help="transformation family, or 'real' with --data")
    rep.add_argument("out", help="output directory")
    rep.add_argument("--scale", choices=tuple(_SCALES), default="desk")
    rep.add_argument("--reps", type=int, default=None,
                     help="replications per cell (default: 5 desk, 30 paper)")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--p", type=int, default=None, help="restrict to one dimension")
    rep.add_argument("--n-star", type=int, default=None, help="restrict to one training size")
    rep.add_argument("--n-labeled", type=int, default=None, help="restrict to one labeled count")
    rep.add_argument("--data", default=None, help="labeled CSV for the real-data recipe")
    rep.add_argument("--train-frac", type=_fraction_arg, default=0.7)
    rep.add_argument("--labeled-frac", type=_fraction_arg, default=0.15)
    rep.set_defaults(func=cmd_replicate)
    return top


def cmd_simulate(args) -> int:
    scenario = parse_manifest(args.manifest)
    os.makedirs(args.out, exist_ok=True)
    for rep in range(scenario.replications):
        sub = args.out if scenario.replications == 1 else os.path.join(args.out, f"rep{rep:03d}")
        os.makedirs(sub, exist_ok=True)
        sim = gen_dataset(scenario, rep=rep)
        write_data_csv(os.path.join(sub, "train.csv"), sim.train)
        write_data_csv(os.path.join(sub, "test.csv"), sim.test)
        with open(os.path.join(sub, "params.txt"), "w") as fh:
            fh.write(f"transform = {scenario.transform}\n")
            fh.write(f"seed = {scenario.seed}\n")
            fh.write(f"rep = {rep}\n")
            for name in ("mu0", "sigma0", "mu1", "sigma1"):
                fh.write(f"{name} = {getattr(sim.params, name).tolist()!r}\n")
        print(f"wrote train/test/params under {sub}")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = read_data_csv(args.train)
    model = select_and_fit(
        data,
        basis_sizes=args.sizes,
        pilot_iters=args.pilot_iters,
        final_iters=args.final_iters,
        m=args.m,
        seed=args.seed,
        lambda_fixed=args.lambda_fixed,
        nu=args.nu,
        tau=args.tau,
        sigma2=args.sigma2,
        burn_in=args.burn_in,
        wishart_df=args.wishart_df,
        tmvn_sweeps=args.sweeps,
        log=_note,
    )
    save_model(model, args.out)
    print("basis selection (boundary-zone training points):")
    for row in model.selection:
        if row.boundary is None:
            print(f"  size {row.size:3d}: {row.note}")
        else:
            print(f"  size {row.size:3d}: {row.boundary}")
    print(f"chosen size: {model.basis_size}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = read_data_csv(args.data)
    if data.p != model.p:
        raise DataFormatError(
            f"{args.data}: {data.p} feature columns but the model expects {model.p}"
        )
    labels, p1 = predict(model, data.x)
    write_predictions_csv(args.out, labels, p1)
    n1 = int(labels.sum())
    print(f"predicted {labels.size} rows: {labels.size - n1} class 0, {n1} class 1")
    print(f"predictions written to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred_labels, _ = read_predictions_csv(args.predictions)
    truth = read_data_csv(args.truth)
    if np.any(truth.labels == MISSING):
        raise DataFormatError(f"{args.truth}: truth data contains unlabeled rows")
    if truth.n != pred_labels.size:
        raise DataFormatError(
            f"{args.predictions} has {pred_labels.size} rows but {args.truth} has {truth.n}"
        )
    c = confusion(truth.labels, pred_labels)
    r = rates(c)
    print(f"counts: tp={c.tp} tn={c.tn} fp={c.fp} fn={c.fn}")
    print(format_table(["fpr", "fnr", "error", "mcc"], [[r.fpr, r.fnr, r.error, r.mcc]]))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("fpr,fnr,error,mcc\n")
            fh.write(f"{r.fpr!r},{r.fnr!r},{r.error!r},{r.mcc!r}\n")
        print(f"metrics written to {args.out}")
    return EXIT_OK


def _fit_seed(*key: int) -> int:
    return int(np.random.SeedSequence(tuple(key)).generate_state(1, np.uint64)[0])


def _fit_and_score(train: Dataset, test: Dataset, pilot: int, final: int, seed: int) -> Rates:
    model = select_and_fit(
        train, basis_sizes=range(8, 16), pilot_iters=pilot, final_iters=final, seed=seed
    )
    labels, _ = predict(model, test.x)
    return rates(confusion(test.labels, labels))


def _write_results(out_dir: str, header: list[str], rows: list[list]) -> str:
    path = os.path.join(out_dir, "results.csv")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return path


def _write_summary(out_dir: str, header: list[str], rows: list[list]) -> str:
    path = os.path.join(out_dir, "summary.csv")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return path


def _replicate_synthetic(args, scale: dict, reps: int) -> int:
    p_values = [args.p] if args.p else [5, 10]
    cells = scenario_grid(args.table, p_values)
    if args.n_star is not None:
        cells = [c for c in cells if c[1] == args.n_star]
    if args.n_labeled is not None:
        cells = [c for c in cells if c[2] == args.n_labeled]
    if not cells:
        raise UsageError("the --p/--n-star/--n-labeled filters removed every cell")
    os.makedirs(args.out, exist_ok=True)

    rep_rows: list[list] = []
    sum_rows: list[list] = []
    table_rows: list[list] = []
    for p, n_star, n_l in cells:
        scenario = SimScenario(
            p=p, n_star=n_star, n_l_star=n_l, transform=args.table,
            seed=args.seed, n_test_per_class=scale["test"],
        )
        cell_rates: list[Rates] = []
        for r in range(reps):
            stream = ((p * 1000 + n_star) * 100 + n_l) * 100 + r
            sim = gen_dataset(scenario, rep=stream)
            _note(f"{args.table} p={p} n*={n_star} nl*={n_l} rep {r + 1}/{reps}")
            rr = _fit_and_score(
                sim.train, sim.test, scale["pilot"], scale["final"],
                _fit_seed(args.seed, stream),
            )
            cell_rates.append(rr)
            rep_rows.append([args.table, p, n_star, n_l, r, rr.fpr, rr.fnr, rr.error, rr.mcc])
        agg = mean_rates(cell_rates)
        sum_rows.append([args.table, p, n_star, n_l, reps, agg.fpr, agg.fnr, agg.error, agg.mcc])
        table_rows.append([p, n_star, n_l, agg.fpr, agg.fnr, agg.error, agg.mcc])

    res = _write_results(
        args.out, ["transform", "p", "n_star", "n_l_star", "rep", "fpr", "fnr", "error", "mcc"],
        rep_rows,
    )
    summ = _write_summary(
        args.out, ["transform", "p", "n_star", "n_l_star", "reps", "fpr", "fnr", "error", "mcc"],
        sum_rows,
    )
    print(f"{args.table} transformation, {reps} replications per cell ({args.scale} scale)")
    print(format_table(["p", "n*", "n_l*", "fpr", "fnr", "error", "mcc"], table_rows))
    print(f"per-replication rows: {res}")
    print(f"aggregated table: {summ}")
    return EXIT_OK


def _mask_labels(labels: np.ndarray, frac: float, gen: np.random.Generator) -> np.ndarray:
    masked = np.full(labels.shape, MISSING, dtype=np.int64)
    for k in (0, 1):
        idx = np.nonzero(labels == k)[0]
        keep = max(1, int(round(frac * idx.size)))
        chosen = idx[gen.permutation(idx.size)[:keep]]
        masked[chosen] = k
    return masked


def _replicate_real(args, scale: dict, reps: int) -> int:
    if not args.data:
        raise UsageError("replicate real requires --data")
    full = read_data_csv(args.data)
    labeled = full.labels != MISSING
    if not labeled.all():
        _note(f"dropping {int((~labeled).sum())} unlabeled rows from {args.data}")
    x = full.x[labeled]
    labels = full.labels[labeled]
    n = x.shape[0]
    if n < 10:
        raise DataFormatError(f"{args.data}: need at least 10 labeled rows, found {n}")
    for k in (0, 1):
        if not np.any(labels == k):
            raise DataFormatError(f"{args.data}: no rows labeled {k}")
    os.makedirs(args.out, exist_ok=True)

    rep_rows: list[list] = []
    all_rates: list[Rates] = []
    n_train = int(round(args.train_frac * n))
    if not 2 <= n_train <= n - 1:
        raise UsageError(f"--train-frac {args.train_frac} leaves no usable split for {n} rows")
    for r in range(reps):
        gen = RngStream(args.seed, r).generator
        for _ in range(100):
            perm = gen.permutation(n)
            tr, te = perm[:n_train], perm[n_train:]
            # a usable split shows both classes on each side
            if len(set(labels[tr].tolist())) == 2 and len(set(labels[te].tolist())) == 2:
                break
        else:
            raise FitError("could not find a split with both classes on each side")
        train = make_dataset(
            x[tr], _mask_labels(labels[tr], args.labeled_frac, gen), full.feature_names
        )
        test = make_dataset(x[te], labels[te], full.feature_names)
        _note(f"real-data rep {r + 1}/{reps} (train {len(tr)}, test {len(te)})")
        rr = _fit_and_score(train, test, scale["pilot"], scale["final"], _fit_seed(args.seed, r, 1))
        all_rates.append(rr)
        rep_rows.append([r, len(tr), len(te), rr.fpr, rr.fnr, rr.error, rr.mcc])

    agg = mean_rates(all_rates)
    res = _write_results(
        args.out, ["rep", "n_train", "n_test", "fpr", "fnr", "error", "mcc"], rep_rows
    )
    summ = _write_summary(
        args.out, ["reps", "fpr", "fnr", "error", "mcc"],
        [[reps, agg.fpr, agg.fnr, agg.error, agg.mcc]],
    )
    print(f"real-data study: {reps} random splits of {args.data}")
    print(format_table(["fpr", "fnr", "error", "mcc"], [[agg.fpr, agg.fnr, agg.error, agg.mcc]]))
    print(f"per-replication rows: {res}")
    print(f"aggregated table: {summ}")
    return EXIT_OK


def cmd_replicate(args) -> int:
    scale = _SCALES[args.scale]
    reps = scale["reps"] if args.reps is None else args.reps
    if not 1 <= reps <= 99:
        raise UsageError(f"--reps must lie in [1, 99], got {reps}")
    if args.table == "real":
        return _replicate_real(args, scale, reps)
    if args.data:
        raise UsageError("--data only applies to 'replicate real'")
    return _replicate_synthetic(args, scale, reps)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"npn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ManifestError as exc:
        print(f"npn: manifest error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, ModelFormatError) as exc:
        print(f"npn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"npn: file error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FactorizationError, InitializationError, FitError, FloatingPointError) as exc:
        print(f"npn: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"npn: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
