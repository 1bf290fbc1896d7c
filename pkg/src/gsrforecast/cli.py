"""Command-line interface: ``gsrforecast <command> [options]``.

Commands write data artifacts to files and log to standard error. Exit
codes: 0 success, 1 usage error, 2 numerical or fit failure, 3 I/O or
input-data failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, gpr, jsonio, metrics, pipeline
from .dataio import PROFILES, DataError, Dataset, emit_csv, fit_standardizer, read_csv, synth_generate
from .dataio.synth import DEFAULT_NOISE
from .pipeline import FitFailure, PipelineConfig
from .solarisnet import TrainConfig

log = logging.getLogger("gsrforecast.cli")

EXIT_OK, EXIT_USAGE, EXIT_FIT, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- arguments

def _common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for every stochastic stage")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")


def _pipeline_args(p):
    g = p.add_argument_group("data preparation")
    g.add_argument("--train-fraction", type=float, default=0.8, help="share of records used for fitting")
    g.add_argument(
        "--split-mode", choices=("chronological", "seeded-random"), default="chronological",
        help="earliest records train, or a seeded random partition",
    )
    g.add_argument("--denoise", action="store_true", help="low-pass the GSR series before fitting")
    g.add_argument("--denoise-window", type=int, default=3, help="moving-average window for --denoise")


def _model_args(p):
    lm = TrainConfig()
    g = p.add_argument_group("Levenberg-Marquardt (solarisnet, ann)")
    g.add_argument("--max-iterations", type=int, default=lm.max_iterations, help="LM iteration cap")
    g.add_argument("--mu-init", type=float, default=lm.mu_init, help="initial damping")
    g.add_argument("--mu-factor", type=float, default=lm.mu_factor, help="damping multiplier on reject, divisor on accept")
    g.add_argument("--mu-max", type=float, default=lm.mu_max, help="damping beyond which training stops")
    g.add_argument("--grad-tol", type=float, default=lm.grad_tol, help="stop when max |J^T e| falls below this")
    g.add_argument("--ann-hidden", type=int, default=10, help="hidden units of the ann baseline")
    _gpr_args(p)
    g = p.add_argument_group("angstrom")
    g.add_argument("--latitude", type=float, default=None, help="site latitude in degrees north (required)")


def _gpr_args(p, kernel: bool = True):
    gp = gpr.GprFitConfig()
    g = p.add_argument_group("Gaussian process")
    if kernel:
        g.add_argument("--kernel", choices=("ard", "isotropic"), default="ard", help="one length scale per feature, or one shared")
    g.add_argument("--gpr-starts", type=int, default=gp.n_starts, help="seeded optimizer starts")
    g.add_argument("--gpr-max-iter", type=int, default=gp.max_iter, help="ascent iterations per start")
    g.add_argument("--gpr-grad-tol", type=float, default=gp.grad_tol, help="stop when the free gradient is below this")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="gsrforecast", description="Daily global solar radiation forecasting.", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic dataset", formatter_class=fmt)
    _common(p)
    p.add_argument("--profile", choices=sorted(PROFILES), default="ds1")
    p.add_argument("--days", type=int, default=None, help="number of days (profile length if omitted)")
    p.add_argument("--noise", type=float, default=DEFAULT_NOISE, help="target noise sd, MJ m-2 day-1")
    p.add_argument("--extras", type=int, default=0, help="number of nuisance feature columns")
    p.add_argument("--out", required=True, help="CSV path; metadata goes to <out>.meta.json")

    p = sub.add_parser("train", help="fit one model", formatter_class=fmt)
    _common(p)
    p.add_argument("--model", choices=pipeline.FAMILIES, required=True, help="model type")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="model document path")
    p.add_argument("--log", default=None, help="training log CSV; None writes <out>.log.csv")
    _pipeline_args(p)
    _model_args(p)

    p = sub.add_parser("predict", help="predict GSR with a saved model", formatter_class=fmt)
    _common(p)
    p.add_argument("--model", required=True, help="model document path")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="CSV with date,gsr_pred")

    p = sub.add_parser("evaluate", help="score a saved model", formatter_class=fmt)
    _common(p)
    p.add_argument("--model", required=True, help="model document path")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="metrics report JSON")
    p.add_argument("--plot", required=True, help="observed-vs-predicted CSV")
    p.add_argument("--label", default=None, help="model label (model type if omitted)")
    p.add_argument(
        "--subset", choices=("all", "train", "test"), default="all",
        help="evaluate on the split recorded in the model document",
    )

    p = sub.add_parser("sensitivity", help="rank features by ARD length scale", formatter_class=fmt)
    _common(p)
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="ranking JSON")
    p.add_argument("--plot", required=True, help="CSV of length scale against feature number")
    _pipeline_args(p)
    _gpr_args(p, kernel=False)

    p = sub.add_parser("compare", help="train several models on one split and tabulate", formatter_class=fmt)
    _common(p)
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--models", default=",".join(pipeline.FAMILIES), help="comma-separated model types")
    p.add_argument("--out", required=True, help="comparison CSV")
    _pipeline_args(p)
    _model_args(p)
    return parser


def _config(args) -> PipelineConfig:
    if not 0.0 < args.train_fraction < 1.0:
        raise UsageError("--train-fraction must lie in (0, 1)")
    if args.denoise and (args.denoise_window < 1 or args.denoise_window % 2 == 0):
        raise UsageError("--denoise-window must be a positive odd number")
    try:
        lm = TrainConfig(
            max_iterations=getattr(args, "max_iterations", TrainConfig.max_iterations),
            mu_init=getattr(args, "mu_init", TrainConfig.mu_init),
            mu_factor=getattr(args, "mu_factor", TrainConfig.mu_factor),
            mu_max=getattr(args, "mu_max", TrainConfig.mu_max),
            grad_tol=getattr(args, "grad_tol", TrainConfig.grad_tol),
        )
        gp = gpr.GprFitConfig(n_starts=args.gpr_starts, max_iter=args.gpr_max_iter, grad_tol=args.gpr_grad_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if gp.n_starts < 1:
        raise UsageError("--gpr-starts must be at least 1")
    latitude = getattr(args, "latitude", None)
    if latitude is not None and not -90.0 <= latitude <= 90.0:
        raise UsageError("--latitude must lie in [-90, 90]")
    return PipelineConfig(
        seed=args.seed,
        train_fraction=args.train_fraction,
        split_mode=args.split_mode,
        denoise_window=args.denoise_window if args.denoise else None,
        lm=lm,
        gp=gp,
        kernel=getattr(args, "kernel", "ard"),
        ann_hidden=getattr(args, "ann_hidden", 10),
        latitude_degrees=latitude,
    )


# ---------------------------------------------------------------- file helpers

def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read_dataset(path, need_target: bool = True) -> Dataset:
    ds = read_csv(path)
    if need_target and not ds.has_target:
        raise DataError(f"{path}: dataset has no complete gsr_mj_m2_day column")
    return ds


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _load_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise jsonio.DocumentError(f"{path}: not a UTF-8 document ({exc})") from None
    return pipeline.loads(text)


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    if args.days is not None and args.days < 2:
        raise UsageError("--days must be at least 2")
    if args.noise < 0 or args.extras < 0:
        raise UsageError("--noise and --extras must be non-negative")
    ds = synth_generate(args.profile, args.days, args.seed, noise=args.noise, extras=args.extras)
    _write(args.out, emit_csv(ds))
    _write(f"{args.out}.meta.json", jsonio.dumps(ds.metadata))
    log.info("wrote %d rows to %s", len(ds), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    if args.model == "angstrom" and cfg.latitude_degrees is None:
        raise UsageError("training the angstrom model requires --latitude")
    ds = _read_dataset(args.data)
    train, test = pipeline.prepare(ds, cfg)
    log.info("training %s on %d records (%d held out)", args.model, len(train), len(test))
    fitted = pipeline.fit_family(args.model, train, cfg)
    _write(args.out, pipeline.dumps(fitted.model, _pipeline_meta(cfg, ds, train)))
    _write(args.log or f"{args.out}.log.csv", _csv(fitted.log_header, fitted.log_rows))
    return EXIT_OK


def _pipeline_meta(cfg: PipelineConfig, ds: Dataset, train: Dataset) -> dict:
    meta = cfg.describe()
    meta.update({"dataset": ds.name, "n_records": len(ds), "n_train": len(train)})
    return meta


def cmd_predict(args) -> int:
    model, _ = _load_model(args.model)
    ds = _read_dataset(args.data, need_target=False)
    pred = pipeline.predict(model, ds)
    rows = [(d.isoformat(), float(v)) for d, v in zip(ds.dates, pred)]
    _write(args.out, _csv(("date", "gsr_pred"), rows))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model, doc = _load_model(args.model)
    ds = _read_dataset(args.data)
    if args.subset != "all":
        meta = doc.get("pipeline")
        if not meta:
            raise UsageError("--subset needs a model document that records its split")
        cfg = PipelineConfig(
            seed=int(meta["seed"]),
            train_fraction=float(meta["train_fraction"]),
            split_mode=meta["split_mode"],
            denoise_window=meta.get("denoise_window"),
        )
        train, test = pipeline.prepare(ds, cfg)
        ds = train if args.subset == "train" else test
    pred = pipeline.predict(model, ds)
    observed = ds.target()
    label = args.label or doc["model_type"]
    try:
        report = metrics.evaluate(pred, observed, label)
    except metrics.UndefinedCorrelationError as exc:
        raise FitFailure(label, str(exc)) from exc
    out = {"model_type": doc["model_type"], "dataset": ds.name, "subset": args.subset}
    out.update(report.to_dict())
    _write(args.out, jsonio.dumps(out))
    rows = [(i, float(o), float(p)) for i, (o, p) in enumerate(zip(observed, pred))]
    _write(args.plot, _csv(("index", "observed", "predicted"), rows))
    log.info("%s: rmse=%.6g mae=%.6g mbe=%.6g rho=%.6g", label, report.rmse, report.mae, report.mbe, report.pearson_rho)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = _config(args)
    ds = _read_dataset(args.data)
    names = ds.feature_names
    train, _ = pipeline.prepare(ds, cfg)
    std = fit_standardizer(train, names)
    X, y = std.apply(train)
    try:
        ranking = gpr.sensitivity_rank(X, y, names, cfg.gp)
    except (gpr.GprFitError, ArithmeticError) as exc:
        raise FitFailure("gpr", str(exc)) from exc
    out = {"feature_names": list(names), "lml": ranking.model.lml, "pipeline": _pipeline_meta(cfg, ds, train)}
    out.update(ranking.to_dict())
    _write(args.out, jsonio.dumps(out))
    _write(args.plot, _csv(("feature_index", "feature_name", "log_length_scale"), ranking.plot_series()))
    log.info("most relevant feature: %s", ranking.names[0])
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    requested = [m.strip() for m in args.models.split(",") if m.strip()]
    if not requested:
        raise UsageError("--models lists no model")
    unknown = [m for m in requested if m not in pipeline.FAMILIES + pipeline.ABSENT_FAMILIES]
    if unknown:
        raise UsageError(f"unknown model type(s): {', '.join(unknown)}")
    if "angstrom" in requested and cfg.latitude_degrees is None:
        raise UsageError("comparing the angstrom model requires --latitude")
    ds = _read_dataset(args.data)
    train, test = pipeline.prepare(ds, cfg)
    reports, failed = [], []
    for family in requested:
        if family in pipeline.ABSENT_FAMILIES:
            log.warning("%s: absent (not implemented); no row emitted", family)
            continue
        try:
            fitted = pipeline.fit_family(family, train, cfg)
            reports.append(metrics.evaluate(pipeline.predict(fitted.model, test), test.target(), family))
        except (FitFailure, metrics.UndefinedCorrelationError) as exc:
            log.error("%s failed: %s", family, exc)
            failed.append(family)
    if reports:
        _write(args.out, metrics.comparison_csv(reports))
    return EXIT_FIT if failed else EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sensitivity": cmd_sensitivity,
    "compare": cmd_compare,
}


def _setup_logging(verbose: bool) -> None:
    root = logging.getLogger("gsrforecast")
    for h in list(root.handlers):
        if getattr(h, "_gsrforecast_cli", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler._gsrforecast_cli = True
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    _setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except FitFailure as exc:
        log.error("fit failed: %s", exc)
        return EXIT_FIT
    except (OSError, DataError, jsonio.DocumentError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
