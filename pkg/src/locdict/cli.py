"""Command-line front end: train, eval, predict, synth, report.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical
failure. On failure a single machine-parseable category token (E_IO,
E_CONFIG, E_DATA, E_DIM, E_MODEL_VERSION, E_NUM) is printed to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import ingest, synth, trainer
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatch,
    LocdictError,
    ModelVersionError,
    NumericalError,
)
from .model import HyperParams, LabeledDataset, encode_labels, validate_dataset
from .modelio import load_model, save_model


class CliFailure(Exception):
    def __init__(self, category: str, exit_code: int, message: str = ""):
        self.category = category
        self.exit_code = exit_code
        super().__init__(message)


# Every trainable flag and its config-file key / type.
_PARAM_SPEC = {
    "lambda1": float, "lambda2": float, "theta": float,
    "eta1": float, "eta2": float,
    "atoms_per_class": int, "knn_k": int, "delta": float,
    "max_iters": int, "ridge_eps": float, "seed": int,
    "pca_dim": int, "pca_variance": float,
}


def _parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise CliFailure("E_IO", 2, f"cannot read config file {path}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliFailure("E_CONFIG", 2, f"config line {lineno} has no '='")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _PARAM_SPEC:
            raise CliFailure("E_CONFIG", 2, f"unknown config key {key!r}")
        try:
            values[key] = _PARAM_SPEC[key](raw.strip())
        except ValueError:
            raise CliFailure("E_CONFIG", 2, f"bad value for {key!r} on line {lineno}")
    return values


def _effective_params(args) -> tuple[HyperParams, int | float | None]:
    """Merge precedence: flag > config file > built-in default."""
    merged = dict(_parse_config_file(args.config)) if args.config else {}
    for key in _PARAM_SPEC:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    pca_dim = merged.pop("pca_dim", None)
    pca_variance = merged.pop("pca_variance", None)
    if pca_dim is not None and pca_variance is not None:
        raise CliFailure("E_CONFIG", 2, "give only one of pca_dim / pca_variance")
    try:
        params = HyperParams(**merged)
    except ValueError as exc:
        raise CliFailure("E_CONFIG", 2, str(exc))
    pca_target = pca_dim if pca_dim is not None else pca_variance
    return params, pca_target


def _load_dataset(path: str, fmt: str, require_labels: bool):
    if not Path(path).exists():
        raise CliFailure("E_IO", 2, f"input file {path} not found")
    features, raw_labels = ingest.load_matrix(path, fmt)
    if raw_labels is None:
        if require_labels:
            raise CliFailure("E_DATA", 3, f"{path} carries no labels")
        return features, None, None
    labels, names = encode_labels(raw_labels)
    ds = LabeledDataset(features, labels, len(names))
    validate_dataset(ds)
    return features, ds, names


def _guess_format(path: str, flag: str | None) -> str:
    if flag:
        return flag
    return "raw-f64" if path.endswith((".bin", ".raw")) else "csv"


# -- commands -----------------------------------------------------------------

def cmd_train(args) -> int:
    params, pca_target = _effective_params(args)
    fmt = _guess_format(args.input, args.format)
    _, ds, names = _load_dataset(args.input, fmt, require_labels=True)

    pca = None
    if pca_target is not None:
        pca = ingest.pca_fit(ds.features, pca_target)
        reduced = ingest.pca_apply(pca, ds.features)
        ds = LabeledDataset(reduced, ds.labels, ds.num_classes)

    K = params.atoms_per_class * ds.num_classes
    if params.knn_k >= K:
        raise CliFailure("E_CONFIG", 2, f"knn_k={params.knn_k} must be < K={K}")

    model, trace = trainer.train(ds, params)
    model = dataclasses.replace(model, label_names=names)
    save_model(args.out, model, pca)

    if args.trace:
        n = ds.n_samples
        with open(args.trace, "w", encoding="utf-8") as fh:
            for key in sorted(_PARAM_SPEC):
                if key == "pca_dim":
                    fh.write(f"# pca_dim = {pca_target if isinstance(pca_target, int) else ''}\n")
                elif key == "pca_variance":
                    fh.write(f"# pca_variance = {pca_target if isinstance(pca_target, float) else ''}\n")
                else:
                    fh.write(f"# {key} = {getattr(params, key)}\n")
            fh.write("iteration,objective,mean_active_set_size\n")
            for i, obj in enumerate(trace.objective_per_iter, start=1):
                mean_active = trace.active_set_sizes[i - 1] / n
                fh.write(f"{i},{obj!r},{mean_active!r}\n")
    return 0


def _load_for_inference(args, require_labels: bool):
    if not Path(args.model).exists():
        raise CliFailure("E_IO", 2, f"model file {args.model} not found")
    model, pca = load_model(args.model)
    fmt = _guess_format(args.input, args.format)
    features, ds, _ = _load_dataset(args.input, fmt, require_labels=require_labels)
    X = features.values
    if pca is not None:
        if X.shape[0] != pca.mean.shape[0]:
            raise CliFailure(
                "E_DIM", 2,
                f"input has {X.shape[0]} features, model PCA expects {pca.mean.shape[0]}",
            )
        X = ingest.pca_apply(pca, features).values
    if X.shape[0] != model.dictionary.dim:
        raise CliFailure(
            "E_DIM", 2,
            f"input has {X.shape[0]} features, model expects {model.dictionary.dim}",
        )
    eta2 = args.eta2 if args.eta2 is not None else model.params.eta2
    return model, X, ds, eta2


def cmd_eval(args) -> int:
    model, X, ds, eta2 = _load_for_inference(args, require_labels=True)
    name_to_class = {name: i + 1 for i, name in enumerate(model.label_names)}
    # ds labels were encoded against the test file alone; remap via names
    _, raw_labels = ingest.load_matrix(args.input, _guess_format(args.input, args.format))
    try:
        true = np.array([name_to_class[str(v)] for v in raw_labels], dtype=np.int64)
    except KeyError as exc:
        raise CliFailure("E_DATA", 3, f"label {exc} unknown to the model")
    preds, accuracy, confusion, _ = model.classify_batch(X, true, eta2=eta2)
    print(f"accuracy={accuracy!r}")
    if args.confusion:
        with open(args.confusion, "w", encoding="utf-8") as fh:
            fh.write("true\\pred," + ",".join(model.label_names) + "\n")
            for i, name in enumerate(model.label_names):
                fh.write(name + "," + ",".join(str(int(v)) for v in confusion[i]) + "\n")
    return 0


def cmd_predict(args) -> int:
    model, X, _, eta2 = _load_for_inference(args, require_labels=False)
    for i in range(X.shape[1]):
        d = model.classify(X[:, i], eta2=eta2)
        name = model.label_names[d.predicted_class - 1]
        print(f"{i},{name},{float(d.fused[d.predicted_class - 1])!r}")
    return 0


def cmd_synth(args) -> int:
    try:
        ds = synth.make_blobs(
            args.classes, args.dim, args.per_class, args.separation, args.seed,
            spread=args.spread,
        )
    except ConfigError as exc:
        raise CliFailure("E_CONFIG", 2, str(exc))
    train_per_class = args.train_per_class
    if train_per_class is None:
        train_per_class = args.per_class // 2
    if train_per_class < 1 or train_per_class >= args.per_class:
        raise CliFailure("E_CONFIG", 2, "train_per_class must be in [1, per_class)")
    train, test = ingest.split_per_class(ds, train_per_class, args.seed)
    ingest.save_csv(args.out_train, train.features.values, [str(v) for v in train.labels])
    ingest.save_csv(args.out_test, test.features.values, [str(v) for v in test.labels])
    return 0


def cmd_report(args) -> int:
    if not Path(args.trace).exists():
        raise CliFailure("E_IO", 2, f"trace file {args.trace} not found")
    config_lines = []
    rows = []
    with open(args.trace, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                config_lines.append(line[1:].strip())
            elif line and not line.startswith("iteration"):
                it, obj, act = line.split(",")
                rows.append((int(it), float(obj), float(act)))
    if not rows:
        raise CliFailure("E_DATA", 3, "trace file has no data rows")
    first, last = rows[0], rows[-1]
    print(f"iterations           {last[0]}")
    print(f"initial objective    {first[1]:.6g}")
    print(f"final objective      {last[1]:.6g}")
    rel = (first[1] - last[1]) / abs(first[1]) if first[1] != 0 else 0.0
    print(f"relative decrease    {rel:.6g}")
    print(f"mean active classes  {np.mean([r[2] for r in rows]):.6g}")
    if config_lines:
        print("config:")
        for ln in config_lines:
            print(f"  {ln}")
    return 0


# -- argument parsing ---------------------------------------------------------

def _add_param_flags(p: argparse.ArgumentParser):
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--atoms-per-class", dest="atoms_per_class", type=int)
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--ridge-eps", dest="ridge_eps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--pca-dim", dest="pca_dim", type=int)
    p.add_argument("--pca-variance", dest="pca_variance", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locdict")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a labeled feature file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "raw-f64"])
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.add_argument("--config")
    _add_param_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a labeled feature file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "raw-f64"])
    p.add_argument("--confusion")
    p.add_argument("--eta2", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="stream per-sample predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "raw-f64"])
    p.add_argument("--eta2", type=float)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate a seeded synthetic benchmark")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--per-class", dest="per_class", type=int, required=True)
    p.add_argument("--separation", type=float, required=True)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-per-class", dest="train_per_class", type=int)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="summarize a training trace CSV")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            print("E_CONFIG", file=sys.stderr)
            return 2
        return 0
    try:
        return args.func(args)
    except CliFailure as exc:
        print(exc.category, file=sys.stderr)
        if str(exc):
            print(str(exc), file=sys.stderr)
        return exc.exit_code
    except ModelVersionError:
        print("E_MODEL_VERSION", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print("E_CONFIG", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2
    except DataError as exc:
        print("E_DATA", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 3
    except NumericalError as exc:
        print("E_NUM", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 4
    except OSError as exc:
        print("E_IO", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
