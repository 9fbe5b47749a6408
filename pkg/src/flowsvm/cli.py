"""Command-line interface: ``flowsvm {synth,train,grid,eval,report}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import modelfile
from .dataset import LabelScheme, class_counts, load_csv, save_csv, stratified_split
from .errors import ConvergenceError, FlowSvmError
from .metrics import ConfusionMatrix, confusion, render_confusion, report
from .model_selection import DEFAULT_C, DEFAULT_GAMMA, GridSpec, grid_search, parse_values
from .multiclass import predict_batch, train_ovo
from .smo import TrainConfig
from .synthetic import synth_generate

log = logging.getLogger("flowsvm")

DEFAULT_GAMMA_VALUE = 10.0
DEFAULT_C_BY_SCHEME = {"test1": 100.0, "test2": 1000.0, "test3": 1000.0}


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _values(text: str) -> tuple[float, ...]:
    try:
        return parse_values(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}{suffix}")


def write_report(path, cm: ConfusionMatrix, title: str) -> str:
    """Render confusion matrix + class report; write text and CSV companions."""
    rep = report(cm)
    text = render_confusion(cm, f"Confusion matrix ({title})") + "\n\n" + rep.render(
        f"Classification results ({title})") + "\n"
    if path:
        path = Path(path)
        path.write_text(text, encoding="utf-8")
        _sibling(path, "_metrics.csv").write_text(rep.to_csv(), encoding="utf-8")
        _sibling(path, "_confusion.csv").write_text(cm.to_csv(), encoding="utf-8")
    return text


def cmd_synth(args) -> int:
    data = synth_generate(seed=args.seed, n=args.n)
    save_csv(data, args.out)
    counts = class_counts(l.value for l in data.labels)
    for name in ("DB", "SS", "SW", "A", "I", "B"):
        print(f"{name}\t{counts.get(name, 0)}")
    print(f"total\t{len(data)}")
    return 0


def cmd_train(args) -> int:
    scheme = LabelScheme.get(args.scheme)
    c = args.c if args.c is not None else DEFAULT_C_BY_SCHEME[scheme.id]
    data = load_csv(args.data)
    train, test = stratified_split(data, args.test_fraction, args.seed)
    config = TrainConfig.of(c, args.gamma)
    log.info("training %s on %d samples (C=%g, gamma=%g)", scheme.id, len(train), c, args.gamma)
    try:
        model = train_ovo(train, scheme, config, jobs=args.jobs)
    except ConvergenceError as exc:
        pair = " vs ".join(exc.pair) if exc.pair else "unknown pair"
        raise FlowSvmError(f"training failed to converge for class pair {pair}: {exc}") from exc
    truth = [scheme(l) for l in test.labels]
    cm = confusion(truth, predict_batch(model, test), model.classes)
    text = write_report(args.report_out, cm, f"{scheme.id}, test split, C={c:g}, gamma={args.gamma:g}")
    print(text, end="")
    if args.model_out:
        modelfile.save_model(model, args.model_out)
    return 0


def cmd_grid(args) -> int:
    scheme = LabelScheme.get(args.scheme)
    data = load_csv(args.data)
    train, _ = stratified_split(data, args.test_fraction, args.seed)
    grid = GridSpec(args.c_grid, args.gamma_grid, folds=args.folds, seed=args.seed)
    result = grid_search(train, scheme, grid, jobs=args.jobs)
    for cell in result.cells:
        if cell.failed:
            print(f"warning: C={cell.c:g} gamma={cell.gamma:g} failed to converge on folds "
                  f"{list(cell.failed_folds)} (scored 0)", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(result.to_csv(), encoding="utf-8")
    else:
        print(result.to_csv(), end="")
    c, g = result.selected
    print(f"selected C={c:g} gamma={g:g} mean CV accuracy={result.best.mean:.4f}")
    return 0


def cmd_eval(args) -> int:
    model = modelfile.load_model(args.model)
    data = load_csv(args.data)
    truth = [model.scheme(l) for l in data.labels]
    unknown = sorted(set(truth) - set(model.classes))
    if unknown:
        raise FlowSvmError(f"{args.data}: labels {unknown} are not classes of the model "
                           f"({', '.join(model.classes)})")
    cm = confusion(truth, predict_batch(model, data), model.classes)
    config = model.config
    text = write_report(args.report_out, cm,
                        f"{model.scheme.id}, {Path(args.data).name}, C={config.c:g}, "
                        f"gamma={config.kernel.gamma:g}")
    print(text, end="")
    return 0


def cmd_report(args) -> int:
    cm = ConfusionMatrix.from_csv(Path(args.data).read_text(encoding="utf-8"))
    rep = report(cm)
    print(rep.render(f"Classification results ({Path(args.data).name})"))
    if args.out:
        Path(args.out).write_text(rep.to_csv(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowsvm", description="Gas-liquid flow-pattern classification with an RBF SVM.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    jobs_default = os.cpu_count() or 1

    p = sub.add_parser("synth", help="write a synthetic flow-pattern dataset")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--n", type=int, default=5676)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="split, train a one-vs-one SVM, report on the test split")
    p.add_argument("--data", required=True)
    p.add_argument("--scheme", default="test1", choices=sorted(DEFAULT_C_BY_SCHEME))
    p.add_argument("--c", type=_positive, default=None,
                   help="box constraint (default 100 for test1, 1000 for test2/test3)")
    p.add_argument("--gamma", type=_positive, default=DEFAULT_GAMMA_VALUE)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=jobs_default)
    p.add_argument("--model-out")
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="grid-search C and gamma with stratified k-fold CV")
    p.add_argument("--data", required=True)
    p.add_argument("--scheme", default="test1", choices=sorted(DEFAULT_C_BY_SCHEME))
    p.add_argument("--c-grid", type=_values, default=DEFAULT_C)
    p.add_argument("--gamma-grid", type=_values, default=DEFAULT_GAMMA)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=jobs_default)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("eval", help="evaluate a saved model on a CSV dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="render precision/recall/F1 from a confusion-matrix CSV")
    p.add_argument("--data", required=True, help="confusion matrix CSV (header row and column of class names)")
    p.add_argument("--out", help="write the class report as CSV")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (FlowSvmError, OSError, ValueError) as exc:
        print(f"flowsvm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
