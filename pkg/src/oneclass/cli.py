"""Command-line interface: train, score, benchmark, synth.

Exit codes: 0 success, 1 benchmark ran with failed cells, 2 usage or
input problem, 3 corrupt artifact, 4 numerical divergence.  Every
subcommand honors --seed; all randomness flows from it through named
substreams (init/train, splits, synth), so equal arguments reproduce
byte-identical outputs.
"""

import argparse
import sys
from pathlib import Path

from .baselines import BSVM, MPM, SVDD, OneClassSVM, OneClassSVMPlus, \
    load_baseline_file
from .benchmark import format_benchmark_table, run_benchmark, \
    write_benchmark_csv
from .data import load_feature_file, load_manifest, save_feature_file, \
    save_manifest, DatasetManifest
from .exceptions import (DivergenceError, OneClassError, ParameterError,
                         ParseError, ProtocolError)
from .numerics import RngState
from .occnn import OneClassCNN
from .protocols import (build_abnormality_protocol, build_auth_protocol,
                        build_novelty_protocol)
from .serialize import NETWORK_MAGIC, BASELINE_MAGIC, peek_magic
from .synth import synth_dataset

METHOD_NAMES = ("occnn", "ocsvm", "ocsvm_plus", "svdd", "mpm", "bsvm")
PROTOCOLS = ("abnormality", "auth", "novelty")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_CORRUPT = 3
EXIT_DIVERGED = 4


def _parse_head_dims(text):
    if text in (None, "", "auto"):
        return None, None
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ParameterError(
            f"--head-dims must be comma-separated ints, got {text!r}") from None
    if not dims:
        return None, None
    return dims[:-1], dims[-1]


def _occnn_from_args(args, seed):
    hidden, feature_dim = _parse_head_dims(args.head_dims)
    return OneClassCNN(
        feature_dim=feature_dim,
        head_hidden_dims=hidden,
        classifier_activation=args.classifier_activation,
        sigma=args.sigma,
        mu=args.mu,
        lr=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=seed,
        resample=args.resample,
    )


def _method_factory(name, args):
    if name == "occnn":
        return lambda s: _occnn_from_args(args, s)
    if name == "ocsvm":
        return lambda s: OneClassSVM(nu=args.nu, kernel=args.kernel,
                                     gamma=args.gamma)
    if name == "ocsvm_plus":
        return lambda s: OneClassSVMPlus(cnn=_occnn_from_args(args, s),
                                         nu=args.nu, kernel=args.kernel,
                                         gamma=args.gamma)
    if name == "svdd":
        return lambda s: SVDD(C=args.svdd_c, kernel=args.kernel,
                              gamma=args.gamma)
    if name == "mpm":
        return lambda s: MPM(pca_dims=args.pca_dims, lam=args.lam,
                             quantile=args.quantile)
    if name == "bsvm":
        return lambda s: BSVM(sigma=args.sigma, seed=s)
    raise ProtocolError(f"unknown method {name!r}")


def _add_train_flags(p):
    p.add_argument("--sigma", type=float, default=0.01,
                   help="pseudo-negative Gaussian std")
    p.add_argument("--mu", type=float, default=0.0,
                   help="pseudo-negative Gaussian mean")
    p.add_argument("--lr", type=float, default=1e-4, help="Adam learning rate")
    p.add_argument("--batch", type=int, default=64,
                   help="target rows per mini-batch (network sees 2x)")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--head-dims", default=None,
                   help="comma list; last entry is the feature width "
                        "(default: input_dim,input_dim)")
    p.add_argument("--classifier-activation", choices=("relu", "none"),
                   default="relu")
    p.add_argument("--resample", choices=("batch", "epoch", "once"),
                   default="batch", help="pseudo-negative resampling policy")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="oneclass",
        description="One-class classification toolkit",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the one-class network on a class",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True)
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--loss-out", default=None,
                   help="loss history CSV (default: <out>.loss.csv)")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)

    p = sub.add_parser("score", help="score a feature file with a saved model",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--format", choices=("csv", "binary"), default=None,
                   help="feature file format (default: infer from extension)")
    p.add_argument("--out", default=None, help="default: stdout")
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for interface uniformity; scoring draws "
                        "no randomness")

    p = sub.add_parser("benchmark", help="fit methods across protocol splits",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True)
    p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    p.add_argument("--method", action="append", choices=METHOD_NAMES,
                   default=None, help="repeatable; default: all methods")
    p.add_argument("--out", required=True, help="results CSV to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--abnormal-class", default="abnormal",
                   help="manifest class used as the abnormal pool")
    p.add_argument("--novel-per-class", type=int, default=50)
    p.add_argument("--kernel", choices=("rbf", "linear"), default="rbf")
    p.add_argument("--nu", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=None,
                   help="rbf width (default: 1/(d*var))")
    p.add_argument("--svdd-c", type=float, default=None,
                   help="SVDD box bound (default: 1/(0.1*n))")
    p.add_argument("--pca-dims", type=int, default=None)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--quantile", type=float, default=0.05)
    _add_train_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset + manifest",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--kind", choices=("blobs", "ring", "manifold"),
                   required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--gap", type=float, default=2.5)
    p.add_argument("--thickness", type=float, default=0.25)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--extent", type=float, default=15.0)
    p.add_argument("--amplitude", type=float, default=3.0)
    p.add_argument("--waves", type=float, default=3.0)
    p.add_argument("--center-spread", type=float, default=0.0)
    return parser


def _cmd_train(args):
    manifest = load_manifest(args.manifest)
    features = manifest.load_class(args.class_name)
    est = _occnn_from_args(args, args.seed)
    est.fit(features.data)
    est.save(args.out)
    loss_out = args.loss_out or f"{args.out}.loss.csv"
    with open(loss_out, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in enumerate(est.loss_history_):
            fh.write(f"{epoch},{float(loss)!r}\n")
    print(f"wrote {args.out} (final loss {est.loss_history_[-1]:.6f}) "
          f"and {loss_out}")
    return EXIT_OK


def _cmd_score(args):
    magic = peek_magic(args.model)
    if magic == NETWORK_MAGIC:
        model = OneClassCNN.load(args.model)
    elif magic == BASELINE_MAGIC:
        model = load_baseline_file(args.model)
    else:
        raise ParseError(f"{args.model}: bad magic {magic!r}")
    features = load_feature_file(args.features, args.format)
    scores = model.decision_function(features.data)
    lines = "".join(f"{float(s)!r}\n" for s in scores)
    if args.out:
        Path(args.out).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def _build_splits(args, classes):
    rng = RngState(args.seed).substream("splits")
    if args.protocol == "abnormality":
        if args.abnormal_class not in classes:
            raise ProtocolError(
                f"abnormal class {args.abnormal_class!r} not in manifest")
        abnormal = classes.pop(args.abnormal_class)
        return build_abnormality_protocol(classes, abnormal, rng)
    if args.protocol == "auth":
        return build_auth_protocol(classes, rng)
    return build_novelty_protocol(classes, rng,
                                  novel_per_class=args.novel_per_class)


def _cmd_benchmark(args):
    manifest = load_manifest(args.manifest)
    classes = manifest.load_all()
    splits = _build_splits(args, classes)
    names = args.method or list(METHOD_NAMES)
    methods = [(name, _method_factory(name, args)) for name in names]
    results = run_benchmark(methods, splits, seed=args.seed)
    write_benchmark_csv(results, args.out)
    print(format_benchmark_table(results))
    if any(result.failures for result in results):
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_synth(args):
    rng = RngState(args.seed).substream("synth")
    kind_params = {
        "blobs": dict(separation=args.separation, sigma=args.sigma),
        "ring": dict(radius=args.radius, gap=args.gap,
                     thickness=args.thickness, noise=args.noise),
        "manifold": dict(extent=args.extent, amplitude=args.amplitude,
                         waves=args.waves, noise=args.noise,
                         center_spread=args.center_spread), }[args.kind]
    datasets = synth_dataset(args.kind, rng, n_classes=args.classes,
                             n_per_class=args.per_class, dim=args.dim,
                             **kind_params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = {}
    for name, fs in datasets.items():
        rel = f"{name}.ocfv"
        save_feature_file(fs, out / rel, format="binary")
        entries[name] = rel
    manifest = DatasetManifest(dim=args.dim, classes=entries, format="ocfv",
                               base_dir=out)
    save_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(entries)} classes and manifest to {out}")
    return EXIT_OK


_COMMANDS = {"train": _cmd_train, "score": _cmd_score,
             "benchmark": _cmd_benchmark, "synth": _cmd_synth}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (OneClassError, FileNotFoundError, FileExistsError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
