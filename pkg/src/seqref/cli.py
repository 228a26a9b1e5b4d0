"""Command-line surface: synth, mine, select, transform, classify, cv, report.

Options can also come from a JSON config file (``--config``); explicit
flags override file values, and every run echoes its fully-resolved
configuration so results can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import patterns as pat
from .classify import (
    ClassifierConfig,
    CvConfig,
    KnnConfig,
    cross_validate,
    gnb_fit,
    gnb_predict_batch,
    knn_predict_batch,
)
from .datasets import parse_dataset, synth_gen, write_dataset
from .features import export_arff, export_csv, transform
from .refselect import SelectionMethod, select_mht, select_references
from .report import render_report
from .seqcore import GapBounds, SequenceDataset
from .similarity import (
    JACCARD_LCS,
    LCS_MIN,
    SSK,
    DEFAULT_SSK_LAMBDA,
    DEFAULT_SSK_N,
    SimilaritySpec,
)

SIM_ALIASES = {
    "jaccard": JACCARD_LCS,
    "jaccard_lcs": JACCARD_LCS,
    "ssk": SSK,
    "lcsmin": LCS_MIN,
    "lcs_min": LCS_MIN,
    "lcs-min": LCS_MIN,
    "sf1": "sf1",
    "sf2": "sf2",
    "sf3": "sf3",
    "sf4": "sf4",
    "sf5": "sf5",
    "sf6": "sf6",
}

DEFAULTS = {
    "sim": "jaccard",
    "gamma": None,
    "ssk_n": DEFAULT_SSK_N,
    "ssk_lambda": DEFAULT_SSK_LAMBDA,
    "select": "ra",
    "alpha": 0.05,
    "pointnum": None,
    "exclude_self": False,
    "preset": None,
    "minsup": 0.3,
    "maxsize": 3,
    "mingap": None,
    "maxgap": None,
    "clf": "knn",
    "k": 1,
    "folds": 5,
    "repeats": 5,
    "seed": 0,
    "threads": 1,
    "skip_failed_folds": False,
}


def _load_config(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {sorted(unknown)}")
    return doc


def _resolve(args: argparse.Namespace, keys: list[str]) -> dict:
    """Defaults, then config file values, then explicit flags."""
    cfg = {key: DEFAULTS[key] for key in keys}
    cfg.update(_load_config(getattr(args, "config", None), set(keys)))
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _collect_errors(*checks) -> None:
    errors = [msg for msg in checks if msg]
    if errors:
        raise ValueError("invalid configuration:\n  - " + "\n  - ".join(errors))


def _similarity_from(cfg: dict) -> SimilaritySpec:
    name = str(cfg["sim"]).lower()
    if name not in SIM_ALIASES:
        raise ValueError(f"unknown similarity {name!r}; expected one of {sorted(SIM_ALIASES)}")
    kind = SIM_ALIASES[name]
    if kind == SSK:
        return SimilaritySpec.ssk(n=int(cfg["ssk_n"]), lam=float(cfg["ssk_lambda"]))
    if kind == "sf2":
        if cfg["gamma"] is None:
            raise ValueError("sf2 requires --gamma")
        return SimilaritySpec("sf2", gamma=float(cfg["gamma"]))
    return SimilaritySpec(kind)


def _method_from(cfg: dict) -> SelectionMethod:
    name = str(cfg["select"]).lower()
    if name in ("ra", "all"):
        return SelectionMethod.ra()
    if name == "gahc":
        pointnum = cfg["pointnum"]
        return SelectionMethod.gahc(None if pointnum is None else int(pointnum))
    if name == "mht":
        return SelectionMethod.mht(alpha=float(cfg["alpha"]), include_self=not cfg["exclude_self"])
    if name == "pattern":
        if cfg["preset"] is None:
            raise ValueError("selection method 'pattern' requires --preset")
        return SelectionMethod.pattern(str(cfg["preset"]))
    raise ValueError(f"unknown selection method {name!r}; expected ra|gahc|mht|pattern")


def _classifier_from(cfg: dict) -> ClassifierConfig:
    return ClassifierConfig(kind=str(cfg["clf"]).lower(), k=int(cfg["k"]))


def _mining_from(cfg: dict) -> pat.MiningConfig:
    gap = None
    if (cfg["mingap"] is None) != (cfg["maxgap"] is None):
        raise ValueError("--mingap and --maxgap must be given together")
    if cfg["mingap"] is not None:
        gap = GapBounds(int(cfg["mingap"]), int(cfg["maxgap"]))
    return pat.MiningConfig(minsup=float(cfg["minsup"]), maxsize=int(cfg["maxsize"]), gap=gap)


def _pipeline_from(cfg: dict) -> tuple[SelectionMethod, SimilaritySpec, ClassifierConfig]:
    errors: list[str] = []
    method = spec = clf = None
    for build in ("method", "spec", "clf"):
        try:
            if build == "method":
                method = _method_from(cfg)
            elif build == "spec":
                spec = _similarity_from(cfg)
            else:
                clf = _classifier_from(cfg)
        except ValueError as exc:
            errors.append(str(exc))
    if errors:
        raise ValueError("invalid configuration:\n  - " + "\n  - ".join(errors))
    return method, spec, clf


def _write_or_stdout(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _echo_config(cfg: dict) -> None:
    resolved = json.dumps(cfg, sort_keys=True)
    print(f"config: {resolved}", file=sys.stderr)


def _add_sim_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sim", help="similarity: jaccard|ssk|lcsmin|sf1..sf6 (default jaccard)")
    p.add_argument("--gamma", type=float, help="sf2 window tolerance in [0,1]")
    p.add_argument("--ssk-n", dest="ssk_n", type=int, help="ssk subsequence length (default 1)")
    p.add_argument("--ssk-lambda", dest="ssk_lambda", type=float,
                   help="ssk gap decay in (0,1) (default 0.5)")


def _add_select_options(p: argparse.ArgumentParser, flag: str) -> None:
    p.add_argument(flag, dest="select", help="reference selection: ra|gahc|mht|pattern (default ra)")
    p.add_argument("--alpha", type=float, help="mht significance level (default 0.05)")
    p.add_argument("--pointnum", type=int,
                   help="gahc cluster count (default: ceil(train size / 10))")
    p.add_argument("--exclude-self", dest="exclude_self", action="store_const", const=True,
                   help="mht: drop the candidate's self-similarity from its positive sample")
    p.add_argument("--preset", help=f"pattern preset: {'|'.join(sorted(pat.PRESETS))}")


def _add_mining_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--minsup", type=float, help="minimum per-class support (default 0.3)")
    p.add_argument("--maxsize", type=int, help="maximum pattern length (default 3)")
    p.add_argument("--mingap", type=int, help="minimum gap between matched positions")
    p.add_argument("--maxgap", type=int, help="maximum gap between matched positions")


def _add_clf_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clf", help="classifier: knn|nb (default knn)")
    p.add_argument("--k", type=int, help="knn neighbour count (default 1)")


def _patterns_tsv(mined, dataset: SequenceDataset) -> str:
    header = ["pattern", "length"]
    for tok in dataset.classes:
        header += [f"count_{tok}", f"sup_{tok}", f"occount_{tok}", f"interest_{tok}"]
    lines = ["\t".join(header)]
    for p, stats in mined:
        row = [" ".join(p.sequence.tokens(dataset.alphabet)), str(len(p))]
        for ci in range(len(dataset.classes)):
            row += [
                str(stats.counts[ci]),
                repr(stats.sup(ci)),
                str(stats.occounts[ci]),
                repr(stats.interest(ci)),
            ]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _refs_tsv(refset, dataset: SequenceDataset) -> str:
    lines = ["index\tprovenance\titems"]
    for i, (seq, origin) in enumerate(zip(refset.references, refset.provenance)):
        lines.append(f"{i}\t{origin}\t{' '.join(seq.tokens(dataset.alphabet))}")
    return "\n".join(lines) + "\n"


def cmd_synth(args: argparse.Namespace) -> int:
    dataset = synth_gen(args.classes, args.per_class, args.motif_len, args.noise_len, args.seed)
    write_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} instances, {len(dataset.classes)} classes to {args.out}")
    return 0


def cmd_mine(args: argparse.Namespace) -> int:
    keys = ["minsup", "maxsize", "mingap", "maxgap", "preset"]
    cfg = _resolve(args, keys)
    _echo_config(cfg)
    dataset = parse_dataset(args.data)
    if cfg["preset"] is not None:
        preset = pat.PRESETS.get(str(cfg["preset"]))
        if preset is None:
            raise ValueError(f"unknown preset {cfg['preset']!r}; expected {sorted(pat.PRESETS)}")
        mining = preset.mining
        kept = pat.preset_references(dataset.instances, preset)
        mined = pat.mine_frequent(dataset.instances, mining)
        keep_set = {p.sequence for p in kept}
        mined = [(p, st) for p, st in mined if p.sequence in keep_set]
    else:
        mining = _mining_from(cfg)
        mined = pat.mine_frequent(dataset.instances, mining)
    _write_or_stdout(_patterns_tsv(mined, dataset), args.out)
    print(f"mined {len(mined)} patterns "
          f"(minsup={mining.minsup}, maxsize={mining.maxsize})", file=sys.stderr)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    keys = ["select", "alpha", "pointnum", "exclude_self", "preset",
            "sim", "gamma", "ssk_n", "ssk_lambda"]
    cfg = _resolve(args, keys)
    if args.method is not None:
        cfg["select"] = args.method
    _echo_config(cfg)
    dataset = parse_dataset(args.data)
    method, spec, _ = _pipeline_from({**cfg, "clf": "knn", "k": 1})
    if method.kind == "mht" and args.mht_report is not None:
        refset, mht_report = select_mht(
            dataset.instances, spec, method.alpha, include_self=method.include_self
        )
        Path(args.mht_report).write_text(mht_report.to_tsv(), encoding="utf-8")
    else:
        if args.mht_report is not None:
            print("warning: --mht-report only applies to --method mht; ignored",
                  file=sys.stderr)
        refset = select_references(dataset.instances, method, spec)
    _write_or_stdout(_refs_tsv(refset, dataset), args.out)
    print(f"selected {len(refset)} references via {refset.method}", file=sys.stderr)
    return 0


def cmd_transform(args: argparse.Namespace) -> int:
    keys = ["select", "alpha", "pointnum", "exclude_self", "preset",
            "sim", "gamma", "ssk_n", "ssk_lambda", "threads"]
    cfg = _resolve(args, keys)
    _echo_config(cfg)
    dataset = parse_dataset(args.data)
    method, spec, _ = _pipeline_from({**cfg, "clf": "knn", "k": 1})
    refset = select_references(dataset.instances, method, spec)
    matrix = transform(dataset.instances, refset, spec, dataset.classes, threads=cfg["threads"])
    if args.format == "arff":
        export_arff(matrix, args.out)
    else:
        export_csv(matrix, args.out)
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} feature matrix to {args.out}",
          file=sys.stderr)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    keys = ["select", "alpha", "pointnum", "exclude_self", "preset",
            "sim", "gamma", "ssk_n", "ssk_lambda", "clf", "k", "threads"]
    cfg = _resolve(args, keys)
    _echo_config(cfg)
    method, spec, clf = _pipeline_from(cfg)
    train = parse_dataset(args.train)
    test = parse_dataset(args.test, vocab=train)
    refset = select_references(train.instances, method, spec)
    trainX = transform(train.instances, refset, spec, test.classes, threads=cfg["threads"])
    testX = transform(test.instances, refset, spec, test.classes, threads=cfg["threads"])
    if clf.kind == "knn":
        preds = knn_predict_batch(trainX, testX.values, KnnConfig(k=clf.k))
    else:
        preds = gnb_predict_batch(gnb_fit(trainX), testX.values)
    truth = np.asarray(test.labels())
    lines = ["index\ttrue\tpredicted"]
    for i, (t, p) in enumerate(zip(truth, preds)):
        lines.append(f"{i}\t{test.classes[t]}\t{test.classes[p]}")
    _write_or_stdout("\n".join(lines) + "\n", args.out)
    print(f"accuracy {float(np.mean(preds == truth))!r} on {len(test)} instances",
          file=sys.stderr)
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    keys = ["select", "alpha", "pointnum", "exclude_self", "preset",
            "sim", "gamma", "ssk_n", "ssk_lambda", "clf", "k",
            "folds", "repeats", "seed", "threads", "skip_failed_folds"]
    cfg = _resolve(args, keys)
    errors: list[str] = []
    method = spec = clf = cv_cfg = None
    try:
        method, spec, clf = _pipeline_from(cfg)
    except ValueError as exc:
        errors.append(str(exc))
    try:
        cv_cfg = CvConfig(
            folds=int(cfg["folds"]), repeats=int(cfg["repeats"]), seed=int(cfg["seed"])
        )
    except ValueError as exc:
        errors.append(str(exc))
    if errors:
        raise ValueError("\n".join(errors))
    dataset = parse_dataset(args.data)
    report = cross_validate(
        dataset, method, spec, clf, cv_cfg,
        threads=int(cfg["threads"]),
        skip_failed_folds=bool(cfg["skip_failed_folds"]),
    )
    report.config["data"] = str(args.data)
    wrote = []
    if args.json is not None:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
        wrote.append(args.json)
    if args.tsv is not None:
        Path(args.tsv).write_text(report.to_tsv(), encoding="utf-8")
        wrote.append(args.tsv)
    if not wrote:
        sys.stdout.write(report.to_json())
    print(f"mean accuracy {report.mean_accuracy!r}"
          + (f"; wrote {', '.join(wrote)}" if wrote else ""), file=sys.stderr)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.json, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    paths = render_report(doc, args.outdir)
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqref",
        description="Reference-based sequence classification: select reference sequences, "
        "embed sequences as similarity vectors, classify and cross-validate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--per-class", dest="per_class", type=int, default=20)
    p.add_argument("--motif-len", dest="motif_len", type=int, default=5)
    p.add_argument("--noise-len", dest="noise_len", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="mine frequent patterns with per-class stats")
    p.add_argument("--data", required=True)
    p.add_argument("--config", help="JSON config file; flags override its values")
    _add_mining_options(p)
    p.add_argument("--preset", help=f"pattern preset: {'|'.join(sorted(pat.PRESETS))}")
    p.add_argument("-o", "--out", help="output TSV (default stdout)")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("select", help="select reference sequences")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--method", help="alias for --select")
    _add_select_options(p, "--select")
    _add_sim_options(p)
    p.add_argument("--mht-report", dest="mht_report", help="write the MHT audit TSV here")
    p.add_argument("-o", "--out", help="output TSV (default stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("transform", help="export the similarity feature matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    _add_select_options(p, "--select")
    _add_sim_options(p)
    p.add_argument("--format", choices=("csv", "arff"), default="csv")
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("classify", help="train on one file, predict another")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--config")
    _add_select_options(p, "--select")
    _add_sim_options(p)
    _add_clf_options(p)
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--out", help="predictions TSV (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cv", help="repeated stratified cross-validation of the full pipeline")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    _add_select_options(p, "--select")
    _add_sim_options(p)
    _add_clf_options(p)
    p.add_argument("--folds", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--skip-failed-folds", dest="skip_failed_folds",
                   action="store_const", const=True,
                   help="record failed folds instead of aborting the run")
    p.add_argument("--json", help="write the report JSON here")
    p.add_argument("--tsv", help="write the per-fold accuracy TSV here")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("report", help="render a cv report to TSV and figures")
    p.add_argument("--json", required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"seqref: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
