"""Command-line driver: fit models, run evaluation protocols and sweeps,
check invariants, and emit eigenvalue/power curves as tables.

Every command is a pure function of its configuration, dataset bytes, and
seed; rerunning with the same inputs reproduces output files byte for byte.
Exit codes: 0 success, 1 validation error, 2 invariant failure.
"""

import argparse
import csv
import json
import sys
import warnings
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import checks, linalg
from .classify import RULES, evaluate
from .data import load_dataset, save_dataset
from .errors import GfdaError, ValidationError
from .fisher import (DiscriminantModel, discriminant_power_curve, fda,
                     gds_discriminant, gfda_linear_form, gfda_product_form,
                     null_lda, pca_lda, reg_lda, scatter_ladder)
from .subspace import fit_ensemble
from .synth import (GenSpec, labeled_gaussians, labeled_mixtures,
                    subspace_config)

METHODS = ("fda", "pcaLDA", "regLDA", "nullLDA", "gfda", "gfda-linear", "gds")

# Which optional parameters make sense for which method.
_PARAM_METHODS = {
    "delta": {"regLDA"},
    "residual_threshold": {"pcaLDA"},
    "gamma": {"gds"},
    "gds_dims": {"gds"},
    "subspace_dim": {"gfda", "gfda-linear", "gds"},
    "energy": {"gfda", "gfda-linear", "gds"},
}

MODEL_FORMAT = "gfda-model-v1"


@dataclass
class ExperimentConfig:
    method: str = "gfda-linear"
    normalize: bool = False
    delta: float = 1e-4
    residual_threshold: float = 1e-2
    gamma: Optional[float] = None
    gds_dims: Optional[int] = None
    subspace_dim: Optional[int] = None
    energy: Optional[float] = None
    classifier: str = "nearest-mean"
    train: Optional[str] = None
    test: Optional[str] = None
    train_count: Optional[int] = None
    repetitions: int = 60
    seed: int = 0
    out: Optional[str] = None

    _BOOL = {"normalize"}
    _INT = {"gds_dims", "subspace_dim", "train_count", "repetitions", "seed"}
    _FLOAT = {"delta", "residual_threshold", "gamma", "energy"}

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls) if not f.name.startswith("_")}
        cfg = cls()
        for key, value in raw.items():
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}")
            if value is None:
                continue
            if key in cls._BOOL and isinstance(value, str):
                low = value.strip().lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValidationError(f"{key}: not a boolean: {value!r}")
                value = low in ("true", "1", "yes")
            elif key in cls._INT:
                value = int(value)
            elif key in cls._FLOAT:
                value = float(value)
            setattr(cfg, key, value)
        cfg._validate(set(raw) - {k for k, v in raw.items() if v is None})
        return cfg

    def _validate(self, given):
        if self.method not in METHODS:
            raise ValidationError(
                f"unknown method {self.method!r}; pick from {METHODS}")
        if self.classifier not in RULES:
            raise ValidationError(
                f"unknown classifier {self.classifier!r}; pick from {RULES}")
        for key, methods in _PARAM_METHODS.items():
            if key in given and self.method not in methods:
                raise ValidationError(
                    f"parameter {key!r} only applies to {sorted(methods)}, "
                    f"not {self.method!r}")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if self.train_count is not None and self.train_count < 1:
            raise ValidationError("train_count must be >= 1")


def load_config_file(path) -> dict:
    """Flat key=value configuration; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def resolve_config(args) -> ExperimentConfig:
    raw = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("method", "normalize", "delta", "residual_threshold", "gamma",
                "gds_dims", "subspace_dim", "energy", "classifier", "train",
                "test", "train_count", "repetitions", "seed", "out"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    return ExperimentConfig.from_mapping(raw)


def build_model(cfg: ExperimentConfig, X, y) -> DiscriminantModel:
    """Fit the configured method on labeled training data."""
    if cfg.method == "fda":
        return fda(X, y, normalized=cfg.normalize)
    if cfg.method == "regLDA":
        return reg_lda(X, y, delta=cfg.delta, normalized=cfg.normalize)
    if cfg.method == "pcaLDA":
        return pca_lda(X, y, residual_threshold=cfg.residual_threshold,
                       normalized=cfg.normalize)
    if cfg.method == "nullLDA":
        return null_lda(X, y, normalized=cfg.normalize)

    ensemble = fit_ensemble(X, y, dim=cfg.subspace_dim, energy=cfg.energy)
    if cfg.method == "gfda":
        return gfda_product_form(ensemble, normalized=cfg.normalize)
    if cfg.method == "gfda-linear":
        return gfda_linear_form(ensemble, normalized=cfg.normalize)
    if cfg.gds_dims is not None:
        return gds_discriminant(ensemble, dims=cfg.gds_dims,
                                normalized=cfg.normalize)
    gamma = cfg.gamma if cfg.gamma is not None else 0.90
    return gds_discriminant(ensemble, gamma=gamma, normalized=cfg.normalize)


def _require_out(cfg_out, args_out):
    out = args_out or cfg_out
    if not out:
        raise ValidationError("an output path is required (--out)")
    return out


def save_model(path, model: DiscriminantModel, cfg: ExperimentConfig):
    payload = {
        "format": MODEL_FORMAT,
        "model": model.to_dict(),
        "classifier": cfg.classifier,
        "seed": cfg.seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> DiscriminantModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path}: not a {MODEL_FORMAT} file")
    return DiscriminantModel.from_dict(payload["model"])


# ---------------------------------------------------------------------------
# evaluation protocol
# ---------------------------------------------------------------------------

def _per_class_indices(y):
    y = np.asarray(y)
    return {label: np.nonzero(y == label)[0]
            for label in sorted(set(y.tolist()))}


def _split_train_test(X, y, n, rng, external_test):
    """Pick n training rows per class; test on the rest or an external set."""
    by_label = _per_class_indices(y)
    train_idx = []
    test_idx = []
    kept = []
    for label, idx in by_label.items():
        if n is not None and idx.size < n:
            print(f"warning: class {label!r} has {idx.size} < {n} samples; "
                  "skipped", file=sys.stderr)
            continue
        kept.append(label)
        if n is None:
            train_idx.extend(idx.tolist())
        else:
            sel = rng.choice(idx.size, size=n, replace=False)
            chosen = set(idx[sel].tolist())
            train_idx.extend(sorted(chosen))
            test_idx.extend(i for i in idx.tolist() if i not in chosen)
    if len(kept) < 2:
        raise ValidationError("fewer than 2 classes have enough samples")
    y = np.asarray(y)
    Xtr, ytr = X[train_idx], y[train_idx].tolist()
    if external_test is not None:
        Xte, yte_all = external_test
        mask = [lab in kept for lab in yte_all]
        if not all(mask):
            print("warning: test samples of skipped classes ignored",
                  file=sys.stderr)
        Xte = Xte[np.asarray(mask)]
        yte = [lab for lab, m in zip(yte_all, mask) if m]
    else:
        if not test_idx:
            raise ValidationError(
                "no held-out samples remain; provide a test dataset or a "
                "train_count below the class sizes")
        Xte, yte = X[test_idx], y[test_idx].tolist()
    return Xtr, ytr, Xte, yte


def run_protocol(cfg: ExperimentConfig):
    """Repeated random-subset evaluation; returns one report per repetition."""
    if not cfg.train:
        raise ValidationError("a training dataset is required (train=...)")
    X, y = load_dataset(cfg.train)
    external = load_dataset(cfg.test) if cfg.test else None
    reports = []
    for rep in range(cfg.repetitions):
        rng = np.random.default_rng(cfg.seed + rep)
        Xtr, ytr, Xte, yte = _split_train_test(X, y, cfg.train_count, rng,
                                               external)
        model = build_model(cfg, Xtr, ytr)
        reports.append(evaluate(model, Xte, yte, rule=cfg.classifier))
    return reports


def _fmt(value):
    if value is None:
        return "NA"
    return repr(float(value))


def _write_eval_csv(path, cfg, reports):
    recs = [r.recognition_rate for r in reports]
    eers = [r.eer for r in reports if r.eer is not None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "train_count", "recognition_rate", "eer"])
        for rep, report in enumerate(reports):
            writer.writerow([rep, cfg.train_count if cfg.train_count is not None
                             else "all", _fmt(report.recognition_rate),
                             _fmt(report.eer)])
        writer.writerow(["mean", "", _fmt(np.mean(recs)),
                         _fmt(np.mean(eers)) if eers else "NA"])
        writer.writerow(["std", "", _fmt(np.std(recs)),
                         _fmt(np.std(eers)) if eers else "NA"])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    cfg = resolve_config(args)
    if not cfg.train:
        raise ValidationError("a training dataset is required (train=...)")
    out = _require_out(cfg.out, args.out)
    X, y = load_dataset(cfg.train)
    model = build_model(cfg, X, y)
    save_model(out, model, cfg)
    print(f"fitted {model.method}: {model.dim}-dimensional discriminant "
          f"space over {len(model.class_labels)} classes -> {out}")
    return 0


def _write_scores_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["repetition", "kind", "score"])
        for rep, report in enumerate(reports):
            for s in report.genuine_scores:
                writer.writerow([rep, "genuine", _fmt(s)])
            for s in report.impostor_scores:
                writer.writerow([rep, "impostor", _fmt(s)])


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    out = _require_out(cfg.out, args.out)
    if args.model:
        if not cfg.test:
            raise ValidationError("--model evaluation needs a test dataset")
        model = load_model(args.model)
        Xte, yte = load_dataset(cfg.test)
        reports = [evaluate(model, Xte, yte, rule=cfg.classifier)]
    else:
        reports = run_protocol(cfg)
    _write_eval_csv(out, cfg, reports)
    if args.scores:
        _write_scores_csv(args.scores, reports)
    recs = [r.recognition_rate for r in reports]
    eers = [r.eer for r in reports if r.eer is not None]
    eer_txt = f"{np.mean(eers):.4f}" if eers else "NA"
    print(f"{len(reports)} repetition(s): recognition {np.mean(recs):.4f}% "
          f"mean, EER {eer_txt}% mean -> {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    out = _require_out(cfg.out, args.out)
    lo, hi = args.min_n, args.max_n
    if lo < 1 or hi < lo:
        raise ValidationError("need 1 <= min-n <= max-n")
    rows = []
    for n in range(lo, hi + 1):
        cfg.train_count = n
        reports = run_protocol(cfg)
        recs = np.array([r.recognition_rate for r in reports])
        eers = np.array([r.eer for r in reports if r.eer is not None])
        rows.append([n, len(reports), _fmt(recs.mean()), _fmt(recs.std()),
                     _fmt(eers.mean()) if eers.size else "NA",
                     _fmt(eers.std()) if eers.size else "NA"])
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["train_count", "repetitions", "mean_recognition",
                         "std_recognition", "mean_eer", "std_eer"])
        writer.writerows(rows)
    print(f"swept train_count {lo}..{hi} ({cfg.method}) -> {out}")
    return 0


def cmd_invariants(args) -> int:
    results = checks.run(args.scope or None)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: max_residual={r.max_residual:.3e} "
              f"tol={r.tolerance:.3e} ({r.detail})")
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed} invariant battery(ies) failed", file=sys.stderr)
        return 2
    return 0


def cmd_eigencurves(args) -> int:
    out = _require_out(None, args.out)
    C, N, L = args.classes, args.subspace_dim, args.ambient
    if L is None:
        L = 4 * C * N
    ensemble = subspace_config(C, N, L, separation=args.separation,
                               seed=args.seed)
    pair = scatter_ladder(ensemble, "gFDA")
    G = pair.within
    ghat = G - pair.between / C

    eig_g = linalg.sym_eig(G)
    keep = eig_g.values > linalg.RANK_TOL * eig_g.values[-1]
    span = eig_g.vectors[:, keep]
    vals_g = eig_g.values[keep]
    eig_h = linalg.sym_eig(span.T @ ghat @ span)
    vecs_h = span @ eig_h.vectors

    power_g = discriminant_power_curve(span, pair)
    power_h = discriminant_power_curve(vecs_h, pair)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue_g", "eigenvalue_ghat",
                         "power_g", "power_ghat"])
        for i in range(vals_g.size):
            writer.writerow([i + 1, _fmt(vals_g[i]), _fmt(eig_h.values[i]),
                             _fmt(power_g[i]), _fmt(power_h[i])])
    print(f"eigencurves for C={C}, N={N}, L={L} -> {out}")
    return 0


def cmd_synth(args) -> int:
    out = _require_out(None, args.out)
    if args.kind == "gaussian":
        X, labels = labeled_gaussians(args.classes, args.dim, args.count,
                                      args.mean_norm, args.sigma_max,
                                      args.seed, sample_seed=args.sample_seed)
        params = {"classes": args.classes, "dim": args.dim,
                  "count": args.count, "mean_norm": args.mean_norm,
                  "sigma_max": args.sigma_max,
                  "sample_seed": args.sample_seed}
    else:
        mode = "Set1" if args.kind == "mixture-set1" else "Set2"
        X, labels = labeled_mixtures(args.classes, args.dim, args.count,
                                     mode, args.seed,
                                     basis_count=args.basis_count,
                                     anchor_spread=args.spread,
                                     sample_seed=args.sample_seed)
        params = {"classes": args.classes, "dim": args.dim,
                  "count": args.count, "mode": mode,
                  "basis_count": args.basis_count,
                  "anchor_spread": args.spread,
                  "sample_seed": args.sample_seed,
                  "simplex": "normalized exponential draws"}
    save_dataset(out, X, labels)
    record = GenSpec(kind=args.kind, seed=args.seed, params=params)
    print(json.dumps(record.to_dict(), sort_keys=True))
    print(f"{X.shape[0]} samples of dimension {X.shape[1]} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_config_options(p):
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--normalize", action="store_const", const=True,
                   help="normalize projections and references (+N variants)")
    p.add_argument("--delta", type=float, help="regLDA ridge strength")
    p.add_argument("--residual-threshold", dest="residual_threshold",
                   type=float, help="pcaLDA residual-energy threshold")
    p.add_argument("--gamma", type=float,
                   help="GDS cumulative-power fraction (default 0.90)")
    p.add_argument("--gds-dims", dest="gds_dims", type=int,
                   help="fixed GDS dimension instead of the gamma rule")
    p.add_argument("--subspace-dim", dest="subspace_dim", type=int,
                   help="fixed class-subspace dimension (default: all)")
    p.add_argument("--energy", type=float,
                   help="class-subspace energy threshold dim rule")
    p.add_argument("--classifier", choices=RULES)
    p.add_argument("--train", help="training dataset CSV")
    p.add_argument("--test", help="test dataset CSV")
    p.add_argument("--train-count", dest="train_count", type=int,
                   help="training samples drawn per class and repetition")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfda",
        description="subspace-based discriminant analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a discriminant model to a dataset")
    _add_config_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="run the repeated-split evaluation "
                                    "protocol (or score a saved model)")
    _add_config_options(p)
    p.add_argument("--model", help="saved model file to evaluate as-is")
    p.add_argument("--scores",
                   help="also write raw genuine/impostor scores to this CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluation protocol over a range of "
                                     "per-class training counts")
    _add_config_options(p)
    p.add_argument("--min-n", dest="min_n", type=int, default=2)
    p.add_argument("--max-n", dest="max_n", type=int, default=9)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("invariants", help="run the structural invariant "
                                          "batteries")
    p.add_argument("--scope", action="append", choices=sorted(checks.BATTERIES),
                   help="battery to run (repeatable; default: all)")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("eigencurves", help="eigenvalue and power curves of "
                                           "the two projection matrices")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--subspace-dim", dest="subspace_dim", type=int, default=3)
    p.add_argument("--ambient", type=int, help="default 4*C*N")
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eigencurves)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--kind", required=True,
                   choices=("gaussian", "mixture-set1", "mixture-set2"))
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--count", type=int, default=20,
                   help="samples per class")
    p.add_argument("--mean-norm", dest="mean_norm", type=float, default=5.0)
    p.add_argument("--sigma-max", dest="sigma_max", type=float, default=1.0)
    p.add_argument("--basis-count", dest="basis_count", type=int, default=9)
    p.add_argument("--spread", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-seed", dest="sample_seed", type=int,
                   help="seed for the draws only; class definitions stay "
                        "tied to --seed, so train/test pairs over the same "
                        "classes differ only here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except GfdaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
