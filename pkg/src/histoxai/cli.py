"""Command-line front end: the end-to-end workflow as six subcommands.

    generate  synthesize a labeled image set to a directory
    train     fit a model family on a dataset directory, save checkpoint
    evaluate  metrics table for a checkpoint on the held-out split
    explain   class-evidence overlay PNG + weight sidecar per image
    stats     full survey battery from a CSV
    audit     consistency report over published summary statistics

Every run writes a ``run.txt`` manifest under --out: the fully resolved
configuration (defaults included), the root seed and its derived named
sub-streams, the package version, and sha256 checksums of all written
artifacts. A rerun with the same inputs reproduces outputs bit-for-bit,
so manifests diff clean.

Exit codes: 0 success, 2 usage, 3 missing input file, 4 config parse
error, 5 invalid data, 6 training divergence. Failures print exactly one
line: ``error: <category>: <message>``.

Options may come from a config file (--config, INI syntax); explicit
flags override it. Sections group options by area, e.g.::

    [run]
    seed = 7
    [model]
    family = mini-vgg
    widths = 8,16,32
    [train]
    epochs = 30
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import sys

import numpy as np

from . import __version__, dataset, gradcam, metrics
from .audit import audit_reported, parse_record, render_findings
from .models import (ArchitectureSpec, DivergenceError, FAMILIES, build,
                     classify, parse_widths, train)
from .network import Network
from .surveystats import load_survey_csv, stats_report_text
from .tensor import stream_seed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_CONFIG = 4
EXIT_INVALID_DATA = 5
EXIT_DIVERGENCE = 6


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


# option name -> (config section, parser from string)
_OPTION_SPACE = {
    "seed": ("run", int),
    "out": ("run", str),
    "checkpoint": ("run", str),
    "n": ("data", int),
    "data": ("data", str),
    "images": ("data", str),
    "train_fraction": ("data", float),
    "family": ("model", str),
    "widths": ("model", str),
    "lr": ("train", float),
    "epochs": ("train", int),
    "batch": ("train", int),
    "alpha": ("gradcam", float),
    "layer": ("gradcam", int),
    "target_class": ("gradcam", str),
    "survey": ("stats", str),
    "ttest": ("stats", str),
    "reverse_items": ("stats", str),
    "record": ("audit", str),
}

_DEFAULTS = {
    "seed": 0,
    "train_fraction": 0.8,
    "family": "mini-vgg",
    "widths": "8,16,32",
    "lr": 0.01,
    "epochs": 30,
    "batch": 16,
    "alpha": 0.4,
    "target_class": "auto",
    "ttest": "pooled",
    "reverse_items": "",
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = _resolve_options(args)
        handler = {
            "generate": _cmd_generate,
            "train": _cmd_train,
            "evaluate": _cmd_evaluate,
            "explain": _cmd_explain,
            "stats": _cmd_stats,
            "audit": _cmd_audit,
        }[args.command]
        handler(cfg)
        return EXIT_OK
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except FileNotFoundError as exc:
        return _fail("missing-input", exc, EXIT_MISSING_INPUT)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except DivergenceError as exc:
        return _fail("divergence", exc, EXIT_DIVERGENCE)
    except (ValueError, RuntimeError, OSError) as exc:
        return _fail("invalid-data", exc, EXIT_INVALID_DATA)


def _fail(category: str, exc: BaseException, code: int) -> int:
    msg = str(exc).replace("\n", " ")
    print(f"error: {category}: {msg}", file=sys.stderr)
    return code


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="histoxai",
        description="Deterministic texture-image classification with "
                    "class-evidence heatmaps and survey statistics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(sp, *names):
        sp.add_argument("--config", help="INI config file; flags override it")
        for name in names:
            flag = "--" + name.replace("_", "-")
            sp.add_argument(flag, dest=name, default=None)

    add(sub.add_parser("generate", help="synthesize a labeled dataset"),
        "n", "seed", "out")
    add(sub.add_parser("train", help="train a model on a dataset directory"),
        "data", "family", "widths", "seed", "lr", "epochs", "batch",
        "train_fraction", "out")
    add(sub.add_parser("evaluate", help="metrics table on the held-out split"),
        "data", "checkpoint", "seed", "train_fraction", "out")
    add(sub.add_parser("explain", help="class-evidence overlays for a directory"),
        "images", "checkpoint", "alpha", "layer", "target_class", "out")
    add(sub.add_parser("stats", help="survey battery from a CSV"),
        "survey", "ttest", "reverse_items", "out")
    add(sub.add_parser("audit", help="audit published summary statistics"),
        "record", "out")
    return p


def _resolve_options(args) -> dict:
    """Flag > config file > default; returns the fully resolved mapping."""
    file_vals = {}
    if args.config:
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        ini = configparser.ConfigParser()
        try:
            ini.read(args.config)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {args.config}: {exc}") from None
        for name, (section, _) in _OPTION_SPACE.items():
            if ini.has_option(section, name):
                file_vals[name] = ini.get(section, name)

    resolved = {}
    for name in vars(args):
        if name in ("command", "config"):
            continue
        section, parse = _OPTION_SPACE[name]
        raw = getattr(args, name)
        source = "flag"
        if raw is None and name in file_vals:
            raw, source = file_vals[name], "config"
        if raw is None:
            resolved[name] = _DEFAULTS.get(name)
            continue
        try:
            resolved[name] = parse(raw)
        except ValueError:
            exc_cls = ConfigError if source == "config" else UsageError
            raise exc_cls(f"bad value for {name}: {raw!r}") from None
    return resolved


def _require(cfg: dict, *names):
    for name in names:
        if cfg.get(name) is None:
            raise UsageError(
                f"missing required option --{name.replace('_', '-')}")


def _out_dir(cfg) -> str:
    _require(cfg, "out")
    os.makedirs(cfg["out"], exist_ok=True)
    return cfg["out"]


# ------------------------------------------------------------- commands

def _cmd_generate(cfg):
    _require(cfg, "n")
    out = _out_dir(cfg)
    data = dataset.generate(cfg["n"], cfg["seed"])
    dataset.save_dir(data, out)
    written = []
    for sub in ("healthy", "diseased", "masks"):
        d = os.path.join(out, sub)
        written += [os.path.join(sub, f) for f in sorted(os.listdir(d))]
    _write_manifest(out, "generate", cfg, written)
    print(f"wrote {len(data)} images ({len(data) // 2} per class) to {out}")


def _load_split(cfg):
    _require(cfg, "data")
    if not os.path.isdir(cfg["data"]):
        raise FileNotFoundError(f"dataset directory not found: {cfg['data']}")
    data = dataset.load_dir(cfg["data"])
    frac = cfg["train_fraction"]
    if frac >= 1.0:
        return data, data, None
    return (*dataset.split(data, frac, seed=cfg["seed"]), frac)


def _cmd_train(cfg):
    out = _out_dir(cfg)
    if cfg["family"] not in FAMILIES:
        raise UsageError(
            f"unknown family {cfg['family']!r}; choose from {FAMILIES}")
    train_set, _, frac = _load_split(cfg)
    spec = ArchitectureSpec(family=cfg["family"],
                            widths=parse_widths(cfg["widths"]),
                            seed=cfg["seed"])
    net = build(spec)
    print(f"{cfg['family']}: {net.meta['num_params']} parameters")
    net, history = train(net, train_set, lr=cfg["lr"], epochs=cfg["epochs"],
                         batch=cfg["batch"], seed=cfg["seed"], log=print)
    net.meta.update({"split_seed": cfg["seed"], "train_fraction": frac})
    ckpt = os.path.join(out, "checkpoint.npz")
    net.save(ckpt)
    hist_path = os.path.join(out, "history.txt")
    with open(hist_path, "w") as fh:
        fh.write("epoch loss train_acc seconds\n")
        for i, (loss, acc, sec) in enumerate(
                zip(history.loss, history.train_accuracy, history.seconds), 1):
            fh.write(f"{i} {loss:.6f} {acc:.4f} {sec:.2f}\n")
    _write_manifest(out, "train", cfg, ["checkpoint.npz", "history.txt"])
    print(f"trained {history.epochs} epochs "
          f"({history.total_seconds:.1f}s), checkpoint at {ckpt}")


def _load_checkpoint(cfg) -> Network:
    _require(cfg, "checkpoint")
    return Network.load(cfg["checkpoint"])


def _cmd_evaluate(cfg):
    out = _out_dir(cfg)
    net = _load_checkpoint(cfg)
    # reuse the training-time split unless explicitly overridden
    for opt, meta_key in (("seed", "split_seed"),
                          ("train_fraction", "train_fraction")):
        if meta_key in net.meta and net.meta[meta_key] is not None:
            if cfg[opt] == _DEFAULTS[opt]:
                cfg[opt] = net.meta[meta_key]
    _, test_set, frac = _load_split(cfg)
    cls, _, _ = classify(net, test_set.images)
    cm = metrics.confusion(cls, test_set.labels, positive_class=dataset.DISEASED)
    report = metrics.score(cm)
    name = net.meta.get("family", "model")
    table = metrics.metrics_table([(name, report, None)])
    table += (f"\nconfusion: tp={cm.tp} tn={cm.tn} fp={cm.fp} fn={cm.fn} "
              f"(test n={cm.total}, positive=diseased)\n")
    path = os.path.join(out, "metrics.txt")
    with open(path, "w") as fh:
        fh.write(table)
    _write_manifest(out, "evaluate", cfg, ["metrics.txt"])
    print(table, end="")


def _cmd_explain(cfg):
    out = _out_dir(cfg)
    net = _load_checkpoint(cfg)
    _require(cfg, "images")
    root = cfg["images"]
    if not os.path.isdir(root):
        raise FileNotFoundError(f"image directory not found: {root}")
    entries = _enumerate_images(root)
    if not entries:
        raise ValueError(f"no .png images under {root}")
    target_opt = cfg["target_class"]
    if target_opt not in ("auto", "0", "1"):
        raise UsageError(f"--target-class must be auto, 0 or 1, got {target_opt!r}")
    written = []
    for stem, path in entries:
        rgb = dataset.read_png(path)
        if rgb.ndim != 3:
            raise ValueError(f"{path}: expected an RGB image")
        img = rgb.astype(np.float64).transpose(2, 0, 1) / 255.0
        x = img[None]
        cls, _, cache = classify(net, x)
        target = int(cls[0]) if target_opt == "auto" else int(target_opt)
        hm = gradcam.gradcam_compute(net, x, target, layer=cfg["layer"],
                                     cache=cache)
        over = gradcam.overlay(hm, img, alpha=cfg["alpha"])
        base = f"{stem}.gradcam.{target}"
        dataset.write_png(os.path.join(out, base + ".png"), over)
        with open(os.path.join(out, base + ".alphas.txt"), "w") as fh:
            fh.write(gradcam.alpha_sidecar_text(hm))
        written += [base + ".png", base + ".alphas.txt"]
    _write_manifest(out, "explain", cfg, written)
    print(f"explained {len(entries)} images -> {out}")


def _enumerate_images(root):
    """(stem, path) pairs: dataset layout if present, else a flat dir."""
    entries = []
    class_dirs = [d for d in ("healthy", "diseased")
                  if os.path.isdir(os.path.join(root, d))]
    if class_dirs:
        for d in class_dirs:
            full = os.path.join(root, d)
            entries += [(f[:-4], os.path.join(full, f))
                        for f in sorted(os.listdir(full)) if f.endswith(".png")]
    else:
        entries = [(f[:-4], os.path.join(root, f))
                   for f in sorted(os.listdir(root)) if f.endswith(".png")]
    return entries


def _cmd_stats(cfg):
    out = _out_dir(cfg)
    _require(cfg, "survey")
    if not os.path.exists(cfg["survey"]):
        raise FileNotFoundError(f"survey file not found: {cfg['survey']}")
    if cfg["ttest"] not in ("pooled", "welch"):
        raise UsageError(f"--ttest must be pooled or welch, got {cfg['ttest']!r}")
    reverse = tuple(s.strip() for s in cfg["reverse_items"].split(",")
                    if s.strip())
    survey = load_survey_csv(cfg["survey"], reverse_items=reverse)
    text = stats_report_text(survey, variant=cfg["ttest"])
    with open(os.path.join(out, "stats.txt"), "w") as fh:
        fh.write(text)
    _write_manifest(out, "stats", cfg, ["stats.txt"])
    print(text, end="")


def _cmd_audit(cfg):
    out = _out_dir(cfg)
    _require(cfg, "record")
    if not os.path.exists(cfg["record"]):
        raise FileNotFoundError(f"record file not found: {cfg['record']}")
    with open(cfg["record"]) as fh:
        record = parse_record(fh.read())
    findings = audit_reported(record)
    text = render_findings(findings)
    with open(os.path.join(out, "audit.txt"), "w") as fh:
        fh.write(text)
    _write_manifest(out, "audit", cfg, ["audit.txt"])
    print(text, end="")


# ------------------------------------------------------------- manifest

def _write_manifest(out_dir: str, command: str, cfg: dict, outputs):
    lines = [f"histoxai {__version__}", f"command = {command}", "", "[config]"]
    for key in sorted(cfg):
        lines.append(f"{key} = {cfg[key]}")
    seed = cfg.get("seed")
    if seed is not None:
        lines += ["", "[seed-streams]", f"root = {seed}"]
        for name in ("data", "init", "shuffle"):
            lines.append(f"{name} = {stream_seed(seed, name)}")
    lines += ["", "[outputs]"]
    for rel in outputs:
        digest = _sha256(os.path.join(out_dir, rel))
        lines.append(f"sha256 {digest}  {rel}")
    with open(os.path.join(out_dir, "run.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


if __name__ == "__main__":
    sys.exit(main())
