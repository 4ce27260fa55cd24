"""Command-line front end.

Every command reads a flat key=value settings layer (built-in defaults,
then an optional --config file, then repeatable --set overrides), resolves
it into seeded dataset + model + optimizer objects, and writes its outputs
under the requested path.  Nothing here is time-dependent: the same argv
and seed always produce byte-identical files.

Exit codes: 0 success, 1 named analysis error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import net as mlp
from .boundary import (
    DEFAULT_FRACTION,
    DEFAULT_MARGIN,
    DEFAULT_NEIGHBORS,
    DEFAULT_RESOLUTION,
    center_trajectory,
    decision_space,
    fit_pair_plane,
    heatmap,
    pair_matrix,
    pca3_export,
    resistor_overlap,
    resistors,
)
from .datasets import HARD_PAIR, gaussian_mixture, reference_spec, train_test_split
from .errors import ToolkitError, UsageError
from .optim import OPTIMIZERS, LrSchedule, default_lr, preset_schedule
from .spectra import acm_spectrum, optimizer_profile, variance_evolution
from .store import emit_svg_heatmap, read_fmx, write_csv, write_fmx, write_head_file
from .training import TrainConfig, load_run, save_run, train

# Settings shared by all commands: name -> (parser, default).  A None default
# means "derive later" (e.g. lr_max falls back to the optimizer's own).
def _parse_bool(text: str) -> bool:
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


SETTING_TYPES = {
    "batch_size": int,
    "easy_distance": float,
    "epochs": int,
    "fraction": float,
    "hard_distance": float,
    "hidden_widths": str,
    "input_dim": int,
    "lr_max": float,
    "lr_min": float,
    "margin": float,
    "momentum": float,
    "neighbors": int,
    "optimizer": str,
    "preset": str,
    "resolution": int,
    "samples_per_class": int,
    "schedule": str,
    "seed": int,
    "std": float,
    "test_fraction": float,
    "variant": str,
    "weight_decay": float,
}

DEFAULT_SETTINGS = {
    "batch_size": 128,
    "easy_distance": 12.0,
    "epochs": 200,
    "fraction": DEFAULT_FRACTION,
    "hard_distance": 3.1,
    "hidden_widths": "32,32",
    "input_dim": 16,
    "lr_max": None,
    "lr_min": 0.0,
    "margin": DEFAULT_MARGIN,
    "momentum": 0.9,
    "neighbors": DEFAULT_NEIGHBORS,
    "optimizer": "sgd",
    "preset": "sgd-anneal",
    "resolution": DEFAULT_RESOLUTION,
    "samples_per_class": 500,
    "schedule": "constant",
    "seed": 7,
    "std": 1.0,
    "test_fraction": 0.2,
    "variant": "plain",
    "weight_decay": 5e-4,
}

# Keys an analysis command may override without changing what was trained.
ANALYSIS_KEYS = ("fraction", "margin", "neighbors", "resolution")

SWEEP_ORDER = tuple(sorted(OPTIMIZERS))


def _parse_setting(key: str, text: str):
    if key not in SETTING_TYPES:
        raise UsageError(f"unknown config key {key!r}")
    if text == "":
        return None if key == "lr_max" else ""
    try:
        return SETTING_TYPES[key](text)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {exc}") from None


def _parse_kv_lines(lines, source: str) -> dict:
    out = {}
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{ln}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = _parse_setting(key.strip(), value.strip())
    return out


def load_settings(config_path, overrides) -> tuple[dict, set]:
    """Resolve defaults <- config file <- --set flags; track explicit keys."""
    settings = dict(DEFAULT_SETTINGS)
    explicit: set[str] = set()
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                parsed = _parse_kv_lines(fh.read().split("\n"), str(config_path))
        except OSError as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        settings.update(parsed)
        explicit |= set(parsed)
    for item in overrides or ():
        if "=" not in item:
            raise UsageError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        settings[key.strip()] = _parse_setting(key.strip(), value.strip())
        explicit.add(key.strip())
    return settings, explicit


def save_settings(settings: dict, path) -> None:
    lines = []
    for key in sorted(settings):
        value = settings[key]
        if value is None:
            text = ""
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key}={text}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _apply_flag_overrides(args, settings: dict, explicit: set) -> None:
    for key in ("seed", "epochs", "optimizer", "preset"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = _parse_setting(key, str(value))
            explicit.add(key)


def _resolved_settings(args) -> tuple[dict, set]:
    settings, explicit = load_settings(getattr(args, "config", None), getattr(args, "set", None))
    _apply_flag_overrides(args, settings, explicit)
    if settings["optimizer"] != "sgd" and "preset" not in explicit:
        settings["preset"] = ""
    return settings, explicit


def _datasets(settings):
    spec = reference_spec(
        samples_per_class=settings["samples_per_class"],
        input_dim=settings["input_dim"],
        hard_distance=settings["hard_distance"],
        easy_distance=settings["easy_distance"],
        std=settings["std"],
    )
    full = gaussian_mixture(spec, settings["seed"])
    return train_test_split(full, settings["test_fraction"])


def _hidden_widths(settings) -> tuple[int, ...]:
    try:
        widths = tuple(int(tok) for tok in str(settings["hidden_widths"]).split(",") if tok)
    except ValueError:
        raise UsageError(f"bad hidden_widths {settings['hidden_widths']!r}") from None
    if not widths:
        raise UsageError("hidden_widths must name at least one layer")
    return widths


def _net_config(settings, num_classes: int) -> mlp.NetConfig:
    return mlp.NetConfig(
        input_dim=settings["input_dim"],
        hidden_widths=_hidden_widths(settings),
        num_classes=num_classes,
        variant=settings["variant"],
        seed=settings["seed"],
    )


def _schedule(settings) -> LrSchedule:
    total = max(settings["epochs"], 1)
    if settings["preset"]:
        if settings["optimizer"] != "sgd":
            raise UsageError("schedule presets apply to the sgd optimizer only")
        return preset_schedule(settings["preset"], total)
    lr_max = settings["lr_max"]
    if lr_max is None:
        lr_max = default_lr(settings["optimizer"])
    kind = settings["schedule"]
    lr_min = settings["lr_min"] if kind == "cosine" else lr_max
    return LrSchedule(kind=kind, lr_max=lr_max, lr_min=lr_min, total_steps=total)


def _optimizer_kwargs(settings) -> dict:
    kwargs = {"weight_decay": settings["weight_decay"]}
    if settings["optimizer"] == "sgd":
        kwargs["momentum"] = settings["momentum"]
    return kwargs


def _train_config(settings, dataset, run_id: str) -> TrainConfig:
    return TrainConfig(
        dataset=dataset,
        net=_net_config(settings, dataset.num_classes),
        optimizer=settings["optimizer"],
        schedule=_schedule(settings),
        epochs=settings["epochs"],
        batch_size=settings["batch_size"],
        seed=settings["seed"],
        optimizer_kwargs=_optimizer_kwargs(settings),
        run_id=run_id,
    )


def _run_settings(run_dir) -> dict:
    path = os.path.join(run_dir, "config.txt")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parsed = _parse_kv_lines(fh.read().split("\n"), path)
    except OSError as exc:
        raise UsageError(f"{run_dir} is not a run directory: {exc}") from None
    settings = dict(DEFAULT_SETTINGS)
    settings.update(parsed)
    return settings


def _analysis_settings(args) -> dict:
    """Run-dir settings with only presentation knobs overridable."""
    settings = _run_settings(args.run)
    for item in getattr(args, "set", None) or ():
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in ANALYSIS_KEYS:
            raise UsageError(f"key {key!r} is fixed by the run; cannot override")
        settings[key] = _parse_setting(key, value.strip())
    return settings


def _parse_class(token: str, class_names) -> int:
    token = token.strip()
    if token.lstrip("-").isdigit():
        index = int(token)
    else:
        try:
            index = list(class_names).index(token)
        except ValueError:
            raise UsageError(f"unknown class {token!r}; names: {', '.join(class_names)}") from None
    if not 0 <= index < len(class_names):
        raise UsageError(f"class index {index} out of range [0, {len(class_names)})")
    return index


def _parse_pair(text: str, class_names) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--pair wants 'first,second', got {text!r}")
    return _parse_class(parts[0], class_names), _parse_class(parts[1], class_names)


def _ensure_parent(path) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _milestone_tag(index: int) -> str:
    return f"m{index:04d}"


def cmd_train(args) -> int:
    settings, _ = _resolved_settings(args)
    train_ds, _ = _datasets(settings)
    config = _train_config(settings, train_ds, run_id=os.path.basename(os.path.normpath(args.out)))
    archive = train(config)
    os.makedirs(args.out, exist_ok=True)
    save_settings(settings, os.path.join(args.out, "config.txt"))
    save_run(archive, args.out)
    final = archive.final
    flag = " (diverged)" if archive.diverged else ""
    print(
        f"run {archive.run_id}: {len(archive.milestones)} milestones, "
        f"final train accuracy {final.train_accuracy:.4f} at epoch {final.epoch}{flag}"
    )
    return 0


def _sweep_member(job) -> str:
    settings, out_dir, name = job
    train_ds, _ = _datasets(settings)
    config = _train_config(settings, train_ds, run_id=name)
    archive = train(config)
    os.makedirs(out_dir, exist_ok=True)
    save_settings(settings, os.path.join(out_dir, "config.txt"))
    save_run(archive, out_dir)
    return out_dir


def cmd_sweep(args) -> int:
    settings, explicit = _resolved_settings(args)
    if "optimizer" in explicit:
        raise UsageError("sweep-optimizers trains every optimizer; do not pick one")
    jobs = []
    for name in SWEEP_ORDER:
        member = dict(settings)
        member["optimizer"] = name
        member["preset"] = settings["preset"] if name == "sgd" else ""
        jobs.append((member, os.path.join(args.out, name), name))
    workers = int(os.environ.get("BOUNDARYSCOPE_WORKERS", "1"))
    os.makedirs(args.out, exist_ok=True)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            dirs = list(pool.map(_sweep_member, jobs))
    else:
        dirs = [_sweep_member(job) for job in jobs]

    runs = [load_run(d) for d in dirs]
    train_ds, test_ds = _datasets(settings)
    rows = optimizer_profile(runs, HARD_PAIR, train_ds, test_ds)
    for row in rows:
        spectrum_path = os.path.join(args.out, row.optimizer, "spectrum.csv")
        write_csv(
            spectrum_path,
            ["index", "value"],
            [(k, float(v)) for k, v in enumerate(row.spectrum.values)],
        )
    write_csv(
        os.path.join(args.out, "profile.csv"),
        ["optimizer", "train_acc", "test_acc", "rank", "sigma1", "sigma2", "spectrum_file"],
        [
            (
                row.optimizer,
                row.train_accuracy,
                row.test_accuracy,
                row.spectrum.rank,
                row.spectrum.sigma1,
                row.spectrum.sigma2,
                f"{row.optimizer}/spectrum.csv",
            )
            for row in rows
        ],
    )
    for row in rows:
        print(
            f"{row.optimizer}: train {row.train_accuracy:.4f} test {row.test_accuracy:.4f} "
            f"rank {row.spectrum.rank}"
        )
    return 0


def cmd_boundary(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    pair = _parse_pair(args.pair, train_ds.class_names)
    os.makedirs(args.out, exist_ok=True)
    for milestone in archive.milestones:
        grid, coords = heatmap(
            milestone.params,
            pair,
            train_ds,
            resolution=settings["resolution"],
            margin=settings["margin"],
            neighbors=settings["neighbors"],
        )
        tag = _milestone_tag(milestone.index)
        write_csv(
            os.path.join(args.out, f"{tag}_heatmap.csv"),
            [f"c{ix}" for ix in range(grid.resolution)],
            [tuple(float(v) for v in row) for row in grid.values],
        )
        write_csv(
            os.path.join(args.out, f"{tag}_bounds.csv"),
            ["x_min", "x_max", "y_min", "y_max", "resolution", "neighbors"],
            [(*grid.bounds, grid.resolution, settings["neighbors"])],
        )
        if args.svg:
            emit_svg_heatmap(grid, coords, os.path.join(args.out, f"{tag}.svg"))
    print(f"{len(archive.milestones)} heat maps -> {args.out}")
    return 0


def cmd_centers(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    pair = _parse_pair(args.pair, train_ds.class_names)
    points = center_trajectory(archive, pair, train_ds)
    _ensure_parent(args.out)
    write_csv(
        args.out,
        ["milestone_id", "train_acc", "c1x", "c1y", "c2x", "c2y", "var1", "var2", "var3"],
        [
            (
                p.milestone_index,
                p.train_accuracy,
                float(p.c_first[0]),
                float(p.c_first[1]),
                float(p.c_second[0]),
                float(p.c_second[1]),
                *p.variances,
            )
            for p in points
        ],
    )
    print(f"{len(points)} milestones -> {args.out}")
    return 0


def cmd_spectra(args) -> int:
    data = read_fmx(args.features)
    features = data.features.astype(np.float64)
    pair = None
    if args.pair is not None:
        if data.labels is None:
            raise UsageError("--pair needs a labeled FMX file")
        names = data.class_names or tuple(
            str(c) for c in range(int(data.labels.max()) + 1 if data.labels.size else 0)
        )
        pair = _parse_pair(args.pair, names)
        features, _ = pair_matrix(features, data.labels, pair[0], pair[1])
    report = acm_spectrum(features, pair=pair)
    _ensure_parent(args.out)
    write_csv(
        args.out,
        ["index", "value"],
        [(k, float(v)) for k, v in enumerate(report.values)],
    )
    print(
        f"n={report.n} d={report.d} rank={report.rank} "
        f"sigma1={report.sigma1:.6g} sigma2={report.sigma2:.6g}"
    )
    return 0


def cmd_variance_evolution(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    pair = _parse_pair(args.pair, train_ds.class_names)
    points = variance_evolution(archive, pair, train_ds, m=3)
    _ensure_parent(args.out)
    rows = []
    for p in points:
        var = list(p.variances) + [0.0] * (3 - len(p.variances))
        rows.append((p.milestone_index, p.epoch, p.train_accuracy, *var))
    write_csv(args.out, ["milestone_id", "epoch", "train_acc", "var1", "var2", "var3"], rows)
    print(f"{len(points)} milestones -> {args.out}")
    return 0


def _final_resistors(run_dir, pair_text, settings=None):
    settings = settings or _run_settings(run_dir)
    archive = load_run(run_dir)
    train_ds, _ = _datasets(settings)
    pair = _parse_pair(pair_text, train_ds.class_names)
    params = archive.final.params
    embeddings, _ = mlp.forward(params, train_ds.features)
    _, coords, _ = fit_pair_plane(
        embeddings, train_ds.labels, pair[0], pair[1], params.head.class_names
    )
    return resistors(coords, settings["fraction"])


def cmd_resistors(args) -> int:
    settings = _analysis_settings(args)
    first, second = _final_resistors(args.run, args.pair, settings)
    _ensure_parent(args.out)
    if args.overlap is None:
        rows = []
        for rset in (first, second):
            rows.extend(
                (rset.side, rset.class_name, idx, dist)
                for idx, dist in zip(rset.indices, rset.distances)
            )
        write_csv(args.out, ["side", "class", "pair_index", "distance"], rows)
        print(f"{len(first.indices)} + {len(second.indices)} resistors -> {args.out}")
        return 0
    other_settings = _run_settings(args.overlap)
    other_settings["fraction"] = settings["fraction"]
    o_first, o_second = _final_resistors(args.overlap, args.pair, other_settings)
    rows = []
    for a, b in ((first, o_first), (second, o_second)):
        jac = resistor_overlap(a, b)
        rows.append(
            (a.side, a.class_name, jac, len(a.indices), len(b.indices), len(set(a.indices) & set(b.indices)))
        )
        print(f"{a.class_name}: jaccard {jac:.4f}")
    write_csv(
        args.out,
        ["side", "class", "jaccard", "selected_a", "selected_b", "intersection"],
        rows,
    )
    return 0


def cmd_decision_space(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    pair = _parse_pair(args.pair, train_ds.class_names)
    probs, side = decision_space(archive.final.params, pair, train_ds)
    names = (train_ds.class_names[pair[0]], train_ds.class_names[pair[1]])
    _ensure_parent(args.out)
    write_csv(
        args.out,
        ["pair_index", "class", "p_first", "p_second"],
        [
            (k, names[int(s)], float(p[0]), float(p[1]))
            for k, (p, s) in enumerate(zip(probs, side))
        ],
    )
    print(f"{probs.shape[0]} samples -> {args.out}")
    return 0


def cmd_triple(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    parts = args.triple.split(",")
    if len(parts) != 3:
        raise UsageError(f"--triple wants 'a,b,c', got {args.triple!r}")
    triple = tuple(_parse_class(tok, train_ds.class_names) for tok in parts)
    embeddings, _ = mlp.forward(archive.final.params, train_ds.features)
    coords, labels, variances = pca3_export(embeddings, train_ds.labels, triple)
    _ensure_parent(args.out)
    write_csv(
        args.out,
        ["c1", "c2", "c3", "class_index", "class_name"],
        [
            (float(row[0]), float(row[1]), float(row[2]), int(lab), train_ds.class_names[int(lab)])
            for row, lab in zip(coords, labels)
        ],
    )
    print(
        "variances "
        + " ".join(f"{v:.6g}" for v in variances)
        + f" -> {args.out}"
    )
    return 0


def cmd_export_features(args) -> int:
    settings = _analysis_settings(args)
    archive = load_run(args.run)
    train_ds, _ = _datasets(settings)
    index = args.milestone if args.milestone is not None else archive.milestones[-1].index
    matching = [m for m in archive.milestones if m.index == index]
    if not matching:
        raise UsageError(f"no milestone {index}; run has 0..{archive.milestones[-1].index}")
    milestone = matching[0]
    embeddings, _ = mlp.forward(milestone.params, train_ds.features)
    _ensure_parent(args.features_out)
    _ensure_parent(args.head_out)
    write_fmx(
        args.features_out,
        embeddings,
        labels=train_ds.labels,
        class_names=train_ds.class_names,
    )
    head = milestone.params.head
    write_head_file(args.head_out, head.weights, head.bias, head.class_names)
    print(
        f"milestone {milestone.index} (epoch {milestone.epoch}): "
        f"{embeddings.shape[0]}x{embeddings.shape[1]} features -> {args.features_out}, "
        f"head -> {args.head_out}"
    )
    return 0


def _add_settings_flags(sub) -> None:
    sub.add_argument("--config", help="key=value settings file")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one setting")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--epochs", type=int, help="training epochs")
    sub.add_argument("--optimizer", choices=sorted(OPTIMIZERS), help="optimizer variant")
    sub.add_argument("--preset", help="sgd schedule preset (sgd-anneal, sgd-big, sgd-small)")


def _add_analysis_flags(sub, pair=True) -> None:
    sub.add_argument("--run", required=True, help="run directory from `train`")
    if pair:
        sub.add_argument("--pair", required=True, help="class pair, e.g. 0,1 or alpha,beta")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE", help="override an analysis knob")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundaryscope",
        description="Train small classifiers and analyze their class-pair decision boundaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one run and archive its milestones")
    _add_settings_flags(p)
    p.add_argument("--out", required=True, help="run directory to create")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep-optimizers", help="train all ten optimizers and profile them")
    _add_settings_flags(p)
    p.add_argument("--out", required=True, help="sweep directory to create")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("boundary", help="heat map per milestone")
    _add_analysis_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--svg", action="store_true", help="also render SVG heat maps")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("centers", help="center trajectory CSV across milestones")
    _add_analysis_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_centers)

    p = sub.add_parser("spectra", help="auto-correlation spectrum and rank of an FMX file")
    p.add_argument("--features", required=True, help="FMX feature file")
    p.add_argument("--pair", help="restrict to a class pair (labeled files only)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("variance-evolution", help="explained variances per milestone")
    _add_analysis_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_variance_evolution)

    p = sub.add_parser("resistors", help="samples nearest the other class center")
    _add_analysis_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--overlap", help="second run directory: report Jaccard overlap instead")
    p.set_defaults(func=cmd_resistors)

    p = sub.add_parser("decision-space", help="full-softmax pair probabilities")
    _add_analysis_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_decision_space)

    p = sub.add_parser("triple", help="PCA(3) coordinates for three classes")
    _add_analysis_flags(p, pair=False)
    p.add_argument("--triple", required=True, help="three classes, e.g. 0,1,2")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_triple)

    p = sub.add_parser("export-features", help="embeddings + head of one checkpoint")
    _add_analysis_flags(p, pair=False)
    p.add_argument("--milestone", type=int, help="milestone index (default: final)")
    p.add_argument("--features-out", required=True, help="FMX output path")
    p.add_argument("--head-out", required=True, help="head text file output path")
    p.set_defaults(func=cmd_export_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"UsageError: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
