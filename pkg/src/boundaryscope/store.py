"""Bit-exact persistence: FMX feature files, checkpoints, head files, CSV, SVG.

All multi-byte integers are little-endian.  Features travel as 32-bit floats
(interchange compactness); network parameters as 64-bit floats (training
determinism).  Every writer is deterministic: the same values produce the
same bytes, so artifacts can be diffed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    BadSpecError,
    IoFailureError,
    LabelOutOfRangeError,
    ManifestMismatchError,
    ShapeMismatchError,
    TruncatedError,
)
from .net import ClassifierHead, NetConfig, NetParams

FMX_MAGIC = b"FMX1"
CKP_MAGIC = b"CKP1"
HEAD_MAGIC = "HEAD1"


@dataclass(frozen=True)
class FmxData:
    features: np.ndarray  # (n, d) float32
    labels: np.ndarray | None  # (n,) uint16 or None
    class_names: tuple[str, ...] | None


def _fmt(x: float) -> str:
    """CSV float formatting: '.' decimal, 17 significant digits."""
    return "%.17g" % x


def write_fmx(path, features, labels=None, class_names=None, num_classes=None) -> None:
    f = np.asarray(features, dtype=np.float32)
    if f.ndim != 2:
        raise ShapeMismatchError(f"features must be 2-D, got shape {f.shape}")
    n, d = f.shape

    if num_classes is None:
        if labels is None:
            num_classes = 0
        elif class_names is not None:
            num_classes = len(class_names)
        else:
            lab = np.asarray(labels)
            num_classes = int(lab.max()) + 1 if lab.size else 1
    c = int(num_classes)

    if labels is not None and c == 0:
        raise BadSpecError("labels supplied but num_classes is 0")
    if labels is None and c != 0:
        raise BadSpecError("num_classes > 0 but no labels supplied")
    if class_names is not None:
        if labels is None:
            raise BadSpecError("class names require labels")
        if len(class_names) != c:
            raise ShapeMismatchError(f"{len(class_names)} names for {c} classes")
    if c > 0xFFFF + 1:
        raise BadSpecError("labels limited to 16-bit storage")

    blob = bytearray()
    blob += FMX_MAGIC
    blob += struct.pack("<III", n, d, c)
    blob += f.astype("<f4").tobytes(order="C")
    if labels is not None:
        lab = np.asarray(labels)
        if lab.shape != (n,):
            raise ShapeMismatchError(f"labels shape {lab.shape} for {n} rows")
        if lab.size and (lab.min() < 0 or lab.max() >= c):
            raise LabelOutOfRangeError(f"labels must lie in [0, {c})")
        blob += lab.astype("<u2").tobytes()
    if class_names is not None:
        meta = "".join(name + "\n" for name in class_names).encode("utf-8")
        blob += struct.pack("<I", len(meta))
        blob += meta
    _write_bytes(path, bytes(blob))


def read_fmx(path) -> FmxData:
    raw = _read_bytes(path)
    if len(raw) < 4 or raw[:4] != FMX_MAGIC:
        raise BadMagicError(f"{path}: not an FMX file")
    if len(raw) < 16:
        raise TruncatedError(f"{path}: header cut short")
    n, d, c = struct.unpack_from("<III", raw, 4)
    pos = 16

    feat_bytes = 4 * n * d
    if len(raw) < pos + feat_bytes:
        raise TruncatedError(f"{path}: feature block cut short")
    features = np.frombuffer(raw, dtype="<f4", count=n * d, offset=pos).reshape(n, d).copy()
    pos += feat_bytes

    labels = None
    if c > 0:
        if len(raw) < pos + 2 * n:
            raise TruncatedError(f"{path}: label block cut short")
        labels = np.frombuffer(raw, dtype="<u2", count=n, offset=pos).copy()
        pos += 2 * n
        if labels.size and labels.max() >= c:
            raise LabelOutOfRangeError(f"{path}: label {int(labels.max())} >= c={c}")

    class_names = None
    if pos < len(raw):
        if len(raw) < pos + 4:
            raise TruncatedError(f"{path}: metadata length cut short")
        (meta_len,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        if len(raw) != pos + meta_len:
            raise TruncatedError(
                f"{path}: size {len(raw)} does not match header arithmetic {pos + meta_len}"
            )
        text = raw[pos:].decode("utf-8")
        class_names = tuple(line for line in text.split("\n") if line != "")
    return FmxData(features=features, labels=labels, class_names=class_names)


def _param_items(params: NetParams) -> list[tuple[str, np.ndarray]]:
    items = []
    for i, (w, b) in enumerate(params.layers):
        items.append((f"layers.{i}.weight", w))
        items.append((f"layers.{i}.bias", b))
    items.append(("head.weight", params.head.weights))
    items.append(("head.bias", params.head.bias))
    return items


def write_checkpoint(path, params: NetParams, epoch: int, train_accuracy: float) -> None:
    items = _param_items(params)
    manifest = []
    offset = 0
    for name, arr in items:
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += 8 * arr.size
    cfg = params.config
    header = {
        "class_names": list(params.head.class_names),
        "config": {
            "hidden_widths": list(cfg.hidden_widths),
            "input_dim": cfg.input_dim,
            "num_classes": cfg.num_classes,
            "seed": cfg.seed,
            "variant": cfg.variant,
        },
        "epoch": int(epoch),
        "manifest": manifest,
        "train_accuracy": float(train_accuracy),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += CKP_MAGIC
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for _, arr in items:
        blob += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    _write_bytes(path, bytes(blob))


def read_checkpoint(path) -> tuple[NetParams, int, float]:
    raw = _read_bytes(path)
    if len(raw) < 4 or raw[:4] != CKP_MAGIC:
        raise BadMagicError(f"{path}: not a checkpoint file")
    if len(raw) < 8:
        raise TruncatedError(f"{path}: header length cut short")
    (header_len,) = struct.unpack_from("<I", raw, 4)
    if len(raw) < 8 + header_len:
        raise TruncatedError(f"{path}: header cut short")
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestMismatchError(f"{path}: unreadable header: {exc}") from None

    try:
        cfg_d = header["config"]
        config = NetConfig(
            input_dim=int(cfg_d["input_dim"]),
            hidden_widths=tuple(int(w) for w in cfg_d["hidden_widths"]),
            num_classes=int(cfg_d["num_classes"]),
            variant=str(cfg_d["variant"]),
            seed=int(cfg_d["seed"]),
        )
        class_names = tuple(str(s) for s in header["class_names"])
        epoch = int(header["epoch"])
        train_accuracy = float(header["train_accuracy"])
        manifest = header["manifest"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestMismatchError(f"{path}: bad header field: {exc}") from None

    data = raw[8 + header_len :]
    arrays: dict[str, np.ndarray] = {}
    expected_end = 0
    for entry in manifest:
        try:
            name = entry["name"]
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestMismatchError(f"{path}: bad manifest entry: {exc}") from None
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if offset != expected_end:
            raise ManifestMismatchError(f"{path}: {name} offset {offset} != {expected_end}")
        end = offset + 8 * count
        if end > len(data):
            raise ManifestMismatchError(f"{path}: {name} block exceeds data region")
        arrays[name] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        expected_end = end
    if expected_end != len(data):
        raise ManifestMismatchError(
            f"{path}: data region {len(data)} bytes, manifest covers {expected_end}"
        )

    try:
        layers = [
            (arrays[f"layers.{i}.weight"], arrays[f"layers.{i}.bias"])
            for i in range(len(config.hidden_widths))
        ]
        head = ClassifierHead(
            weights=arrays["head.weight"], bias=arrays["head.bias"], class_names=class_names
        )
    except KeyError as exc:
        raise ManifestMismatchError(f"{path}: missing parameter block {exc}") from None
    params = NetParams(config=config, layers=layers, head=head)
    for (w, b), width in zip(params.layers, config.hidden_widths):
        if w.shape[0] != width or b.shape != (width,):
            raise ManifestMismatchError(f"{path}: layer shape disagrees with config")
    if head.weights.shape[0] != config.num_classes:
        raise ManifestMismatchError(f"{path}: head shape disagrees with config")
    return params, epoch, train_accuracy


def write_head_file(path, weights, bias, class_names) -> None:
    """Plain-text classifier head: magic, sizes, names, W rows, then b."""
    w = np.asarray(weights, dtype=np.float64)
    b = np.asarray(bias, dtype=np.float64)
    if w.ndim != 2 or b.shape != (w.shape[0],):
        raise ShapeMismatchError(f"head W {w.shape} vs b {b.shape}")
    if len(class_names) != w.shape[0]:
        raise ShapeMismatchError(f"{len(class_names)} names for {w.shape[0]} rows")
    for name in class_names:
        if "\n" in name or name == "":
            raise BadSpecError(f"bad class name {name!r}")
    lines = [HEAD_MAGIC, f"{w.shape[0]} {w.shape[1]}"]
    lines.extend(class_names)
    for row in w:
        lines.append(" ".join(repr(float(x)) for x in row))
    lines.append(" ".join(repr(float(x)) for x in b))
    _write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_head_file(path) -> ClassifierHead:
    text = _read_bytes(path).decode("utf-8")
    lines = text.split("\n")
    if not lines or lines[0] != HEAD_MAGIC:
        raise BadMagicError(f"{path}: not a head file")
    if len(lines) < 2:
        raise TruncatedError(f"{path}: missing size line")
    try:
        c, d = (int(tok) for tok in lines[1].split())
    except ValueError:
        raise TruncatedError(f"{path}: bad size line {lines[1]!r}") from None
    body = lines[2:]
    if len(body) < 2 * c + 1:
        raise TruncatedError(f"{path}: expected {2 + 2 * c + 1} lines")
    names = tuple(body[:c])
    try:
        w = np.array(
            [[float(tok) for tok in body[c + r].split()] for r in range(c)], dtype=np.float64
        ).reshape(c, d)
        b = np.array([float(tok) for tok in body[2 * c].split()], dtype=np.float64)
    except ValueError as exc:
        raise ShapeMismatchError(f"{path}: bad numeric row: {exc}") from None
    if w.shape != (c, d) or b.shape != (c,):
        raise ShapeMismatchError(f"{path}: W {w.shape} b {b.shape} vs sizes {c} {d}")
    return ClassifierHead(weights=w, bias=b, class_names=names)


def write_csv(path, header: list[str], rows) -> None:
    """Locale-free CSV: floats at 17 significant digits, '.' decimal."""
    out = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(_fmt(float(cell)))
            else:
                cells.append(str(cell))
        out.append(",".join(cells))
    _write_bytes(path, ("\n".join(out) + "\n").encode("utf-8"))


# Two-hue ramp endpoints: probability 0 (second class) is dark, 1 is light.
_RAMP_DARK = (16, 36, 62)
_RAMP_LIGHT = (242, 209, 107)
_SCATTER_FIRST = "#e4572e"
_SCATTER_SECOND = "#17bebb"


def _ramp_color(value: float) -> str:
    v = min(max(float(value), 0.0), 1.0)
    rgb = tuple(round(a + (b - a) * v) for a, b in zip(_RAMP_DARK, _RAMP_LIGHT))
    return "#%02x%02x%02x" % rgb


def emit_svg_heatmap(grid, coords, path) -> None:
    """Standalone SVG: R x R cells, pair-sample scatter, labeled bounds."""
    from xml.sax.saxutils import escape

    res = grid.resolution
    x_min, x_max, y_min, y_max = grid.bounds
    plot = 520.0
    ml, mt, mr, mb = 70.0, 20.0, 20.0, 50.0
    width = ml + plot + mr
    height = mt + plot + mb
    cell = plot / res

    def sx(x: float) -> float:
        return ml + (x - x_min) / (x_max - x_min) * plot

    def sy(y: float) -> float:
        return mt + (y_max - y) / (y_max - y_min) * plot

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        "<style>text{font-family:sans-serif;font-size:12px}.cell{stroke:none}</style>",
    ]
    for iy in range(res):
        for ix in range(res):
            # values[iy][ix]: iy indexes y from y_min upward, so flip for SVG.
            color = _ramp_color(grid.values[iy][ix])
            px = ml + ix * cell
            py = mt + (res - 1 - iy) * cell
            parts.append(
                f'<rect class="cell" x="{px:.3f}" y="{py:.3f}" '
                f'width="{cell:.3f}" height="{cell:.3f}" fill="{color}"/>'
            )
    first_name, second_name = coords.class_names
    for row, lab in zip(coords.coords, coords.labels):
        color = _SCATTER_FIRST if lab == 0 else _SCATTER_SECOND
        parts.append(
            f'<circle cx="{sx(row[0]):.3f}" cy="{sy(row[1]):.3f}" r="2.2" '
            f'fill="{color}" fill-opacity="0.8"/>'
        )
    frame = (
        f'<rect x="{ml:g}" y="{mt:g}" width="{plot:g}" height="{plot:g}" '
        'fill="none" stroke="#333" stroke-width="1"/>'
    )
    parts.append(frame)
    parts.append(f'<text x="{ml:g}" y="{mt + plot + 18:g}">{_fmt(x_min)}</text>')
    parts.append(
        f'<text x="{ml + plot:g}" y="{mt + plot + 18:g}" text-anchor="end">{_fmt(x_max)}</text>'
    )
    parts.append(f'<text x="{ml - 6:g}" y="{mt + plot:g}" text-anchor="end">{_fmt(y_min)}</text>')
    parts.append(f'<text x="{ml - 6:g}" y="{mt + 12:g}" text-anchor="end">{_fmt(y_max)}</text>')
    parts.append(
        f'<text x="{ml:g}" y="{mt + plot + 36:g}">'
        f"{escape(first_name)} (light high) vs {escape(second_name)}</text>"
    )
    parts.append("</svg>")
    _write_bytes(path, "\n".join(parts).encode("utf-8"))


def _write_bytes(path, blob: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from None


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailureError(f"cannot read {path}: {exc}") from None
