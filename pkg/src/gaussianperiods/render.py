"""Deterministic rasterization of period sets into layered RGBA images.

One layer per color class; a flat render is exactly the composite of the
layers in layer order, so saved layers can be recombined offline without
any pixel drift. Stamping is plain pixel replacement, which keeps output
byte-identical no matter how work is scheduled.
"""

from __future__ import annotations

import colorsys
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import PaletteTooSmall, ValidationError
from .periods import PeriodSet

RGBA = tuple[int, int, int, int]


@dataclass(frozen=True)
class RenderSpec:
    """Canvas geometry, palette and layer order; fully determines pixels.

    The scale is uniform, the canvas center maps to complex 0, and the
    y axis points up (conjugation shows as a vertical mirror).
    """

    width: int = 1000
    height: int = 1000
    margin: float = 0.05
    point_radius: int = 2
    palette: tuple[RGBA, ...] | None = None  # None -> auto palette
    background: RGBA = (255, 255, 255, 255)
    layer_order: tuple[int, ...] | None = None  # None -> ascending class id
    visible_classes: frozenset[int] | None = None  # None -> all

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError("width and height must be positive")
        if not 0.0 <= self.margin < 1.0:
            raise ValidationError("margin must lie in [0, 1)")
        if self.point_radius < 0:
            raise ValidationError("point_radius must be >= 0")


def auto_palette(class_count: int) -> tuple[RGBA, ...]:
    """class i at hue i/class_count, full saturation, fixed value."""
    out = []
    for i in range(max(class_count, 1)):
        r, g, b = colorsys.hsv_to_rgb(i / max(class_count, 1), 1.0, 0.9)
        out.append((int(round(r * 255)), int(round(g * 255)), int(round(b * 255)), 255))
    return tuple(out)


def resolve_palette(spec: RenderSpec, class_count: int) -> tuple[RGBA, ...]:
    if spec.palette is None:
        return auto_palette(class_count)
    if len(spec.palette) < class_count:
        raise PaletteTooSmall(
            f"palette has {len(spec.palette)} colors for {class_count} classes"
        )
    return tuple(tuple(c) for c in spec.palette)


def resolve_layer_order(spec: RenderSpec, class_count: int) -> tuple[int, ...]:
    if spec.layer_order is None:
        return tuple(range(class_count))
    if sorted(spec.layer_order) != list(range(class_count)):
        raise ValidationError("layer_order must be a permutation of the class ids")
    return tuple(spec.layer_order)


def _scale(extent: float, spec: RenderSpec) -> tuple[float, float, float]:
    half_w = (spec.width - 1) / 2.0
    half_h = (spec.height - 1) / 2.0
    s = (1.0 - spec.margin) * min(half_w, half_h) / extent
    return s, half_w, half_h


def map_to_canvas(value: complex, extent: float, spec: RenderSpec) -> tuple[int, int]:
    """Pixel (x, y) for one complex value; origin-centered, y up."""
    s, half_w, half_h = _scale(extent, spec)
    x = int(np.rint(half_w + value.real * s))
    y = int(np.rint(half_h - value.imag * s))
    return x, y


def _map_arrays(values: np.ndarray, extent: float, spec: RenderSpec):
    s, half_w, half_h = _scale(extent, spec)
    xs = np.rint(half_w + values.real * s).astype(np.int64)
    ys = np.rint(half_h - values.imag * s).astype(np.int64)
    return xs, ys


def _disk_offsets(radius: int) -> list[tuple[int, int]]:
    r = max(radius, 0)
    return [
        (dx, dy)
        for dx in range(-r, r + 1)
        for dy in range(-r, r + 1)
        if dx * dx + dy * dy <= r * r
    ]


def _stamp(buf: np.ndarray, xs: np.ndarray, ys: np.ndarray, color: RGBA, radius: int) -> None:
    h, w = buf.shape[:2]
    col = np.array(color, dtype=np.uint8)
    for dx, dy in _disk_offsets(radius):
        x = xs + dx
        y = ys + dy
        ok = (x >= 0) & (x < w) & (y >= 0) & (y < h)
        buf[y[ok], x[ok]] = col


def _class_layers(pset: PeriodSet, spec: RenderSpec, threads: int | None):
    """One transparent RGBA buffer per class id, rendered independently."""
    spec.validate()
    palette = resolve_palette(spec, pset.class_count)
    xs, ys = _map_arrays(pset.values, pset.extent, spec)

    def build(cid: int) -> np.ndarray:
        buf = np.zeros((spec.height, spec.width, 4), dtype=np.uint8)
        sel = pset.classes == cid
        _stamp(buf, xs[sel], ys[sel], palette[cid], spec.point_radius)
        return buf

    ids = list(range(pset.class_count))
    workers = threads or os.cpu_count() or 1
    if workers > 1 and len(ids) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            layers = list(pool.map(build, ids))
    else:
        layers = [build(cid) for cid in ids]
    return layers


def composite(
    layers: list[np.ndarray], spec: RenderSpec, order: tuple[int, ...]
) -> np.ndarray:
    """Overdraw layers onto the background in the given order; later layers
    simply replace covered pixels."""
    buf = np.empty((spec.height, spec.width, 4), dtype=np.uint8)
    buf[:] = np.array(spec.background, dtype=np.uint8)
    visible = spec.visible_classes
    for cid in order:
        if visible is not None and cid not in visible:
            continue
        layer = layers[cid]
        mask = layer[:, :, 3] > 0
        buf[mask] = layer[mask]
    return buf


def rasterize(pset: PeriodSet, spec: RenderSpec, threads: int | None = None) -> Image.Image:
    """Flat render: every class layer composited in layer order."""
    layers = _class_layers(pset, spec, threads)
    order = resolve_layer_order(spec, pset.class_count)
    return Image.fromarray(composite(layers, spec, order), mode="RGBA")


def export_layers(
    pset: PeriodSet,
    spec: RenderSpec,
    directory: str | os.PathLike,
    threads: int | None = None,
) -> list[Path]:
    """Write layer_<class_id>.png per class plus a JSON sidecar; compositing
    the files in layer order reproduces the flat render byte for byte."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    layers = _class_layers(pset, spec, threads)
    order = resolve_layer_order(spec, pset.class_count)
    paths = []
    for cid in range(pset.class_count):
        path = directory / f"layer_{cid}.png"
        Image.fromarray(layers[cid], mode="RGBA").save(path, format="PNG")
        paths.append(path)
    sidecar = directory / "layers.json"
    sidecar.write_text(json.dumps(_sidecar_dict(pset, spec, order), indent=2))
    return paths


def _sidecar_dict(pset: PeriodSet, spec: RenderSpec, order: tuple[int, ...]) -> dict:
    return {
        "params": {"n": pset.params.n, "omega": pset.params.omega, "d": pset.params.d},
        "c": pset.c,
        "mode": pset.mode.value,
        "class_count": pset.class_count,
        "extent": pset.extent,
        "width": spec.width,
        "height": spec.height,
        "margin": spec.margin,
        "point_radius": spec.point_radius,
        "palette": [list(c) for c in resolve_palette(spec, pset.class_count)],
        "background": list(spec.background),
        "layer_order": list(order),
    }


def render_to_file(
    pset: PeriodSet,
    spec: RenderSpec,
    path: str | os.PathLike,
    threads: int | None = None,
) -> Path:
    """Save the flat render as PNG and a reproducibility sidecar next to it."""
    path = Path(path)
    img = rasterize(pset, spec, threads=threads)
    img.save(path, format="PNG")
    order = resolve_layer_order(spec, pset.class_count)
    path.with_suffix(".json").write_text(
        json.dumps(_sidecar_dict(pset, spec, order), indent=2)
    )
    return path
