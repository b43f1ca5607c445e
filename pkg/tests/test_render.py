import io
import json
import math
import random

import numpy as np
import pytest
from PIL import Image

from gaussianperiods import (
    PaletteTooSmall,
    RenderSpec,
    ValidationError,
    auto_palette,
    compute_period_set,
    dihedral_order,
    export_layers,
    map_to_canvas,
    rasterize,
    render_to_file,
)
from gaussianperiods.render import composite, resolve_layer_order, resolve_palette

from oracles import units


def _png_bytes(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def test_map_to_canvas_anchors():
    spec = RenderSpec(width=401, height=401, margin=0.1)
    extent = 5.0
    assert map_to_canvas(0j, extent, spec) == (200, 200)
    x, y = map_to_canvas(extent + 0j, extent, spec)
    assert y == 200 and x == 200 + round(0.9 * 200)
    x, y = map_to_canvas(extent * 1j, extent, spec)
    assert x == 200 and y == 200 - round(0.9 * 200)


def test_map_to_canvas_mirror_symmetry():
    # conjugation must land exactly on the vertical mirror pixel
    spec = RenderSpec(width=640, height=480)
    for value in (0.3 + 0.7j, -1 + 0.2j, 0.5 - 0.9j):
        x, y = map_to_canvas(value, 1.0, spec)
        xc, yc = map_to_canvas(value.conjugate(), 1.0, spec)
        assert xc == x and yc == (spec.height - 1) - y


def test_auto_palette_shape():
    pal = auto_palette(5)
    assert len(pal) == 5
    assert all(len(c) == 4 and c[3] == 255 for c in pal)
    assert len(set(pal)) == 5


def test_palette_too_small():
    pset = compute_period_set(27, 2, 9)
    spec = RenderSpec(width=64, height=64, palette=((255, 0, 0, 255),))
    with pytest.raises(PaletteTooSmall):
        rasterize(pset, spec)


def test_layer_order_validation():
    pset = compute_period_set(27, 2, 9)
    with pytest.raises(ValidationError):
        rasterize(pset, RenderSpec(width=64, height=64, layer_order=(0, 1)))
    with pytest.raises(ValidationError):
        rasterize(pset, RenderSpec(width=0, height=64))


def test_render_27_2_9_three_dots_two_colors():
    pset = compute_period_set(27, 2, 9)
    spec = RenderSpec(width=201, height=201, point_radius=3)
    positions = {map_to_canvas(complex(v), pset.extent, spec) for v in pset.values}
    assert len(positions) == 3  # two zero-valued orbits coincide
    img = np.asarray(rasterize(pset, spec))
    bg = np.array(spec.background, dtype=np.uint8)
    stamped = img[np.any(img != bg, axis=2)]
    colors = {tuple(px) for px in stamped}
    assert len(colors) == 2  # classes of the coincident zeros overdraw


def test_render_12_5_3_diamonds():
    pset = compute_period_set(12, 5, 3)
    spec = RenderSpec(width=201, height=201, point_radius=2)
    img = np.asarray(rasterize(pset, spec))
    pal = resolve_palette(spec, pset.class_count)
    outer = map_to_canvas(2 + 0j, pset.extent, spec)
    inner = map_to_canvas(1 + 0j, pset.extent, spec)
    assert tuple(img[outer[1], outer[0]]) == pal[0]  # multiples of 3: class 0
    assert tuple(img[inner[1], inner[0]]) == pal[1]
    stamped_colors = {
        tuple(px)
        for px in img[np.any(img != np.array(spec.background, np.uint8), axis=2)]
    }
    assert stamped_colors == {pal[0], pal[1]}


def test_empty_set_renders_background_only():
    pset = compute_period_set(4, 5, 1)
    pset.reps = pset.reps[:0]
    pset.sizes = pset.sizes[:0]
    pset.values = pset.values[:0]
    pset.classes = pset.classes[:0]
    img = np.asarray(rasterize(pset, RenderSpec(width=32, height=16)))
    assert (img == np.array((255, 255, 255, 255), np.uint8)).all()


def test_export_layers_composite_equals_flat(tmp_path):
    pset = compute_period_set(27, 2, 9)
    spec = RenderSpec(width=120, height=100, point_radius=2)
    flat = _png_bytes(rasterize(pset, spec))
    paths = export_layers(pset, spec, tmp_path)
    assert [p.name for p in paths] == ["layer_0.png", "layer_1.png", "layer_2.png"]
    layers = [np.asarray(Image.open(p)) for p in paths]
    order = resolve_layer_order(spec, pset.class_count)
    recombined = composite(layers, spec, order)
    assert _png_bytes(Image.fromarray(recombined, "RGBA")) == flat
    sidecar = json.loads((tmp_path / "layers.json").read_text())
    assert sidecar["params"]["n"] == 27 and sidecar["class_count"] == 3


def test_export_layers_c1_single_layer(tmp_path):
    pset = compute_period_set(12, 5, 1)
    spec = RenderSpec(width=64, height=64)
    paths = export_layers(pset, spec, tmp_path)
    assert len(paths) == 1
    layer = np.asarray(Image.open(paths[0]))
    flat = np.asarray(rasterize(pset, spec))
    mask = layer[:, :, 3] > 0
    assert (flat[mask] == layer[mask]).all()
    bg = np.array(spec.background, np.uint8)
    assert (flat[~mask] == bg).all()


def test_layer_count_for_large_modulus(tmp_path):
    # verified orbit structure of 254 on Z/7Z: {0}, {1,2,4}, {3,5,6}
    pset = compute_period_set(255255, 254, 7)
    assert pset.class_count == 3
    spec = RenderSpec(width=100, height=100, point_radius=1)
    paths = export_layers(pset, spec, tmp_path)
    assert len(paths) == 3


def test_composite_equals_flat_randomized(tmp_path):
    rng = random.Random(20260809)
    for trial in range(50):
        n = rng.randrange(2, 200)
        omega = rng.choice([u for u in units(n)])
        divs = [c for c in range(1, n + 1) if n % c == 0]
        c = rng.choice(divs)
        spec = RenderSpec(
            width=rng.randrange(16, 120),
            height=rng.randrange(16, 120),
            point_radius=rng.randrange(0, 4),
            margin=rng.random() * 0.3,
        )
        pset = compute_period_set(n, omega, c)
        order = resolve_layer_order(spec, pset.class_count)
        sub = tmp_path / str(trial)
        paths = export_layers(pset, spec, sub)
        layers = [np.asarray(Image.open(p)) for p in paths]
        flat = np.asarray(rasterize(pset, spec))
        assert (composite(layers, spec, order) == flat).all(), (n, omega, c)


def test_pixel_level_rotation_symmetry():
    rng = random.Random(7)
    for _ in range(10):
        n = rng.randrange(3, 400)
        omega = rng.choice(units(n))
        pset = compute_period_set(n, omega, 1)
        fold = dihedral_order(n, omega)
        spec = RenderSpec(width=301, height=301, point_radius=1)
        xs = np.array([map_to_canvas(complex(v), pset.extent, spec) for v in pset.values])
        ang = 2 * math.pi / fold
        rotated = pset.values * complex(math.cos(ang), math.sin(ang))
        rx = np.array([map_to_canvas(complex(v), pset.extent, spec) for v in rotated])
        # every rotated position must sit within one pixel of a rendered one
        for p in rx:
            assert np.min(np.abs(xs - p).max(axis=1)) <= 1, (n, omega)


def test_rasterize_deterministic_across_threads():
    pset = compute_period_set(1000, 3, 8)
    spec = RenderSpec(width=256, height=256, point_radius=2)
    a = _png_bytes(rasterize(pset, spec, threads=1))
    b = _png_bytes(rasterize(pset, spec, threads=4))
    c = _png_bytes(rasterize(pset, spec, threads=4))
    assert a == b == c


def test_render_to_file_writes_sidecar(tmp_path):
    pset = compute_period_set(12, 5, 3)
    out = tmp_path / "plot.png"
    render_to_file(pset, RenderSpec(width=80, height=80), out)
    assert out.exists()
    doc = json.loads((tmp_path / "plot.json").read_text())
    assert doc["params"] == {"n": 12, "omega": 5, "d": 2}
    assert doc["width"] == 80 and doc["layer_order"] == [0, 1]
    img = Image.open(out)
    assert img.size == (80, 80) and img.mode == "RGBA"


def test_visible_classes_subset():
    pset = compute_period_set(12, 5, 3)
    full_spec = RenderSpec(width=101, height=101, point_radius=2)
    hidden = RenderSpec(width=101, height=101, point_radius=2, visible_classes=frozenset({0}))
    img = np.asarray(rasterize(pset, hidden))
    pal = resolve_palette(full_spec, pset.class_count)
    colors = {
        tuple(px)
        for px in img[np.any(img != np.array((255, 255, 255, 255), np.uint8), axis=2)]
    }
    assert colors == {pal[0]}
