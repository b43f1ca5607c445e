"""HTTP facade over the period engine with an LRU compute cache.

The cache key is (n, omega) only: recoloring or re-rendering with a new
c/mode/palette reuses the cached uncolored orbits, so interactive color
play never pays for another orbit scan. Identical in-flight requests
coalesce onto one computation; jobs that outlive the synchronous window
return 202 with a poll token.
"""

from __future__ import annotations

import io
import os
import threading
import uuid
from collections import OrderedDict
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .errors import ValidationError
from .fillout import applicability_check, sample_image
from .periods import (
    ColoringMode,
    PeriodParams,
    PeriodSet,
    _orbit_scan,
    color_classes,
    dihedral_order,
    gcd,
    size_cap,
)
from .render import RenderSpec, rasterize

GIB = 1 << 30


@dataclass
class ServiceConfig:
    cache_bytes: int = int(os.environ.get("GP_CACHE_BYTES", GIB))
    max_workers: int = int(os.environ.get("GP_WORKERS", os.cpu_count() or 2))
    max_pending: int = 64
    sync_timeout_s: float = float(os.environ.get("GP_SYNC_TIMEOUT", 30.0))
    bin_threshold: int = 200_000
    bin_grid: int = 1024


@dataclass
class CacheEntry:
    params: PeriodParams
    reps: np.ndarray
    sizes: np.ndarray
    values: np.ndarray  # uncolored orbit values
    nbytes: int


class OrbitCache:
    """LRU over (n, omega) keyed uncolored orbit tables, bounded in bytes."""

    def __init__(self, budget_bytes: int):
        self._budget = budget_bytes
        self._entries: OrderedDict[tuple[int, int], CacheEntry] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.computed = 0

    def get(self, key: tuple[int, int]) -> CacheEntry | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return entry

    def put(self, key: tuple[int, int], entry: CacheEntry) -> None:
        with self._lock:
            self._entries[key] = entry
            self._entries.move_to_end(key)
            total = sum(e.nbytes for e in self._entries.values())
            while total > self._budget and len(self._entries) > 1:
                _, evicted = self._entries.popitem(last=False)
                total -= evicted.nbytes

    def stats(self) -> dict:
        with self._lock:
            return {
                "hits": self.hits,
                "misses": self.misses,
                "computed": self.computed,
                "entries": len(self._entries),
                "bytes": sum(e.nbytes for e in self._entries.values()),
                "budget_bytes": self._budget,
            }


class ComputePool:
    """Bounded workers with per-key coalescing and pollable jobs."""

    def __init__(self, cache: OrbitCache, config: ServiceConfig):
        self._cache = cache
        self._config = config
        self._executor = ThreadPoolExecutor(max_workers=config.max_workers)
        self._inflight: dict[tuple[int, int], Future] = {}
        self._jobs: dict[str, tuple[tuple[int, int], Future]] = {}
        self._lock = threading.Lock()

    def orbits(self, n: int, omega: int) -> tuple[CacheEntry | None, str | None]:
        """Cached entry if ready within the sync window, else a poll token."""
        params = PeriodParams.create(n, omega)
        key = (params.n, params.omega)
        entry = self._cache.get(key)
        if entry is not None:
            return entry, None
        with self._lock:
            fut = self._inflight.get(key)
            if fut is None:
                if len(self._inflight) >= self._config.max_pending:
                    raise OverCapacity()
                fut = self._executor.submit(self._compute, key, params)
                self._inflight[key] = fut
        try:
            return fut.result(timeout=self._config.sync_timeout_s), None
        except (TimeoutError, FutureTimeout):
            token = uuid.uuid4().hex
            with self._lock:
                self._jobs[token] = (key, fut)
            return None, token

    def _compute(self, key: tuple[int, int], params: PeriodParams) -> CacheEntry:
        try:
            reps, sizes, sum_re, sum_im = _orbit_scan(params.n, params.omega)
            values = (sum_re + 1j * sum_im) * (params.d // sizes)
            entry = CacheEntry(
                params=params,
                reps=reps,
                sizes=sizes,
                values=values,
                nbytes=reps.nbytes + sizes.nbytes + values.nbytes,
            )
            self._cache.put(key, entry)
            self._cache.computed += 1
            return entry
        finally:
            with self._lock:
                self._inflight.pop(key, None)

    def poll(self, token: str) -> CacheEntry | None:
        with self._lock:
            job = self._jobs.get(token)
        if job is None:
            raise KeyError(token)
        _, fut = job
        if not fut.done():
            return None
        with self._lock:
            self._jobs.pop(token, None)
        return fut.result()


class OverCapacity(Exception):
    pass


def _colored_set(entry: CacheEntry, c: int, mode: ColoringMode) -> PeriodSet:
    classing = color_classes(entry.params.n, entry.params.omega, c, mode)
    return PeriodSet(
        params=entry.params,
        c=c,
        mode=mode,
        class_count=classing.class_count,
        reps=entry.reps,
        sizes=entry.sizes,
        values=entry.values,
        classes=classing.class_of[entry.reps % c],
    )


def _parse_int(q, name: str, default=None, minimum=None):
    raw = q.get(name)
    if raw is None:
        if default is None:
            raise ApiError(f"invalid_{name}", f"missing query parameter {name}")
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ApiError(f"invalid_{name}", f"{name} must be an integer") from None
    if minimum is not None and value < minimum:
        raise ApiError(f"invalid_{name}", f"{name} must be >= {minimum}")
    return value


def _parse_float(q, name: str, default: float) -> float:
    raw = q.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ApiError(f"invalid_{name}", f"{name} must be a number") from None


class ApiError(Exception):
    def __init__(self, code: str, detail: str, status: int = 400):
        super().__init__(detail)
        self.code = code
        self.detail = detail
        self.status = status


def _error_response(code: str, detail: str, status: int = 400) -> JSONResponse:
    return JSONResponse({"error": code, "detail": detail}, status_code=status)


def _bin_points(pset: PeriodSet, grid: int) -> dict:
    """Grid-bin the orbit points: per-bin count plus the dominant class
    (most records; ties break to the smallest class id)."""
    extent = pset.extent
    nx = ny = grid
    step = 2.0 * extent / nx
    ix = np.clip(((pset.values.real + extent) / step).astype(np.int64), 0, nx - 1)
    iy = np.clip(((pset.values.imag + extent) / step).astype(np.int64), 0, ny - 1)
    bin_idx = iy * nx + ix
    ncls = max(pset.class_count, 1)
    pair = bin_idx * ncls + pset.classes.astype(np.int64)
    pairs, counts = np.unique(pair, return_counts=True)
    pair_bins = pairs // ncls
    pair_cls = pairs % ncls
    # within each bin pick the (count desc, class asc) winner
    order = np.lexsort((pair_cls, -counts, pair_bins))
    first = np.unique(pair_bins[order], return_index=True)[1]
    win = order[first]
    bins = pair_bins[win]
    dominant = pair_cls[win]
    totals = np.bincount(bin_idx, minlength=nx * ny)[bins]
    cx = -extent + (bins % nx + 0.5) * step
    cy = -extent + (bins // nx + 0.5) * step
    return {
        "binned": True,
        "grid": {"nx": nx, "ny": ny, "extent": extent},
        "points": [
            {"re": float(x), "im": float(y), "count": int(t), "color_class": int(cc)}
            for x, y, t, cc in zip(cx, cy, totals, dominant)
        ],
    }


def create_app(config: ServiceConfig | None = None, ui_dir: str | None = None) -> FastAPI:
    config = config or ServiceConfig()
    cache = OrbitCache(config.cache_bytes)
    pool = ComputePool(cache, config)
    app = FastAPI(title="gaussian-periods")
    app.state.cache = cache
    app.state.pool = pool
    app.state.config = config

    def _period_payload(entry: CacheEntry, c: int, mode: ColoringMode) -> dict:
        pset = _colored_set(entry, c, mode)
        params = pset.params
        doc = {
            "params": {
                "n": params.n,
                "omega": params.omega,
                "c": c,
                "mode": mode.value,
            },
            "d": params.d,
            "dihedral_order": gcd(params.omega - 1, params.n),
            "class_count": pset.class_count,
            "orbit_count": len(pset.reps),
            "extent": pset.extent,
            "fillout_applicable": applicability_check(params.n, params.omega).applicable,
        }
        if len(pset.reps) > config.bin_threshold:
            doc.update(_bin_points(pset, config.bin_grid))
        else:
            doc["binned"] = False
            doc["points"] = [
                {"re": re, "im": im, "size": s, "color_class": cc}
                for re, im, s, cc in zip(
                    pset.values.real.tolist(),
                    pset.values.imag.tolist(),
                    pset.sizes.tolist(),
                    pset.classes.tolist(),
                )
            ]
        return doc

    def _validated_request(q) -> tuple[int, int, int, ColoringMode]:
        n = _parse_int(q, "n", minimum=1)
        omega = _parse_int(q, "omega")
        c = _parse_int(q, "c", default=1, minimum=1)
        mode_raw = q.get("mode", ColoringMode.STANDARD.value)
        try:
            mode = ColoringMode(mode_raw)
        except ValueError:
            raise ApiError("invalid_mode", f"unknown mode {mode_raw!r}") from None
        return n, omega, c, mode

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return _error_response(exc.code, exc.detail, exc.status)

    @app.exception_handler(ValidationError)
    async def _validation_error(_req, exc: ValidationError):
        return _error_response(exc.code, str(exc))

    @app.exception_handler(OverCapacity)
    async def _over_capacity(_req, _exc):
        return _error_response("over_capacity", "too many pending computations", 503)

    @app.get("/api/periods")
    def periods(request: Request):
        q = request.query_params
        n, omega, c, mode = _validated_request(q)
        if n % c != 0:
            raise ApiError("not_divisor", f"c={c} does not divide n={n}")
        entry, token = pool.orbits(n, omega)
        if token is not None:
            return JSONResponse({"status": "pending", "token": token}, status_code=202)
        return _period_payload(entry, c, mode)

    @app.get("/api/render")
    def render(request: Request):
        q = request.query_params
        n, omega, c, mode = _validated_request(q)
        if n % c != 0:
            raise ApiError("not_divisor", f"c={c} does not divide n={n}")
        width = _parse_int(q, "width", default=1000)
        height = _parse_int(q, "height", default=1000)
        if width < 1 or height < 1:
            raise ApiError("invalid_dimension", "width and height must be positive")
        point_radius = _parse_int(q, "point_radius", default=2, minimum=0)
        margin = _parse_float(q, "margin", 0.05)
        visible = None
        if q.get("layers"):
            try:
                visible = frozenset(int(x) for x in q["layers"].split(","))
            except ValueError:
                raise ApiError("invalid_layers", "layers must be comma-separated ints") from None
        entry, token = pool.orbits(n, omega)
        if token is not None:
            return JSONResponse({"status": "pending", "token": token}, status_code=202)
        pset = _colored_set(entry, c, mode)
        spec = RenderSpec(
            width=width,
            height=height,
            margin=margin,
            point_radius=point_radius,
            visible_classes=visible,
        )
        img = rasterize(pset, spec)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return Response(buf.getvalue(), media_type="image/png")

    @app.get("/api/fillout")
    def fillout(request: Request):
        q = request.query_params
        d = _parse_int(q, "d")
        if d < 1:
            raise ApiError("invalid_d", "d must be >= 1")
        samples = _parse_int(q, "samples", default=10_000, minimum=1)
        seed = _parse_int(q, "seed", default=0)
        strategy = q.get("strategy", "grid")
        if strategy not in ("grid", "random"):
            raise ApiError("invalid_strategy", f"unknown strategy {strategy!r}")
        pts = sample_image(d, samples, strategy=strategy, seed=seed)
        return {
            "d": d,
            "sample_count": len(pts),
            "strategy": strategy,
            "seed": seed,
            "points": [{"re": re, "im": im} for re, im in zip(pts.real.tolist(), pts.imag.tolist())],
        }

    @app.get("/api/jobs/{token}")
    def job(token: str, request: Request):
        q = request.query_params
        try:
            entry = pool.poll(token)
        except KeyError:
            raise ApiError("unknown_token", f"no job {token}", status=404) from None
        if entry is None:
            return JSONResponse({"status": "pending", "token": token}, status_code=202)
        c = _parse_int(q, "c", default=1, minimum=1)
        mode_raw = q.get("mode", ColoringMode.STANDARD.value)
        try:
            mode = ColoringMode(mode_raw)
        except ValueError:
            raise ApiError("invalid_mode", f"unknown mode {mode_raw!r}") from None
        if entry.params.n % c != 0:
            raise ApiError("not_divisor", f"c={c} does not divide n={entry.params.n}")
        return _period_payload(entry, c, mode)

    @app.get("/api/stats")
    def stats():
        doc = cache.stats()
        doc["size_cap"] = size_cap()
        return doc

    if ui_dir is None:
        ui_dir = os.environ.get("GP_UI_DIR")
    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


app = create_app()


def main() -> None:
    import uvicorn

    port = int(os.environ.get("GP_PORT", 8000))
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
