"""CSV serialisation of density fields and PGM heatmap rendering."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .config import HeatmapSpec
from .errors import DegenerateField
from .model import DensityField, SpacetimeGrid
from .rays import RayWorldline


def format_value(v: float) -> str:
    """Shortest round-trip decimal for ``v``, without a trailing '.0'."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(density: DensityField, path) -> None:
    """Write ``density`` as CSV: a '# x_min,x_max,nx,t_min,t_max,nt' header
    line carrying the grid, then one line per time row (increasing T)."""
    g = density.grid
    header = ",".join(
        [format_value(g.x_min), format_value(g.x_max), str(g.nx),
         format_value(g.t_min), format_value(g.t_max), str(g.nt)]
    )
    lines = ["# " + header]
    for row in density.values:
        lines.append(",".join(map(format_value, row.tolist())))
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> DensityField:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read CSV {path}: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing grid header line")
    fields = lines[0][1:].strip().split(",")
    if len(fields) != 6:
        raise ValueError(f"{path}: header must hold x_min,x_max,nx,t_min,t_max,nt")
    x_min, x_max, t_min, t_max = (float(fields[i]) for i in (0, 1, 3, 4))
    grid = SpacetimeGrid(x_min, x_max, int(fields[2]), t_min, t_max, int(fields[5]))
    rows = [[float(v) for v in line.split(",")] for line in lines[1:] if line]
    return DensityField(grid, np.array(rows, dtype=float))


def heatmap_pixels(density: DensityField, spec: HeatmapSpec) -> np.ndarray:
    """8-bit image, first image row = last time row (time runs upward)."""
    g = density.grid
    if (spec.width_px, spec.height_px) != (g.nx, g.nt):
        raise ValueError(
            f"heatmap size {spec.width_px}x{spec.height_px} must equal grid {g.nx}x{g.nt}"
        )
    rho = density.values
    peak = float(rho.max())
    if peak <= 0:
        raise DegenerateField("density is identically zero; nothing to normalise against")
    if spec.normalization == "global-max":
        scaled = rho / peak
    else:
        ref = rho.max(axis=1, keepdims=True)
        scaled = np.divide(rho, ref, out=np.zeros_like(rho), where=ref > 0)
    pixels = np.floor(255.0 * scaled**spec.gamma + 0.5)
    return np.clip(pixels, 0, 255).astype(np.uint8)[::-1].copy()


def _clip_segment(p0, p1, box):
    # Liang-Barsky clipping of p0->p1 to box = (xmin, xmax, ymin, ymax)
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    u0, u1 = 0.0, 1.0
    for p, q in ((-dx, x0 - box[0]), (dx, box[1] - x0), (-dy, y0 - box[2]), (dy, box[3] - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        u = q / p
        if p < 0:
            u0 = max(u0, u)
        else:
            u1 = min(u1, u)
        if u0 > u1:
            return None
    return (x0 + u0 * dx, y0 + u0 * dy), (x0 + u1 * dx, y0 + u1 * dy)


def _bresenham(c0, r0, c1, r1):
    dc, dr = abs(c1 - c0), -abs(r1 - r0)
    sc = 1 if c0 < c1 else -1
    sr = 1 if r0 < r1 else -1
    err = dc + dr
    while True:
        yield c0, r0
        if c0 == c1 and r0 == r1:
            return
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c0 += sc
        if e2 <= dc:
            err += dc
            r0 += sr


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def ray_pixels(ray: RayWorldline, grid: SpacetimeGrid):
    """Pixel (column, image row) pairs covered by ``ray`` inside ``grid``."""
    box = (grid.x_min, grid.x_max, grid.t_min, grid.t_max)
    # far enough to leave the grid from anywhere inside it
    reach = (grid.x_max - grid.x_min) + ray.v0 * (grid.t_max - grid.t_min) + 1.0
    out = []
    for seg in ray.segments:
        xs, ys = seg.start
        p0 = (xs, ys / ray.v0)
        if seg.end is not None:
            p1 = (seg.end[0], seg.end[1] / ray.v0)
        else:
            # advance forward in time along the segment
            dy = reach * abs(seg.slope) / math.hypot(1.0, seg.slope)
            dx = dy / seg.slope
            p1 = (xs + dx, (ys + dy) / ray.v0)
        clipped = _clip_segment(p0, p1, box)
        if clipped is None:
            continue
        (ax, at), (bx, bt) = clipped
        c0 = _round((ax - grid.x_min) / grid.dx)
        c1 = _round((bx - grid.x_min) / grid.dx)
        r0 = grid.nt - 1 - _round((at - grid.t_min) / grid.dt)
        r1 = grid.nt - 1 - _round((bt - grid.t_min) / grid.dt)
        out.extend(_bresenham(c0, r0, c1, r1))
    return out


def render_heatmap(density: DensityField, spec: HeatmapSpec, rays=None, path=None) -> np.ndarray:
    """Render ``density`` as a binary PGM (P5, maxval 255).

    Pixel value is round(255 (rho/rho_ref)^gamma), rho_ref being the
    global maximum or each time row's maximum.  Rays, when given and
    ``spec.overlay_rays`` is set, are drawn at 255.  Returns the pixel
    array; writes it to ``path`` if one is given.
    """
    img = heatmap_pixels(density, spec)
    if rays and spec.overlay_rays:
        for ray in rays:
            for c, r in ray_pixels(ray, density.grid):
                if 0 <= c < img.shape[1] and 0 <= r < img.shape[0]:
                    img[r, c] = 255
    if path is not None:
        write_pgm(img, path)
    return img


def write_pgm(img: np.ndarray, path) -> None:
    h, w = img.shape
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PGM to {path}: {exc.strerror or exc}") from exc


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h).reshape(h, w)
