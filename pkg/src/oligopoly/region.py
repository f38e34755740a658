"""Stability regions over the (k*sqrt(c), l) plane and the exact sample-point
tables.

Every Jacobian entry depends on k and c only through k*sqrt(c), so a scan
fixes c and walks t = k*sqrt(c) and l.  Classification is by Schur-Cohn on
the closed-form Jacobian; the closed-form threshold is recorded alongside as
a cross-check.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import _kernels, reference_cd
from .stability import (
    PRESETS,
    STABILITY_TOL,
    _RADICAND,
    cd_block,
    char_poly,
    corollary_conditions,
    radical_scale,
    rational_sqrt,
    scaled_jacobian,
    schur_cohn,
    spectral_radius,
    stability_threshold,
)

CLASS_NAMES = {_kernels.CLASS_STABLE: "Stable", _kernels.CLASS_UNSTABLE: "Unstable",
               _kernels.CLASS_MARGINAL: "Marginal"}


@dataclass(frozen=True)
class GridDef:
    """Node grid: ``*_steps`` evenly spaced nodes from min to max inclusive."""

    ksqrtc_min: float = 0.01
    ksqrtc_max: float = 3.0
    ksqrtc_steps: int = 200
    l_min: float = 0.01
    l_max: float = 1.0
    l_steps: int = 100
    c: float = 1.0

    def __post_init__(self):
        for name in ("ksqrtc_min", "ksqrtc_max", "l_min", "l_max", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if self.l_max > 1:
            raise ValueError(f"l_max must not exceed 1, got {self.l_max!r}")
        for name in ("ksqrtc_steps", "l_steps"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 0:
                raise ValueError(f"{name} must be a nonnegative integer")
        if self.ksqrtc_min > self.ksqrtc_max:
            raise ValueError("ksqrtc_min exceeds ksqrtc_max")
        if self.l_min > self.l_max:
            raise ValueError("l_min exceeds l_max")

    @staticmethod
    def _axis(lo, hi, n):
        if n == 1:
            return np.array([lo])
        return np.linspace(lo, hi, n)

    def ksqrtc_values(self) -> np.ndarray:
        return self._axis(self.ksqrtc_min, self.ksqrtc_max, self.ksqrtc_steps)

    def l_values(self) -> np.ndarray:
        return self._axis(self.l_min, self.l_max, self.l_steps)

    @property
    def ksqrtc_step(self) -> float:
        return (self.ksqrtc_max - self.ksqrtc_min) / max(self.ksqrtc_steps - 1, 1)


@dataclass
class RegionGrid:
    """``classes[i, j]`` is the CLASS_* code at ``l_values[i]``,
    ``ksqrtc_values[j]``; ``threshold_classes`` is the closed-form call."""

    preset: str
    grid: GridDef
    variant: str
    classes: np.ndarray
    threshold_classes: np.ndarray

    @property
    def stable(self) -> np.ndarray:
        return self.classes == _kernels.CLASS_STABLE

    def threshold_disagreements(self) -> int:
        """Nodes where Schur-Cohn and the threshold disagree, ignoring nodes
        within one grid step of the threshold."""
        t = self.grid.ksqrtc_values()[None, :]
        bound = np.array([stability_threshold(self.preset, l, self.variant) for l in self.grid.l_values()])[:, None]
        far = np.abs(t - bound) > self.grid.ksqrtc_step
        return int(np.sum((self.classes != self.threshold_classes) & far))


def _classify_rows(preset, variant, t_axis, l_rows):
    T, L = np.meshgrid(t_axis, l_rows)
    s = T.ravel() * math.sqrt(_RADICAND[preset])
    rows = scaled_jacobian(preset, s, L.ravel(), variant)
    n = len(rows)
    J = np.empty((s.shape[0], n, n))
    for i in range(n):
        for j in range(n):
            J[:, i, j] = rows[i][j]
    return np.asarray(_kernels.classify_batch(J, STABILITY_TOL), dtype=np.int8).reshape(T.shape)


def _threshold_rows(preset, variant, t_axis, l_axis):
    bound = np.array([stability_threshold(preset, l, variant) for l in l_axis])[:, None]
    t = t_axis[None, :]
    out = np.where(t < bound, _kernels.CLASS_STABLE, _kernels.CLASS_UNSTABLE).astype(np.int8)
    out[np.abs(t - bound) <= STABILITY_TOL] = _kernels.CLASS_MARGINAL
    return out


def default_workers() -> int:
    env = os.environ.get("OLIGOPOLY_WORKERS")
    if env:
        return int(env)
    return 1


def scan_plane(preset: str, grid: GridDef = GridDef(), variant: str = "printed",
               workers: Optional[int] = None) -> RegionGrid:
    """Classify every grid node; ``workers`` threads split the l rows."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    t_axis = grid.ksqrtc_values()
    l_axis = grid.l_values()
    classes = np.empty((l_axis.size, t_axis.size), dtype=np.int8)
    if classes.size:
        chunks = [c for c in np.array_split(np.arange(l_axis.size), min(workers, l_axis.size)) if c.size]
        if len(chunks) == 1:
            classes[:] = _classify_rows(preset, variant, t_axis, l_axis)
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                parts = pool.map(lambda idx: (idx, _classify_rows(preset, variant, t_axis, l_axis[idx])), chunks)
                for idx, part in parts:
                    classes[idx] = part
    thresh = _threshold_rows(preset, variant, t_axis, l_axis) if classes.size else classes.copy()
    return RegionGrid(preset, grid, variant, classes, thresh)


def scan_all(grid: GridDef = GridDef(), variant: str = "printed", workers: Optional[int] = None,
             presets: Sequence[str] = PRESETS) -> list:
    return [scan_plane(p, grid, variant, workers) for p in presets]


def nesting_violations(grids: Sequence[RegionGrid]) -> int:
    """Nodes stable for a preset but unstable for the next larger one."""
    ordered = sorted(grids, key=lambda g: PRESETS.index(g.preset))
    return int(sum(np.sum(a.stable & ~b.stable) for a, b in zip(ordered, ordered[1:])))


# -- sample-point tables -------------------------------------------------------

def load_sample_points() -> dict:
    """Published sample points per preset, with exact rationals."""
    raw = json.loads(resources.files("oligopoly").joinpath("data/sample_points.json").read_text())
    out = {}
    for preset, table in raw["tables"].items():
        out[preset] = [
            (Fraction(*row["k"]), Fraction(*row["l"]), Fraction(*row["c"]), tuple(row["expected"]))
            for row in table["rows"]
        ]
    return out


@dataclass
class SamplePointRow:
    preset: str
    k: Fraction
    l: Fraction
    c: Fraction
    expected: tuple
    computed: tuple
    float_computed: tuple
    schur_cohn_verdict: str
    corollary_verdict: str
    eigen_stable: bool
    reference_holds: tuple

    @property
    def matches_printed(self) -> bool:
        return self.expected == self.computed

    @property
    def consistent(self) -> bool:
        """Corollary block, Schur-Cohn, eigenvalues and float path agree."""
        sc_stable = self.schur_cohn_verdict == "stable"
        return (sc_stable == (self.corollary_verdict == "stable") == self.eigen_stable == all(self.computed)
                and self.float_computed == self.computed)

    def mismatched_conditions(self) -> list:
        return [i + 1 for i, (e, g) in enumerate(zip(self.expected, self.computed)) if e != g]


@dataclass
class TableReport:
    rows: list = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def mismatches(self) -> list:
        return [r for r in self.rows if not r.matches_printed]

    @property
    def inconsistencies(self) -> list:
        return [r for r in self.rows if not r.consistent]

    def reference_sign_discrepancies(self) -> list:
        """(preset, CD index) pairs where a reference polynomial, read with its
        published relation, disagrees with the computed condition at some
        sample point."""
        bad = set()
        for r in self.rows:
            for i, (a, b) in enumerate(zip(r.reference_holds, r.computed)):
                if a != b:
                    bad.add((r.preset, i + 1))
        return sorted(bad)


def evaluate_sample_point(preset, k, l, c, expected=()) -> SamplePointRow:
    """Evaluate one (k, l, c) point exactly; the relevant radical must be
    rational."""
    if radical_scale(preset, c) is None:
        raise ValueError(f"sqrt({_RADICAND[preset]}*c) is irrational for c = {c}")
    block = cd_block(preset, k, l, c)
    fblock = cd_block(preset, float(k), float(l), float(c))
    s = k * radical_scale(preset, c)
    J = scaled_jacobian(preset, s, l)
    p = char_poly(J)
    root = rational_sqrt(reference_cd.RADICAND[preset] * c)
    ref_vals = reference_cd.evaluate(preset, k, l, root)
    ref_holds = tuple(reference_cd.holds(v, rel)
                      for v, rel in zip(ref_vals, reference_cd.PRINTED_RELATIONS[preset]))
    return SamplePointRow(
        preset=preset, k=k, l=l, c=c, expected=tuple(expected),
        computed=block.satisfied,
        float_computed=fblock.satisfied,
        schur_cohn_verdict=schur_cohn(p).verdict,
        corollary_verdict=corollary_conditions(p).verdict,
        eigen_stable=spectral_radius([[float(v) for v in row] for row in J]) < 1,
        reference_holds=ref_holds,
    )


def verify_tables() -> TableReport:
    report = TableReport()
    for preset, rows in load_sample_points().items():
        for k, l, c, expected in rows:
            report.rows.append(evaluate_sample_point(preset, k, l, c, expected))
    return report


# -- export --------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def region_csv(grids: Sequence[RegionGrid]) -> str:
    buf = io.StringIO()
    buf.write("ksqrtc,l,preset,class\n")
    for g in grids:
        t_axis = g.grid.ksqrtc_values()
        for i, l in enumerate(g.grid.l_values()):
            for j, t in enumerate(t_axis):
                buf.write(f"{_fmt(t)},{_fmt(l)},{g.preset},{CLASS_NAMES[int(g.classes[i, j])]}\n")
    return buf.getvalue()


LAYER_COLORS = {"gb": "#d62728", "gba": "#f2c14e", "gbal": "#2ca02c", "gbalr": "#1f77b4"}


def region_svg(grids: Sequence[RegionGrid], width: int = 640, height: int = 420) -> str:
    """Layered picture: each preset's layer shades the nodes that are stable
    for it but not for the preceding (smaller) preset."""
    grids = sorted(grids, key=lambda g: PRESETS.index(g.preset))
    if not grids:
        raise ValueError("nothing to draw")
    grid = grids[0].grid
    if any(g.grid != grid for g in grids):
        raise ValueError("all layers must share one grid definition")
    left, right, top, bottom = 60, 130, 20, 50
    pw, ph = width - left - right, height - top - bottom
    t_axis, l_axis = grid.ksqrtc_values(), grid.l_values()
    nt, nl = max(t_axis.size, 1), max(l_axis.size, 1)
    cw, ch = pw / nt, ph / nl

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="#ffffff" stroke="#000000"/>']
    previous = np.zeros((l_axis.size, t_axis.size), dtype=bool)
    for g in grids:
        shade = g.stable & ~previous
        previous = previous | g.stable
        out.append(f'<g class="region-layer" id="layer-{g.preset}" data-preset="{g.preset}" '
                   f'fill="{LAYER_COLORS[g.preset]}" stroke="none">')
        for i in range(l_axis.size):
            y = top + ph - (i + 1) * ch
            j = 0
            while j < t_axis.size:
                if not shade[i, j]:
                    j += 1
                    continue
                j0 = j
                while j < t_axis.size and shade[i, j]:
                    j += 1
                out.append(f'<rect x="{left + j0 * cw:.3f}" y="{y:.3f}" width="{(j - j0) * cw:.3f}" '
                           f'height="{ch:.3f}"/>')
        out.append("</g>")
    out.append('<g font-family="sans-serif" font-size="12" fill="#000000">')
    for frac in (0.0, 0.5, 1.0):
        tv = grid.ksqrtc_min + frac * (grid.ksqrtc_max - grid.ksqrtc_min)
        lv = grid.l_min + frac * (grid.l_max - grid.l_min)
        x = left + frac * pw
        y = top + ph - frac * ph
        out.append(f'<text x="{x:.1f}" y="{top + ph + 16}" text-anchor="middle">{tv:.3g}</text>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{lv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">'
               f'{escape("k·√c")} (c = {_fmt(grid.c)})</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" transform="rotate(-90 16 {top + ph / 2:.1f})" '
               f'text-anchor="middle">l</text>')
    for idx, g in enumerate(grids):
        y = top + 10 + idx * 22
        out.append(f'<rect x="{left + pw + 14}" y="{y}" width="14" height="14" fill="{LAYER_COLORS[g.preset]}"/>')
        out.append(f'<text x="{left + pw + 34}" y="{y + 11}">{g.preset.upper()}</text>')
    out.append("</g></svg>")
    return "\n".join(out) + "\n"


def export_region(grids, format: str = "csv") -> str:
    """Render one grid or a list of grids as ``"csv"`` or ``"svg"`` text."""
    if isinstance(grids, RegionGrid):
        grids = [grids]
    fmt = format.lower()
    if fmt == "csv":
        return region_csv(grids)
    if fmt == "svg":
        return region_svg(grids)
    raise ValueError(f"unsupported format {format!r}; use csv or svg")


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
