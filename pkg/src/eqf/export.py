"""Deterministic CSV and SVG export of simulation results.

CSV rows carry every sample of every filter of every run with full float
precision (%.17g round-trips IEEE doubles exactly), so a fixed seed yields
byte-identical files.  The SVG writer is self-contained and emits three
stacked log-scale panels (position error, velocity error, normalized filter
energy) with fixed colors per filter.
"""

from __future__ import annotations

import math
import os
from xml.sax.saxutils import escape

import numpy as np

CSV_HEADER = "run,t,filter,px,py,pz,vx,vy,vz,pos_err,vel_err,energy"

FILTER_COLORS = {
    "eqf": "#000000",
    "eqf-noreset": "#8a2be2",
    "ekf": "#d62728",
}


def _fmt(x):
    return "%.17g" % x


def write_csv(path, records, filters=None):
    """Write per-sample rows for all runs; rows after a divergence are dropped."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for rec in records:
            names = filters if filters is not None else list(rec.tracks)
            for name in names:
                track = rec.tracks[name]
                for k in range(len(rec.t)):
                    if math.isnan(track.pos_err[k]):
                        continue
                    row = [str(rec.run), _fmt(rec.t[k]), name]
                    row += [_fmt(v) for v in track.p_est[k]]
                    row += [_fmt(v) for v in track.v_est[k]]
                    row += [_fmt(track.pos_err[k]), _fmt(track.vel_err[k]),
                            _fmt(track.energy[k])]
                    f.write(",".join(row) + "\n")


def read_csv(path):
    """Parse a results CSV back into a dict of column arrays."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        cols = header.split(",")
        data = {c: [] for c in cols}
        for line in f:
            line = line.strip()
            if not line:
                continue
            vals = line.split(",")
            data["run"].append(int(vals[0]))
            data["filter"].append(vals[2])
            for c, v in zip(cols[3:], vals[3:]):
                data[c].append(float(v))
            data["t"].append(float(vals[1]))
    out = {}
    for c in cols:
        if c == "filter":
            out[c] = np.array(data[c], dtype=object)
        else:
            out[c] = np.array(data[c])
    return out


class _Panel:
    """One log-y panel of the figure; collects polylines then renders."""

    def __init__(self, title, x0, y0, width, height, ref_line=None):
        self.title = title
        self.x0, self.y0 = x0, y0
        self.w, self.h = width, height
        self.ref_line = ref_line
        self.curves = []  # (t, y, color) with y > 0 masked in

    def add(self, t, y, color):
        y = np.asarray(y, dtype=float)
        mask = np.isfinite(y) & (y > 0)
        if mask.any():
            self.curves.append((np.asarray(t)[mask], y[mask], color))

    def _limits(self):
        ys = np.concatenate([c[1] for c in self.curves]) if self.curves else np.array([1.0])
        lo, hi = float(ys.min()), float(ys.max())
        if self.ref_line is not None:
            lo, hi = min(lo, self.ref_line), max(hi, self.ref_line)
        lo, hi = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        if hi == lo:
            hi += 1
        ts = np.concatenate([c[0] for c in self.curves]) if self.curves else np.array([0.0, 1.0])
        return float(ts.min()), float(ts.max()), lo, hi

    def render(self, parts):
        t0, t1, lo, hi = self._limits()
        if t1 == t0:
            t1 = t0 + 1.0

        def sx(t):
            return self.x0 + (t - t0) / (t1 - t0) * self.w

        def sy(y):
            return self.y0 + self.h - (math.log10(y) - lo) / (hi - lo) * self.h

        parts.append(f'<rect x="{self.x0:.3f}" y="{self.y0:.3f}" width="{self.w:.3f}" '
                     f'height="{self.h:.3f}" fill="none" stroke="#888888" stroke-width="1"/>')
        parts.append(f'<text x="{self.x0:.3f}" y="{self.y0 - 6:.3f}" font-size="13" '
                     f'font-family="sans-serif">{escape(self.title)}</text>')
        for d in range(lo, hi + 1):
            y = sy(10.0 ** d)
            parts.append(f'<line x1="{self.x0:.3f}" y1="{y:.3f}" x2="{self.x0 + self.w:.3f}" '
                         f'y2="{y:.3f}" stroke="#dddddd" stroke-width="0.5"/>')
            parts.append(f'<text x="{self.x0 - 8:.3f}" y="{y + 4:.3f}" font-size="10" '
                         f'font-family="sans-serif" text-anchor="end">1e{d}</text>')
        for tt in np.linspace(t0, t1, 6):
            x = sx(tt)
            parts.append(f'<text x="{x:.3f}" y="{self.y0 + self.h + 14:.3f}" font-size="10" '
                         f'font-family="sans-serif" text-anchor="middle">{tt:.1f}</text>')
        if self.ref_line is not None:
            y = sy(self.ref_line)
            parts.append(f'<line x1="{self.x0:.3f}" y1="{y:.3f}" x2="{self.x0 + self.w:.3f}" '
                         f'y2="{y:.3f}" stroke="#555555" stroke-width="1" '
                         f'stroke-dasharray="6,3"/>')
        for t, y, color in self.curves:
            pts = " ".join(f"{sx(tt):.3f},{sy(yy):.3f}" for tt, yy in zip(t, y))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="1.2"/>')


def write_svg(path, t, curves, title=""):
    """Render the standard three-panel comparison figure.

    curves maps filter name -> dict with keys "pos_err", "vel_err", "energy",
    each an array over t.  Energy gets a dashed reference line at 1.
    """
    width, panel_h, gap, left, top = 640, 150, 46, 64, 40
    height = top + 3 * panel_h + 3 * gap + 20
    panels = [
        _Panel("position error [m]", left, top, width - left - 20, panel_h),
        _Panel("velocity error [m/s]", left, top + panel_h + gap,
               width - left - 20, panel_h),
        _Panel("normalized filter energy", left, top + 2 * (panel_h + gap),
               width - left - 20, panel_h, ref_line=1.0),
    ]
    for name, series in curves.items():
        color = FILTER_COLORS.get(name, "#777777")
        panels[0].add(t, series["pos_err"], color)
        panels[1].add(t, series["vel_err"], color)
        panels[2].add(t, series["energy"], color)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="#ffffff"/>']
    if title:
        parts.append(f'<text x="{left}" y="20" font-size="15" '
                     f'font-family="sans-serif">{escape(title)}</text>')
    x_leg = left
    for name in curves:
        color = FILTER_COLORS.get(name, "#777777")
        parts.append(f'<line x1="{x_leg}" y1="{height - 8}" x2="{x_leg + 22}" '
                     f'y2="{height - 8}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{x_leg + 27}" y="{height - 4}" font-size="11" '
                     f'font-family="sans-serif">{escape(name)}</text>')
        x_leg += 27 + 8 * len(name) + 24
    for panel in panels:
        panel.render(parts)
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(parts) + "\n")


def aggregate_curves(agg):
    """Arrange an Aggregate's mean curves for write_svg."""
    return {name: {"pos_err": agg.mean_pos_err[name],
                   "vel_err": agg.mean_vel_err[name],
                   "energy": agg.mean_energy[name]}
            for name in agg.filters}


def run_curves(record):
    """Arrange a single RunRecord's tracks for write_svg."""
    return {name: {"pos_err": track.pos_err,
                   "vel_err": track.vel_err,
                   "energy": track.energy}
            for name, track in record.tracks.items()}
