"""CSV / JSON / SVG serialisation.

CSV files use '.' decimals and 17 significant digits so floats round-trip.
Exact numbers (window endpoints, inflation factors) are written as strings
like ``"3/2 - 1/2*sqrt(5)"`` next to their float value.
"""
from __future__ import annotations

import io
import json
import os
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__
from .inflation import Inflation, TranslationSet
from .modelset import ModelSetSample, Window
from .ring import QuadraticNumber, QuadraticRing


def fmt(x) -> str:
    return "%.17g" % float(x)


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def csv_text(header: list[str], rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(c if isinstance(c, str) else fmt(c) if not isinstance(c, (int, np.integer)) else str(int(c)) for c in row) + "\n")
    return out.getvalue()


def exact_str(x) -> str:
    if isinstance(x, QuadraticNumber):
        return str(x)
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return repr(float(x))


def parse_number(text: str):
    """Exact number when the text is rational or ``u +- v*sqrt(d)``, float otherwise."""
    try:
        q = QuadraticNumber.parse(text)
    except ValueError:
        return float(text)
    return q.u if q.v == 0 else q


def _endpoint(x) -> dict:
    return {"exact": exact_str(x), "float": float(x)}


def window_to_json(w: Window) -> dict:
    return {"lo": _endpoint(w.lo), "hi": _endpoint(w.hi)}


def window_from_json(obj: dict) -> Window:
    return Window(parse_number(obj["lo"]["exact"]), parse_number(obj["hi"]["exact"]))


# --- model set samples -------------------------------------------------------------


def sample_to_csv(sample: ModelSetSample) -> str:
    rows = zip(sample.a.tolist(), sample.b.tolist(), sample.values, sample.star_values)
    return csv_text(["a", "b", "value", "star_value"], rows)


def sample_to_json(sample: ModelSetSample) -> dict:
    return {
        "kind": "model_set_sample",
        "ring": {"p": sample.ring.p, "r": sample.ring.r},
        "window": window_to_json(sample.window),
        "radius": sample.radius,
        "points": [[a, b] for a, b in zip(sample.a.tolist(), sample.b.tolist())],
    }


def sample_from_json(obj: dict) -> ModelSetSample:
    ring = QuadraticRing(obj["ring"]["p"], obj["ring"]["r"])
    pts = np.array(obj["points"], dtype=np.int64).reshape(-1, 2)
    return ModelSetSample(ring, window_from_json(obj["window"]), float(obj["radius"]), pts[:, 0].copy(), pts[:, 1].copy())


def translations_to_json(ts: TranslationSet) -> dict:
    obj = sample_to_json(ts.sample)
    obj["kind"] = "translation_set"
    qf = ts.inflation.q_factor
    obj["inflation"] = {"a": qf.a, "b": qf.b, "value": qf.value, "contraction": _endpoint(ts.inflation.a_contraction)}
    obj["omega_q"] = window_to_json(ts.omega_q)
    return obj


def translations_from_json(obj: dict) -> TranslationSet:
    sample = sample_from_json(obj)
    inflation = Inflation(sample.ring.element(obj["inflation"]["a"], obj["inflation"]["b"]))
    return TranslationSet(inflation, window_from_json(obj["omega_q"]), sample)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


# --- profiles, tables ---------------------------------------------------------------


def profile_to_csv(profile) -> str:
    return csv_text(["x", "value"], zip(profile.x, profile.values))


def profile_to_json(profile) -> dict:
    return {
        "kind": "density_profile",
        "window": window_to_json(profile.window),
        "grid_size": profile.grid_size,
        "values": [float(v) for v in profile.values],
    }


def profile_from_json(obj: dict):
    from .density import DensityProfile

    return DensityProfile(window_from_json(obj["window"]), np.array(obj["values"], dtype=float))


def fhat_table_csv(values) -> str:
    return csv_text(
        ["k", "re", "im", "terms", "bound"],
        ((v.k, v.value.real, v.value.imag, v.terms_used, v.truncation_bound) for v in values),
    )


def bragg_csv(peaks) -> str:
    return csv_text(
        ["k", "k_star", "re", "im", "intensity"],
        ((p.k.k_value, p.k.k_star, p.amplitude.real, p.amplitude.imag, p.intensity) for p in peaks),
    )


def measure_csv(measure) -> str:
    return csv_text(["bin_center", "mass"], zip(measure.centers, measure.masses))


# --- SVG --------------------------------------------------------------------------


_W, _H, _PAD = 480, 300, 36


def _frame(title: str, body: str, width: int = _W, height: int = _H) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f"<!-- cutproject {__version__} -->\n"
        f'<rect x="0" y="0" width="{width}" height="{height}" style="fill:white"/>\n'
        f'<text x="{width / 2:.1f}" y="16" style="font:12px sans-serif;text-anchor:middle">{title}</text>\n'
        f"{body}</svg>\n"
    )


def _scaler(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (np.asarray(v) - lo) / span * (b - a)


def _panel(x, ys, ox, oy, w, h, label="") -> str:
    x = np.asarray(x)
    ys = [np.asarray(y) for y in ys]
    ylo = min(min(float(y.min()) for y in ys), 0.0)
    yhi = max(float(y.max()) for y in ys)
    sx = _scaler(float(x.min()), float(x.max()), ox + _PAD, ox + w - 8)
    sy = _scaler(ylo, yhi, oy + h - 20, oy + 24)
    parts = [
        f'<line x1="{sx(x.min()):.1f}" y1="{sy(0):.1f}" x2="{sx(x.max()):.1f}" y2="{sy(0):.1f}" style="stroke:#999;stroke-width:0.5"/>',
        f'<text x="{ox + w / 2:.1f}" y="{oy + h - 4:.1f}" style="font:10px sans-serif;text-anchor:middle">{label}</text>',
    ]
    colours = ["#1f4e9c", "#b3312c", "#2c8a3b", "#8a5a2c", "#6b2c8a"]
    step = max(1, len(x) // 600)
    for i, y in enumerate(ys):
        pts = " ".join(f"{px:.1f},{py:.1f}" for px, py in zip(sx(x[::step]), sy(y[::step])))
        parts.append(f'<polyline points="{pts}" style="fill:none;stroke:{colours[i % 5]};stroke-width:1.2"/>')
    return "\n".join(parts) + "\n"


def svg_panels(title: str, panels: list[tuple[str, np.ndarray, list[np.ndarray]]], columns: int = 2) -> str:
    """Grid of line plots; each panel is ``(label, x, [y, ...])``."""
    rows = (len(panels) + columns - 1) // columns
    pw, ph = 300, 200
    body = "".join(
        _panel(x, ys, (i % columns) * pw, 20 + (i // columns) * ph, pw, ph, label)
        for i, (label, x, ys) in enumerate(panels)
    )
    return _frame(title, body, columns * pw, 20 + rows * ph)


def svg_stems(title: str, ks, heights) -> str:
    ks, heights = np.asarray(ks, dtype=float), np.asarray(heights, dtype=float)
    sx = _scaler(float(ks.min()), float(ks.max()), _PAD, _W - 8)
    sy = _scaler(0.0, float(max(heights.max(), 1e-300)), _H - 20, 28)
    lines = "".join(
        f'<line x1="{sx(k):.2f}" y1="{sy(0):.2f}" x2="{sx(k):.2f}" y2="{sy(v):.2f}" style="stroke:#1f4e9c;stroke-width:1"/>\n'
        for k, v in zip(ks, heights)
    )
    return _frame(title, lines)


def svg_histogram(title: str, centers, masses) -> str:
    centers, masses = np.asarray(centers), np.asarray(masses)
    width = float(centers[1] - centers[0]) if len(centers) > 1 else 1.0
    density = masses / width
    return _frame(title, _panel(centers, [density], 0, 20, _W, _H - 20, "density of the binned measure"))
