"""Command-line front end.

Usage::

    cutproject SUBCOMMAND [--config PATH] [--out DIR] [--format csv|json|svg ...] [--KEY VALUE ...]

Subcommands: generate, density, eigen, diffract, hutchinson.

The config file holds ``key = value`` lines (``#`` starts a comment); every
key can also be given as a flag (``window_lo`` becomes ``--window-lo``), and
flags win.  Window endpoints accept exact forms such as ``-1``, ``1/2`` or
``3/2 - 1/2*sqrt(5)``.  Exit codes: 0 success, 2 config error, 3 numeric
failure.

JSON schema of a model-set sample (``modelset.json``)::

    {"kind": "model_set_sample", "ring": {"p": int, "r": int},
     "window": {"lo": {"exact": str, "float": float}, "hi": {...}},
     "radius": float, "points": [[a, b], ...]}

Translation sets (``translations.json``) add ``"inflation": {"a", "b",
"value", "contraction"}`` and ``"omega_q"`` (same layout as ``window``).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import density as dn
from . import export as ex
from .diffraction import bragg_intensities, g_s, module_point, support_included
from .hutchinson import ConvergenceError, chaos_game, hutchinson_fixed_point, hutchinson_fourier, weak_convergence_report
from .inflation import Inflation, omega_q, translations
from .modelset import (
    Window,
    density,
    gap_types,
    generate,
    min_gap,
    relative_denseness,
    theoretical_density,
    uniform_distribution_discrepancy,
)
from .ring import EmbeddingLattice, QuadraticRing, fourier_module_points

log = logging.getLogger("cutproject")

COMMANDS = ("generate", "density", "eigen", "diffract", "hutchinson")
FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    pass


def _ints(text) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


def _floats(text) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


@dataclass
class JobConfig:
    p: int = 1
    r: int = 1
    window_lo: str = "-1"
    window_hi: str = "1"
    q_a: int = 0
    q_b: int = 1
    radius: float = 1000.0
    grid: int = dn.DEFAULT_GRID
    bins: int = 4096
    tol: float = 1e-10
    max_iter: int = 2000
    powers: str = "1,2,3,4"
    orders: int = 4
    degree: int = 4
    fhat_k_max: float = 5.0
    fhat_k_step: float = 0.25
    k_max: float = 3.0
    k_star_max: float = 3.0
    probes: int = 5
    s_ladder: str = "5,10,20,50"
    discrepancy_bins: int = 20
    sign: int = -1
    seed: int = 0
    chaos_samples: int = 100000
    out: str = "."
    formats: list = field(default_factory=lambda: list(FORMATS))

    # derived, filled by validate()
    ring: QuadraticRing | None = None
    window: Window | None = None
    inflation: Inflation | None = None
    omega: Window | None = None

    def validate(self, command: str) -> JobConfig:
        """Type-convert and check every field; raises ConfigError before any computation."""
        try:
            for f in dataclasses.fields(self):
                if f.name in ("formats", "ring", "window", "inflation", "omega"):
                    continue
                kind = {"int": int, "float": float, "str": str}[f.type]
                setattr(self, f.name, kind(getattr(self, f.name)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value: {exc}") from None
        try:
            self.ring = QuadraticRing(self.p, self.r)
            lo, hi = ex.parse_number(self.window_lo), ex.parse_number(self.window_hi)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not float(lo) < float(hi):
            raise ConfigError(f"window empty: lo={self.window_lo} is not below hi={self.window_hi}")
        self.window = Window(lo, hi)
        checks = [
            (self.radius > 0, "radius must be positive"),
            (self.grid >= 16, "grid must be at least 16"),
            (self.bins >= 2, "bins must be at least 2"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iter >= 1, "max_iter must be at least 1"),
            (self.orders >= 0, "orders must be non-negative"),
            (self.degree >= 0, "degree must be non-negative"),
            (self.fhat_k_max >= 0 and self.fhat_k_step > 0, "fhat_k_max must be >= 0 and fhat_k_step > 0"),
            (self.k_max > 0 and self.k_star_max > 0, "k_max and k_star_max must be positive"),
            (self.probes >= 0, "probes must be non-negative"),
            (self.discrepancy_bins >= 1, "discrepancy_bins must be at least 1"),
            (self.sign in (-1, 1), "sign must be -1 or 1"),
            (self.chaos_samples >= 1, "chaos_samples must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown format {bad[0]!r}")
        try:
            powers, ladder = _ints(self.powers), _floats(self.s_ladder)
        except ValueError as exc:
            raise ConfigError(f"bad list: {exc}") from None
        if not powers or min(powers) < 1:
            raise ConfigError("powers must be positive integers")
        if not ladder or min(ladder) <= 0:
            raise ConfigError("s_ladder must hold positive radii")
        if command == "generate":
            return self
        if not (self.window.contains(0) and self.window.lo_f < 0 < self.window.hi_f):
            raise ConfigError("window must contain 0 in its interior")
        try:
            self.inflation = Inflation(self.ring.element(self.q_a, self.q_b))
            for n in powers:
                omega_q(self.window, self.inflation.power(n).a_contraction)
            self.omega = omega_q(self.window, self.inflation.a_contraction)
        except (ValueError, OverflowError) as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def power_list(self) -> list[int]:
        return _ints(self.powers)

    @property
    def ladder(self) -> list[float]:
        return _floats(self.s_ladder)


KEYS = [f.name for f in dataclasses.fields(JobConfig) if f.name not in ("formats", "ring", "window", "inflation", "omega")]


def read_config(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "format":
            out.setdefault("formats", []).extend(v.strip() for v in value.split(","))
            continue
        if key not in KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(args: argparse.Namespace) -> JobConfig:
    values = read_config(args.config) if args.config else {}
    for key in KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.format:
        values["formats"] = args.format
    return JobConfig(**values).validate(args.command)


# --- output helpers -------------------------------------------------------------


class Writer:
    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self.written: list[str] = []
        os.makedirs(cfg.out, exist_ok=True)

    def wants(self, fmt: str) -> bool:
        return fmt in self.cfg.formats

    def put(self, name: str, text: str) -> None:
        fmt = name.rsplit(".", 1)[-1]
        if not self.wants(fmt):
            return
        path = os.path.join(self.cfg.out, name)
        ex.write_atomic(path, text)
        self.written.append(path)


def _table(pairs) -> str:
    return ex.csv_text(["quantity", "value"], ((k, v if isinstance(v, str) else ex.fmt(v)) for k, v in pairs))


def _report(pairs) -> None:
    for k, v in pairs:
        print(f"{k}: {v if isinstance(v, str) else ex.fmt(v)}")


# --- commands -------------------------------------------------------------------


def cmd_generate(cfg: JobConfig, out: Writer) -> None:
    sample = generate(cfg.ring, cfg.window, cfg.radius)
    stats = [
        ("points", str(len(sample))),
        ("density", density(sample)),
        ("theoretical_density", theoretical_density(cfg.ring, cfg.window)),
        ("min_gap", min_gap(sample) if len(sample) > 5 else float("nan")),
        ("max_gap", relative_denseness(sample) if len(sample) > 5 else float("nan")),
        ("gap_types", " ".join(str(g) for g in gap_types(sample)) if len(sample) > 5 else ""),
        ("discrepancy", uniform_distribution_discrepancy(sample, cfg.discrepancy_bins)),
    ]
    _report(stats)
    out.put("modelset.csv", ex.sample_to_csv(sample))
    out.put("modelset_stats.csv", _table(stats))
    out.put("modelset.json", ex.dumps(ex.sample_to_json(sample)))
    hist, edges = np.histogram(sample.star_values, bins=cfg.discrepancy_bins, range=(cfg.window.lo_f, cfg.window.hi_f))
    out.put("modelset.svg", ex.svg_histogram("star images of the model set", 0.5 * (edges[1:] + edges[:-1]), hist / max(len(sample), 1)))


def _density_for(cfg: JobConfig, n: int):
    inf = cfg.inflation.power(n)
    oq = omega_q(cfg.window, inf.a_contraction)
    return inf, oq, dn.invariant_density(cfg.window, oq, inf.a_contraction, cfg.grid)


def cmd_density(cfg: JobConfig, out: Writer) -> None:
    rows, panels = [], []
    ks = np.arange(0.0, cfg.fhat_k_max + 0.5 * cfg.fhat_k_step, cfg.fhat_k_step)
    for n in cfg.power_list:
        inf, oq, f = _density_for(cfg, n)
        flat = dn.flat_density(cfg.window, cfg.grid)
        cascade = dn.invariant_density_cascade(cfg.window, oq, inf.a_contraction, cfg.grid)
        diff = np.abs(f.values - flat.values)
        inner = np.abs(f.x - cfg.window.center) <= 0.5 * cfg.window.half_width
        row = [
            n, inf.q_factor.a, inf.q_factor.b, inf.a, oq.lo_f, oq.hi_f, f.integral(), float(f.values.min()),
            float(f.values[0]), float(f.values[-1]), float(diff.max()), float(diff[inner].max()),
            float(np.trapezoid(diff, f.x)), float(np.abs(f.values - cascade.values).max()),
        ]
        rows.append(row)
        print(f"power {n}: integral {ex.fmt(f.integral())}, sup distance to flat {ex.fmt(diff.max())}")
        tag = f"q{n}"
        out.put(f"density_{tag}.csv", ex.profile_to_csv(f))
        out.put(f"density_{tag}.json", ex.dumps(ex.profile_to_json(f)))
        out.put(f"fhat_{tag}.csv", ex.fhat_table_csv([dn.fhat(k, oq, inf.a_contraction) for k in ks]))
        panels.append((f"inflation factor {inf.q_factor} (power {n})", f.x, [f.values, flat.values]))
    header = [
        "power", "q_a", "q_b", "contraction", "omega_lo", "omega_hi", "integral", "min", "value_lo", "value_hi",
        "sup_distance_flat", "inner_sup_distance_flat", "l1_distance_flat", "cascade_sup_diff",
    ]
    out.put("density_summary.csv", ex.csv_text(header, rows))
    out.put("density.svg", ex.svg_panels("invariant densities (blue) against the flat density (red)", panels))


def cmd_eigen(cfg: JobConfig, out: Writer) -> None:
    inf, oq = cfg.inflation, cfg.omega
    alpha = inf.a_contraction
    entries = dn.spectrum([alpha], cfg.degree)
    out.put("spectrum.csv", ex.csv_text(
        ["eigenvalue", "exact", "multiplicity"],
        ((float(e.eigenvalue), str(e.eigenvalue), e.multiplicity) for e in entries),
    ))
    f = dn.invariant_density(cfg.window, oq, alpha, cfg.grid)
    ts = translations(cfg.ring, cfg.window, inf, cfg.radius)
    rows, cols = [], []
    for b in range(cfg.orders + 1):
        u = dn.eigenfunction(f, b)
        lam = float(alpha) ** b
        residual = dn.relative_residual(dn.average_direct(u, ts), u.with_values(lam * u.values))
        nodes = dn.sign_changes(u.values)
        rows.append([b, lam, nodes, residual])
        cols.append(u.values)
        print(f"order {b}: eigenvalue {ex.fmt(lam)}, sign changes {nodes}, residual {ex.fmt(residual)}")
    out.put("eigen_summary.csv", ex.csv_text(["order", "eigenvalue", "sign_changes", "residual"], rows))
    out.put("derivatives.csv", ex.csv_text(["x"] + [f"order_{b}" for b in range(len(cols))], zip(f.x, *cols)))
    panels = [(f"derivative of order {b}", f.x, [c]) for b, c in enumerate(cols) if b > 0]
    out.put("derivatives.svg", ex.svg_panels("derivatives of the invariant density", panels or [("order 0", f.x, [cols[0]])]))
    out.put("eigen.json", ex.dumps({
        "spectrum": [{"eigenvalue": str(e.eigenvalue), "multiplicity": e.multiplicity} for e in entries],
        "orders": [{"order": r[0], "eigenvalue": r[1], "sign_changes": r[2], "residual": r[3]} for r in rows],
        "radius": cfg.radius,
        "translations": len(ts),
    }))


def cmd_diffract(cfg: JobConfig, out: Writer) -> None:
    inf, oq = cfg.inflation, cfg.omega
    lattice = EmbeddingLattice(cfg.ring)
    points = fourier_module_points(lattice, cfg.k_max, cfg.k_star_max)
    flat = bragg_intensities(points, oq, inf, "flat", cfg.sign)
    inv = bragg_intensities(points, oq, inf, "invariant", cfg.sign)
    included = support_included(inv, flat)
    out.put("bragg_flat.csv", ex.bragg_csv(flat))
    out.put("bragg_invariant.csv", ex.bragg_csv(inv))
    ts = translations(cfg.ring, cfg.window, inf, cfg.radius)
    rng = np.random.default_rng(cfg.seed)
    probes = []
    while len(probes) < cfg.probes:
        k = float(rng.uniform(0.1, cfg.k_max))
        # stay clear of the module points that carry visible weight
        if min(abs(k - p.k.k_value) for p in flat) > 1e-3:
            probes.append(k)
    amps = [g_s(ts, k, cfg.sign) for k in probes]
    out.put("probes.csv", ex.csv_text(["k", "abs_g_s", "intensity"], ((a.k_value, abs(a.value), a.intensity) for a in amps)))
    zero = module_point(lattice, 0.0, 0.0)
    stats = [
        ("module_points", str(len(points))),
        ("translations", str(len(ts))),
        ("intensity_at_zero", next(p.intensity for p in flat if p.k == zero)),
        ("support_included", str(included)),
        ("max_probe_intensity", max((a.intensity for a in amps), default=0.0)),
    ]
    _report(stats)
    out.put("diffract_summary.csv", _table(stats))
    out.put("bragg_flat.svg", ex.svg_stems("Bragg intensities, flat weights", [p.k.k_value for p in flat], [p.intensity for p in flat]))
    out.put("bragg_invariant.svg", ex.svg_stems("Bragg intensities, invariant weights", [p.k.k_value for p in inv], [p.intensity for p in inv]))
    peaks = lambda ps: [
        {"a": p.k.numerator.a, "b": p.k.numerator.b, "k": p.k.k_value, "k_star": p.k.k_star,
         "re": p.amplitude.real, "im": p.amplitude.imag, "intensity": p.intensity} for p in ps
    ]
    out.put("diffract.json", ex.dumps({"flat": peaks(flat), "invariant": peaks(inv), "support_included": included}))


def cmd_hutchinson(cfg: JobConfig, out: Writer) -> None:
    inf = cfg.inflation
    ts = translations(cfg.ring, cfg.window, inf, cfg.radius)
    mu = hutchinson_fixed_point(ts, cfg.bins, cfg.tol, cfg.max_iter, window=cfg.window)
    log.info("fixed point: %d iterations, residual %.3e, mass %.17g", mu.iterations, mu.residual, mu.total)
    out.put("measure.csv", ex.measure_csv(mu))
    out.put("measure.svg", ex.svg_histogram(f"Hutchinson measure, {len(ts)} maps", mu.centers, mu.masses))
    f = dn.invariant_density(cfg.window, cfg.omega, inf.a_contraction, cfg.grid)
    tests = [("one", np.ones_like), ("x", lambda x: x), ("x2", lambda x: x**2)]
    ladder = [translations(cfg.ring, cfg.window, inf, s) for s in cfg.ladder]
    report = weak_convergence_report(ladder, [t[1] for t in tests], f, cfg.bins, cfg.tol)
    out.put("weak_convergence.csv", ex.csv_text(
        ["radius", "maps"] + [f"error_{t[0]}" for t in tests],
        ([row.radius, row.n_maps] + row.errors for row in report),
    ))
    samples = chaos_game(ts, cfg.chaos_samples, cfg.seed)
    probe = 1.0
    stats = [
        ("maps", str(len(ts))),
        ("iterations", str(mu.iterations)),
        ("residual", mu.residual),
        ("mass", mu.total),
        ("second_moment_binned", mu.integrate(lambda x: x**2)),
        ("second_moment_chaos_game", float(np.mean(samples**2))),
        ("characteristic_binned_at_1", abs(mu.characteristic(probe))),
        ("characteristic_product_at_1", abs(hutchinson_fourier(probe, ts))),
    ]
    _report(stats)
    out.put("hutchinson_summary.csv", _table(stats))
    out.put("hutchinson.json", ex.dumps({
        "maps": len(ts), "iterations": mu.iterations, "residual": mu.residual,
        "window": ex.window_to_json(cfg.window), "masses": [float(m) for m in mu.masses],
        "weak_convergence": [{"radius": r.radius, "maps": r.n_maps, "errors": r.errors} for r in report],
    }))


HANDLERS = {
    "generate": cmd_generate,
    "density": cmd_density,
    "eigen": cmd_eigen,
    "diffract": cmd_diffract,
    "hutchinson": cmd_hutchinson,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cutproject", description="Model sets, invariant densities and diffraction.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", metavar="PATH")
        cmd.add_argument("--format", action="append", choices=FORMATS)
        cmd.add_argument("-q", "--quiet", action="store_true")
        for key in KEYS:
            cmd.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Writer(cfg)
    try:
        HANDLERS[args.command](cfg, out)
    except (ConvergenceError, OverflowError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    for path in out.written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
