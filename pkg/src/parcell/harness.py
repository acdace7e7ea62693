"""Experiment harness: seeded replication-time sweeps, summary statistics,
CSV tables and a hand-emitted SVG chart.

Byte-identical outputs for identical (config, seed): seeds derive as
base_seed + trial_index + 1000*n so adding n values never perturbs existing
trials, trials run in a fixed order, and floats are formatted with a fixed
precision.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace

from parcell import engine
from parcell.cell import GenomeConfig, build_sequential_cell, init_mother
from parcell.world import RateConfig

CSV_HEADER = "n,trial,seed,replication_time,replication_ops,genome_mass,pile_mass,censored,race_events"
STATS_HEADER = "n,trials,censored,mean_time,sigma_time,mean_ops,mean_genome_mass,mean_pile_mass"


@dataclass
class SweepConfig:
    n_values: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    trials_per_n: int = 10
    base_seed: int = 20240801
    rates: RateConfig = field(default_factory=RateConfig)
    genome: GenomeConfig = field(default_factory=GenomeConfig)
    t_max: float = 50000.0

    def __post_init__(self):
        if self.trials_per_n < 1:
            raise ValueError("trials_per_n must be >= 1")


@dataclass
class TrialStats:
    n: int
    trials: int
    censored: int
    mean_time: float
    sigma_time: float
    mean_ops: float
    mean_genome_mass: float
    mean_pile_mass: float


def trial_seed(base_seed, n, trial):
    return base_seed + trial + 1000 * n


def run_trial(config: SweepConfig, n, trial, sequential=False):
    """One seeded world run to its first fission; returns a row dict."""
    seed = trial_seed(config.base_seed, n, trial)
    genome = replace(config.genome, n_b=max(1, n), n_e=max(1, n))
    rates = replace(config.rates)
    if sequential:
        world = build_sequential_cell(genome, seed, rates=rates)
    else:
        world = init_mother(genome, seed, rates=rates)
    engine.run_until(world, t_max=config.t_max,
                     stop=lambda w: len(w.records) > 0)
    if world.records:
        rec = world.records[0]
        return {
            "n": n, "trial": trial, "seed": seed,
            "replication_time": rec.replication_time,
            "replication_ops": rec.replication_ops,
            "genome_mass": rec.genome_mass,
            "pile_mass": rec.pile_mass,
            "censored": 0,
            "race_events": rec.race_events,
        }
    return {
        "n": n, "trial": trial, "seed": seed,
        "replication_time": config.t_max,
        "replication_ops": world.clock.total_ops,
        "genome_mass": 0, "pile_mass": 0,
        "censored": 1, "race_events": 0,
    }


def run_sweep(config: SweepConfig):
    rows = []
    for n in config.n_values:
        for trial in range(config.trials_per_n):
            rows.append(run_trial(config, n, trial))
    return rows


def run_baseline(config: SweepConfig, trials=None):
    """Sequential-cell trials; reported under n = 0."""
    rows = []
    for trial in range(trials or config.trials_per_n):
        rows.append(run_trial(config, 0, trial, sequential=True))
    return rows


def summarize(rows):
    """Per-n mean and sample standard deviation over uncensored trials."""
    if not rows:
        raise ValueError("no rows to summarize")
    stats = []
    for n in sorted({r["n"] for r in rows}):
        group = [r for r in rows if r["n"] == n]
        live = [r for r in group if not r["censored"]]
        censored = len(group) - len(live)
        if not live:
            stats.append(TrialStats(n, len(group), censored,
                                    float("nan"), float("nan"), float("nan"),
                                    float("nan"), float("nan")))
            continue
        times = [r["replication_time"] for r in live]
        sigma = statistics.stdev(times) if len(times) > 1 else 0.0
        stats.append(TrialStats(
            n=n, trials=len(group), censored=censored,
            mean_time=statistics.mean(times),
            sigma_time=sigma,
            mean_ops=statistics.mean([r["replication_ops"] for r in live]),
            mean_genome_mass=statistics.mean([r["genome_mass"] for r in live]),
            mean_pile_mass=statistics.mean([r["pile_mass"] for r in live]),
        ))
    return stats


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    return f"{v:.6f}"


def rows_csv(rows):
    lines = [CSV_HEADER]
    for r in sorted(rows, key=lambda r: (r["n"], r["trial"])):
        lines.append(",".join(_fmt(r[k]) for k in (
            "n", "trial", "seed", "replication_time", "replication_ops",
            "genome_mass", "pile_mass", "censored", "race_events")))
    return "\n".join(lines) + "\n"


def stats_csv(stats):
    lines = [STATS_HEADER]
    for s in stats:
        lines.append(",".join([
            str(s.n), str(s.trials), str(s.censored),
            _fmt(s.mean_time), _fmt(s.sigma_time), _fmt(s.mean_ops),
            _fmt(s.mean_genome_mass), _fmt(s.mean_pile_mass)]))
    return "\n".join(lines) + "\n"


def emit_outputs(stats, rows, outdir, baseline_stats=None):
    """Write rows.csv, stats.csv and figure.svg under `outdir`."""
    import pathlib

    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    try:
        paths["rows"] = out / "rows.csv"
        paths["rows"].write_text(rows_csv(rows), encoding="utf-8")
        paths["stats"] = out / "stats.csv"
        paths["stats"].write_text(stats_csv(stats), encoding="utf-8")
        paths["figure"] = out / "figure.svg"
        paths["figure"].write_text(figure_svg(stats, baseline_stats), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"writing experiment outputs under {out}: {exc}") from exc
    return paths


def figure_svg(stats, baseline_stats=None):
    """Dual-axis line chart: mean replication time (with +-sigma error bars,
    left axis) and mean cell mass (right axis) versus gene copy count.
    Fixed 800x600 viewport, no plotting dependency."""
    width, height = 800, 600
    ml, mr, mt, mb = 80, 80, 50, 60
    pw, ph = width - ml - mr, height - mt - mb
    pts = [s for s in stats if s.trials > s.censored]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>'

    ns = [s.n for s in pts]
    tmax = max(s.mean_time + s.sigma_time for s in pts)
    base_line = None
    if baseline_stats:
        base_line = baseline_stats[0].mean_time
        tmax = max(tmax, base_line)
    tmax *= 1.05
    mmax = max(s.mean_pile_mass for s in pts) * 1.15
    n_lo, n_hi = min(ns), max(ns)
    span = max(1, n_hi - n_lo)

    def sx(n):
        return ml + (n - n_lo) / span * pw

    def sy_t(t):
        return mt + ph - (t / tmax) * ph

    def sy_m(m):
        return mt + ph - (m / mmax) * ph

    e = []
    e.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">')
    e.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    e.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
    e.append(f'<text x="{width // 2}" y="25" text-anchor="middle" font-size="16">'
             f'replication time and cell mass vs gene copies</text>')
    e.append(f'<text x="{ml - 55}" y="{mt + ph // 2}" font-size="12" '
             f'transform="rotate(-90 {ml - 55} {mt + ph // 2})" text-anchor="middle">'
             f'mean replication time (sim units)</text>')
    e.append(f'<text x="{width - mr + 55}" y="{mt + ph // 2}" font-size="12" '
             f'transform="rotate(90 {width - mr + 55} {mt + ph // 2})" text-anchor="middle">'
             f'mean cell mass (atoms)</text>')
    e.append(f'<text x="{ml + pw // 2}" y="{height - 15}" text-anchor="middle" '
             f'font-size="12">gene copies (n)</text>')

    for n in ns:
        x = sx(n)
        e.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" stroke="#333"/>')
        e.append(f'<text x="{x:.2f}" y="{mt + ph + 20}" text-anchor="middle" font-size="11">{n}</text>')
    for k in range(5):
        t = tmax * k / 4
        y = sy_t(t)
        e.append(f'<text x="{ml - 8}" y="{y:.2f}" text-anchor="end" font-size="10">{t:.0f}</text>')
        m = mmax * k / 4
        e.append(f'<text x="{ml + pw + 8}" y="{sy_m(m):.2f}" text-anchor="start" '
                 f'font-size="10">{m:.0f}</text>')

    for s in pts:  # one error bar per n
        x = sx(s.n)
        y1 = sy_t(s.mean_time - s.sigma_time)
        y0 = sy_t(s.mean_time + s.sigma_time)
        e.append(f'<line class="errbar" x1="{x:.2f}" y1="{y0:.2f}" x2="{x:.2f}" y2="{y1:.2f}" '
                 f'stroke="#1f77b4" stroke-width="1.5"/>')
        e.append(f'<line x1="{x - 4:.2f}" y1="{y0:.2f}" x2="{x + 4:.2f}" y2="{y0:.2f}" stroke="#1f77b4"/>')
        e.append(f'<line x1="{x - 4:.2f}" y1="{y1:.2f}" x2="{x + 4:.2f}" y2="{y1:.2f}" stroke="#1f77b4"/>')

    tline = " ".join(f"{sx(s.n):.2f},{sy_t(s.mean_time):.2f}" for s in pts)
    e.append(f'<polyline points="{tline}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    for s in pts:
        e.append(f'<circle cx="{sx(s.n):.2f}" cy="{sy_t(s.mean_time):.2f}" r="3" fill="#1f77b4"/>')

    mline = " ".join(f"{sx(s.n):.2f},{sy_m(s.mean_pile_mass):.2f}" for s in pts)
    e.append(f'<polyline points="{mline}" fill="none" stroke="#d62728" stroke-width="2" '
             f'stroke-dasharray="6,3"/>')
    for s in pts:
        e.append(f'<circle cx="{sx(s.n):.2f}" cy="{sy_m(s.mean_pile_mass):.2f}" r="3" fill="#d62728"/>')

    if base_line is not None:
        y = sy_t(base_line)
        e.append(f'<line class="baseline" x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" '
                 f'stroke="#555" stroke-dasharray="2,4"/>')
        e.append(f'<text x="{ml + 6}" y="{y - 5:.2f}" font-size="10" fill="#555">'
                 f'single-method cell mean</text>')

    e.append(f'<text x="{ml + 10}" y="{mt + 16}" font-size="11" fill="#1f77b4">time</text>')
    e.append(f'<text x="{ml + 10}" y="{mt + 32}" font-size="11" fill="#d62728">mass</text>')
    e.append('</svg>')
    return "\n".join(e) + "\n"
