"""Command-line experiments.

Every run resolves its parameters (defaults, then a ``key=value`` config file,
then explicit flags), writes ``manifest.json`` and tables into
``<output root>/<command>-<manifest hash>``, and stamps each CSV with the
manifest hash.  ``--from-manifest`` replays a run exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np
from click.core import ParameterSource

from . import __version__
from ._backend import COMPILED

OUTPUT_ENV = "ISOFK_OUTPUT_ROOT"
_PI_RE = re.compile(r"^\s*([0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


# -- parameter parsing ---------------------------------------------------------------
def parse_number(text) -> float:
    """Float, or a multiple of pi such as ``pi/3``, ``2pi/3``, ``2*pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PI_RE.match(str(text))
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


class NumberList(click.ParamType):
    name = "list"

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return [parse_number(v) for v in value]
        try:
            return [parse_number(v) for v in str(value).split(",") if v.strip()]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)


class Number(click.ParamType):
    name = "number"

    def convert(self, value, param, ctx):
        try:
            return parse_number(value)
        except ValueError:
            self.fail(f"{value!r} is not a number", param, ctx)


NUMBERS, NUMBER = NumberList(), Number()


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{k}: expected key=value")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def resolve(ctx: click.Context, params: dict) -> dict:
    """Merge defaults, config file and explicit flags (in increasing priority)."""
    resolved = dict(params)
    manifest = params.get("from_manifest")
    file_values: dict = {}
    if manifest:
        with open(manifest) as fh:
            file_values = dict(json.load(fh)["config"])
    elif params.get("config"):
        file_values = read_config(params["config"])
    by_name = {p.name: p for p in ctx.command.params}
    for key, raw in file_values.items():
        if key not in by_name:
            raise click.UsageError(f"unknown configuration key {key!r}")
        if ctx.get_parameter_source(key) in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT):
            continue
        p = by_name[key]
        if raw is None:
            resolved[key] = None
        elif isinstance(raw, list):
            resolved[key] = p.type.convert(raw, p, ctx)
        else:
            resolved[key] = p.type_cast_value(ctx, raw)
    for k in ("config", "from_manifest", "out", "jobs"):
        resolved.pop(k, None)
    return resolved


def check_ranges(cfg: dict) -> None:
    for q in _as_list(cfg.get("q")):
        if q < 1:
            raise click.BadParameter(f"q must be at least 1, got {q}")
    for key in ("alpha", "beta"):
        a = cfg.get(key)
        if a is not None and not 0 < a < math.pi:
            raise click.BadParameter(f"{key} must lie in (0, pi), got {a}")


def _as_list(v):
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


# -- persistence ---------------------------------------------------------------------
def manifest_for(command: str, cfg: dict) -> dict:
    return {"command": command, "version": __version__, "config": cfg}


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class RunDir:
    """Output directory of one run."""

    def __init__(self, out_root: str | None, command: str, cfg: dict):
        self.manifest = manifest_for(command, cfg)
        self.hash = manifest_hash(self.manifest)
        root = out_root or os.environ.get(OUTPUT_ENV) or "runs"
        self.path = os.path.join(root, f"{command}-{self.hash[:12]}")
        os.makedirs(self.path, exist_ok=True)
        with open(os.path.join(self.path, "manifest.json"), "w") as fh:
            json.dump(self.manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")

    def write_csv(self, name: str, columns, rows) -> str:
        buf = io.StringIO()
        buf.write(f"# manifest-sha256={self.hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            vals = [row[c] for c in columns] if isinstance(row, dict) else row
            w.writerow([_fmt(v) for v in vals])
        return self.write_text(name, buf.getvalue())

    def write_text(self, name: str, text: str) -> str:
        path = os.path.join(self.path, name)
        with open(path, "w") as fh:
            fh.write(text)
        return path

    def write_json(self, name: str, obj) -> str:
        return self.write_text(name, json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def farm(func, tasks: list, jobs: int | None):
    """Run independent tasks, results in task order whatever the degree of parallelism."""
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        return list(ex.map(func, tasks))


# -- shared options --------------------------------------------------------------------
def common(f):
    opts = [
        click.option("--config", type=click.Path(exists=True, dir_okay=False),
                     help="key=value file; explicit flags win"),
        click.option("--from-manifest", type=click.Path(exists=True, dir_okay=False),
                     help="replay the configuration stored in a manifest.json"),
        click.option("--out", type=click.Path(file_okay=False),
                     help=f"output root (default ${OUTPUT_ENV} or ./runs)"),
        click.option("--jobs", type=int, default=None,
                     help="worker processes for independent replicas (default: all cores)"),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def lattice_options(f):
    for o in reversed([
        click.option("--alpha", type=NUMBER, default=math.pi / 2, show_default="pi/2",
                     help="transverse angle of the odd tracks"),
        click.option("--beta", type=NUMBER, default=None,
                     help="transverse angle of the even tracks (default: alpha)"),
    ]):
        f = o(f)
    return f


def profile_options(f):
    for o in reversed([
        click.option("--q", type=NUMBERS, default="9", show_default=True, help="cluster weights"),
        click.option("--theta", type=NUMBERS, default="0", show_default=True, help="directions"),
        click.option("--n-grid", type=NUMBERS, default="2,4,6,8,10,12", show_default=True),
        click.option("--width", type=int, default=48, show_default=True),
        click.option("--height", type=int, default=48, show_default=True),
        click.option("--replicas", type=int, default=2, show_default=True),
        click.option("--measurements", type=int, default=100, show_default=True),
        click.option("--spacing", type=int, default=2, show_default=True),
        click.option("--burn-in", type=int, default=None, help="sweeps (default: adaptive)"),
        click.option("--bc", type=click.Choice(["free", "wired"]), default="free", show_default=True),
    ]):
        f = o(f)
    return f


def _angles(cfg: dict):
    from .lattice import AngleSequence

    a, b = cfg["alpha"], cfg.get("beta")
    if b is None or b == a:
        return AngleSequence.constant(a)
    return AngleSequence.alternating(a, b)


# -- decay tasks -------------------------------------------------------------------------
def _decay_task(task):
    from .observables import ProfileRun, estimate_decay

    kind, theta, q, cfg, stream = task
    run = ProfileRun(cfg["width"], cfg["height"], cfg["burn_in"], cfg["measurements"],
                     cfg["spacing"], bc=cfg["bc"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = estimate_decay(kind, theta, q, _angles(cfg), cfg["n_grid"], cfg["replicas"],
                             seed=cfg["seed"] * 1_000_003 + stream, run=run)
    rows = est.csv_rows()
    for r in rows:
        r["q"] = q
    return est.rate, est.rate_se, rows, est.flags


def _warn_bc(cfg):
    if cfg.get("bc") == "wired":
        click.echo("warning: wired boundary conditions bias decay estimates towards slower decay",
                   err=True)


def _decay_run(kind: str, cfg: dict, jobs):
    tasks = [(kind, th, q, cfg, k) for k, (q, th) in
             enumerate((q, th) for q in cfg["q"] for th in cfg["theta"])]
    return tasks, farm(_decay_task, tasks, jobs)


DECAY_CSV = ["q", "kind", "theta", "n", "p_hat", "p_se", "samples", "slope", "slope_se", "rate",
             "rate_se"]


@click.group()
@click.version_option(__version__)
def main():
    """Random-cluster experiments on isoradial rectangular lattices."""


@main.command()
@click.option("--quick", is_flag=True, help="smaller exhaustive sets")
@click.option("--kernel-cache", type=click.Path(), default=None,
              help="kernel cache directory to re-verify")
def validate(quick, kernel_cache):
    """Run the exact-oracle suite; nonzero exit status on any failure."""
    from .validation import run_all

    checks = run_all(quick=quick, kernel_cache=kernel_cache)
    for c in checks:
        click.echo(c.line())
    click.echo(f"backend: {'compiled' if COMPILED else 'pure python'}")
    if not all(c.passed for c in checks):
        sys.exit(1)


def _decay_command(kind_name: str, doc: str):
    @common
    @lattice_options
    @profile_options
    @click.pass_context
    def cmd(ctx, **params):
        cfg = resolve(ctx, params)
        check_ranges(cfg)
        kind = kind_name
        if kind_name == "zeta" and cfg.get("half_plane"):
            kind = "zeta_hp"
            for th in cfg["theta"]:
                if abs(math.remainder(th - 1.5 * math.pi, 2 * math.pi)) < 1e-12:
                    raise click.BadParameter("the half-plane rate is undefined at theta = 3pi/2")
        _warn_bc(cfg)
        run = RunDir(params["out"], kind_name, cfg)
        tasks, res = _decay_run(kind, cfg, params["jobs"])
        rows = [r for _, _, rs, _ in res for r in rs]
        run.write_csv("decay.csv", DECAY_CSV, rows)
        summary = [{"q": t[2], "theta": t[1], "rate": r[0], "rate_se": r[1],
                    "flags": r[3]} for t, r in zip(tasks, res)]
        run.write_json("summary.json", summary)
        for s in summary:
            click.echo(f"q={s['q']:g} theta={s['theta']:.6f} rate={s['rate']:.4f} +- {s['rate_se']:.4f}")
        click.echo(run.path)

    cmd.__doc__ = doc
    return cmd


xi = main.command(name="xi")(_decay_command("xi", "Point-to-point correlation lengths xi(theta)."))
_zeta = _decay_command("zeta", "Point-to-hyperplane rates zeta(theta), optionally in the half-plane.")
zeta = main.command(name="zeta")(click.option("--half-plane", is_flag=True,
                                              help="strip with free bottom boundary")(_zeta))


@main.command()
@common
@click.option("--input", "input_csv", type=click.Path(exists=True, dir_okay=False), required=True,
              help="decay.csv from the xi command")
@click.option("--symmetry", type=click.Choice(["square", "point", "none"]), default="square",
              show_default=True, help="extend directions measured on a sector")
@click.pass_context
def wulff(ctx, **params):
    """Wulff polygons from measured correlation lengths, one per q."""
    from .observables import symmetric_grid, wulff_shape

    cfg = resolve(ctx, params)
    with open(cfg["input_csv"]) as fh:
        text = fh.read()
    cfg["input_sha256"] = hashlib.sha256(text.encode()).hexdigest()
    run = RunDir(params["out"], "wulff", cfg)
    rates: dict[float, dict[float, float]] = {}
    for row in csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")):
        rates.setdefault(float(row["q"]), {})[float(row["theta"])] = float(row["slope"])
    out = []
    for q, vals in sorted(rates.items()):
        if cfg["symmetry"] == "none":
            th = np.array(sorted(vals))
            r = np.array([vals[t] for t in th])
        else:
            th, r = symmetric_grid(vals, cfg["symmetry"])
        poly = wulff_shape(th, r)
        run.write_text(f"wulff_q{q:g}.csv", f"# manifest-sha256={run.hash}\n" + poly.csv())
        run.write_text(f"wulff_q{q:g}.svg", poly.svg())
        out.append({"q": q, "roundness": poly.roundness(), "area": poly.area})
        click.echo(f"q={q:g} roundness={poly.roundness():.4f}")
    run.write_csv("roundness.csv", ["q", "roundness", "area"], out)
    click.echo(run.path)


@main.command()
@common
@lattice_options
@profile_options
@click.option("--zeta/--no-zeta", default=True, show_default=True,
              help="also estimate point-to-hyperplane rates")
@click.pass_context
def isotropy(ctx, **params):
    """Anisotropy of xi and zeta across q, with Wulff polygons and roundness."""
    from .observables import convex_dual, symmetric_grid, wulff_shape

    cfg = resolve(ctx, params)
    check_ranges(cfg)
    if any(q <= 4 for q in cfg["q"]):
        raise click.BadParameter("isotropy scans need q > 4")
    _warn_bc(cfg)
    run = RunDir(params["out"], "isotropy", cfg)
    kinds = ["xi"] + (["zeta"] if cfg["zeta"] else [])
    rows, table = [], []
    symmetric = cfg.get("beta") in (None, cfg["alpha"]) and abs(cfg["alpha"] - math.pi / 2) < 1e-12
    for kind in kinds:
        tasks, res = _decay_run(kind, cfg, params["jobs"])
        for t, r in zip(tasks, res):
            rows += r[2]
            table.append({"q": t[2], "kind": kind, "theta": t[1], "rate": r[0], "rate_se": r[1]})
    run.write_csv("decay.csv", DECAY_CSV, rows)
    summary = []
    for q in cfg["q"]:
        xi_rows = [r for r in table if r["q"] == q and r["kind"] == "xi"]
        rates = np.array([r["rate"] for r in xi_rows])
        ses = np.array([r["rate_se"] for r in xi_rows])
        k_max, k_min = int(np.argmax(rates)), int(np.argmin(rates))
        ratio = rates[k_max] / rates[k_min]
        ratio_se = ratio * math.hypot(ses[k_max] / rates[k_max], ses[k_min] / rates[k_min])
        vals = {r["theta"]: 1.0 / r["rate"] for r in xi_rows}
        if symmetric:
            th, inv = symmetric_grid(vals, "square")
        else:
            th, inv = symmetric_grid(vals, "point")
        entry = {"q": q, "xi_ratio": ratio, "xi_ratio_se": ratio_se}
        if len(th) >= 3:
            poly = wulff_shape(th, inv)
            run.write_text(f"wulff_q{q:g}.svg", poly.svg())
            run.write_text(f"wulff_q{q:g}.csv", f"# manifest-sha256={run.hash}\n" + poly.csv())
            entry["roundness"] = poly.roundness()
        zeta_rows = [r for r in table if r["q"] == q and r["kind"] == "zeta"]
        if zeta_rows:
            # dual route: xi^-1 as the convex dual of the hyperplane rates
            vals = {r["theta"]: 1.0 / r["rate"] for r in zeta_rows}
            th, zi = symmetric_grid(vals, "square" if symmetric else "point")
            if len(th) >= 3:
                entry["roundness_dual"] = wulff_shape(th, convex_dual(th, zi)).roundness()
        summary.append(entry)
        click.echo(" ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                            for k, v in entry.items()))
    run.write_csv("isotropy.csv", ["q", "xi_ratio", "xi_ratio_se", "roundness", "roundness_dual"],
                  [{"roundness": "", "roundness_dual": "", **s} for s in summary])
    run.write_csv("rates.csv", ["q", "kind", "theta", "rate", "rate_se"], table)
    click.echo(run.path)


# -- coupling --------------------------------------------------------------------------------
def _coupling_task(task):
    from .coupling import run_block_coupling

    cfg, rep = task
    tr, _ = run_block_coupling(cfg["alpha"], cfg["beta"], int(cfg["n_block"]), cfg["q"],
                               int(cfg["width"]), cfg["theta"], steps=cfg["steps"],
                               seed=cfg["seed"], replica=rep, n_tracks=cfg["tracks"],
                               eps=cfg["eps"], R=cfg["near"], burn_in=cfg["burn_in"])
    return tr


@main.command()
@common
@click.option("--alpha", type=NUMBER, default=math.pi / 2, show_default="pi/2")
@click.option("--beta", type=NUMBER, default=math.pi / 3, show_default="pi/3")
@click.option("--n-block", type=int, default=8, show_default=True, help="block size N (even)")
@click.option("--tracks", type=int, default=None, help="strip height (default 2N)")
@click.option("--q", type=NUMBER, default=4.5, show_default=True)
@click.option("--width", type=int, default=32, show_default=True)
@click.option("--theta", type=NUMBER, default=0.0, show_default=True)
@click.option("--steps", type=int, default=None, help="number of steps S_t (default 2N)")
@click.option("--replicas", type=int, default=8, show_default=True)
@click.option("--eps", type=NUMBER, default=1.0, show_default=True, help="bin width of E")
@click.option("--near", type=NUMBER, default=8.0, show_default=True,
              help="near-interface radius R for case tags")
@click.option("--delta", type=NUMBER, default=0.1, show_default=True,
              help="excluded time fraction around t = N")
@click.option("--burn-in", type=int, default=None)
@click.pass_context
def coupling(ctx, **params):
    """Block exchange coupling: increments of the extremal coordinate and conditional drift."""
    from .coupling import drift_cells, trace_csv

    cfg = resolve(ctx, params)
    check_ranges(cfg)
    if cfg["q"] < 4:
        raise click.BadParameter("the coupling experiment needs q >= 4")
    run = RunDir(params["out"], "coupling", cfg)
    traces = farm(_coupling_task, [(cfg, r) for r in range(cfg["replicas"])], params["jobs"])
    run.write_text("trace.csv", trace_csv(traces, run.hash))
    cells = drift_cells(traces, cfg["eps"], cfg["n_block"], cfg["delta"], cfg["seed"])
    run.write_csv("drift.csv", ["t", "bin", "mean", "se", "count"],
                  [(t, b, d.mean, d.se, d.count) for (t, b), d in cells.items()])
    deltas = [d for tr in traces for d in tr.delta]
    diag = {"max_abs_delta": max(map(abs, deltas)) if deltas else 0.0,
            "increments": len(deltas),
            "lateral_touches": sum(tr.touched_lateral for tr in traces),
            "inexact_moves": sum(tr.inexact_moves for tr in traces)}
    run.write_json("diagnostics.json", diag)
    for k, v in diag.items():
        click.echo(f"{k}={v}")
    click.echo(run.path)


# -- IIC drift --------------------------------------------------------------------------------
def _iic_task(task):
    from .critical import iic_increments, iic_sample
    from .sampler import make_rng

    cfg, rep = task
    samples = iic_sample(cfg["theta"], cfg["n"], cfg["window_radius"], 4.0, cfg["alpha"],
                         cfg["beta"], seed=cfg["seed"], attempts=cfg["attempts"],
                         burn_in=cfg["burn_in"], stream=rep)
    rng = make_rng(cfg["seed"], 2_000_003 + rep)
    groups: dict[int, list] = {}
    for s in samples:
        groups.setdefault(id(s.config), []).append(s)
    out = []
    for g in groups.values():
        for s, d in zip(g, iic_increments(g, rng)):
            out.append((rep, s.z[0], s.z[1], s.E, d))
    return out, samples[0].acceptance_rate


@main.command(name="iic-drift")
@common
@click.option("--alpha", type=NUMBER, default=math.pi / 3, show_default="pi/3")
@click.option("--beta", type=NUMBER, default=math.pi / 2, show_default="pi/2")
@click.option("--theta", type=NUMBER, default=0.3, show_default=True)
@click.option("--n", type=NUMBER, default=32.0, show_default=True, help="conditioning distance")
@click.option("--window-radius", type=NUMBER, default=4.0, show_default=True)
@click.option("--attempts", type=int, default=200, show_default=True,
              help="configurations drawn per replica")
@click.option("--replicas", type=int, default=4, show_default=True)
@click.option("--burn-in", type=int, default=None)
@click.pass_context
def iic_drift(ctx, **params):
    """Increments of the extremum of the conditioned critical cluster at q = 4."""
    cfg = resolve(ctx, params)
    check_ranges(cfg)
    run = RunDir(params["out"], "iic-drift", cfg)
    res = farm(_iic_task, [(cfg, r) for r in range(cfg["replicas"])], params["jobs"])
    rows = [r for rs, _ in res for r in rs]
    run.write_csv("increments.csv", ["replica", "anchor_row", "anchor_col", "E", "delta"],
                  [(a, b, c, e, "" if d is None else d) for a, b, c, e, d in rows])
    d = np.array([r[4] for r in rows if r[4] is not None], float)
    mean = float(d.mean()) if len(d) else math.nan
    se = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else math.inf
    summary = {"increments": int(len(d)), "mean": mean, "se": se,
               "max_abs": float(np.abs(d).max()) if len(d) else 0.0,
               "acceptance_rates": [r for _, r in res]}
    run.write_json("summary.json", summary)
    run.write_csv("acceptance.csv", ["replica", "acceptance_rate"],
                  [(k, r) for k, (_, r) in enumerate(res)])
    click.echo(f"increments={len(d)} mean={mean:.4f} se={se:.4f}")
    click.echo(run.path)


# -- critical diagnostics ------------------------------------------------------------------------
def _crossing_task(task):
    from .critical import crossing_probability

    cfg, n, bc, stream = task
    est = crossing_probability(_angles(cfg), cfg["rho"], n, bc, cfg["replicas"],
                               seed=cfg["seed"] * 1000 + stream, q=4.0,
                               burn_in=cfg["burn_in"], measurements=cfg["measurements"])
    return est


def _arm_task(task):
    from .critical import arm_window_frequencies

    cfg, stream = task
    return arm_window_frequencies(_angles(cfg), cfg["r"], cfg["big_r"], cfg["theta"],
                                  measurements=cfg["measurements"], seed=cfg["seed"],
                                  stream=stream, burn_in=cfg["burn_in"])


@main.command()
@common
@click.option("--alpha", type=NUMBER, default=math.pi / 3, show_default="pi/3")
@click.option("--beta", type=NUMBER, default=math.pi / 2, show_default="pi/2")
@click.option("--rho", type=NUMBER, default=1.0, show_default=True, help="aspect ratio")
@click.option("--n", "n_list", type=NUMBERS, default="8,16,32", show_default=True)
@click.option("--bc", type=click.Choice(["free", "wired", "both"]), default="both",
              show_default=True)
@click.option("--r", type=NUMBER, default=2.0, show_default=True, help="inner arm radius")
@click.option("--big-r", type=NUMBERS, default="8,16,32", show_default=True,
              help="outer arm radii")
@click.option("--theta", type=NUMBER, default=math.pi / 2, show_default="pi/2")
@click.option("--replicas", type=int, default=4, show_default=True)
@click.option("--measurements", type=int, default=50, show_default=True)
@click.option("--burn-in", type=int, default=None)
@click.pass_context
def critical(ctx, **params):
    """Crossing probabilities and half-plane three-arm frequencies at q = 4."""
    from .critical import arm_exponent

    cfg = resolve(ctx, params)
    check_ranges(cfg)
    run = RunDir(params["out"], "critical", cfg)
    bcs = ["free", "wired"] if cfg["bc"] == "both" else [cfg["bc"]]
    tasks = [(cfg, n, bc, k) for k, (n, bc) in enumerate((n, bc) for n in cfg["n_list"] for bc in bcs)]
    res = farm(_crossing_task, tasks, params["jobs"])
    run.write_csv("crossing.csv", ["n", "bc", "p_hat", "p_se", "samples"],
                  [(t[1], t[2], e.value, e.se, e.samples) for t, e in zip(tasks, res)])
    for t, e in zip(tasks, res):
        click.echo(f"crossing n={t[1]:g} bc={t[2]} p={e.value:.4f} +- {e.se:.4f}")
    arms = farm(_arm_task, [(cfg, r) for r in range(cfg["replicas"])], params["jobs"])
    hits = np.sum([a[0] for a in arms], axis=0)
    trials = np.sum([a[1] for a in arms], axis=0)
    p = hits / np.maximum(trials, 1)
    se = np.sqrt(np.maximum(p * (1 - p), 1e-300) / np.maximum(trials, 1))
    run.write_csv("arms.csv", ["r", "R", "hits", "trials", "p_hat", "p_se"],
                  [(cfg["r"], R, int(h), int(t), pp, s)
                   for R, h, t, pp, s in zip(cfg["big_r"], hits, trials, p, se)])
    summary = {"crossing": [{"n": t[1], "bc": t[2], "p": e.value, "se": e.se}
                            for t, e in zip(tasks, res)]}
    if (p > 0).sum() >= 2:
        ok = p > 0
        slope, slope_se = arm_exponent(np.asarray(cfg["big_r"])[ok] / cfg["r"], p[ok], se[ok])
        summary["three_arm_exponent"] = slope
        summary["three_arm_exponent_se"] = slope_se
        click.echo(f"three-arm exponent={slope:.3f} +- {slope_se:.3f}")
    run.write_json("summary.json", summary)
    click.echo(run.path)


if __name__ == "__main__":
    main()
