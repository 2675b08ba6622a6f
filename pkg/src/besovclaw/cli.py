"""Command-line front end: solve, lift, measure, besov, verify and report.

Exit codes: 0 when every hard check passes, 1 when a hard check fails, 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import configparser
import math
import re
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .besov import besov_fit, default_epsilon, loglog_fit
from .fields import Box, Cutoff, Grid2D, VelocityGrid, make_bump_cutoff, plateau_weight
from .flux_entropy import certify_hyp_a, make_entropy_pair, parse_flux
from .interaction import refinement_study
from .io import (SchemaError, read_csv, read_solution, write_csv, write_json, write_manifest,
                 write_solution, write_text)
from .kinetic import extract_measure, lift, velocity_average
from .solver import (InitialData, aligned_shock_grid, exact_riemann, grid_for_cfl,
                     nonentropic_shock, oleinik_check, parse_init, solve_fv)
from .svg import loglog_svg
from .verify import (sample_pairs, verify_lemma_delta, verify_lemma_tartar, verify_main_theorem,
                     verify_one_entropy, verify_velocity_averaging)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VERIFY_KINDS = ("main-theorem", "one-entropy", "velocity-averaging", "interaction",
                "lemma-delta", "lemma-tartar", "oleinik")
VERDICT_COLUMNS = ["tag", "direction", "h", "lhs", "rhs", "margin", "pass", "erratum_flag"]


class InputError(ValueError):
    pass


# --- configuration --------------------------------------------------------

def _floats(text: str, n: int | None = None, name: str = "value") -> tuple[float, ...]:
    try:
        vals = tuple(float(s) for s in str(text).split(","))
    except ValueError:
        raise InputError(f"{name}: expected comma-separated decimals, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"{name}: expected {n} values, got {len(vals)}")
    return vals


def _shift_spec(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"dyadic:(\d+),(\d+)", str(text).strip())
    if not m or int(m.group(1)) < 1 or int(m.group(1)) > int(m.group(2)):
        raise InputError(f"shifts: expected dyadic:MIN,MAX with 1 <= MIN <= MAX, got {text!r}")
    return int(m.group(1)), int(m.group(2))


# option name -> (type, default); every option may also come from the config file
OPTIONS = {
    "flux": (str, "burgers"),
    "entropy": (str, "quadratic"),
    "init": (str, "sine:1,1"),
    "scheme": (str, "godunov"),
    "boundary": (str, None),
    "nx": (int, 256),
    "nt": (int, None),
    "nv": (int, 32),
    "cfl": (float, 0.45),
    "tmax": (float, 1.0),
    "domain": (str, None),
    "cutoff": (str, None),
    "plateau": (float, 0.5),
    "shifts": (str, "dyadic:8,1024"),
    "seed": (int, 0),
    "pairs": (int, 1000),
    "radius": (float, 1.0),
    "certificate": (str, "analytic"),
    "alpha": (float, None),
    "direction": (str, "both"),
    "p": (float, 3.0),
    "psi_radius": (float, None),
    "manufactured": (str, "bump"),
    "refine": (int, 4),
    "tag": (str, "run"),
}


def _config_line(text: str, key: str) -> int:
    for n, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return n
    return 0


def load_config(path: str) -> dict:
    """Flat key = value pairs under any section headers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"config {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise InputError(f"config parse error: {exc}") from None
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = key.replace("-", "_")
            line = _config_line(text, key)
            if name not in OPTIONS:
                raise InputError(f"config {path}, line {line}: unknown key {key!r} in [{section}]")
            typ = OPTIONS[name][0]
            try:
                out[name] = typ(raw)
            except ValueError:
                raise InputError(f"config {path}, line {line}: bad value {raw!r} for {key!r}") from None
    return out


@dataclass(frozen=True)
class RunConfig:
    flux: str
    entropy: str
    init: str
    scheme: str
    boundary: str | None
    nx: int
    nt: int | None
    nv: int
    cfl: float
    tmax: float
    domain: str | None
    cutoff: str | None
    plateau: float
    shifts: str
    seed: int
    pairs: int
    radius: float
    certificate: str
    alpha: float | None
    direction: str
    p: float
    psi_radius: float | None
    manufactured: str
    refine: int
    tag: str
    out: str
    inputs: tuple

    def echo(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()
                if k != "out"}


def resolve(args: argparse.Namespace) -> RunConfig:
    file_vals = load_config(args.config) if getattr(args, "config", None) else {}
    vals = {}
    for name, (_, default) in OPTIONS.items():
        cli = getattr(args, name, None)
        vals[name] = cli if cli is not None else file_vals.get(name, default)
    inputs = tuple(getattr(args, "inputs", None) or ())
    if getattr(args, "input", None):
        inputs = (args.input,) + inputs
    return RunConfig(**vals, out=args.out or ".", inputs=inputs)


# --- stage helpers --------------------------------------------------------

def _domain(cfg: RunConfig, init: InitialData) -> tuple[float, float]:
    if cfg.domain:
        x0, x1 = _floats(cfg.domain, 2, "domain")
        return x0, x1
    if cfg.init.startswith("sine"):
        period = _floats(cfg.init.partition(":")[2] or "1,1", 2, "init")[1]
        return 0.0, period
    return -1.0, 1.0


def run_solve(cfg: RunConfig):
    flux = parse_flux(cfg.flux)
    init = parse_init(cfg.init)
    x0, x1 = _domain(cfg, init)
    boundary = cfg.boundary or ("periodic" if cfg.init.startswith("sine") else "outflow")
    if cfg.scheme in ("exact", "nonentropic"):
        if not cfg.init.startswith("riemann"):
            raise InputError(f"scheme {cfg.scheme!r} needs riemann initial data")
        ul, ur = _floats(cfg.init.partition(":")[2], 2, "init")
        if cfg.scheme == "nonentropic":
            grid = aligned_shock_grid(ul, ur, flux, x0, x1, cfg.nx, cfg.tmax)
            return nonentropic_shock(ul, ur, flux, grid)
        speed = flux.speed_bound(min(ul, ur), max(ul, ur))
        grid = _grid(cfg, x0, x1, speed)
        return exact_riemann(ul, ur, flux, grid)
    speed = flux.speed_bound(-init.bound, init.bound)
    grid = _grid(cfg, x0, x1, speed)
    return solve_fv(init, flux, grid, cfg.scheme, cfg.cfl, boundary)


def _grid(cfg: RunConfig, x0: float, x1: float, speed: float):
    if cfg.nt is not None:
        if not 0.0 < cfg.cfl < 1.0:
            raise ValueError("cfl exceeded")
        return Grid2D(0.0, cfg.tmax, x0, x1, cfg.nt, cfg.nx)
    return grid_for_cfl(0.0, cfg.tmax, x0, x1, cfg.nx, cfg.cfl, max(speed, 1e-12))


def load_or_solve(cfg: RunConfig):
    if cfg.inputs:
        return read_solution(cfg.inputs[0])
    return run_solve(cfg)


def make_cutoff(cfg: RunConfig, rec) -> Cutoff:
    g = rec.grid
    if cfg.cutoff:
        ta, tb, xa, xb = _floats(cfg.cutoff, 4, "cutoff")
    else:
        T, L = g.t1 - g.t0, g.x1 - g.x0
        ta, tb = g.t0 + 0.25 * T, g.t0 + 0.85 * T
        xa, xb = g.x0 + 0.25 * L, g.x0 + 0.75 * L
    return make_bump_cutoff(Box(ta, tb, xa, xb), cfg.plateau)


def shift_set(cfg: RunConfig, rec, direction: str, eps: float) -> list[float]:
    """Dyadic multiples of the grid spacing inside [MIN dx, min(MAX dx, eps)]."""
    kmin, kmax = _shift_spec(cfg.shifts)
    g = rec.grid
    lo, hi = kmin * g.dx, min(kmax * g.dx, eps)
    step = g.spacing(direction)
    out, k = [], 1
    while k * step <= hi * (1 + 1e-9):
        if k * step >= lo * (1 - 1e-9):
            out.append(k * step)
        k *= 2
    if not out:
        raise InputError(f"no dyadic {direction}-shift in [{lo:g}, {hi:g}]")
    return out


def _certificate(cfg: RunConfig, flux, radius: float):
    if cfg.certificate not in ("analytic", "empirical"):
        raise InputError("certificate must be 'analytic' or 'empirical'")
    return certify_hyp_a(flux, radius, method=cfg.certificate, seed=cfg.seed)


def _emit(out: Path, files: list[Path], cfg: RunConfig) -> None:
    write_manifest(out, cfg.echo(), files)


def _increment_plot(title: str, report) -> str:
    series = []
    for d in ("x", "t"):
        pts = [(h, v) for h, v in report.extra.get(f"increments_{d}", [])]
        if not pts:
            continue
        hard = [v for v in report.verdicts if v.direction == d and v.hard]
        factor = hard[0].lhs / pts[0][1] if hard and pts[0][1] > 0 else 1.0
        series.append({"label": f"{d}: increment functional", "points": pts})
        series.append({"label": f"{d}: bound / lhs factor", "dashed": True,
                       "points": [(v.h, v.rhs / factor) for v in hard] if factor > 0 else []})
    return loglog_svg(title, series)


# --- commands -------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    rec = run_solve(cfg)
    path = write_solution(out / "solution.json", rec)
    _emit(out, [path], cfg)
    print(f"wrote {path} (nt={rec.grid.nt}, nx={rec.grid.nx}, supnorm={rec.supnorm:.6g})")
    return EXIT_OK


def cmd_lift(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    rec = load_or_solve(cfg)
    vg = VelocityGrid.covering(rec.supnorm, cfg.nv)
    kd = lift(rec, vg)
    recon = velocity_average(kd, lambda v: np.ones_like(v))
    err = float(np.max(np.abs(recon.values - rec.values)))
    path = write_json(out / "lift.json", {
        "velocity_grid": {"vmin": vg.vmin, "vmax": vg.vmax, "nv": vg.nv},
        "gamma": kd.gamma, "fmax": kd.fmax, "moment_error": err,
        "grid": rec.grid.to_dict(), "flux": rec.flux_tag})
    _emit(out, [path], cfg)
    print(f"wrote {path} (max |int f dv - u| = {err:.3g})")
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    rec = load_or_solve(cfg)
    flux = parse_flux(rec.flux_tag)
    m = extract_measure(lift(rec, VelocityGrid.covering(rec.supnorm, cfg.nv)), flux)
    path = write_json(out / "measure.json", {"summary": m.summary(), "grid": rec.grid.to_dict(),
                                             "flux": rec.flux_tag})
    _emit(out, [path], cfg)
    s = m.summary()
    print(f"wrote {path} (pos={s['pos']:.6g}, neg={s['neg']:.6g}, tv={s['tv']:.6g})")
    return EXIT_FAIL if m.closure_warning else EXIT_OK


def cmd_besov(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    rec = load_or_solve(cfg)
    cutoff = make_cutoff(cfg, rec)
    dirs = ("x", "t") if cfg.direction == "both" else (cfg.direction,)
    if any(d not in ("x", "t") for d in dirs):
        raise InputError("direction must be x, t or both")
    rows, series, notes = [], [], []
    for d in dirs:
        eps = default_epsilon(cutoff, d)
        rep = besov_fit(rec.field, d, cfg.p, cutoff, shift_set(cfg, rec, d, eps), eps)
        rows += rep.rows()
        series.append({"label": f"{d}: p={cfg.p:g}", "points": list(zip(rep.h, rep.values))})
        notes.append(f"{d} slope p={cfg.p:g}: {rep.slope:.3f}")
    files = [write_csv(out / "besov.csv", rows, ["direction", "p", "h", "value", "slope", "flag"]),
             write_text(out / "besov.svg", loglog_svg("increment functional vs h", series, notes))]
    _emit(out, files, cfg)
    for n in notes:
        print(n)
    return EXIT_OK


def _theorem_files(out: Path, rep, title: str) -> list[Path]:
    return [write_csv(out / "verdicts.csv", rep.rows(), VERDICT_COLUMNS),
            write_json(out / "ledger.json", {"report": rep.name, "ledger": rep.ledger.to_dict(),
                                             "extra": rep.extra, "passed": rep.passed}),
            write_text(out / "plot.svg", _increment_plot(title, rep))]


def _theorem_inputs(cfg: RunConfig):
    rec = load_or_solve(cfg)
    flux = parse_flux(rec.flux_tag)
    cutoff = make_cutoff(cfg, rec)
    ex, et = default_epsilon(cutoff, "x"), default_epsilon(cutoff, "t")
    return rec, flux, cutoff, shift_set(cfg, rec, "x", ex), shift_set(cfg, rec, "t", et)


def cmd_verify(kind: str, cfg: RunConfig) -> int:
    out = Path(cfg.out)
    if kind in ("main-theorem", "one-entropy"):
        rec, flux, cutoff, hx, ht = _theorem_inputs(cfg)
        cert = _certificate(cfg, flux, rec.supnorm)
        if kind == "main-theorem":
            rep = verify_main_theorem(rec, flux, cert, cutoff, hx, ht,
                                      vgrid=VelocityGrid.covering(rec.supnorm, cfg.nv))
        else:
            pair = make_entropy_pair(cfg.entropy, flux, rec.supnorm)
            rep = verify_one_entropy(rec, flux, pair, cert, cutoff, hx, ht)
        files = _theorem_files(out, rep, kind)
    elif kind == "velocity-averaging":
        rec, flux, cutoff, hx, ht = _theorem_inputs(cfg)
        V = cfg.psi_radius or 1.2 * rec.supnorm
        psi = plateau_weight(V, 0.7)
        cert = _certificate(cfg, flux, V)
        kd = lift(rec, VelocityGrid.covering(max(rec.supnorm, V), cfg.nv))
        rep = verify_velocity_averaging(kd, None, flux, cert, cutoff, psi, hx, ht)
        files = _theorem_files(out, rep, kind)
    elif kind == "interaction":
        if cfg.manufactured != "bump":
            raise InputError("only the 'bump' manufactured family is available")
        if cfg.refine < 2:
            raise InputError("refine needs at least 2 levels")
        levels = tuple(128 * 2**k for k in range(cfg.refine))
        rows = refinement_study(levels)
        prev, ok = {}, True
        table = []
        for r in rows:
            ratio = prev[r["tag"]] / r["residual"] if r["tag"] in prev else float("nan")
            if r["tag"] in prev and not ratio >= 1.6:
                ok = False
            prev[r["tag"]] = r["residual"]
            table.append({"n": r["n"], "identity": r["tag"], "residual": r["residual"],
                          "ratio": ratio if math.isfinite(ratio) else "", "pass": ok})
        series = [{"label": ident, "points": [(1.0 / r["n"], r["residual"]) for r in rows
                                              if r["tag"] == ident]}
                  for ident in ("space", "time")]
        files = [write_csv(out / "interaction.csv", table, ["n", "identity", "residual", "ratio", "pass"]),
                 write_text(out / "plot.svg", loglog_svg("identity residual vs 1/n", series))]
        _emit(out, files, cfg)
        for r in table:
            print(f"n={r['n']:5d} {r['identity']:5s} residual={r['residual']:.3e} ratio={r['ratio']}")
        return EXIT_OK if ok else EXIT_FAIL
    elif kind in ("lemma-delta", "lemma-tartar"):
        flux = parse_flux(cfg.flux)
        cert = _certificate(cfg, flux, cfg.radius)
        pairs = sample_pairs(cfg.radius, cfg.pairs, cfg.seed)
        if kind == "lemma-delta":
            rep = verify_lemma_delta(flux, cert, pairs)
        else:
            pair = make_entropy_pair(cfg.entropy, flux, cfg.radius)
            rep = verify_lemma_tartar(pair, flux, cert, pairs)
        cols = sorted(rep.extra)
        files = [write_csv(out / "summary.csv", [rep.extra], cols),
                 write_json(out / "ledger.json", {"report": rep.name, "ledger": rep.ledger.to_dict(),
                                                  "extra": rep.extra, "passed": rep.passed})]
        print(f"{kind}: violations={rep.extra['violations']} "
              f"worst_ratio_corrected={rep.extra['worst_ratio_corrected']:.6g} "
              f"worst_ratio_stated={rep.extra['worst_ratio_stated']:.6g}")
    elif kind == "oleinik":
        rec = load_or_solve(cfg)
        flux = parse_flux(rec.flux_tag)
        alpha = cfg.alpha if cfg.alpha is not None else certify_hyp_a(flux, rec.supnorm).alpha_M
        rep = oleinik_check(rec, alpha)
        files = [write_json(out / "oleinik.json", rep.to_dict())]
        _emit(out, files, cfg)
        print(f"oleinik: max excess {rep.max_violation:.6g} (tolerance {rep.tolerance:.3g})")
        return EXIT_OK if rep.passed else EXIT_FAIL
    else:
        raise InputError(f"unknown verify kind {kind!r}")
    _emit(out, files, cfg)
    print(f"{kind}: {'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    series, notes, table = [], [], []
    for path in cfg.inputs:
        rows = read_csv(path)
        if rows and "lhs" in rows[0]:
            keys = sorted({(r["tag"], r["direction"]) for r in rows})
            for tag, d in keys:
                sel = [r for r in rows if r["tag"] == tag and r["direction"] == d]
                try:
                    pts = [(float(r["h"]), float(r["lhs"])) for r in sel]
                    bound = [(float(r["h"]), float(r["rhs"])) for r in sel]
                except (KeyError, ValueError):
                    raise SchemaError(f"{path}: malformed verdict row") from None
                series.append({"label": f"{tag} {d} lhs", "points": pts})
                series.append({"label": f"{tag} {d} bound", "points": bound, "dashed": True})
                table.append({"source": Path(path).name, "series": f"{tag}:{d}",
                              "n": len(sel), "slope": _slope(pts),
                              "all_pass": all(r["pass"] == "true" for r in sel)})
        elif rows and "value" in rows[0]:
            for d in sorted({r["direction"] for r in rows}):
                sel = [r for r in rows if r["direction"] == d]
                try:
                    pts = [(float(r["h"]), float(r["value"])) for r in sel]
                    p = float(sel[0]["p"])
                except (KeyError, ValueError):
                    raise SchemaError(f"{path}: malformed besov row") from None
                slope = _slope(pts)
                series.append({"label": f"{d}: p={p:g}", "points": pts})
                notes.append(f"{d} fitted slope p={p:g}: {slope:.3f}")
                table.append({"source": Path(path).name, "series": f"besov:{d}", "n": len(sel),
                              "slope": slope, "all_pass": sel[0]["flag"] == "consistent"})
        elif rows:
            raise SchemaError(f"{path}: not a verdict or besov table")
    files = [write_text(out / "report.svg", loglog_svg("seminorm report", series, notes)),
             write_csv(out / "report.csv", table, ["source", "series", "n", "slope", "all_pass"])]
    _emit(out, files, cfg)
    print(f"wrote {len(files)} report files to {out}")
    return EXIT_OK


def _slope(pts) -> float:
    good = [(h, v) for h, v in pts if h > 0 and v > 0]
    if len(good) < 2:
        return float("nan")
    return loglog_fit(*zip(*good))[0]


# --- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file of key = value defaults")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--in", dest="input", help="solution JSON to read instead of solving")
    for name, (typ, _) in OPTIONS.items():
        common.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)

    parser = argparse.ArgumentParser(prog="besovclaw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("solve", "run a finite-volume or exact solver"),
                           ("lift", "lift a solution to its kinetic density"),
                           ("measure", "extract the kinetic entropy-production measure"),
                           ("besov", "fit increment-functional slopes")):
        sub.add_parser(name, parents=[common], help=helptext)
    pv = sub.add_parser("verify", parents=[common], help="check a theorem or lemma")
    pv.add_argument("kind", choices=VERIFY_KINDS)
    pr = sub.add_parser("report", parents=[common], help="plot verdict and besov tables")
    pr.add_argument("inputs", nargs="*", help="CSV files from besov or verify")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        if args.command == "verify":
            return cmd_verify(args.kind, cfg)
        return {"solve": cmd_solve, "lift": cmd_lift, "measure": cmd_measure,
                "besov": cmd_besov, "report": cmd_report}[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
