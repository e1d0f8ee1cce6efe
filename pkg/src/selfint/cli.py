"""Command-line front end: ``selfint <command> [options]``.

Every command prints a JSON report (schema ``REPORT_SCHEMA``) that echoes
the effective configuration. Flags override values from ``--config`` (a
JSON object keyed by option name). A nonzero exit code means the report's
``violations`` list is not empty.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from .bounds import GrowthBound, dim_bound_and_k0, k0_for
from .calibration import calibrate
from .census import CensusSlice, enumerate_census, load_census, save_census, validate_certificate
from .closer import DEFAULT_EPS, DEFAULT_RADIUS, close_arc
from .cover import (
    box_dimension,
    build_cover,
    cover_net,
    covering_check,
    curve_points,
    hausdorff_measure,
    lebesgue_measure,
    random_budget_proxies,
    uniform_points,
)
from .hexagons import PANTS_CURVES, build_hexagons
from .hyperbolic import HPoint, UnitTangent
from .surface import build_genus2, dump_surface, parse_surface
from .tracer import dump_arc, trace

REPORT_SCHEMA = 1

DEFAULTS = {
    "seed": 0,
    "out": None,
    "surface": None,
    "census": None,
    "max_length": 8.0,
    "max_intersections": math.inf,
    "x": 0.0,
    "y": 1.0,
    "angle": 0.0,
    "length": 10.0,
    "eps": DEFAULT_EPS,
    "radius": DEFAULT_RADIUS,
    "n": 8,
    "budget": "quadratic:0.05",
    "h": 1.5,
    "mc_samples": 10_000,
    "set": "uniform",
    "word": "ab",
    "spacing": 2.5e-4,
    "points": 100_000,
    "k": 0.05,
    "ns": None,
    "proxies": 20,
    "regularity": 5.0,
}


# ---------------------------------------------------------------------------
# helpers

def parse_budget(spec: str):
    """``zero``, ``linear:c`` (c l) or ``quadratic:k`` ((k l)^2)."""
    name, _, arg = spec.partition(":")
    if name == "zero":
        return lambda l: 0.0
    c = float(arg) if arg else 1.0
    if name == "linear":
        return lambda l: c * l
    if name == "quadratic":
        return lambda l: (c * l) ** 2
    raise ValueError(f"unknown budget {spec!r}")


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_surface(path: str, S, gb: GrowthBound, info: dict) -> None:
    H = build_hexagons(S, c_samples=0)
    extra = ["growth " + gb.to_json(), "calibration " + json.dumps(info, sort_keys=True)]
    for curves in PANTS_CURVES:
        extra.append("pants " + " ".join(curves))
    for h in H.hexagons:
        extra.append(f"hexagon {h.index} " + " ".join(f"{z.real:.16e} {z.imag:.16e}" for z in h.vertices))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_surface(S, extra))


def read_surface(path: str):
    with open(path, encoding="utf-8") as fh:
        S, extra = parse_surface(fh.read())
    gb = None
    for line in extra:
        if line.startswith("growth "):
            gb = GrowthBound.from_dict(json.loads(line[len("growth "):]))
    return S, gb


class Context:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self._S = None
        self._gb = None
        self._census = None

    @property
    def S(self):
        if self._S is None:
            if self.cfg["surface"]:
                self._S, self._gb = read_surface(self.cfg["surface"])
            else:
                self._S = build_genus2()
        return self._S

    @property
    def census(self) -> CensusSlice:
        if self._census is None:
            path = self.cfg["census"]
            if not path:
                raise SystemExit("this command needs a census: run `selfint census --max-length 12 "
                                 "--out DIR` and pass --census DIR/census.csv")
            self._census = load_census(path, self.S)
        return self._census

    @property
    def gb(self) -> GrowthBound:
        S = self.S
        if self._gb is None:
            census = self.census if self.cfg["census"] else None
            self._gb, _ = calibrate(S, census, seed=self.cfg["seed"])
        return self._gb


# ---------------------------------------------------------------------------
# commands

def cmd_surface(ctx: Context) -> dict:
    S = ctx.S
    census = ctx.census if ctx.cfg["census"] else None
    gb, info = calibrate(S, census, seed=ctx.cfg["seed"])
    out = ctx.cfg["out"] or "."
    path = os.path.join(out, "surface.txt")
    write_surface(path, S, gb, info)
    return {"path": path, "hash": S.hash, "area": S.area(), "growth_bound": gb.to_dict(),
            "calibration": info, "violations": []}


def cmd_census(ctx: Context) -> dict:
    cfg = ctx.cfg
    t = time.time()
    sl = enumerate_census(ctx.S, cfg["max_length"], cfg["max_intersections"])
    out = cfg["out"] or "."
    path = os.path.join(out, "census.csv")
    save_census(sl, path)
    violations = [] if sl.complete else [f"census incomplete beyond L = {sl.info.get('ball_radius')}"]
    hist: dict[int, int] = {}
    for r in sl.records:
        hist[r.self_intersections] = hist.get(r.self_intersections, 0) + 1
    return {"path": path, "L": sl.L, "K": sl.K, "complete": sl.complete, "classes": len(sl),
            "intersection_histogram": dict(sorted(hist.items())), "seconds": time.time() - t,
            "certificate": validate_certificate(ctx.S, sl) if sl.L <= 10 else None,
            "violations": violations}


def _tangent(cfg) -> UnitTangent:
    return UnitTangent(HPoint(cfg["x"], cfg["y"]), cfg["angle"])


def cmd_trace(ctx: Context) -> dict:
    arc = trace(ctx.S, _tangent(ctx.cfg), ctx.cfg["length"])
    if ctx.cfg["out"]:
        with open(os.path.join(ctx.cfg["out"], "arc.txt"), "w", encoding="utf-8") as fh:
            fh.write(dump_arc(arc))
    return {"length": arc.length, "segments": arc.n_segments, "crossing_word": arc.crossing_word,
            "perturbed": arc.perturbed, "violations": []}


def cmd_close_arc(ctx: Context) -> dict:
    cfg = ctx.cfg
    arc = trace(ctx.S, _tangent(cfg), cfg["length"])
    cert = close_arc(ctx.S, arc, cfg["eps"], radius=cfg["radius"])
    rep = json.loads(cert.to_json())
    rep["violations"] = [] if cert.success else ["no suffix met the angle-deficit tolerance"]
    return rep


def cmd_cover(ctx: Context) -> dict:
    cfg = ctx.cfg
    f = parse_budget(cfg["budget"])
    c = build_cover(ctx.census, cfg["n"], f, ctx.gb, kind="ball")
    leb = lebesgue_measure(ctx.S, c, cfg["mc_samples"], seed=cfg["seed"], net=cover_net(ctx.S, c))
    hau = hausdorff_measure(c, cfg["h"])
    violations = []
    if not leb.mc_within_bound():
        violations.append(f"n={c.n}: Monte Carlo area exceeds the bound by more than 3 sigma")
    return {"n": c.n, "epsilon": c.epsilon, "members": len(c.members), "K": c.members.K,
            "ball_count": c.ball_count, "lebesgue": leb.to_dict(), "hausdorff": hau.to_dict(),
            "growth_bound": ctx.gb.to_dict(), "violations": violations}


def _point_set(ctx: Context, name: str):
    cfg = ctx.cfg
    if name == "uniform":
        return uniform_points(ctx.S, cfg["points"], cfg["seed"])
    if name == "geodesic":
        return curve_points(ctx.S, [cfg["word"]], cfg["spacing"])
    if name == "simple":
        words = [r.word for r in ctx.census.restrict(10.0, 0).records]
        return curve_points(ctx.S, words, cfg["spacing"])
    raise ValueError(f"unknown point set {name!r}")


def cmd_dimension(ctx: Context) -> dict:
    name = ctx.cfg["set"]
    bd = box_dimension(_point_set(ctx, name))
    _write_box_csv(ctx, {name: bd})
    return {"set": name, **bd.to_dict(), "violations": []}


def _write_box_csv(ctx: Context, fits: dict) -> None:
    if not ctx.cfg["out"]:
        return
    with open(os.path.join(ctx.cfg["out"], "box_counts.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["set", "scale", "count"])
        for name, bd in fits.items():
            for s, c in bd.rows():
                w.writerow([name, repr(s), c])


DIMENSION_RANGES = {"uniform": (1.85, 2.05), "geodesic": (0.9, 1.1), "simple": (0.8, 1.4)}


def experiment_dimension(ctx: Context) -> dict:
    fits, rows, violations = {}, [], []
    for name, (lo, hi) in DIMENSION_RANGES.items():
        bd = box_dimension(_point_set(ctx, name))
        fits[name] = bd
        rows.append({"set": name, "dimension": bd.dimension, "range": [lo, hi], "fitted": bd.fitted})
        if not lo <= bd.dimension <= hi:
            violations.append(f"{name}: box dimension {bd.dimension:.4f} outside [{lo}, {hi}]")
    _write_box_csv(ctx, fits)
    gb = ctx.gb
    k0 = k0_for(gb.a_X, gb.mu_factor)
    if abs(gb.mu(k0) - 0.25) > 1e-9:
        violations.append(f"mu(k0) = {gb.mu(k0)!r} is not 1/4")
    ks = [0.2, 0.1, 0.05, 0.01]
    bounds = [dim_bound_and_k0(gb, k)[0] for k in ks]
    if not all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:])) or min(bounds) <= 1.0:
        violations.append("dim_bound does not decrease towards 1 as k decreases")
    return {"box": rows, "k0": k0, "mu_k0": gb.mu(k0),
            "dim_bound": [{"k": k, "dim_bound": b} for k, b in zip(ks, bounds)],
            "violations": violations}


def experiment_measure_decay(ctx: Context) -> dict:
    cfg = ctx.cfg
    k = cfg["k"]
    f = lambda l: (k * l) ** 2
    ns = cfg["ns"] or [6, 8, 10, 12]
    rows, violations = [], []
    for n in ns:
        c = build_cover(ctx.census, n, f, ctx.gb, kind="ball")
        leb = lebesgue_measure(ctx.S, c, cfg["mc_samples"], seed=cfg["seed"] + n, net=cover_net(ctx.S, c))
        hau = hausdorff_measure(c, cfg["h"])
        rel = abs(hau.hausdorff_h - hau.hausdorff_closed_form) / max(abs(hau.hausdorff_closed_form), 1e-300)
        rows.append({**leb.to_dict(), "h": cfg["h"], "hausdorff_h": hau.hausdorff_h,
                     "hausdorff_closed_form": hau.hausdorff_closed_form, "hausdorff_rel_err": rel})
        if not leb.mc_within_bound():
            violations.append(f"n={n}: Monte Carlo area above the bound by more than 3 sigma")
        if rel > 1e-9:
            violations.append(f"n={n}: Hausdorff sum and closed form differ by {rel:.3e}")
    est = [r["lebesgue_mc"] for r in rows]
    if not all(b < a for a, b in zip(est, est[1:])):
        violations.append(f"Lebesgue estimates not strictly decreasing over n = {ns}: {est}")
    _write_rows_csv(ctx, "measure_decay.csv", rows)
    return {"k": k, "mu": ctx.gb.mu(k), "c_X": ctx.gb.c_X, "rows": rows, "violations": violations}


def experiment_covering(ctx: Context) -> dict:
    cfg = ctx.cfg
    f = parse_budget("linear:1")
    L = cfg["regularity"]
    ns = cfg["ns"] or list(range(6, int(ctx.census.L) + 1))
    proxies = random_budget_proxies(ctx.S, cfg["proxies"], f, L, max(ns), seed=cfg["seed"])
    rows, violations, N_obs = [], [], []
    for j, g in enumerate(proxies):
        outcome = []
        for n in ns:
            r = covering_check(ctx.S, ctx.census, g, f, L, n, ctx.gb)
            outcome.append(r.covered)
            rows.append({"proxy": j, **r.to_dict()})
            if r.covered is not None and not r.witness_ok:
                violations.append(f"proxy {j}, n={n}: witness {r.witness_distance:.3e} "
                                  f"above the Lambert bound {r.witness_bound:.3e}")
        # smallest N with every later outcome true
        N = None
        for i in range(len(ns) - 1, -1, -1):
            if outcome[i] is not True:
                break
            N = ns[i]
        N_obs.append(N)
        if N is None:
            violations.append(f"proxy {j}: not covered at n = {ns[-1]}")
    known = [N for N in N_obs if N is not None]
    _write_rows_csv(ctx, "covering.csv", rows)
    return {"L": L, "ns": ns, "N_observed": max(known) if known else None, "per_proxy": N_obs,
            "rows": rows, "violations": violations}


def _write_rows_csv(ctx: Context, name: str, rows: list[dict]) -> None:
    if not ctx.cfg["out"] or not rows:
        return
    with open(os.path.join(ctx.cfg["out"], name), "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=[k for k in rows[0] if not isinstance(rows[0][k], list)],
                           extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


EXPERIMENTS = {
    "measure-decay": experiment_measure_decay,
    "dimension": experiment_dimension,
    "covering": experiment_covering,
}


def cmd_experiment(ctx: Context) -> dict:
    return EXPERIMENTS[ctx.cfg["name"]](ctx)


COMMANDS = {
    "surface": cmd_surface,
    "census": cmd_census,
    "trace": cmd_trace,
    "close-arc": cmd_close_arc,
    "cover": cmd_cover,
    "dimension": cmd_dimension,
    "experiment": cmd_experiment,
}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    # options absent from the command line stay absent so config values can fill them in
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--config", help="JSON file of option values")
    common.add_argument("--out", help="output directory")
    common.add_argument("--surface", help="surface file written by `selfint surface`")
    common.add_argument("--census", help="census file written by `selfint census`")

    p = argparse.ArgumentParser(prog="selfint", description=__doc__.splitlines()[0], parents=[common],
                                argument_default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, help):
        return sub.add_parser(name, parents=[common], help=help, argument_default=argparse.SUPPRESS)

    command("surface", "write the reference surface and its constants")

    s = command("census", "enumerate closed geodesics")
    s.add_argument("--max-length", type=float)
    s.add_argument("--max-intersections", type=float)

    def arc_options(s):
        s.add_argument("--x", type=float)
        s.add_argument("--y", type=float)
        s.add_argument("--angle", type=float)
        s.add_argument("--length", type=float)

    s = command("trace", "trace a geodesic arc")
    arc_options(s)

    s = command("close-arc", "close a geodesic arc")
    arc_options(s)
    s.add_argument("--eps", type=float)
    s.add_argument("--radius", type=int)

    s = command("cover", "build C_n and report its measures")
    s.add_argument("--n", type=int)
    s.add_argument("--budget", help="zero | linear:c | quadratic:k")
    s.add_argument("--h", type=float)
    s.add_argument("--mc-samples", type=int)

    s = command("dimension", "box-counting dimension of a point set")
    s.add_argument("--set", choices=("uniform", "geodesic", "simple"))
    s.add_argument("--word")
    s.add_argument("--spacing", type=float)
    s.add_argument("--points", type=int)

    s = command("experiment", "run a named experiment")
    s.add_argument("name", choices=sorted(EXPERIMENTS))
    s.add_argument("--k", type=float)
    s.add_argument("--ns", type=int, nargs="+")
    s.add_argument("--h", type=float)
    s.add_argument("--mc-samples", type=int)
    s.add_argument("--proxies", type=int)
    s.add_argument("--regularity", type=float, help="the scale L of G(f, L)")
    s.add_argument("--spacing", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--word")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for k, v in vars(args).items():
        if k != "config":
            cfg[k] = v
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = resolve_config(args)
    if cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)
    ctx = Context(cfg)
    result = COMMANDS[args.command](ctx)
    violations = result.pop("violations", [])
    report = _jsonable({"schema_version": REPORT_SCHEMA, "command": args.command, "config": cfg,
                        "result": result, "violations": violations})
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if cfg["out"]:
        name = args.command if args.command != "experiment" else f"experiment-{cfg['name']}"
        with open(os.path.join(cfg["out"], f"{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())
