"""Command-line surface: JSON scenarios in, CSV/JSON records out.

Subcommands map onto the solver modules; every run is reproducible (explicit
seeds, fixed formatting) so emitted files are byte-identical across runs.
Scenario files supply parameters; command-line flags override file values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from fraglab import cascade as casc
from fraglab import heterogeneous as het
from fraglab import montecarlo as mc
from fraglab.equilibrium import (
    EntryModel,
    GrossProfitModel,
    MarketPrimitives,
    entry_equilibrium,
    entry_map_H,
    investment_equilibrium,
    kappa_lower,
    kappa_upper,
    validate_primitives,
)
from fraglab.planner import CostModel, kappa_crit_planner, planner_solve
from fraglab.reliability import Technology, critical_point, rho, simple_threshold

KINDS = ("reliability", "critical", "planner", "equilibrium", "sweep", "het",
         "montecarlo", "cascade")

_SUBCOMMAND_KIND = {
    "reliability": "reliability",
    "critical-point": "critical",
    "planner": "planner",
    "equilibrium": "equilibrium",
    "sweep-kappa": "sweep",
    "sweep-entry": "sweep",
    "het-solve": "het",
    "het-shock": "het",
    "montecarlo": "montecarlo",
    "cascade": "cascade",
}


class ScenarioError(ValueError):
    """Scenario rejection with the offending field path."""

    def __init__(self, fieldpath: str, message: str):
        self.fieldpath = fieldpath
        self.message = message
        super().__init__(f"{fieldpath}: {message}")

    def record(self) -> dict:
        return {"error": {"field": self.fieldpath, "message": self.message}}


@dataclass
class Scenario:
    kind: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0
    grid: int = 1000
    threads: int = 1


def _require(params: dict, key: str, kind: str):
    if key not in params:
        raise ScenarioError(f"{kind}.{key}", "required field missing")
    return params[key]


def _positive_int(params: dict, key: str, kind: str, default=None) -> int:
    v = params.get(key, default)
    if v is None:
        raise ScenarioError(f"{kind}.{key}", "required field missing")
    if not isinstance(v, int) or v < 1:
        raise ScenarioError(f"{kind}.{key}", f"must be a positive integer, got {v!r}")
    return v


def parse_scenario(path: str | Path) -> Scenario:
    """Decode and validate a JSON scenario document."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ScenarioError("kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    sc = Scenario(
        kind=kind,
        params={k: v for k, v in doc.items()
                if k not in ("kind", "out", "seed", "grid", "threads")},
        out=doc.get("out"),
        seed=int(doc.get("seed", 0)),
        grid=int(doc.get("grid", 1000)),
        threads=int(doc.get("threads", 1)),
    )
    validate_scenario(sc)
    return sc


def validate_scenario(sc: Scenario):
    """Front-load the target module's invariant checks."""
    p = sc.params
    if sc.grid < 2:
        raise ScenarioError("grid", "grid needs at least two points")
    if sc.threads < 1:
        raise ScenarioError("threads", "thread count must be >= 1")
    if not 0 <= sc.seed < 2 ** 64:
        raise ScenarioError("seed", "seed must fit an unsigned 64-bit integer")
    if sc.kind in ("reliability", "critical", "planner", "equilibrium", "sweep",
                   "montecarlo", "cascade"):
        m = _positive_int(p, "m", sc.kind)
        n = _positive_int(p, "n", sc.kind)
        if sc.kind in ("planner", "equilibrium", "sweep", "cascade") and m < 2:
            raise ScenarioError(f"{sc.kind}.m", "complex production (m >= 2) required")
    if "kappa" in p and not (isinstance(p["kappa"], (int, float)) and p["kappa"] >= 0):
        raise ScenarioError(f"{sc.kind}.kappa", f"kappa must be nonnegative, got {p['kappa']!r}")
    if sc.kind == "het":
        econ = p.get("economy")
        if not isinstance(econ, dict):
            raise ScenarioError("het.economy", "economy specification required")
        build_economy(econ)  # raises ScenarioError on bad structure
    if sc.kind == "cascade":
        for key in ("lo", "hi"):
            v = p.get(key)
            if v is not None and v <= 0:
                raise ScenarioError(f"cascade.{key}", "must be positive")


def build_cost(spec: dict | None) -> CostModel:
    spec = dict(spec or {})
    family = spec.pop("family", "power")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return CostModel(family=family, **spec)
        except (TypeError, ValueError) as exc:
            raise ScenarioError("cost", str(exc)) from exc


def build_primitives(p: dict, kind: str, kappa: float | None = None) -> MarketPrimitives:
    tech = Technology(p["m"], p["n"])
    cost = build_cost(p.get("cost"))
    prof_spec = dict(p.get("profit") or {})
    kap = kappa if kappa is not None else p.get("kappa", 1.0)
    if kap is None or kap <= 0:
        raise ScenarioError(f"{kind}.kappa", "positive kappa required")
    try:
        profit = GrossProfitModel(kappa=kap, **prof_spec)
        entry = EntryModel(**dict(p.get("entry") or {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{kind}.profit/entry", str(exc)) from exc
    return MarketPrimitives(tech, cost, profit, entry, x_bar=p.get("x_bar", 0.0))


def build_economy(spec: dict) -> het.HeterogeneousEconomy:
    for key in ("products", "inputs", "alpha", "beta", "n"):
        if key not in spec:
            raise ScenarioError(f"het.economy.{key}", "required field missing")
    n_spec = spec["n"]
    n_map: dict = {}
    for prod, val in n_spec.items():
        if isinstance(val, dict):
            for inp, nv in val.items():
                n_map[(prod, inp)] = nv
        else:
            n_map[prod] = val
    gamma = None
    if spec.get("gamma"):
        gamma = {(prod, inp): g for prod, row in spec["gamma"].items()
                 for inp, g in row.items()}
    try:
        return het.HeterogeneousEconomy(
            products=tuple(spec["products"]),
            inputs=spec["inputs"],
            n=n_map,
            alpha=spec["alpha"],
            beta=spec["beta"],
            gamma=gamma,
        )
    except (KeyError, ValueError) as exc:
        raise ScenarioError("het.economy", str(exc)) from exc


# --- output helpers ---------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path: str | None, header: list[str], rows: list[list[float]]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    return text


def write_json(path: str | None, payload: dict) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    return text


def _eq_record(eq) -> dict:
    return {
        "f_star": eq.f_star,
        "x_star": eq.x_star,
        "r": eq.r,
        "regime": eq.regime.value,
        "gross_profit": eq.gross_profit,
        "marginal_net_profit": eq.marginal_net_profit,
        "output": eq.output,
    }


# --- dispatch ---------------------------------------------------------------


def dispatch(sc: Scenario) -> str:
    """Run the scenario; returns the emitted text (also written to sc.out)."""
    p = sc.params
    if sc.kind == "reliability":
        tech = Technology(p["m"], p["n"])
        xs = np.linspace(0.0, 1.0, sc.grid)
        rows = [[x, rho(tech, float(x))] for x in xs]
        return write_csv(sc.out, ["x", "rho"], rows)

    if sc.kind == "critical":
        tech = Technology(p["m"], p["n"])
        if tech.m == 1:
            payload = {"m": tech.m, "n": tech.n, "transition": "continuous",
                       "threshold": simple_threshold(tech.n)}
        else:
            cp = critical_point(tech)
            payload = {"m": tech.m, "n": tech.n, "transition": "first-order",
                       "x_crit": cp.x_crit, "r_crit": cp.r_crit}
        return write_json(sc.out, payload)

    if sc.kind == "planner":
        tech = Technology(p["m"], p["n"])
        cost = build_cost(p.get("cost"))
        kappa = _require(p, "kappa", "planner")
        sol = planner_solve(tech, cost, kappa)
        payload = {"kappa": kappa, "x_sp": sol.x_sp, "value": sol.value,
                   "kappa_crit": kappa_crit_planner(tech, cost)}
        return write_json(sc.out, payload)

    if sc.kind == "equilibrium":
        prim = build_primitives(p, "equilibrium")
        report = validate_primitives(prim)
        if not report.ok:
            raise ScenarioError("equilibrium.primitives", "; ".join(report.violations))
        eq = entry_equilibrium(prim)
        payload = {"scenario": {"kind": "equilibrium", **p},
                   "kappa_lower": kappa_lower(prim),
                   "kappa_upper": kappa_upper(prim),
                   "equilibrium": _eq_record(eq)}
        return write_json(sc.out, payload)

    if sc.kind == "sweep":
        return _dispatch_sweep(sc)

    if sc.kind == "het":
        return _dispatch_het(sc)

    if sc.kind == "montecarlo":
        return _dispatch_montecarlo(sc)

    if sc.kind == "cascade":
        return _dispatch_cascade(sc)

    raise ScenarioError("kind", f"unhandled kind {sc.kind!r}")


def _dispatch_sweep(sc: Scenario) -> str:
    p = sc.params
    over = p.get("over", "kappa")
    if over == "kappa":
        prim0 = build_primitives(p, "sweep", kappa=1.0)
        lo = p.get("kappa_lo") or 0.5 * kappa_lower(prim0)
        hi = p.get("kappa_hi") or 1.5 * (kappa_upper(prim0) or 4.0 * kappa_lower(prim0))
        rows = []
        for kap in np.linspace(lo, hi, sc.grid):
            eq = entry_equilibrium(prim0.with_kappa(float(kap)))
            rows.append([kap, eq.f_star, eq.x_star, eq.r, eq.gross_profit,
                         eq.marginal_net_profit,
                         {"Unproductive": 0, "Critical": 1, "Noncritical": 2}[eq.regime.value]])
        return write_csv(sc.out, ["kappa", "f_star", "x_star", "rho",
                                  "gross_profit", "marginal_net_profit", "regime"], rows)
    if over == "entry":
        prim = build_primitives(p, "sweep")
        rows = []
        for f in np.linspace(0.0, 1.0, sc.grid):
            eq = investment_equilibrium(float(f), prim, verify=False)
            rows.append([f, eq.x_star, eq.r, entry_map_H(float(f), prim)])
        return write_csv(sc.out, ["f_bar", "x_star", "rho", "H"], rows)
    raise ScenarioError("sweep.over", f"must be 'kappa' or 'entry', got {over!r}")


def _dispatch_het(sc: Scenario) -> str:
    p = sc.params
    econ = build_economy(p["economy"])
    pins = p.get("pins")
    if pins is None:
        raise ScenarioError("het.pins", "pin vector required")
    if isinstance(pins, dict):
        pins = [pins[prod] for prod in econ.products]
    eq = het.het_construct_equilibrium(econ, np.asarray(pins, dtype=float))
    payload: dict[str, Any] = {
        "scenario": {"kind": "het", **p},
        "equilibrium": {
            "X": [[v for v in row] for row in eq.X.tolist()],
            "r": eq.r.tolist(),
            "f_bar": eq.f_bar.tolist(),
            "G": eq.G.tolist(),
            "beta": eq.beta.tolist(),
            "gross_profit": eq.gross_profit.tolist(),
            "net_profit": eq.net_profit.tolist(),
            "critical": [bool(c) for c in eq.critical],
            "at_fold": eq.at_fold,
        },
    }
    rep = het.weakest_link_analysis(econ, eq)
    payload["weakest_link"] = {
        "components": rep.components,
        "failure_sets": rep.failure_sets,
    }
    shock = p.get("shock")
    if shock is not None:
        for key in ("product", "input"):
            if key not in shock:
                raise ScenarioError(f"het.shock.{key}", "required field missing")
        edge = (shock["product"], shock["input"])
        eps = shock.get("eps", 0.01)
        post = het.het_shock(econ, eq, edge, eps)
        payload["shock"] = {"edge": list(edge), "eps": eps,
                            "r_post": post.tolist()}
    return write_json(sc.out, payload)


def _dispatch_montecarlo(sc: Scenario) -> str:
    p = sc.params
    tech = Technology(p["m"], p["n"])
    mode = p.get("mode", "tree")
    if mode == "tree":
        est = mc.sample_tree_reliability(tech, _require(p, "x", "montecarlo"),
                                         p.get("T", 7), p.get("trials", 100_000),
                                         sc.seed)
        payload = {"mode": "tree", "estimate": est.value, "stderr": est.stderr,
                   "trials": est.trials, "seed": est.seed}
    elif mode == "population":
        frac = mc.sample_population_reliability(
            p.get("products", tech.m + 1), p.get("N", 1000), tech,
            _require(p, "x", "montecarlo"), p.get("T_rounds"),
            p.get("trials", 3), sc.seed)
        payload = {"mode": "population", "fractions": frac.tolist(),
                   "seed": sc.seed}
    else:
        raise ScenarioError("montecarlo.mode", f"must be 'tree' or 'population', got {mode!r}")
    return write_json(sc.out, payload)


def _dispatch_cascade(sc: Scenario) -> str:
    p = sc.params
    base = build_primitives(p, "cascade", kappa=1.0)
    kl = kappa_lower(base)
    lo = p.get("lo", kl)
    hi = p.get("hi", 4.0)
    if hi <= lo:
        raise ScenarioError("cascade.hi", "upper bound must exceed lo")
    ens = casc.draw_ensemble(base, p.get("sectors", 100), lo, hi,
                             p.get("theta", 1.0), sc.seed)
    census = casc.fragility_census(ens)
    traj = casc.run_cascade(ens)
    payload = {
        "scenario": {"kind": "cascade", **p},
        "seed": sc.seed,
        "census": {"fragile": census.fragile, "robust": census.robust,
                   "unproductive": census.unproductive},
        "steps": [{"step": s.step, "surviving": s.surviving, "Y": s.output}
                  for s in traj.steps],
        "total_failures": traj.total_failures,
        "full_collapse": traj.full_collapse,
    }
    return write_json(sc.out, payload)


# --- argument parsing ---------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", type=str, default=None, help="scenario JSON file")
    sub.add_argument("--out", type=str, default=None, help="output file path")
    sub.add_argument("--seed", type=int, default=None, help="RNG seed")
    sub.add_argument("--grid", type=int, default=None, help="grid points for curves")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker cap (FRAGLAB_THREADS as fallback)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraglab",
                                 description="supply-network fragility laboratory")
    subs = ap.add_subparsers(dest="command", required=True)
    specs: dict[str, list[tuple[str, type]]] = {
        "reliability": [("--m", int), ("--n", int)],
        "critical-point": [("--m", int), ("--n", int)],
        "planner": [("--m", int), ("--n", int), ("--kappa", float)],
        "equilibrium": [("--m", int), ("--n", int), ("--kappa", float)],
        "sweep-kappa": [("--m", int), ("--n", int),
                        ("--kappa-lo", float), ("--kappa-hi", float)],
        "sweep-entry": [("--m", int), ("--n", int), ("--kappa", float)],
        "het-solve": [],
        "het-shock": [("--product", str), ("--input", str), ("--eps", float)],
        "montecarlo": [("--m", int), ("--n", int), ("--x", float), ("--T", int),
                       ("--trials", int), ("--mode", str)],
        "cascade": [("--m", int), ("--n", int), ("--sectors", int),
                    ("--lo", float), ("--hi", float), ("--theta", float)],
    }
    for name, args in specs.items():
        sub = subs.add_parser(name)
        _add_common(sub)
        for flag, typ in args:
            sub.add_argument(flag, type=typ, default=None)
    return ap


def _assemble(args: argparse.Namespace) -> Scenario:
    kind = _SUBCOMMAND_KIND[args.command]
    if args.config:
        sc = parse_scenario(args.config)
        if sc.kind != kind:
            raise ScenarioError("kind", f"config is a {sc.kind!r} scenario but the "
                                        f"subcommand expects {kind!r}")
    else:
        sc = Scenario(kind=kind)
    # flags override file values
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "out", "seed", "grid", "threads")
                 and v is not None}
    if args.command == "sweep-kappa":
        sc.params["over"] = "kappa"
    if args.command == "sweep-entry":
        sc.params["over"] = "entry"
    if args.command == "het-shock":
        shock = sc.params.get("shock", {})
        for key in ("product", "input", "eps"):
            if overrides.get(key) is not None:
                shock[key] = overrides.pop(key)
        sc.params["shock"] = shock
    sc.params.update(overrides)
    if args.out is not None:
        sc.out = args.out
    if args.seed is not None:
        sc.seed = args.seed
    if args.grid is not None:
        sc.grid = args.grid
    if args.threads is not None:
        sc.threads = args.threads
    elif os.environ.get("FRAGLAB_THREADS"):
        sc.threads = int(os.environ["FRAGLAB_THREADS"])
    validate_scenario(sc)
    return sc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _assemble(args)
        text = dispatch(sc)
    except ScenarioError as exc:
        sys.stderr.write(json.dumps(exc.record()) + "\n")
        return 2
    except Exception as exc:  # solver failures: machine-readable reason
        sys.stderr.write(json.dumps(
            {"error": {"field": None, "message": str(exc)}}) + "\n")
        return 1
    if not sc.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
