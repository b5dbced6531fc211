"""Command-line entry point.

Every run is driven by a resolved JSON config (defaults, then a preset, then
``--config``, then flags). The config and the tool version are embedded in
every output, so rerunning a config reproduces its output byte for byte.

Exit codes: 0 success, 1 verification failure, 2 usage or budget error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any

from flipdyn import __version__
from flipdyn.clusters import enumerate_clusters
from flipdyn.coloring import (
    EXTREMAL_TUPLES,
    AdjacentPair,
    Coloring,
    default_eta,
    is_proper,
    random_proper_coloring,
)
from flipdyn.coupling import (
    adjacent_contraction,
    adjacent_pairs,
    agreement_bound,
    coalescence_experiment,
    coupled_law,
    dist2_disagreement_mass,
)
from flipdyn.dynamics import RoundParams, distributed_round, theory_alpha
from flipdyn.exact import (
    BudgetError,
    check_ergodicity,
    empirical_distribution,
    enumerate_colorings,
    mixing_profile,
    stationary,
    transition_matrix,
    tv_distance,
)
from flipdyn.graph import Graph, GraphError, generate, read_edge_list
from flipdyn.local import audit_protocol, run_local_round
from flipdyn.phi import phi, phi_scan
from flipdyn.schedules import ScheduleError, get_schedule, parse_schedule, schedule_report

COMMANDS = ("simulate", "schedule-check", "phi-scan", "exact", "couple", "local-check")

DEFAULTS: dict[str, Any] = {
    "graph": {"kind": "cycle", "n": 4},
    "k": 4,
    "alpha": "1/100",
    "schedule": "vigoda",
    "seed": 0,
    "params": {},
}

PRESETS: dict[str, dict[str, Any]] = {
    "asymmetry": {
        "command": "exact", "graph": {"kind": "cycle", "n": 4}, "k": 4,
        "params": {"sigma": [1, 2, 3, 2], "tau": [4, 2, 4, 2], "alphas": ["1/10", "1/100"]},
    },
    "p3-k4": {
        "command": "exact", "graph": {"kind": "path", "n": 3}, "k": 4, "alpha": "1/20",
        "params": {"t_max": 60, "samples": 100000},
    },
    "phi-vigoda": {"command": "phi-scan", "schedule": "vigoda", "params": {"d_max": 6}},
    "phi-cdmpp": {"command": "phi-scan", "schedule": "cdmpp", "params": {"d_max": 6}},
    "contraction": {
        "command": "couple", "graph": {"kind": "cycle", "n": 4}, "k": 4, "alpha": "1/100",
        "params": {"experiment": "contraction"},
    },
    "dist2-mass": {
        "command": "couple", "graph": {"kind": "path", "n": 4}, "k": 4, "alpha": "1/100",
        "params": {"experiment": "dist2"},
    },
    "agreement-bound": {
        "command": "couple", "graph": {"kind": "path", "n": 4}, "k": 4, "alpha": "1/100",
        "params": {"experiment": "agreement"},
    },
    "coalescence": {
        "command": "couple", "graph": {"kind": "cycle"}, "k": 5, "alpha": "1/20",
        "params": {"experiment": "coalescence", "sizes": [16, 32, 64], "pairs": 20, "horizon": 4000},
    },
}


class UsageError(Exception):
    """Bad configuration; exit code 2."""


def fmt(x: Any) -> Any:
    """JSON-ready form: rationals as ``"num/den"``, containers recursively."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def workers() -> int:
    cap = os.environ.get("FLIPDYN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"FLIPDYN_THREADS must be an integer, got {cap!r}") from None
    return n


# ---------------------------------------------------------------- config


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if k == "params" and isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if args.preset:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        preset = PRESETS[args.preset]
        if preset["command"] != command:
            raise UsageError(f"preset {args.preset!r} belongs to the {preset['command']!r} command")
        cfg = _merge(cfg, {k: v for k, v in preset.items() if k != "command"})
        cfg["preset"] = args.preset
    if args.config:
        try:
            cfg = _merge(cfg, json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if args.seed is not None:
        cfg["seed"] = args.seed
    if getattr(args, "schedule", None):
        cfg["schedule"] = args.schedule
    if getattr(args, "engine", None):
        cfg["engine"] = args.engine
    cfg["command"] = command
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return cfg


def build_graph_from(spec: dict) -> Graph:
    if "file" in spec:
        return read_edge_list(Path(spec["file"]).read_text())
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind is None:
        raise UsageError("graph needs 'kind' or 'file'")
    seed = spec.pop("seed", None)
    return generate(kind, seed=seed, **spec)


def resolve_alpha(cfg: dict, g: Graph) -> Fraction:
    a = cfg["alpha"]
    if a in ("theory-default", "paper-default"):  # the second spelling is kept as an alias
        val = theory_alpha(cfg["k"], g.max_degree)
        cfg["alpha_resolved"] = fmt(val)
        return val
    try:
        return Fraction(str(a))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad alpha {a!r}") from None


def resolve_schedule(cfg: dict):
    s = cfg["schedule"]
    if isinstance(s, dict) and "file" in s:
        return parse_schedule(Path(s["file"]).read_text(), s.get("name", "custom"))
    if isinstance(s, str) and s not in ("vigoda", "cdmpp") and Path(s).is_file():
        return parse_schedule(Path(s).read_text(), Path(s).stem)
    return get_schedule(s)


def params_of(cfg: dict, g: Graph) -> RoundParams:
    return RoundParams(resolve_alpha(cfg, g), resolve_schedule(cfg), cfg["seed"])


# ---------------------------------------------------------------- commands
# each returns (payload, csv rows or None, ok flag, extra files)


def cmd_simulate(cfg: dict):
    g = build_graph_from(cfg["graph"])
    k = cfg["k"]
    params = params_of(cfg, g)
    p = cfg["params"]
    T = int(p.get("T", 100))
    engine = cfg.get("engine", "direct")
    if engine not in ("direct", "local"):
        raise UsageError("engine must be 'direct' or 'local'")
    if "start" in p:
        sigma = Coloring(tuple(p["start"]), k)
    else:
        sigma = random_proper_coloring(g, k, random.Random(cfg["seed"]))
    if not is_proper(g, sigma):
        raise UsageError("start coloring is not proper")
    flips = 0
    proper = True
    messages = 0
    traj = [list(sigma.colors)]
    for t in range(T):
        pt = params.at(t)
        if engine == "local":
            run = run_local_round(g, sigma, pt)
            sigma, n_flip = run.result, len(run.trace.flipped)
            messages += run.message_count()
        else:
            sigma, tr = distributed_round(g, sigma, pt, check=False)
            n_flip = len(tr.flipped)
        flips += n_flip
        proper = proper and is_proper(g, sigma)
        traj.append(list(sigma.colors))
    out = {"rounds": T, "flips": flips, "proper_every_step": proper, "final": list(sigma.colors), "engine": engine}
    if engine == "local":
        out["messages"] = messages
    rows = [["t", "coloring"]] + [[t, " ".join(map(str, c))] for t, c in enumerate(traj)]
    extra = {"trajectory.jsonl": "".join(json.dumps(c) + "\n" for c in traj)} if p.get("trajectory") else {}
    return out, rows, proper, extra


def cmd_schedule_check(cfg: dict):
    s = resolve_schedule(cfg)
    rep = schedule_report(s)
    rows = [["check", "max_value", "bound", "passed"]]
    for key in ("P1", "P2"):
        rows.append([key, rep[key]["max_value"], rep[key]["bound"], rep[key]["passed"]])
    for key in ("size_excess", "pair_sum"):
        c = rep["aux"][key]
        rows.append([c["name"], c["max_value"], c["bound"], c["passed"]])
    return rep, rows, rep["passed"], {}


def cmd_phi_scan(cfg: dict):
    s = resolve_schedule(cfg)
    p = cfg["params"]
    d_max = int(p.get("d_max", 6))
    size_max = int(p.get("size_max", 6))
    general = phi_scan(s, d_max, size_max)
    out: dict = {"general": general.to_json()}
    ok = general.passed
    rows = [["scan", "d", "phi_max", "bound", "slack"]]
    for d, r in sorted(general.per_d.items()):
        rows.append(["general", d, fmt(r.phi), fmt(r.bound), fmt(r.slack)])
    if s.name == "cdmpp":
        refined = phi_scan(s, d_max, size_max, c0_only=True)
        out["c0_refined"] = refined.to_json()
        for d, r in sorted(refined.per_d.items()):
            rows.append(["c0_refined", d, fmt(r.phi), fmt(r.bound), fmt(r.slack)])
        witnesses = []
        for cfg_x in EXTREMAL_TUPLES:
            rep = phi(cfg_x, s)
            witnesses.append({**rep.to_json(), "equality": rep.slack == 0})
            ok = ok and rep.slack == 0
        out["extremal_witnesses"] = witnesses
        ok = ok and refined.passed
    return out, rows, ok, {}


def _asymmetry(cfg: dict, g: Graph):
    k = cfg["k"]
    p = cfg["params"]
    sigma, tau = Coloring(tuple(p["sigma"]), k), Coloring(tuple(p["tau"]), k)
    counts = {"sigma": len(enumerate_clusters(g, sigma)), "tau": len(enumerate_clusters(g, tau))}
    rows = [["alpha", "P(sigma->tau)", "P(tau->sigma)", "differ"]]
    per_alpha = []
    ok = True
    space = enumerate_colorings(g, k)
    for a in p.get("alphas", [cfg["alpha"]]):
        a = Fraction(str(a))
        P = transition_matrix(g, k, RoundParams(a, resolve_schedule(cfg), cfg["seed"]), space)
        st, ts = P.prob_colorings(sigma, tau), P.prob_colorings(tau, sigma)
        per_alpha.append({"alpha": fmt(a), "sigma_to_tau": fmt(st), "tau_to_sigma": fmt(ts), "differ": st != ts})
        rows.append([fmt(a), fmt(st), fmt(ts), st != ts])
        ok = ok and st != ts
    return {"cluster_counts": counts, "transitions": per_alpha}, rows, ok, {}


def cmd_exact(cfg: dict):
    g = build_graph_from(cfg["graph"])
    if "sigma" in cfg["params"]:
        return _asymmetry(cfg, g)
    k = cfg["k"]
    params = params_of(cfg, g)
    p = cfg["params"]
    space = enumerate_colorings(g, k)
    P = transition_matrix(g, k, params, space)
    erg = check_ergodicity(P)
    out: dict = {"states": len(space), "row_sums_exact": all(r == 1 for r in P.row_sums()),
                 "irreducible": erg.irreducible, "aperiodic": erg.aperiodic}
    if not erg.ergodic:
        return out, None, False, {}
    pi = stationary(P)
    uniform = [1 / len(space)] * len(space)
    out["tv_pi_uniform"] = tv_distance(pi, uniform)
    prof = mixing_profile(P, pi, int(p.get("t_max", 60)))
    out["t_mix"] = prof.t_mix
    out["tv_curve"] = list(prof.curve)
    ok = prof.t_mix is not None
    samples = int(p.get("samples", 0))
    if samples and prof.t_mix is not None:
        T = 4 * max(prof.t_mix, 1)
        emp = empirical_distribution(g, k, params, T, samples, reference=pi, space=space)
        out["empirical"] = {"rounds": T, "chains": samples, "tv_to_pi": emp.tv_to_reference}
    rows = [["t", "tv"]] + [[t, f"{d:.12g}"] for t, d in enumerate(prof.curve)]
    return out, rows, ok, {"tv_curve.csv": prof.to_csv()}


def _contraction_one(args):
    g, k, params, pair, eta = args
    return adjacent_contraction(g, k, params, pair=pair, eta=eta)[0]


def _pairs(cfg: dict, g: Graph):
    p = cfg["params"]
    if "pair" in p:
        X = Coloring(tuple(p["pair"]["X"]), cfg["k"])
        Y = Coloring(tuple(p["pair"]["Y"]), cfg["k"])
        return [AdjacentPair.from_colorings(X, Y)]
    return adjacent_pairs(g, cfg["k"])


def cmd_couple(cfg: dict):
    p = cfg["params"]
    exp = p.get("experiment", "contraction")
    if exp == "coalescence":
        return _coalescence(cfg)
    g = build_graph_from(cfg["graph"])
    params = params_of(cfg, g)
    pairs = _pairs(cfg, g)
    if exp == "contraction":
        eta = Fraction(str(p["eta"])) if "eta" in p else default_eta(g.max_degree, cfg["k"])
        jobs = [(g, cfg["k"], params, pr, eta) for pr in pairs]
        n_workers = min(workers(), len(jobs))
        if n_workers > 1:
            with ProcessPoolExecutor(n_workers) as pool:
                results = list(pool.map(_contraction_one, jobs))
        else:
            results = [_contraction_one(j) for j in jobs]
        rows = [["X", "Y", "v_star", "E[H']", "H_w", "E[H_w'] upper", "contracts", "weighted_contracts"]]
        for r in results:
            rows.append([" ".join(map(str, r.pair.X.colors)), " ".join(map(str, r.pair.Y.colors)), r.pair.v_star,
                         fmt(r.expected_hamming), fmt(r.weighted_before), fmt(r.weighted_after_upper),
                         r.contracts, r.weighted_contracts])
        ok = all(r.contracts for r in results)
        if params.schedule.name == "cdmpp":
            ok = ok and all(r.weighted_contracts for r in results)
        return {"eta": fmt(eta), "pairs": [r.to_json() for r in results]}, rows, ok, {}
    if exp in ("dist2", "agreement"):
        rows, recs, ok = None, [], True
        for pr in pairs:
            law = coupled_law(g, pr, params.alpha, params.schedule)
            if exp == "dist2":
                res = dist2_disagreement_mass(g, pr, params, law=law)
                good = max(res["own_flip"], res["literal"]) <= res["bound_288"]
                rows = rows or [["X", "Y", "own_flip", "literal", "bound_288", "ok"]]
                rows.append([" ".join(map(str, pr.X.colors)), " ".join(map(str, pr.Y.colors)),
                             fmt(res["own_flip"]), fmt(res["literal"]), fmt(res["bound_288"]), good])
            else:
                res = agreement_bound(g, pr, params, law=law)
                good = res["probability"] >= res["lower_bound"]
                rows = rows or [["X", "Y", "probability", "lower_bound", "ok"]]
                rows.append([" ".join(map(str, pr.X.colors)), " ".join(map(str, pr.Y.colors)),
                             fmt(res["probability"]), fmt(res["lower_bound"]), good])
            ok = ok and good
            recs.append({"X": list(pr.X.colors), "Y": list(pr.Y.colors), "v_star": pr.v_star, **fmt(res), "ok": good})
        return {"experiment": exp, "pairs": recs}, rows, ok, {}
    raise UsageError(f"unknown couple experiment {exp!r}")


def _coalescence(cfg: dict):
    p = cfg["params"]
    sizes = p.get("sizes", [16, 32, 64])
    rows = [["n", "median", "censored", "pairs", "horizon"]]
    out = []
    for n in sizes:
        g = build_graph_from({**cfg["graph"], "n": n})
        params = params_of(cfg, g)
        res = coalescence_experiment(g, cfg["k"], params, int(p.get("pairs", 20)), int(p.get("horizon", 4000)))
        rec = {"n": n, "median": res["median"], "censored": res["censored"],
               "times": [r.time for r in res["records"]], "horizon": res["horizon"]}
        out.append(rec)
        rows.append([n, res["median"], res["censored"], len(res["records"]), res["horizon"]])
    medians = [r["median"] for r in out]
    grows = all(a <= b for a, b in zip(medians, medians[1:]))
    return {"experiment": "coalescence", "sizes": out, "median_nondecreasing": grows}, rows, True, {}


def cmd_local_check(cfg: dict):
    p = cfg["params"]
    count = int(p.get("instances", 100))
    n_max = int(p.get("n_max", 30))
    rng = random.Random(cfg["seed"])
    mismatches, violations, rounds = [], 0, set()
    rows = [["instance", "n", "k", "rounds_used", "messages", "equal", "audit_ok"]]
    for i in range(count):
        d = rng.choice([2, 3, 4])
        n = rng.randint(d + 2, n_max)
        if n * d % 2:
            n -= 1
        g = generate("random_regular", n=n, d=d, seed=rng.getrandbits(32))
        k = rng.randint(d + 2, 2 * d + 2)
        sigma = random_proper_coloring(g, k, rng)
        params = RoundParams(Fraction(rng.choice([1, 5, 20, 50]), 100), seed=rng.getrandbits(64), round_index=i)
        direct, trace = distributed_round(g, sigma, params)
        run = run_local_round(g, sigma, params)
        audit = audit_protocol(run, g)
        equal = run.result == direct and run.trace == trace
        if not equal:
            mismatches.append(i)
        violations += len(audit.locality) + len(audit.budget) + len(audit.responsibility)
        rounds.add(run.rounds_used)
        rows.append([i, n, k, run.rounds_used, run.message_count(), equal, audit.ok])
    out = {"instances": count, "mismatches": mismatches, "violations": violations, "rounds_used": sorted(rounds)}
    return out, rows, not mismatches and violations == 0 and len(rounds) == 1, {}


HANDLERS = {
    "simulate": cmd_simulate,
    "schedule-check": cmd_schedule_check,
    "phi-scan": cmd_phi_scan,
    "exact": cmd_exact,
    "couple": cmd_couple,
    "local-check": cmd_local_check,
}


# ---------------------------------------------------------------- output


def render(cfg: dict, payload: dict, rows, ok: bool, form: str) -> str:
    if form == "csv":
        if rows is None:
            raise UsageError("this result has no CSV form")
        buf = io.StringIO()
        buf.write(f"# flipdyn {__version__}\n# config: {json.dumps(cfg, sort_keys=True)}\n")
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    doc = {"version": __version__, "config": cfg, "ok": ok, "result": fmt(payload)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flipdyn", description="Distributed flip dynamics: simulation and exact checks.")
    ap.add_argument("--version", action="version", version=f"flipdyn {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--preset", help=f"named config: {', '.join(sorted(PRESETS))}")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--out", help="directory for output files")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--schedule", help="vigoda, cdmpp, or a schedule file")
        if name == "simulate":
            sp.add_argument("--engine", choices=("direct", "local"))
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        payload, rows, ok, extra = HANDLERS[args.command](cfg)
        text = render(cfg, payload, rows, ok, args.format)
    except (UsageError, BudgetError, ScheduleError, GraphError, ValueError, KeyError, TypeError) as exc:
        print(f"flipdyn: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.{args.format}").write_text(text)
        for name, body in extra.items():
            (out / name).write_text(body)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
