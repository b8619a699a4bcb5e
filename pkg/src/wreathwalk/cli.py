"""Command line harness: one subcommand per experiment family.

Every run writes ``<out>/<name>.csv`` and ``<out>/<name>.manifest``.  The
CSV starts with a comment line carrying the config hash and RNG identifier,
then a header row.  Rows are computed in full before anything is written,
so a failing run leaves no files behind.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from fractions import Fraction

import numpy as np
import scipy
import tomli

from . import __version__
from .errors import CapError, ConfigError, InvariantViolation, SolverDiverged, WreathWalkError
from .rng import RNG_ID, make_rng

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4
ENV_OUT = "WREATHWALK_OUT"
ENV_THREADS = "WREATHWALK_THREADS"

# name -> (provenance tag, description)
PRESETS = {
    "srw-z": ("§2", "simple random walk on Z"),
    "ll-z2": ("§3.1", "Z/2 wr Z, mu = 1/4 t^(+-1) + 1/4 (s d0, 1) + 1/4 (s d-1, -1), R = 2, F = <s d0>"),
    "symz-nonnormal": ("§3.1", "Sym(Z) x| Z with F = <(0 1)>, not normalised by the steps"),
    "delta-d8": ("§3.3", "diagonal product, A = B = Z/2, Gamma = D8, k = (1,2), m = (4,8)"),
    "delta-dinfty": ("§3.3", "diagonal product with Gamma = D_inf, k = (1,2), m = (4,8)"),
    "voltage-z3": ("§4.1", "voltage of SRW on Z^3 and the cocycle on Z/2 wr Z^3"),
    "symz": ("§4.2", "Sym(Z) x| Z acting on Z, mu = 1/4 t + 1/4 t^-1 + 1/2 (0 1)"),
    "da-q2": ("§4.2", "discrete affine group of the 3-regular tree, F = Z/2"),
    "plateau-z2": ("§5", "lazy walk on Z/2 wr Z, 1/4 t^(+-1) + 1/2 uniform lamp at the cursor"),
    "embed-s3": ("§5", "Sym(3) with c_1 = (1 2), c_2 = (1 3), k = (1,3)"),
    "zwz": ("App. A", "Z wr Z with integer lamps, theta = 1/2 (mu + nu)"),
}


def _ints(s):
    if isinstance(s, (list, tuple)):
        return [int(x) for x in s]
    return [int(x) for x in str(s).replace(" ", "").split(",") if x]


def _frac(s):
    return Fraction(str(s))


def _fmt(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.integer):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Result:
    def __init__(self, header, rows, summary=None, code=EXIT_OK, stdout=None, extra=None):
        self.header, self.rows = header, rows
        self.summary = summary or {}
        self.code = code
        self.stdout = stdout
        self.extra = extra or {}  # file suffix -> text


# subcommands: each entry is (options, runner).  Options are
# (name, parser, default, help).

def _preset_measure(name):
    from .coupling import ll_z2_measure
    from .groups.finite import cyclic_group
    from .groups.line import IntegerLine
    from .groups.wreath import lamplighter
    from .walks.measure import Measure
    if name == "srw-z":
        L = IntegerLine()
        return L, Measure.from_fractions(L, {1: Fraction(1, 2), -1: Fraction(1, 2)})
    if name == "ll-z2":
        G = lamplighter(cyclic_group(2))
        return G, ll_z2_measure(G)
    if name == "plateau-z2":
        from .constructions import plateau_measure_steps
        F = cyclic_group(2)
        G = lamplighter(F)
        atoms = {}
        for lamps, move, p in plateau_measure_steps(F):
            g = G.element({off: v for off, v in lamps}, move)
            atoms[g] = atoms.get(g, 0) + p
        return G, Measure.from_fractions(G, atoms)
    raise ConfigError(f"preset {name!r} has no step distribution")


def run_walk_speed(p):
    from .walks.simulate import speed_estimate
    G, mu = _preset_measure(p["preset"])
    metric = "abs" if p["preset"] == "srw-z" else "lamplighter-line"
    rows = []
    for n in _ints(p["n"]):
        r = speed_estimate(G, mu, n, p["trials"], p["seed"], metric)
        ref = math.sqrt(2 * n / math.pi) if p["preset"] == "srw-z" else float("nan")
        rows.append((n, r["mean"], r["stderr"], r["trials"], metric,
                     r["mean"] / math.sqrt(n) if n else float("nan"), ref))
    return Result(["n", "mean", "stderr", "trials", "metric", "mean_over_sqrt_n", "srw_reference"], rows,
                  {"metric": metric})


def run_convolve(p):
    from .walks.measure import convolve_exact
    G, mu = _preset_measure(p["preset"])
    m = convolve_exact(mu, p["n"])
    key = getattr(G, "key", str)
    rows = sorted((key(g), Fraction(w, m.denom)) for g, w in m.weights.items())
    return Result(["element", "probability"], rows, {"atoms": len(rows), "mass": m.mass()})


def run_tv(p):
    from .walks.measure import convolve_exact, tv_distance
    _, mu = _preset_measure(p["preset"])
    a, b = convolve_exact(mu, p["n"]), convolve_exact(mu, p["m"])
    tv = tv_distance(a, b)
    return Result(["n", "m", "tv", "tv_float"], [(p["n"], p["m"], tv, float(tv))])


def _parse_wreath(G, s):
    """``e``, ``sigmaK`` (lamp at K) or a key ``site:val;...|pos``."""
    s = str(s).strip()
    if s == "e":
        return G.identity
    if s.startswith("sigma"):
        return G.element({int(s[5:]): 1}, 0)
    try:
        lamps, pos = s.split("|")
        items = {}
        for part in filter(None, lamps.split(";")):
            site, val = part.split(":")
            items[int(site)] = int(val)
        return G.element(items, int(pos))
    except ValueError:
        raise ConfigError(f"cannot parse element {s!r}") from None


def run_sn_delta(p):
    from .walks.measure import convolve_exact, sn_delta_member
    G, mu = _preset_measure(p["preset"])
    power = convolve_exact(mu, p["n"])
    rows = []
    for s in str(p["elements"]).split(","):
        g = _parse_wreath(G, s)
        ok, tv = sn_delta_member(g, p["n"], _frac(p["delta"]), mu, power=power)
        rows.append((G.key(g), p["n"], tv, int(ok)))
    return Result(["element", "n", "tv", "member"], rows)


def _ll_config(p):
    from .coupling import CouplingConfig, ll_z2_measure
    from .groups.finite import cyclic_group
    from .groups.wreath import lamplighter
    if p["preset"] != "ll-z2":
        raise ConfigError("the main coupling is wired for preset ll-z2")
    G = lamplighter(cyclic_group(2))
    gamma = _parse_wreath(G, p["gamma"])
    F = (G.identity, G.element({0: 1}, 0))
    return CouplingConfig.build(G, ll_z2_measure(G), F, 2, gamma, p["x"])


def run_couple(p):
    from .coupling import couple_main, tail_profile
    cfg = _ll_config(p)
    ns = _ints(p["ns"])
    rows = tail_profile(cfg, ns, p["trials"], p["seed"])
    extra = {}
    if p["dump"]:
        recs = [couple_main(cfg, max(ns), p["seed"], (i,), stop_at_tau=True).to_dict(cfg.group)
                for i in range(p["dump"])]
        extra["records.jsonl"] = "".join(json.dumps(r, default=str) + "\n" for r in recs)
    return Result(["n", "p_hat", "stderr", "sqrt_n_times_p"], rows,
                  {"epsilon": cfg.epsilon, "R": cfg.R}, extra=extra)


def run_couple_exit(p):
    from .coupling import exit_profile
    cfg = _ll_config(p)
    rows = exit_profile(cfg, _ints(p["rs"]), p["trials"], p["seed"])
    return Result(["r", "p_not_coupled_at_exit", "stderr", "r_times_p"], rows, {"epsilon": cfg.epsilon})


def fc_preset_config(name="delta-d8"):
    from .constructions import build_delta, d8_kernel_generator, delta_d8_spec
    from .coupling import FCConfig, fc_delta_measure
    if name != "delta-d8":
        raise ConfigError("couple-fc is wired for preset delta-d8")
    delta = build_delta(delta_d8_spec())
    k = delta.kernel_element(1, 0, d8_kernel_generator(delta, 1))
    return FCConfig.build(delta, fc_delta_measure(delta, k), k, R=1)


def run_couple_fc(p):
    from .coupling import fc_tau_sample, geometric_ks_pvalue
    cfg = fc_preset_config(p["preset"])
    taus = fc_tau_sample(cfg, cfg.group.identity, p["runs"], p["horizon"], p["seed"])
    eps = float(cfg.epsilon)
    rows = []
    for n in range(0, p["n_max"] + 1):
        emp = float((taus > n).mean())
        th = (1 - eps) ** n
        rows.append((n, emp, math.sqrt(th * (1 - th) / len(taus)), th))
    return Result(["n", "p_not_coupled", "stderr", "geometric"], rows,
                  {"epsilon": cfg.epsilon, "mean_tau": float(taus.mean()),
                   "ks_pvalue": geometric_ks_pvalue(taus, cfg.epsilon, p["seed"]),
                   "class_size": len(cfg.conj_class)})


def run_non_normal(p):
    from .coupling import non_normal_demo
    rows = []
    for s in range(p["seed"], p["seed"] + p["runs"]):
        r = non_normal_demo(s, p["horizon"])
        rows.append((s, "" if r.violation_step is None else r.violation_step,
                     "" if r.tau is None else _fmt(r.tau)))
    hits = sum(1 for r in rows if r[1] != "")
    return Result(["seed", "violation_step", "tau"], rows, {"violations": hits},
                  code=EXIT_INVARIANT if hits else EXIT_OK)


def run_harmonic_verify(p):
    from .harmonic.graph import harmonicity_residual
    from .harmonic.symz import SYMZ_WEIGHTS, symz_field, symz_graph
    if p["preset"] != "symz":
        raise ConfigError("harmonic-verify supports preset symz")
    g = symz_graph(p["window"] + 1)
    fld = symz_field(g)
    verts = list(range(-p["window"], p["window"] + 1))
    rep = harmonicity_residual(g, fld, SYMZ_WEIGHTS, vertices=verts)
    rows = [(x, rep.nonzero.get(x, Fraction(0))) for x in verts]
    return Result(["vertex", "residual"], rows, {"max_abs": rep.max_abs, "checked": rep.checked})


def run_da_harmonic(p):
    from .harmonic.tree import da_build, da_harmonic
    g = da_build(p["q"], p["depth"])
    rep = da_harmonic(g, _frac(p["a"]), tol=p["tol"])
    rows = [(v, gen, u, tg, sg, dev, int(nr)) for v, gen, u, tg, sg, dev, nr in rep["edges"]]
    anomaly = rep["root_anomaly"]
    summ = {"max_deviation": rep["max_deviation"], "max_deviation_off_root": rep["max_deviation_off_root"],
            "template_residual_nonzero": json.dumps({k: _fmt(v) for k, v in anomaly["nonzero"].items()}),
            "forced_root_ray_gradient": anomaly["forced_root_ray_gradient"],
            "energy_per_root_ray_edge": anomaly["energy_per_root_ray_edge"],
            "vertices": len(g), "cg_iterations": rep["iterations"]}
    return Result(["vertex", "generator", "image", "template", "solved", "deviation", "near_root"], rows, summ)


def run_da_energy(p):
    from .harmonic.tree import da_energy, direct_limit, direct_term
    a = _frac(p["a"])
    rows = []
    direct = Fraction(0)
    for n, s, lim in da_energy(p["q"], a, p["levels"]):
        direct += direct_term(p["q"], a, n)
        rows.append((n, s, lim, float(lim - s), direct, direct_limit(p["q"], a)))
    return Result(["N", "partial", "limit", "gap", "graph_partial", "graph_limit"], rows)


def run_voltage(p):
    from .harmonic.voltage import interior_residual, voltage_solve
    v = voltage_solve(p["d"], p["L"], p["method"], tol=p["tol"], walks=p["walks"], seed=p["seed"])
    rows = [("origin_raw", v.raw_origin, v.stderr)]
    if p["method"] == "direct-linear":
        rows.append(("interior_residual", float(np.abs(interior_residual(v)).max()), 0.0))
        for x in range(0, v.half + 1):
            pt = (x,) + (0,) * (v.d - 1)
            rows.append((f"v({','.join(map(str, pt))})", float(v.at(pt)), 0.0))
    return Result(["quantity", "value", "stderr"], rows, {"method": v.method, "iterations": v.iterations})


def run_eta_check(p):
    from .harmonic.voltage import eta_sum, voltage_solve, wreath_voltage_cocycle
    v = voltage_solve(p["d"], p["L"], tol=p["tol"])
    rows = []
    for a in [_frac(x) for x in str(p["a"]).split(",")]:
        w = v.shifted(float(a))
        _, norm = eta_sum(w)
        b = wreath_voltage_cocycle(w, [(0,) * w.d])
        rows.append((a, norm, float(b[(w.half,) * w.d]), float(np.abs(b).sum() - abs(b[(w.half,) * w.d]))))
    return Result(["a", "eta_norm", "b_lamp_at_origin", "b_lamp_off_origin_l1"], rows)


def run_zwz(p):
    from .harmonic.appendix import ZWZ, random_word, theta_sum, zwz_identity_residual
    rng = make_rng(p["seed"], 50)
    rows = []
    for i in range(p["pairs"]):
        g1 = random_word(rng, int(rng.integers(0, p["max_len"] + 1)))
        g2 = random_word(rng, int(rng.integers(0, p["max_len"] + 1)))
        rows.append((i, ZWZ.key(g1), ZWZ.key(g2), zwz_identity_residual(g1, g2, 4 * p["max_len"] + 4)))
    return Result(["pair", "g1", "g2", "residual"], rows,
                  {"theta_sum": json.dumps({str(k): _fmt(v) for k, v in theta_sum().items()}),
                   "max_residual": max((r[3] for r in rows), default=0)})


def run_growth(p):
    from .harmonic.graph import ball_values, growth_profile
    radii = _ints(p["radii"])
    R = max(radii)
    if p["preset"] == "symz":
        from .harmonic.symz import symz_field, symz_graph
        g = symz_graph(R + 2)
        fld, start = symz_field(g), 0
    elif p["preset"] == "da-q2":
        from .harmonic.tree import ROOT, da_build, template_field
        g = da_build(2, R + 1)
        fld, start = template_field(g, 1), ROOT
    else:
        raise ConfigError("growth supports presets symz and da-q2")
    rows = growth_profile(ball_values(g, fld, start), radii)
    return Result(["n", "M", "M_over_n", "log_M_over_n"], rows)


def run_delta_build(p):
    from .constructions import build_delta, delta_d8_spec, dinfty_delta_preset
    d = build_delta(delta_d8_spec(p["s_max"])) if p["preset"] == "delta-d8" else \
        dinfty_delta_preset(p["s_max"]) if p["preset"] == "delta-dinfty" else None
    if d is None:
        raise ConfigError("delta-build supports delta-d8 and delta-dinfty")
    rows = [(s, f.k, f.m, repr(f.gamma)) for s, f in enumerate(d.factors, 1)]
    return Result(["s", "k", "m", "gamma"], rows, {"generators": len(d.generator_list())})


def run_fc_class(p):
    from .constructions import build_delta, d8_kernel_generator, delta_d8_spec, fc_class
    d = build_delta(delta_d8_spec())
    el = str(p["element"])
    if el.startswith("kernel"):
        s = int(el[6:] or 1)
        x = d.kernel_element(s, 0, d8_kernel_generator(d, s))
    else:
        x = d.word(el.split(","))
    res = fc_class(d, x, p["cap"])
    rows = sorted((d.key(m), int(d.in_fc_kernel(m))) for m in res.members)
    return Result(["member", "in_kernel"], rows, {"size": res.size, "in_kernel": d.in_fc_kernel(x)})


def run_copy_check(p):
    from .constructions import copy_check, s3_embedding
    if p["preset"] != "embed-s3":
        raise ConfigError("copy-check supports preset embed-s3")
    spec = s3_embedding(tuple(_ints(p["ks"])))
    pairs = [tuple(int(y) for y in x.split("-")) for x in str(p["pairs"]).split(",")]
    r = copy_check(spec, pairs)
    G = spec.group
    return Result(["ok", "support", "value", "expected", "doubling"],
                  [(int(r.ok), " ".join(map(str, r.support)), G.key(r.value), G.key(r.expected),
                    int(spec.doubling))])


def run_plateau(p):
    from .constructions import plateau_experiment
    from .groups.finite import cyclic_group
    res = plateau_experiment(cyclic_group(p["lamp_order"]), _frac(p["delta"]), p["n_max"])
    rows = [(n, m, tv, float(tv)) for n, m, tv in res.series]
    return Result(["n", "m", "tv", "tv_float"], rows, {"c_hat": res.c_hat, "c_hat_float": float(res.c_hat)})


def run_list_presets(p):
    rows = [(k, tag, desc) for k, (tag, desc) in PRESETS.items()]
    text = "\n".join(f"{k:<16}{tag:<8}{desc}" for k, tag, desc in rows)
    return Result(["preset", "section", "description"], rows, stdout=text)


I, S = int, str
COMMANDS = {
    "walk-speed": ([("preset", S, "srw-z", "srw-z | ll-z2 | plateau-z2"), ("n", S, "1024", "comma list"),
                    ("trials", I, 10000, ""), ("seed", I, 0, "")], run_walk_speed),
    "convolve": ([("preset", S, "ll-z2", ""), ("n", I, 4, "power")], run_convolve),
    "tv": ([("preset", S, "ll-z2", ""), ("n", I, 4, ""), ("m", I, 5, "")], run_tv),
    "sn-delta": ([("preset", S, "ll-z2", ""), ("n", I, 4, ""), ("delta", S, "1/2", ""),
                  ("elements", S, "sigma0,e", "comma list of e, sigmaK or site:val;...|pos")], run_sn_delta),
    "couple": ([("preset", S, "ll-z2", ""), ("gamma", S, "sigma0", ""), ("x", I, 0, ""),
                ("trials", I, 100000, ""), ("ns", S, "16,64,256,1024,4096,16384", ""), ("seed", I, 0, ""),
                ("dump", I, 0, "also write this many full coupling records as JSON lines")], run_couple),
    "couple-exit": ([("preset", S, "ll-z2", ""), ("gamma", S, "sigma0", ""), ("x", I, 0, ""),
                     ("trials", I, 20000, ""), ("rs", S, "8,16,32,64", ""), ("seed", I, 0, "")], run_couple_exit),
    "couple-fc": ([("preset", S, "delta-d8", ""), ("runs", I, 10000, ""), ("horizon", I, 10000, ""),
                   ("n_max", I, 50, ""), ("seed", I, 0, "")], run_couple_fc),
    "non-normal-demo": ([("runs", I, 10, ""), ("horizon", I, 1000, ""), ("seed", I, 0, "")], run_non_normal),
    "harmonic-verify": ([("preset", S, "symz", ""), ("window", I, 1000, "")], run_harmonic_verify),
    "da-harmonic": ([("q", I, 2, ""), ("depth", I, 8, ""), ("a", S, "1", ""), ("tol", float, 1e-12, "")],
                    run_da_harmonic),
    "da-energy": ([("q", I, 2, ""), ("a", S, "1", ""), ("levels", I, 12, "")], run_da_energy),
    "voltage": ([("d", I, 3, ""), ("L", I, 41, "odd box side"), ("method", S, "direct-linear",
                 "direct-linear | monte-carlo-visits"), ("tol", float, 1e-8, ""), ("walks", I, 200000, ""),
                 ("seed", I, 0, "")], run_voltage),
    "eta-check": ([("d", I, 3, ""), ("L", I, 41, ""), ("a", S, "-1/2,0", "comma list"), ("tol", float, 1e-8, "")],
                  run_eta_check),
    "zwz-cocycle": ([("pairs", I, 1000, ""), ("max_len", I, 8, ""), ("seed", I, 0, "")], run_zwz),
    "growth": ([("preset", S, "symz", "symz | da-q2"), ("radii", S, "1,2,4,8,16", "")], run_growth),
    "delta-build": ([("preset", S, "delta-d8", ""), ("s_max", I, 2, "")], run_delta_build),
    "fc-class": ([("element", S, "kernel1", "kernelS or comma word in generator names"), ("cap", I, 10000, "")],
                 run_fc_class),
    "copy-check": ([("preset", S, "embed-s3", ""), ("ks", S, "1,3", ""), ("pairs", S, "1-2", "")],
                   run_copy_check),
    "plateau": ([("lamp_order", I, 2, ""), ("delta", S, "1/4", ""), ("n_max", I, 20, "")], run_plateau),
    "list-presets": ([], run_list_presets),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="wreathwalk", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (opts, _) in COMMANDS.items():
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="TOML file with option values; flags override it")
        sp.add_argument("--out", help=f"output directory (default ${ENV_OUT} or .)")
        for opt, typ, default, hlp in opts:
            sp.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ,
                            help=f"{hlp} (default {default})".strip())
    return ap


def resolve(command, flags: dict) -> dict:
    """Defaults, then the config file, then flags.  Unknown config keys are errors."""
    opts, _ = COMMANDS[command]
    params = {o: d for o, _, d, _ in opts}
    types = {o: t for o, t, _, _ in opts}
    path = flags.pop("config", None)
    out = flags.pop("out", None)
    if path:
        try:
            with open(path, "rb") as fh:
                data = tomli.load(fh)
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if "command" in data and data.pop("command") != command:
            raise ConfigError("config is for a different subcommand")
        out = out or data.pop("out", None)
        for k, v in data.items():
            key = k.replace("-", "_")
            if key not in params:
                raise ConfigError(f"unknown config key {k!r} for {command}")
            try:
                params[key] = types[key](v if types[key] is not str or not isinstance(v, list)
                                         else ",".join(map(str, v)))
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {k!r}: {v!r}") from None
    params.update(flags)
    params["_out"] = out or os.environ.get(ENV_OUT, ".")
    return params


def config_hash(command, params) -> str:
    body = json.dumps({"command": command, **{k: v for k, v in params.items() if not k.startswith("_")}},
                      sort_keys=True, default=str)
    return hashlib.sha256(body.encode()).hexdigest()[:16]


def render_csv(command, params, res: Result) -> str:
    buf = io.StringIO()
    buf.write(f"# wreathwalk {command} config_hash={config_hash(command, params)} rng={RNG_ID}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.header)
    for r in res.rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def render_manifest(command, params, res: Result, wall: float) -> str:
    lines = {"command": command, "config_hash": config_hash(command, params), "rng": RNG_ID,
             "wreathwalk": __version__, "python": platform.python_version(), "numpy": np.__version__,
             "scipy": scipy.__version__, "threads": os.environ.get(ENV_THREADS, "1"),
             "wall_seconds": f"{wall:.3f}", "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
             "exit_code": res.code}
    for k, v in params.items():
        if not k.startswith("_"):
            lines[f"param.{k}"] = _fmt(v)
    for k, v in res.summary.items():
        lines[f"result.{k}"] = _fmt(v)
    return "".join(f"{k}={v}\n" for k, v in lines.items())


def run(command, params) -> tuple[int, Result | None]:
    t0 = time.perf_counter()
    res = COMMANDS[command][1](params)
    wall = time.perf_counter() - t0
    out = params["_out"]
    os.makedirs(out, exist_ok=True)
    body = render_csv(command, params, res)
    man = render_manifest(command, params, res, wall)
    with open(os.path.join(out, f"{command}.csv"), "w") as fh:
        fh.write(body)
    with open(os.path.join(out, f"{command}.manifest"), "w") as fh:
        fh.write(man)
    for suffix, text in res.extra.items():
        with open(os.path.join(out, f"{command}.{suffix}"), "w") as fh:
            fh.write(text)
    return res.code, res


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        params = resolve(ns.command, flags)
        code, res = run(ns.command, params)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SolverDiverged as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_CAP
    except WreathWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if res.stdout:
        print(res.stdout)
    for k, v in res.summary.items():
        print(f"{k}: {_fmt(v)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
