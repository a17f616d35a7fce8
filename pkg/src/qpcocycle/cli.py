"""Config-driven batch runner.

    qpcocycle <job> --config run.toml --out results/ [--threads N] [--grid K]

Each run writes ``result.json``, job-specific CSV tables, long-format
``plot_*.csv`` files and ``manifest.json``.  Exit status: 0 on success, 2 when
a validated input is infeasible, 1 on internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cocycle import default_threads, le_sequence, le_values, write_le_csv
from .config import JOBS, ExperimentConfig, load_config
from .errors import BudgetError, InputError, QPCocycleError, SearchError, WindowError
from .freqlib import _recurrence, cf_convergents, classify_frequency
from .ldt import calibrate_ldt, deviation_measure, write_residual_csv
from .scheme import (build_schedule, continuity_probe, extrapolation_error, find_initial_scale,
                     fit_decay_exponent, largest_feasible_depth, ns_range, select_parameters,
                     smallest_certified_start, two_scale_defect, write_probe_csv, write_q_table)

EXIT_OK, EXIT_INTERNAL, EXIT_INFEASIBLE = 0, 1, 2
INFEASIBLE_ERRORS = (InputError, WindowError, SearchError, BudgetError)

PLOT_KINDS = ("le", "ldt", "extrapolation", "probe")
PLOT_HEADER = ("figure", "series", "x", "y")


# ---------------------------------------------------------------------------
# helpers


def _f(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_f(v) if isinstance(v, float) else v for v in r])


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _convergent_with_q(f, q: int, max_index: int = 100_000):
    for c in _recurrence(f):
        if c.q == q and c.n > 0:
            return c
        if c.q > q or c.n > max_index:
            break
    raise InputError(f"q={q} is not a convergent denominator of frequency {f.label!r}")


def make_bundle(cfg: ExperimentConfig, A=None, spec=None, need_kappa: bool = True):
    sec = cfg.section("bundle")
    for k in ("s", "eta"):
        if k not in sec:
            raise InputError(f"[bundle] missing {k}")
    kappa = sec.pop("kappa", "auto")
    n_ref = sec.pop("kappa_N_ref", 100)
    if isinstance(kappa, str) and kappa != "auto":
        raise InputError("[bundle] kappa must be a number or 'auto'")
    # validate the hypothesis before any computation
    select_parameters(sec["s"], sec["eta"], 1 if kappa == "auto" else kappa,
                      **{k: v for k, v in sec.items() if k not in ("s", "eta")})
    if kappa == "auto":
        if A is None:
            if need_kappa:
                raise InputError("[bundle] kappa = 'auto' needs a cocycle")
            kappa = 1
        else:
            kappa = le_values(A, cfg.frequency(), [n_ref], spec)[n_ref] / 200
            if not kappa > 0:
                raise InputError(f"[bundle] kappa = 'auto' gives L_{n_ref}/200 = {kappa}, must be > 0")
    b = select_parameters(sec.pop("s"), sec.pop("eta"), kappa, **sec)
    if b.C0 is None and A is not None:
        b = b.with_cocycle(A)
    return b


# ---------------------------------------------------------------------------
# jobs; each returns (result dict, {csv name: (header, rows)})


def job_classify(cfg, out):
    sec = cfg.section("classify")
    n = int(sec.get("n", 30))
    f = cfg.frequency()
    convs = cf_convergents(f, n)
    rep = classify_frequency(convs, sec.get("eta", 0.5), sec.get("tau", 2.0))
    res = {"frequency": f.label, "classes": rep.to_dict(),
           "convergents": [{"n": c.n, "p": str(c.p), "q": str(c.q)} for c in convs]}
    if "C" in sec:
        res["holds_with_C"] = {e.name: e.holds(sec["C"]) for e in rep.entries}
    tables = {"convergents.csv": (("n", "p", "q"), [(c.n, c.p, c.q) for c in convs])}
    return res, tables


def job_le(cfg, out):
    sec = cfg.section("le")
    Ns = sec.get("Ns", [10, 100, 1000])
    spec = cfg.quadrature()
    A, f = cfg.cocycle(), cfg.frequency()
    rs = le_sequence(A, f, sorted(int(n) for n in Ns), spec)
    write_le_csv(out / "le.csv", rs)
    res = {"cocycle": A.label, "frequency": f.label,
           "values": [{"N": r.N, "L_N": r.value, "K": spec.K} for r in rs]}
    return res, {}


def job_ldt(cfg, out):
    sec = cfg.section("ldt")
    spec = cfg.quadrature()
    A, f = cfg.cocycle(), cfg.frequency()
    b = make_bundle(cfg, A, spec)
    if "N" not in sec:
        raise InputError("[ldt] missing N")
    kappa = sec.get("kappa", float(b.kappa))
    rep = deviation_measure(A, f, sec["N"], kappa, b, spec, q=sec.get("q"),
                            waive_window=sec.get("waive_window", False), method=sec.get("method", "grid"),
                            samples=sec.get("samples", 4096), seed=cfg.seed)
    res = {"bundle": b.to_dict(), "report": rep.to_dict()}
    rows = [(rep.N, "" if rep.q is None else rep.q, rep.kappa, rep.measured_fraction,
             "" if rep.bound is None else rep.bound)]
    return res, {"deviation.csv": (("N", "q", "kappa", "fraction", "bound"), rows)}


def job_calibrate(cfg, out):
    sec = cfg.section("calibrate")
    spec = cfg.quadrature()
    A, f = cfg.cocycle(), cfg.frequency()
    b = make_bundle(cfg, A, spec)
    kappa = sec.get("kappa", float(b.kappa))
    cal = calibrate_ldt(A, f, [int(q) for q in sec.get("q", [34, 89, 233])], kappa, b, spec)
    write_residual_csv(out / "residuals.csv", cal)
    res = {"bundle": b.to_dict(), "calibration": cal.to_dict()}
    return res, {}


def job_schedule(cfg, out):
    sec = cfg.section("schedule")
    f = cfg.frequency()
    b = make_bundle(cfg, need_kappa=False)
    depth = int(sec.get("depth", 4))
    q0_index = sec.get("q0_index", "auto")
    if q0_index == "auto":
        sched = smallest_certified_start(f, b, depth, sec.get("max_index", 2000))
    else:
        if not isinstance(q0_index, int):
            raise InputError("[schedule] q0_index must be an integer or 'auto'")
        N0 = sec.get("N0", "auto")
        if N0 == "auto":
            q = cf_convergents(f, q0_index)[-1].q
            lo, hi = ns_range(q, b)
            if lo > hi:
                raise WindowError(f"(Ns) window at q={q} is empty; cannot choose N0")
            N0 = lo
        sched = build_schedule(f, b, q0_index, depth, int(N0), sec.get("stop_on_failure", True))
    rows = [(e.s, e.q_index, e.qtilde, e.N, "" if e.m is None else e.m, e.cert_qs, e.cert_Ns, e.cert_ms)
            for e in sched.entries]
    header = ("s", "q_index", "qtilde", "N", "m", "cert_qs", "cert_Ns", "cert_ms")
    return {"schedule": sched.to_dict()}, {"schedule.csv": (header, rows)}


def job_twoscale(cfg, out):
    sec = cfg.section("twoscale")
    spec = cfg.quadrature()
    A, f = cfg.cocycle(), cfg.frequency()
    b = make_bundle(cfg, A, spec)
    q = _convergent_with_q(f, int(sec.get("q", 89)))
    N = sec.get("N")
    if N is None:
        lo, hi = ns_range(q.q, b)
        if lo > hi:
            raise WindowError(f"(Ns) window at q={q.q} is empty; give [twoscale] N explicitly")
        N = lo
    ests = [two_scale_defect(A, f, int(N), int(m), q, b, spec) for m in sec.get("m", [4, 8, 16])]
    rows = [(e.m, e.N, e.N_prime, e.L_N, e.L_2N, e.L_Nprime, e.defect, e.bound) for e in ests]
    header = ("m", "N", "N_prime", "L_N", "L_2N", "L_Nprime", "defect", "bound")
    return {"bundle": b.to_dict(), "estimates": [e.to_dict() for e in ests]}, {"twoscale.csv": (header, rows)}


def job_extrapolate(cfg, out):
    sec = cfg.section("extrapolate")
    spec = cfg.quadrature()
    A, f = cfg.cocycle(), cfg.frequency()
    b = make_bundle(cfg, A, spec)
    max_N = int(sec.get("max_N", 1 << 17))
    mesh = sec.get("mesh_ratio", 1.1)
    scheds, inits = [], []
    for q in sec.get("q0", [34, 89, 233]):
        c = _convergent_with_q(f, int(q))
        ini = find_initial_scale(A, f, c, b, spec, mesh)
        scheds.append(build_schedule(f, b, c.n, 8, ini.N0, stop_on_failure=False))
        inits.append(ini)
    depth = sec.get("depth", "auto")
    if depth == "auto":
        depth = min(largest_feasible_depth(s, max_N) for s in scheds)
        if depth < 0:
            raise BudgetError(f"no common depth fits max_N={max_N}", largest_feasible=-1)
    results = [extrapolation_error(A, f, s, int(depth), spec, max_N) for s in scheds]
    for r in results:
        write_q_table(out / f"q_table_{r.qtilde0}.csv", r)
    errs = [r.value for r in results]
    qs = [r.qtilde0 for r in results]
    nonincreasing = all(b2 <= a for a, b2 in zip(errs, errs[1:]))
    res = {
        "bundle": b.to_dict(),
        "depth": int(depth),
        "max_N": max_N,
        "runs": [dict(r.to_dict(), initial_scale=i.to_dict(), schedule=s.to_dict())
                 for r, i, s in zip(results, inits, scheds)],
        "nonincreasing": nonincreasing,
        "fitted_decay_exponent": fit_decay_exponent(qs, errs),
        "c_prime": float(b.c_prime),
    }
    rows = [(r.qtilde0, r.deep_index, r.N_deep, r.value, r.tail) for r in results]
    return res, {"extrapolation.csv": (("qtilde0", "depth", "N_deep", "error", "tail"), rows)}


def _energies(spec_E) -> list:
    if isinstance(spec_E, dict):
        for k in ("start", "stop", "num"):
            if k not in spec_E:
                raise InputError(f"[probe.E] missing {k}")
        # rounded so grid energies print as the decimals they stand for
        return [round(float(x), 12) for x in np.linspace(spec_E["start"], spec_E["stop"], int(spec_E["num"]))]
    return [float(x) for x in spec_E]


def job_probe(cfg, out):
    sec = cfg.section("probe")
    spec = cfg.quadrature()
    f = cfg.frequency()
    E = _energies(sec.get("E", {"start": -0.5, "stop": 0.5, "num": 101}))
    if len(E) < 2:
        raise InputError("[probe] E grid needs at least 2 energies")
    A_ref = cfg.cocycle(E=E[len(E) // 2])
    b = make_bundle(cfg, A_ref, spec)
    q = _convergent_with_q(f, int(sec.get("q0", 34)))
    kw = {"hs": [float(h) for h in sec["hs"]]} if "hs" in sec else {}
    r = continuity_probe(cfg.potential(), f, E, b, q, spec, **kw)
    write_probe_csv(out / "probe.csv", r)
    return {"bundle": b.to_dict(), "probe": r.to_dict()}, {}


JOB_FUNCS = {"classify": job_classify, "le": job_le, "ldt": job_ldt, "calibrate": job_calibrate,
             "schedule": job_schedule, "twoscale": job_twoscale, "extrapolate": job_extrapolate,
             "probe": job_probe}


# ---------------------------------------------------------------------------
# plot data


def _plot_rows_from_result(doc: dict) -> dict:
    job, res = doc.get("job"), doc.get("result", {})
    rows = {}
    if job == "le":
        rows["le"] = [(res["cocycle"], v["N"], v["L_N"]) for v in res["values"]]
    elif job == "ldt":
        rep = res["report"]
        if rep["q"] is not None:
            rows["ldt"] = [(f"kappa={rep['kappa']!r}", int(rep["q"]), rep["measured_fraction"])]
    elif job == "calibrate":
        rows["ldt"] = [(f"kappa={r['kappa']!r}", int(r["q"]), r["measured_fraction"])
                       for r in res["calibration"]["reports"]]
    elif job == "extrapolate":
        rows["extrapolation"] = [("proxy=L_N_deep", int(r["qtilde0"]), r["value"]) for r in res["runs"]]
    elif job == "probe":
        rows["probe"] = [("extrapolant", p["E"], p["extrapolant"]) for p in res["probe"]["sweep"]]
    return rows


def emit_plot_data(results: Sequence, out_dir) -> dict:
    """Long-format ``plot_<kind>.csv`` (columns figure, series, x, y) per figure kind.

    ``results`` holds result dicts (as written to ``result.json``) or paths to
    such files or to run directories.  Rows are sorted by (series, x); kinds
    without data get a header-only file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    merged = {k: [] for k in PLOT_KINDS}
    for item in results:
        if isinstance(item, dict):
            doc = item
        else:
            p = Path(item)
            if p.is_dir():
                p = p / "result.json"
            if not p.is_file():
                raise InputError(f"missing upstream artifact: {p}")
            doc = json.loads(p.read_text())
        for k, rows in _plot_rows_from_result(doc).items():
            merged[k].extend(rows)
    paths = {}
    for k in PLOT_KINDS:
        rows = sorted(merged[k], key=lambda r: (str(r[0]), r[1]))
        path = out / f"plot_{k}.csv"
        _write_csv(path, PLOT_HEADER, [(k,) + tuple(r) for r in rows])
        paths[k] = path
    return paths


# ---------------------------------------------------------------------------
# driver


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: ExperimentConfig, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res, tables = JOB_FUNCS[cfg.job](cfg, out)
    for name, (header, rows) in tables.items():
        _write_csv(out / name, header, rows)
    spec = cfg.quadrature()
    doc = {
        "job": cfg.job,
        "version": __version__,
        "config_sha256": cfg.sha256,
        "seed": cfg.seed,
        "quadrature": {"K": spec.K, "precision_bits": spec.precision_bits},
        "result": res,
    }
    (out / "result.json").write_text(dumps(doc))
    emit_plot_data([doc], out)
    wall = time.perf_counter() - t0
    files = sorted(p.name for p in out.iterdir() if p.is_file() and p.name != "manifest.json")
    manifest = {
        "job": cfg.job,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.path,
        "inputs": {"config_sha256": cfg.sha256},
        "threads": spec.threads or default_threads(),
        "wall_time_s": wall,
        "outputs": {name: _sha256(out / name) for name in files},
    }
    (out / "manifest.json").write_text(dumps(manifest))
    return doc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpcocycle", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="job", required=True)
    for j in JOBS:
        p = sub.add_parser(j, help=f"run the {j} job")
        p.add_argument("--config", required=True, help="TOML experiment configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: env or all cores)")
        p.add_argument("--grid", type=int, default=None, help="override quadrature grid size K")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.job, args.threads, args.grid)
        run(cfg, args.out)
    except INFEASIBLE_ERRORS as e:
        msg = str(e)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except QPCocycleError as e:
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
