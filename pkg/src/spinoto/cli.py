"""Command-line entry point: ``spinoto <command> [--config F] [--seed N] [--threads N] [--out DIR]``.

Every command writes one or more tables plus ``manifest.json`` into the
output directory and exits with status 1 if a built-in self-check fails.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__, feasibility, semiclassics
from . import config as cfgmod
from .observables import decay_time, norm_constant, wigner
from .open_system import dissipative_correlators, photons_lost, write_trajectory_log
from .output import write_manifest, write_table
from .protocols import (
    direct_oto_F,
    distinguishability,
    evaluate_series,
    forward_only_time_ordered,
    interferometric_F,
    squared_commutator,
    time_ordered_G,
)

ORACLE_TOL = 1e-10
IDENTITY_TOL = 1e-9
OVERFLOW_LIMIT = 0.10


class SelfCheckFailed(RuntimeError):
    pass


class Run:
    """Collects outputs, checks and manifest fields for one command."""

    def __init__(self, command, cfg, out_dir):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.files = []
        self.checks = {}
        self.extra = {}
        os.makedirs(out_dir, exist_ok=True)

    def table(self, name, columns, rows, meta=None, descriptions=None):
        meta = {"command": self.command, "version": __version__, **(meta or {})}
        path = os.path.join(self.out_dir, name)
        write_table(path, columns, rows, meta, descriptions)
        self.files.append(path)
        return path

    def check(self, name, value, tol):
        self.checks[name] = {"max_error": float(value), "tolerance": tol, "passed": bool(value <= tol)}

    def finish(self):
        manifest = {
            "command": self.command,
            "version": __version__,
            "config": self.cfg,
            "master_seed": self.cfg["master_seed"],
            "checks": self.checks,
            **self.extra,
        }
        write_manifest(self.out_dir, manifest, self.files)
        failed = [k for k, v in self.checks.items() if not v["passed"]]
        if failed:
            raise SelfCheckFailed("self-check failed: " + ", ".join(failed))


# module-level point functions so they can be shipped to worker processes
def _oto_point(spec, t):
    return interferometric_F(spec, t), direct_oto_F(spec, t), squared_commutator(spec, t)


def _distinguish_point(spec, t):
    return interferometric_F(spec, t), distinguishability(spec, t)


def _time_ordered_point(spec, t):
    # <(V at t)^dag (V at 0)> as a two-step forward-only sequence
    fwd = forward_only_time_ordered(spec.model, spec.initial, [None, spec.V], [spec.V, None], [0, t])
    return time_ordered_G(spec, t), fwd


def _fg_point(spec, t):
    return interferometric_F(spec, t), time_ordered_G(spec, t)


def cmd_oto(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    times = cfgmod.time_grid(cfg)
    res = evaluate_series(_oto_point, spec, times, workers)
    Fi, Fd, comm = res[:, 0], res[:, 1], res[:, 2].real
    run.check("interferometric_vs_direct", np.abs(Fi - Fd).max(), ORACLE_TOL)
    run.check("commutator_identity", np.abs(2 * (1 - Fi.real) - comm).max(), IDENTITY_TOL)
    rows = [(t, f.real, f.imag, d.real, d.imag, c) for t, f, d, c in zip(times, Fi, Fd, comm)]
    run.table("oto.txt", ["t", "re_F", "im_F", "re_F_direct", "im_F_direct", "sq_commutator"], rows,
              descriptions={"t": _time_label(cfg), "sq_commutator": "<|[W_t, V]|^2>"})


def _time_label(cfg):
    return "kicks" if cfg["model"]["kind"] == "kicked_top" else "chi t"


def cmd_distinguish(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    times = cfgmod.time_grid(cfg)
    res = evaluate_series(_distinguish_point, spec, times, workers)
    F, D = res[:, 0], res[:, 1].real
    run.check("distinguishability_identity", np.abs(np.abs(F) ** 2 - D).max(), IDENTITY_TOL)
    run.table("distinguish.txt", ["t", "distinguishability", "abs_F_squared"],
              [(t, d, abs(f) ** 2) for t, d, f in zip(times, D, F)],
              descriptions={"t": _time_label(cfg)})


def cmd_time_ordered(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    times = cfgmod.time_grid(cfg)
    res = evaluate_series(_time_ordered_point, spec, times, workers)
    G, Gf = res[:, 0], res[:, 1]
    # the forward-only sequence returns <X_C> - i<Y_C>, i.e. G itself
    run.check("forward_only_vs_direct", np.abs(G - Gf).max(), ORACLE_TOL)
    run.table("time_ordered.txt", ["t", "re_G", "im_G", "abs_G"],
              [(t, g.real, g.imag, abs(g)) for t, g in zip(times, G)],
              descriptions={"t": _time_label(cfg)})


def _dissipative_tables(run, spec, params, times, workers, with_unitary):
    cfg = run.cfg
    res = dissipative_correlators(spec, params, times, cfg["n_traj"], cfg["master_seed"], workers)
    F, G = res.F, res.G
    if params.is_unitary:
        Fu = np.array([interferometric_F(spec, t) for t in times])
        run.check("unitary_limit", np.abs(F.mean - Fu).max(), ORACLE_TOL)
    run.check("abs_F_bounded", max(0.0, np.abs(F.mean).max() - 1), 1e-12)
    run.check("abs_G_bounded", max(0.0, np.abs(G.mean).max() - 1), 1e-12)
    pF, conv = zip(*(photons_lost(spec, params, t, "F") for t in times))
    pG = [photons_lost(spec, params, t, "G")[0] for t in times]
    cols = ["t", "photons_F", "photons_G", "re_F", "im_F", "abs_F", "stderr_abs_F", "re_G", "im_G", "abs_G",
            "stderr_abs_G", "overflow_F", "overflow_G"]
    rows = []
    Fu = Gu = None
    if with_unitary:
        Fu = np.array([interferometric_F(spec, t) for t in times])
        Gu = np.array([time_ordered_G(spec, t) for t in times])
        cols += ["abs_F_unitary", "abs_G_unitary"]
    for i, t in enumerate(times):
        row = [t, pF[i], pG[i], F.mean[i].real, F.mean[i].imag, abs(F.mean[i]), F.abs_stderr[i],
               G.mean[i].real, G.mean[i].imag, abs(G.mean[i]), G.abs_stderr[i],
               F.overflow_by_time[i], G.overflow_by_time[i]]
        if with_unitary:
            row += [abs(Fu[i]), abs(Gu[i])]
        rows.append(row)
    overflow = max(F.overflow_fraction, G.overflow_fraction)
    meta = {"N": round(2 * spec.model.S), "gamma": params.gamma, "mu": params.mu,
            "photon_budget": params.photon_budget, "n_traj": cfg["n_traj"],
            "master_seed": cfg["master_seed"], "photon_convention": conv[0],
            "overflow_fraction": overflow, "overflow_flag": overflow > OVERFLOW_LIMIT}
    name = "fig4b.txt" if run.command == "fig4b" else "dissipative.txt"
    run.table(name, cols, rows, meta, descriptions={
        "t": _time_label(cfg), "photons_F": "mean photons lost measuring F (see photon_convention)",
        "stderr_abs_F": "standard error of |F|", "overflow_F": "fraction of runs past the photon budget"})
    log = os.path.join(run.out_dir, "trajectories.jsonl")
    write_trajectory_log(res.records, log)
    run.files.append(log)
    run.extra["overflow"] = {"F_by_time": F.overflow_by_time, "G_by_time": G.overflow_by_time,
                             "fraction": overflow, "flagged": overflow > OVERFLOW_LIMIT}
    if overflow > OVERFLOW_LIMIT:
        print(f"warning: overflow fraction {overflow:.3f} exceeds {OVERFLOW_LIMIT}", file=sys.stderr)
    return res


def cmd_dissipative(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    params = cfgmod.build_dissipation(cfg)
    _dissipative_tables(run, spec, params, cfgmod.time_grid(cfg), workers, with_unitary=False)


def cmd_fig4b(run, workers):
    cfg = run.cfg
    N = cfg["model"]["N"]
    spec = cfgmod.build_spec(cfg, angle=1 / np.sqrt(N))
    params = cfgmod.build_dissipation(cfg)
    _dissipative_tables(run, spec, params, cfgmod.time_grid(cfg), workers, with_unitary=True)


def cmd_wigner(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    m = spec.model
    wc = cfg["wigner"]
    worst = 0.0
    for t in cfgmod.time_grid(cfg):
        psi = m.forward(spec.initial, t)
        g = wigner(psi, wc["n_theta"], wc["n_phi"])
        worst = max(worst, abs(g.integral() - norm_constant(m.S)))
        th, ph = np.meshgrid(g.theta, g.phi, indexing="ij")
        rows = zip(th.ravel(), ph.ravel(), g.values.ravel(), g.weights.ravel())
        run.table(f"wigner_t{_fmt_time(t)}.txt", ["theta", "phi", "W", "weight"], rows,
                  {"t": t, "S": m.S, "n_theta": g.n_theta, "n_phi": g.n_phi,
                   "integral": g.integral(), "expected_integral": norm_constant(m.S)})
    run.check("wigner_normalization", worst, 1e-6)


def _fmt_time(t):
    return str(t) if isinstance(t, int) else format(t, ".6g")


def _lyap_job(args):
    start, k, p, n, every = args
    return semiclassics.lyapunov_exponent(start, k, p, n, every).lam


def cmd_lyapunov(run, workers):
    lc = run.cfg["lyapunov"]
    rng = np.random.default_rng(run.cfg["master_seed"])
    v = rng.normal(size=(lc["n_starts"], 3))
    starts = [semiclassics.SpherePoint(*x) for x in v]
    rows = []
    jobs = [(s, k, lc["p"], lc["n_steps"], lc["renorm_every"]) for k in lc["k"] for s in starts]
    lams = _map(_lyap_job, jobs, workers)
    for i, (s, k, *_rest) in enumerate(jobs):
        lam = lams[i]
        te = semiclassics.ehrenfest_time(lam, lc["S"]) if lam > 0 else np.nan
        rows.append((k, s.X, s.Y, s.Z, lam, te))
    run.check("lyapunov_finite", 0.0 if np.all(np.isfinite(lams)) else 1.0, 0.0)
    run.table("lyapunov.txt", ["k", "X", "Y", "Z", "lambda", "ehrenfest_time"], rows,
              {"p": lc["p"], "n_steps": lc["n_steps"], "renorm_every": lc["renorm_every"], "S": lc["S"]},
              descriptions={"lambda": "largest Lyapunov exponent per kick",
                            "ehrenfest_time": "ln(S)/lambda in kicks, nan when lambda <= 0"})


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_feasibility(run, workers):
    fc = run.cfg["feasibility"]
    params = feasibility.CavityParams(fc["eta"], fc["N"], fc["k"], fc["Gamma"], fc["Delta"])
    rep = feasibility.report(params, fc["phi"], fc["d"])
    if rep["d_opt"] is not None:
        from .open_system import DissipationParams

        p = DissipationParams(eta=fc["eta"], d=rep["d_opt"])
        run.check("d_opt_balances_rates", abs(p.gamma - p.mu), 1e-12)
    rows = [(k, v) for k, v in rep.items()]
    path = os.path.join(run.out_dir, "feasibility.txt")
    with open(path, "w") as fh:
        fh.write(f"# command: feasibility\n# version: {__version__}\n")
        fh.write("# order-of-magnitude estimates; formulas carry their O(1) constants exactly\n")
        fh.write("# quantity value\n")
        for k, v in rows:
            fh.write(f"{k} {_fmt_value(v)}\n")
    run.files.append(path)


def _fmt_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return format(float(v), ".17g")


def cmd_fig3(run, workers):
    cfg = run.cfg
    spec = cfgmod.build_spec(cfg)
    times = cfgmod.time_grid(cfg)
    res = evaluate_series(_oto_point, spec, times, workers)
    Fi, Fd, comm = res[:, 0], res[:, 1], res[:, 2].real
    run.check("interferometric_vs_direct", np.abs(Fi - Fd).max(), ORACLE_TOL)
    run.check("commutator_identity", np.abs(2 * (1 - Fi.real) - comm).max(), IDENTITY_TOL)
    run.table("fig3.txt", ["chi_t", "re_F", "im_F"], [(t, f.real, f.imag) for t, f in zip(times, Fi)],
              {"N": cfg["model"]["N"], "phi": cfg["V"]["angle"],
               "unstated_defaults": ",".join(cfgmod.UNSTATED_DEFAULTS["fig3"])})


def cmd_fig4a(run, workers):
    cfg = run.cfg
    fc = cfg["fig4a"]
    times = list(range(fc["n_kicks"] + 1))
    summary = []
    for N in fc["N_values"]:
        spec = cfgmod.build_spec(cfg, N=N, angle=1 / np.sqrt(N))
        res = evaluate_series(_fg_point, spec, times, workers)
        F, G = res[:, 0], res[:, 1]
        run.table(f"fig4a_N{N}.txt", ["kick", "abs_F", "abs_G", "re_F", "im_F", "re_G", "im_G"],
                  [(t, abs(f), abs(g), f.real, f.imag, g.real, g.imag) for t, f, g in zip(times, F, G)],
                  {"N": N, "k": cfg["model"]["k"], "p": cfg["model"]["p"], "phi": 1 / np.sqrt(N)})
        tF = decay_time(times, F, fc["threshold"]).t_cross
        tG = decay_time(times, G, fc["threshold"]).t_cross
        summary.append((N, np.nan if tF is None else tF, np.nan if tG is None else tG))
    arr = np.array(summary, dtype=float)
    meta = {"threshold": fc["threshold"]}
    ok = np.isfinite(arr[:, 1])
    if ok.sum() >= 2:
        x = np.log(arr[ok, 0])
        b, a = np.polyfit(x, arr[ok, 1], 1)
        resid = arr[ok, 1] - (a + b * x)
        ss = np.sum((arr[ok, 1] - arr[ok, 1].mean()) ** 2)
        meta.update({"fit_a": a, "fit_b": b, "fit_r2": 1 - np.sum(resid**2) / ss if ss > 0 else np.nan})
    run.table("fig4a_decay_times.txt", ["N", "t_F", "t_G"], summary, meta,
              descriptions={"t_F": "first crossing of |F| below threshold (kicks), nan if none",
                            "t_G": "first crossing of |G| below threshold (kicks), nan if none"})


COMMANDS = {
    "oto": cmd_oto,
    "distinguish": cmd_distinguish,
    "time-ordered": cmd_time_ordered,
    "dissipative": cmd_dissipative,
    "wigner": cmd_wigner,
    "lyapunov": cmd_lyapunov,
    "feasibility": cmd_feasibility,
    "fig3": cmd_fig3,
    "fig4a": cmd_fig4a,
    "fig4b": cmd_fig4b,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="spinoto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config merged over the command defaults")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--threads", type=int, default=1, help="worker processes (results do not depend on it)")
        p.add_argument("--out", default=os.path.join("runs", name), help="output directory")
        p.add_argument("--N", type=int, help="atom number override")
        p.add_argument("--n-traj", type=int, help="trajectory count override")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        user = cfgmod.load(args.config) if args.config else {}
        if args.N is not None:
            user = cfgmod.merge(user, {"model": {"N": args.N}})
        if args.n_traj is not None:
            user = cfgmod.merge(user, {"n_traj": args.n_traj})
        cfg = cfgmod.resolve(args.command, user, args.seed)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    run = Run(args.command, cfg, args.out)
    COMMANDS[args.command](run, max(1, args.threads))
    try:
        run.finish()
    except SelfCheckFailed as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"wrote {len(run.files)} file(s) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
