"""Command-line interface.

Every command builds a report dictionary (plus, for simulations and
sweeps, a table of rows). ``--format`` picks JSON (default), CSV or plain
text on stdout; ``--csv PATH`` additionally writes the table to a file.
Randomized commands require ``--seed`` and echo it, with the generator
name, in their output. Exit status: 0 on success, 1 when the input breaks
a mathematical precondition or a zoo oracle check fails, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import absorbing, distributions, jump, mcmc, poisson, queueing, random_walk, stationary, zoo
from . import io as sio
from .chain import classify, dirac, power_step
from .errors import DomainError, StochastikError, UsageError
from .rng import RngStream


@dataclass
class RunConfig:
    command: str
    backend: str
    fmt: str
    seed: int | None = None
    csv_path: str | None = None
    params: dict = field(default_factory=dict)


@dataclass
class Output:
    report: dict
    header: list | None = None
    rows: list | None = None
    status: int = 0  # nonzero when the command ran but a check failed


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _count(text: str) -> int:
    """Integer argument that also accepts forms like 1e6."""
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return int(v)


def _rational(text: str):
    try:
        return Fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc


def _seed(args) -> RngStream:
    if args.seed is None:
        raise UsageError("this command is randomized and needs --seed")
    return RngStream(args.seed)


def _rng_info(stream: RngStream) -> dict:
    return stream.describe()


# ---------------------------------------------------------------------------
# command implementations


def cmd_chain_classify(args, cfg) -> Output:
    P, _ = sio.load_chain(args.file, cfg.backend)
    c = classify(P)
    labels = P.labels or tuple(range(P.n))
    return Output(
        {
            "states": list(labels),
            "classes": [sorted(labels[i] for i in cl) for cl in c.classes],
            "class_kind": list(c.class_kind),
            "irreducible": c.irreducible,
            "absorbing_states": [labels[i] for i in c.absorbing_states],
            "absorbing_chain": c.absorbing_chain,
            "regular": c.regular,
            "regular_witness": c.regular_witness,
            "periods": list(c.periods),
        }
    )


def cmd_chain_power(args, cfg) -> Output:
    P, nu = sio.load_chain(args.file, cfg.backend)
    if args.initial:
        nu = sio.parse_law(args.initial, P.n, cfg.backend)
    if nu is None:
        nu = dirac(0, P.n, cfg.backend)
    law = power_step(nu, P, args.steps)
    return Output({"steps": args.steps, "initial": list(nu.probs), "law": list(law.probs)})


def cmd_absorb(args, cfg) -> Output:
    P, nu = sio.load_chain(args.file, cfg.backend)
    if args.initial:
        nu = sio.parse_law(args.initial, P.n, cfg.backend)
    dec = absorbing.solve(P)
    labels = P.labels or tuple(range(P.n))
    report = {
        "transient": [labels[i] for i in dec.transient],
        "absorbing": [labels[i] for i in dec.absorbing],
        "F": [list(r) for r in dec.F],
        "B": [list(r) for r in dec.B],
        "expected_absorption_times": list(absorbing.expected_absorption_times(dec)),
    }
    if nu is not None:
        report["initial"] = list(nu.probs)
        report["averaged_absorption_time"] = absorbing.averaged_absorption_time(dec, nu)
        report["averaged_absorption_probabilities"] = absorbing.averaged_absorption_probabilities(dec, nu)
    return Output(report)


def cmd_stationary(args, cfg) -> Output:
    P, _ = sio.load_chain(args.file, cfg.backend)
    res = stationary.stationary(P)
    cert = stationary.reversible_vector(P)
    report = {
        "pi": list(res.pi.probs),
        "mean_recurrence_times": list(res.recurrence_times),
        "regular": res.limit_matrix is not None,
        "reversible": cert.reversible,
    }
    if not cert.reversible:
        report["violating_pair"] = list(cert.violating_pair)
    if args.gap:
        lam0 = stationary.second_eigenvalue_modulus(P, res.pi)
        report["lambda0_modulus"] = lam0
        report["spectral_gap"] = 1.0 - lam0
    return Output(report)


def cmd_walk_law(args, cfg) -> Output:
    n = args.n
    pos = random_walk.position_law_1d(n)
    rows = [[t, random_walk.return_time_law(t)] for t in range(1, n + 1)]
    return Output(
        {
            "n": n,
            "position_law": {str(k): v for k, v in pos.law.items()},
            "return_time_law": {str(t): p for t, p in rows},
        },
        ["n", "P(tau0=n)"],
        rows,
    )


def cmd_walk_recurrence(args, cfg) -> Output:
    rep = random_walk.recurrence_diagnostic(args.dim, args.m)
    rows = [[m + 1, float(p), float(s)] for m, (p, s) in enumerate(zip(rep.return_probabilities, rep.partial_sums))]
    return Output(
        {
            "dimension": rep.d,
            "M": rep.M,
            "partial_sum": float(rep.partial_sums[-1]),
            "fitted_exponent": rep.exponent,
            "fit_window": [rep.M // 2, rep.M],
            "verdict": rep.verdict,
            "verdict_note": "heuristic: recurrent when the fitted exponent is >= -1",
        },
        ["m", "P0(X_2m=0)", "partial_sum"],
        rows,
    )


def cmd_dist_l1(args, cfg) -> Output:
    r = distributions.l1_binomial_poisson(args.n, float(args.q))
    return Output({"n": args.n, "q": args.q, "distance": r.distance, "bound": r.bound, "within_bound": r.within_bound})


def _parse_size(text: str) -> tuple:
    try:
        shape = tuple(int(x) for x in text.lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"size must look like 32x32, got {text!r}") from exc
    if not shape or any(s < 1 for s in shape):
        raise UsageError("lattice sides must be positive")
    return shape


def cmd_ising(args, cfg) -> Output:
    stream = _seed(args)
    shape = _parse_size(args.size)
    start = {"plus": 1, "minus": -1}
    if args.start in start:
        config = mcmc.IsingConfig.uniform(shape, start[args.start], h=args.h, beta=args.beta, periodic=args.periodic)
    else:
        config = mcmc.IsingConfig.random(shape, stream.substream(0), h=args.h, beta=args.beta, periodic=args.periodic)
    res = mcmc.glauber_chain(config, args.steps, stream, record_every=args.record_every, rule=args.rule, track_occupation=False)
    rows = [[k * args.record_every, float(m)] for k, m in enumerate(res.magnetization)]
    return Output(
        {
            "rng": _rng_info(stream),
            "size": list(shape),
            "beta": args.beta,
            "h": args.h,
            "steps": args.steps,
            "rule": args.rule,
            "final_magnetization": float(res.magnetization[-1]),
            "running_mean_magnetization": res.running_mean,
            "acceptance_rate": res.accepted / max(1, args.steps),
        },
        ["step", "magnetization"],
        rows,
    )


def _replicas(fn, stream: RngStream, k: int):
    streams = [stream] if k == 1 else [stream.substream(i) for i in range(k)]
    with ThreadPoolExecutor(max_workers=min(k, os.cpu_count() or 1)) as pool:
        return list(pool.map(fn, streams)), streams


def cmd_tsp_anneal(args, cfg) -> Output:
    stream = _seed(args)
    d = sio.load_cities(args.input)
    sched = mcmc.AnnealSchedule(args.beta0, args.k, args.steps)
    results, streams = _replicas(lambda s: mcmc.simulated_annealing_tsp(d, sched, s, moves=args.moves), stream, args.replicas)
    best = min(results, key=lambda r: r.length)
    rows = [[i, s.stream, r.length, " ".join(map(str, r.tour))] for i, (s, r) in enumerate(zip(streams, results))]
    return Output(
        {
            "rng": _rng_info(stream),
            "cities": int(d.shape[0]),
            "beta0": args.beta0,
            "K": args.k,
            "steps": args.steps,
            "moves": args.moves,
            "replicas": args.replicas,
            "best_length": best.length,
            "best_tour": list(best.tour),
            "lengths": [r.length for r in results],
        },
        ["replica", "stream", "length", "tour"],
        rows,
    )


def cmd_poisson_sample(args, cfg) -> Output:
    stream = _seed(args)
    s = poisson.sample_poisson_process(args.rate, args.horizon, stream)
    rows = [[k + 1, float(t)] for k, t in enumerate(s.times)]
    return Output(
        {"rng": _rng_info(stream), "rate": args.rate, "horizon": args.horizon, "count": len(s)},
        ["n", "time"],
        rows,
    )


def cmd_jump_stationary(args, cfg) -> Output:
    L = sio.load_generator(args.file, cfg.backend)
    pi = jump.stationary_jump(L)
    cert = jump.detailed_balance_jump(L)
    report = {"states": list(L.labels), "pi": list(pi.probs), "reversible": cert.reversible}
    if not cert.reversible:
        report["violating_pair"] = [L.labels[i] for i in cert.violating_pair]
    return Output(report)


def cmd_jump_kernel(args, cfg) -> Output:
    L = sio.load_generator(args.file, cfg.backend)
    P = jump.transition_kernel(L, args.t, args.tol)
    a = P.as_float()
    rows = [[L.labels[i]] + [float(x) for x in a[i]] for i in range(L.n)]
    return Output({"states": list(L.labels), "t": args.t, "tol": args.tol, "kernel": a}, ["from"] + list(L.labels), rows)


def _metrics_report(m: queueing.QueueMetrics, unit: str | None) -> dict:
    rep = {
        "pi": list(m.pi[:50]),
        "pi_truncated_at": len(m.pi) - 1,
        "utilization": m.utilization,
        "busy_servers": m.busy_servers,
        "L": m.L,
        "Lq": m.Lq,
        "W": m.W,
        "sojourn": m.sojourn,
        "throughput": m.throughput,
        "p_wait": m.p_wait,
        "loss": m.loss,
    }
    if m.backlog_at_arrival is not None:
        rep["backlog_at_arrival"] = m.backlog_at_arrival
    return rep


def cmd_queue(args, cfg) -> Output:
    kind = args.queue_command
    lam, mu = args.lam, args.mu
    backend = cfg.backend
    if kind == "mm1":
        m = queueing.mm1(lam, mu, backend)
    elif kind == "mm1n":
        m = queueing.mm1n(lam, mu, args.N, backend)
    elif kind == "mms":
        m = queueing.mms(lam, mu, args.s, backend)
    else:
        m = queueing.mm_infinity(lam, mu, backend)
    rep = {"model": kind, "lambda": lam, "mu": mu}
    rep.update(_metrics_report(m, None))
    return Output(rep)


def cmd_queue_simulate(args, cfg) -> Output:
    stream = _seed(args)
    arr = queueing.Law.parse(args.arrivals)
    srv = queueing.Law.parse(args.service)

    def run(s):
        return queueing.simulate_queue(arr, srv, args.horizon, s, args.servers)

    results, streams = _replicas(run, stream, args.replicas)
    reps = []
    rows = []
    for i, (s, r) in enumerate(zip(streams, results)):
        entry = {
            "stream": s.stream,
            "L": r.L,
            "Lq": r.Lq,
            "W": r.W,
            "sojourn": r.sojourn,
            "arrival_rate": r.arrival_rate,
            "busy_fraction": r.busy_fraction,
            "little_residual": r.little_residual,
            "pasta_l1": queueing.pasta_distance(r),
        }
        if arr.kind == "exp":
            try:
                b = queueing.burke_departure_test(r, arr.params[0])
                entry["burke"] = {"ks_pvalue": b.ks_pvalue, "lag1": b.lag1_autocorrelation, "passed": b.passed}
            except DomainError as exc:
                entry["burke"] = {"skipped": str(exc)}
        reps.append(entry)
        rows.append([i, s.stream, r.L, r.W, r.sojourn, r.busy_fraction, r.arrival_rate])
    return Output(
        {
            "rng": _rng_info(stream),
            "arrivals": str(arr),
            "service": str(srv),
            "servers": args.servers,
            "horizon": args.horizon,
            "warmup_fraction": queueing.WARMUP_FRACTION,
            "replicas": reps,
        },
        ["replica", "stream", "L", "W", "sojourn", "busy_fraction", "arrival_rate"],
        rows,
    )


def cmd_zoo_list(args, cfg) -> Output:
    rows = []
    for name in zoo.names():
        m = zoo.build(name)
        rows.append([name, m.description, len(m.oracles)])
    return Output({"models": [r[0] for r in rows]}, ["name", "description", "oracles"], rows)


def cmd_zoo_verify(args, cfg) -> Output:
    names = zoo.names() if args.name == "all" else [args.name]
    reports = [zoo.verify(n) for n in names]
    out = {}
    rows = []
    for r in reports:
        out[r.name] = {
            "passed": r.passed,
            "checks": [
                {"quantity": c.quantity, "expected": c.expected, "got": c.got, "passed": c.passed, "source": c.source}
                | ({"error": c.error} if c.error else {})
                for c in r.checks
            ],
        }
        for c in r.checks:
            rows.append([r.name, c.quantity, "pass" if c.passed else "FAIL"])
    rep = {"all_passed": all(r.passed for r in reports), "models": out}
    return Output(rep, ["model", "quantity", "status"], rows, status=0 if rep["all_passed"] else 1)


# ---------------------------------------------------------------------------
# parser and output


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by
    # the subparser's own default.
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS, help="output format (default json)")
    common.add_argument("--backend", choices=("exact", "float"), default=argparse.SUPPRESS, help="numeric backend (env STOCHASTIK_BACKEND)")
    common.add_argument("--csv", dest="csv_path", default=argparse.SUPPRESS, help="also write the table to this CSV file")
    common.add_argument("--seed", type=_count, default=argparse.SUPPRESS, help="master seed for randomized commands")

    p = _Parser(prog="stochastik", description="Markov chains, jump processes, queues and Monte Carlo", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(subparsers, name, func, **kw):
        sp = subparsers.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    chain = sub.add_parser("chain", parents=[common]).add_subparsers(dest="chain_command", required=True, parser_class=_Parser)
    add(chain, "classify", cmd_chain_classify).add_argument("file")
    sp = add(chain, "power", cmd_chain_power)
    sp.add_argument("file")
    sp.add_argument("--steps", type=_count, required=True)
    sp.add_argument("--initial")

    sp = add(sub, "absorb", cmd_absorb)
    sp.add_argument("file")
    sp.add_argument("--initial", help='comma-separated law, e.g. "1/4,1/4,1/4,1/4,0,0"')

    sp = add(sub, "stationary", cmd_stationary)
    sp.add_argument("file")
    sp.add_argument("--gap", action="store_true")

    walk = sub.add_parser("walk", parents=[common]).add_subparsers(dest="walk_command", required=True, parser_class=_Parser)
    add(walk, "law", cmd_walk_law).add_argument("--n", type=_count, required=True)
    sp = add(walk, "recurrence", cmd_walk_recurrence)
    sp.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--m", type=_count, required=True)

    dist = sub.add_parser("dist", parents=[common]).add_subparsers(dest="dist_command", required=True, parser_class=_Parser)
    sp = add(dist, "l1", cmd_dist_l1)
    sp.add_argument("--n", type=_count, required=True)
    sp.add_argument("--q", type=float, required=True)

    sp = add(sub, "ising", cmd_ising)
    sp.add_argument("--size", default="32x32")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--h", type=float, default=0.0)
    sp.add_argument("--steps", type=_count, required=True)
    sp.add_argument("--record-every", type=_count, default=1000)
    sp.add_argument("--rule", choices=mcmc.RULES, default="threshold")
    sp.add_argument("--start", choices=("plus", "minus", "random"), default="minus")
    sp.add_argument("--periodic", action="store_true")

    tsp = sub.add_parser("tsp", parents=[common]).add_subparsers(dest="tsp_command", required=True, parser_class=_Parser)
    sp = add(tsp, "anneal", cmd_tsp_anneal)
    sp.add_argument("--input", required=True)
    sp.add_argument("--beta0", type=float, default=0.1)
    sp.add_argument("--k", type=float, default=1.001)
    sp.add_argument("--steps", type=_count, default=100_000)
    sp.add_argument("--moves", choices=("transposition", "2opt"), default="transposition")
    sp.add_argument("--replicas", type=_count, default=1)

    pp = sub.add_parser("poisson", parents=[common]).add_subparsers(dest="poisson_command", required=True, parser_class=_Parser)
    sp = add(pp, "sample", cmd_poisson_sample)
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--horizon", type=float, required=True)

    jp = sub.add_parser("jump", parents=[common]).add_subparsers(dest="jump_command", required=True, parser_class=_Parser)
    add(jp, "stationary", cmd_jump_stationary).add_argument("file")
    sp = add(jp, "kernel", cmd_jump_kernel)
    sp.add_argument("file")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--tol", type=float, default=jump.KERNEL_TOL)

    qp = sub.add_parser("queue", parents=[common]).add_subparsers(dest="queue_command", required=True, parser_class=_Parser)
    for name in ("mm1", "mm1n", "mms", "mminf"):
        sp = add(qp, name, cmd_queue)
        sp.add_argument("--lambda", dest="lam", type=_rational, required=True)
        sp.add_argument("--mu", type=_rational, required=True)
        if name == "mm1n":
            sp.add_argument("--N", type=int, required=True)
        if name == "mms":
            sp.add_argument("--s", type=int, required=True)
    sp = add(qp, "simulate", cmd_queue_simulate)
    sp.add_argument("--arrivals", required=True, help="exp:<rate> | det:<value> | gamma:<rate>,<shape>")
    sp.add_argument("--service", required=True)
    sp.add_argument("--horizon", type=float, required=True)
    sp.add_argument("--servers", type=int, default=1)
    sp.add_argument("--replicas", type=_count, default=1)

    zp = sub.add_parser("zoo", parents=[common]).add_subparsers(dest="zoo_command", required=True, parser_class=_Parser)
    add(zp, "list", cmd_zoo_list)
    add(zp, "verify", cmd_zoo_verify).add_argument("name", help="model name or 'all'")
    return p


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, np.ndarray):
        _flatten(prefix, obj.tolist(), out)
    elif isinstance(obj, (list, tuple)) and any(isinstance(x, (list, tuple, dict, np.ndarray)) for x in obj):
        for i, x in enumerate(obj):
            _flatten(f"{prefix}[{i}]", x, out)
    elif isinstance(obj, (list, tuple)):
        out.append((prefix, "[" + ", ".join(sio.text_number(x) for x in obj) + "]"))
    else:
        out.append((prefix, sio.text_number(obj)))


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else (str(x) if isinstance(x, Fraction) else x) for x in r])
    return buf.getvalue()


def render(out: Output, cfg: RunConfig) -> str:
    report = {"schema": sio.SCHEMA, "command": cfg.command, "backend": cfg.backend}
    report.update(out.report)
    if cfg.fmt == "json":
        return sio.dumps(sio.number(report)) + "\n"
    if cfg.fmt == "csv":
        if out.header is not None:
            return _csv_text(out.header, out.rows)
        pairs = []
        _flatten("", report, pairs)
        return _csv_text(["key", "value"], pairs)
    pairs = []
    _flatten("", report, pairs)
    return "".join(f"{k}: {v}\n" for k, v in pairs)


def _command_name(args) -> str:
    parts = [args.command]
    for attr in ("chain_command", "walk_command", "dist_command", "tsp_command", "poisson_command", "jump_command", "queue_command", "zoo_command"):
        v = getattr(args, attr, None)
        if v:
            parts.append(v)
    return " ".join(parts)


def main(argv=None) -> int:
    fmt = "json"
    try:
        args = build_parser().parse_args(argv)
        for name in ("format", "backend", "csv_path", "seed"):
            if not hasattr(args, name):
                setattr(args, name, None)
        backend = args.backend or os.environ.get("STOCHASTIK_BACKEND", "exact")
        if backend not in ("exact", "float"):
            raise UsageError(f"STOCHASTIK_BACKEND must be exact or float, got {backend!r}")
        fmt = args.format or "json"
        cfg = RunConfig(_command_name(args), backend, fmt, args.seed, args.csv_path, {})
        out = args.func(args, cfg)
        if cfg.seed is not None:
            out.report.setdefault("seed", cfg.seed)
        if cfg.csv_path and out.header is None:
            raise UsageError("this command has no table to write as CSV")
        sys.stdout.write(render(out, cfg))
        if cfg.csv_path:
            with open(cfg.csv_path, "w", newline="") as fh:
                fh.write(_csv_text(out.header, out.rows))
        return out.status
    except UsageError as exc:
        _report_error(exc, fmt)
        return 2
    except (DomainError, StochastikError) as exc:
        _report_error(exc, fmt)
        return 1


def _report_error(exc: Exception, fmt: str) -> None:
    if fmt == "json":
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
