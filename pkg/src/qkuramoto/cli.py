"""Command-line interface: ``qkuramoto <command> [options]``.

Every command reads an optional JSON run configuration (``--config``);
command-line flags take precedence over configuration values. Exit codes:
0 on success, 2 for usage or configuration errors, 3 for runtime failures
such as blow-up or a disconnected graph, 1 when ``verify`` finds a failing
check.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import io as qio
from .algebra import canonical_twist, exp_map, group_from_tag
from .bounds import DEFAULT_P_GRID, so3_admissibility, zero_sum_check
from .dynamics import (CouplingSeries, FrustrationPair, QKFlow, integrate,
                       random_algebra)
from .errors import BlowUpError, NumericError, QKError, RankError
from .graphs import alpha_graph, strict_bandwidth_graph
from .linearization import classify_stability, fd_jacobian_oracle, jacobian_matrix
from .solutions import (TwistFlipSpec, class_distance, double_flip_example,
                        fixed_point_residual, near_sync, sync_configuration,
                        twist_flip_configuration)
from .spectra import (alpha_star, double_twist_eigs, g_threshold, rho_star,
                      single_twist_eigs, supports_one_twist)
from . import verify as qverify

log = logging.getLogger("qkuramoto")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULTS = {
    "group": "so",
    "d": 3,
    "graph": {"n": 10, "circulant": [1.0]},
    "coupling": [1.0],
    "forcing": {"kind": "zero"},
    "initial": {"sync": True},
    "perturbation": 0.0,
    "integrator": {"t_end": 10.0, "h": 0.01, "method": "midpoint", "store_every": 10},
    "eps": 0.01,
    "seed": 0,
}


class ConfigError(QKError, ValueError):
    """Malformed or inconsistent run configuration."""


# --------------------------------------------------------------------------
# Configuration handling
# --------------------------------------------------------------------------

def load_config(path) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            user = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict) and key == "integrator":
                cfg[key].update(val)
            else:
                cfg[key] = val
    return cfg


def _finite(name, x):
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError(f"{name} must be finite")
    return x


def _group(cfg):
    return group_from_tag(cfg["group"], int(cfg["d"]))


def _rng(cfg):
    seed = int(cfg["seed"])
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return np.random.default_rng(seed)


def _frustration(cfg, d):
    fr = cfg.get("frustration")
    if not fr:
        return None
    if "A" in fr:
        return FrustrationPair(np.array(fr["A"], dtype=float), np.array(fr["B"], dtype=float))
    return FrustrationPair(canonical_twist(fr["A_angles"], d), canonical_twist(fr["B_angles"], d))


def _forcing(cfg, group, n, rng):
    spec = cfg.get("forcing") or {"kind": "zero"}
    kind = spec.get("kind", "matrices" if "matrices" in spec else "zero")
    if kind == "zero":
        return None
    if kind == "random":
        om = random_algebra(group, n, rng, _finite("forcing.scale", spec.get("scale", 0.1)))
        return om - om.mean(axis=0) if spec.get("balanced", True) else om
    if kind == "matrices":
        om = np.array(spec["matrices"], dtype=group.dtype)
        if om.shape != (n, group.d, group.d):
            raise ConfigError(f"forcing must have shape ({n}, {group.d}, {group.d})")
        return om
    raise ConfigError(f"unknown forcing kind {kind!r}")


def _configuration(spec, group, n):
    """Initial or solution configuration from its JSON description."""
    if spec is None or spec.get("sync"):
        return sync_configuration(n, group.identity())
    if "twist" in spec:
        tw = dict(spec["twist"])
        tw.setdefault("n", n)
        tw.setdefault("d", group.d)
        return qio.configuration_from_json({"twist": tw})
    if "double_flip" in spec:
        return double_flip_example(int(spec["double_flip"]))
    if "twist_flip" in spec:
        tf = spec["twist_flip"]
        return twist_flip_configuration(TwistFlipSpec.from_flips(
            int(tf.get("n", n)), int(tf.get("d", group.d)), tf["windings"], tf.get("flips", ())))
    if "matrices" in spec:
        return qio.configuration_from_json({"n": n, "d": group.d, "group": group.tag, **spec})
    raise ConfigError("unrecognised configuration description")


def _windings(spec):
    if spec and "twist" in spec:
        ls = list(spec["twist"].get("l", []))
        return ls + [0] * max(0, 2 - len(ls))
    return None


def _write(out: Path | None, name: str, text: str):
    if out is None:
        sys.stdout.write(text)
        return None
    return qio.write_text(out / name, text)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_simulate(cfg, args) -> int:
    group = _group(cfg)
    rng = _rng(cfg)
    graph = qio.graph_from_json(cfg["graph"])
    n = graph.n
    f = CouplingSeries(tuple(cfg["coupling"]))
    omega = _forcing(cfg, group, n, rng)
    frustration = _frustration(cfg, group.d)
    reference = _configuration(cfg.get("initial"), group, n)
    scale = _finite("perturbation", cfg.get("perturbation", 0.0))
    X0 = reference @ exp_map(scale * random_algebra(group, n, rng), group) if scale else reference
    integ = cfg["integrator"]
    flow = QKFlow(group, graph, f, omega, frustration)
    traj = integrate(X0, flow, _finite("t_end", integ["t_end"]), h=_finite("h", integ["h"]),
                     method=integ.get("method", "midpoint"),
                     store_every=int(integ.get("store_every", 1)))
    final = traj.final
    summary = {
        "seed": int(cfg["seed"]),
        "t_end": float(traj.times[-1]),
        "steps_stored": int(len(traj.times)),
        "final_residual": fixed_point_residual(final, omega, graph, f, frustration, group),
        "drift_max": float(np.max(traj.drift)),
        "retractions": traj.retractions,
        "order_parameter": float(np.linalg.norm(final.mean(axis=0))),
        "initial_orbit_distance": class_distance(X0, reference, group),
        "final_orbit_distance": class_distance(final, reference, group),
    }
    out = args.out
    _write(out, "trajectory.csv", qio.trajectory_csv(traj.times, traj.states, cfg["seed"]))
    _write(out, "summary.json", qio.dumps(summary))
    return EXIT_OK


def _match(a, b) -> float:
    """Largest gap in an optimal pairing of two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if len(r) else 0.0


def _eig_rows(eigs, source, ls):
    order = np.lexsort((np.imag(eigs), np.real(eigs)))
    return [{"family": "numeric", "l1": ls[0], "l2": ls[1], "m": "",
             "re": float(np.real(eigs[k])), "im": float(np.imag(eigs[k])),
             "multiplicity": 1, "source": source} for k in order]


def cmd_spectrum(cfg, args) -> int:
    group = _group(cfg)
    if group.tag != "so":
        raise ConfigError("spectra are computed for SO(d) only")
    graph = qio.graph_from_json(cfg["graph"])
    f = CouplingSeries(tuple(cfg["coupling"]))
    frustration = _frustration(cfg, group.d)
    sol = cfg.get("solution", cfg.get("initial"))
    Y = _configuration(sol, group, graph.n)
    ls = _windings(sol) or ["", ""]
    J = jacobian_matrix(Y, graph, f, frustration=frustration)
    eigs = J.eigenvalues()
    verdict = classify_stability(J, J.dim_g)
    rows = _eig_rows(eigs, "numeric", ls)
    report = {"seed": int(cfg["seed"]), "verdict": verdict.tag,
              "positive": verdict.n_positive, "zero": verdict.n_zero,
              "negative": verdict.n_negative, "zero_tol": verdict.zero_tol,
              "nonreal_eigenvalues": verdict.has_nonreal,
              "symmetric": J.is_symmetric()}

    windings = _windings(sol)
    nonzero = [w for w in (windings or []) if w]
    closed = None
    if (windings is not None and graph.is_circulant and f.is_linear
            and frustration is None and len(nonzero) <= 2):
        l1, l2 = windings[0], windings[1]
        if l2 and group.d >= 4:
            closed = double_twist_eigs(graph.bands, graph.n, group.d, l1, l2)
        elif not any(windings[1:]):
            closed = single_twist_eigs(graph.bands, graph.n, group.d, l1)
    if closed is not None:
        for e in closed.entries:
            rows.append({"family": e.family, "l1": e.ls[0],
                         "l2": e.ls[1] if len(e.ls) > 1 else "", "m": e.m,
                         "re": e.value, "im": 0.0, "multiplicity": e.multiplicity,
                         "source": "closed_form"})
        report["closed_form_discrepancy"] = _match(closed.multiset(), eigs)

    if args.compare == "oracle":
        flow = QKFlow(group, graph, f, None, frustration)
        fd = np.linalg.eigvals(fd_jacobian_oracle(Y, flow).matrix)
        rows.extend(_eig_rows(fd, "fd_oracle", ls))
        report["max_discrepancy"] = _match(fd, eigs)

    _write(args.out, "spectrum.csv", qio.spectrum_csv(rows, cfg["seed"]))
    _write(args.out, "verdict.json", qio.dumps(report))
    return EXIT_OK


def _scan_rho(n):
    return [(n, rho_star(n), (math.pi / n) ** 2, rho_star(n) * (n / math.pi) ** 2)]


def _scan_alpha(point):
    alpha, n = point
    ok, w = supports_one_twist(alpha_graph(alpha, n).bands, n)
    return [(alpha, n, ok, w.family, w.m, w.value)]


def _scan_strict(point):
    K, n = point
    ok, w = supports_one_twist(strict_bandwidth_graph(n, K).bands, n)
    return [(K, n, n % K == 0, ok, w.family, w.m, w.value)]


def _scan_twist(point):
    n, gamma, ell, d = point
    spec = single_twist_eigs(gamma, n, d, ell)
    return [(n, len(gamma), *gamma, ell, e.family, e.m, e.value) for e in spec.entries]


def _scan_plan(scan: dict):
    kind = scan.get("kind")
    if kind == "rho_star":
        grid = [int(n) for n in scan.get("n", [])]
        return grid, _scan_rho, ("n", "rho_star", "pi_over_n_squared", "ratio")
    if kind == "alpha":
        grid = [(float(a), int(n)) for n in scan.get("n", [400]) for a in scan.get("alpha", [])]
        return grid, _scan_alpha, ("alpha", "n", "supports", "witness_family", "witness_m",
                                   "witness_value")
    if kind == "strict_k":
        grid = [(int(K), int(n)) for K in scan.get("K", []) for n in scan.get("n", [])
                if int(K) <= int(n) // 2]
        return grid, _scan_strict, ("K", "n", "K_divides_n", "supports", "witness_family",
                                    "witness_m", "witness_value")
    if kind == "twist_spectrum":
        gammas = [tuple(float(x) for x in g) for g in scan.get("gamma", [])]
        d = int(scan.get("d", 3))
        grid = [(int(n), g, int(ell), d) for n in scan.get("n", []) for g in gammas
                for ell in scan.get("l", [1])]
        K = max((len(g) for g in gammas), default=1)
        header = ("n", "K", *[f"gamma{k}" for k in range(1, K + 1)], "l", "family", "m", "value")
        if len({len(g) for g in gammas}) > 1:
            raise ConfigError("all gamma vectors in one scan must share a length")
        return grid, _scan_twist, header
    raise ConfigError(f"unknown scan kind {kind!r}; use rho_star, alpha, strict_k, "
                      "twist_spectrum or thresholds")


def cmd_scan(cfg, args) -> int:
    scan = dict(cfg.get("scan") or {})
    if args.kind:
        scan["kind"] = args.kind
    if scan.get("kind") == "thresholds":
        report = {"alpha_star": alpha_star()}
        if "n" in scan:
            report["rho_star"] = rho_star(int(scan["n"]))
            if "gamma_tail" in scan:
                report["g_threshold"] = g_threshold(scan["gamma_tail"], int(scan["n"]))
        _write(args.out, "thresholds.json", qio.dumps(report))
        return EXIT_OK
    grid, worker, header = _scan_plan(scan)
    if not grid:
        raise ConfigError("scan grid is empty")
    threads = max(1, int(args.threads or cfg.get("threads", 1)))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map yields in submission order, so output order is the grid order
        chunks = list(pool.map(worker, grid))
    rows = [r for chunk in chunks for r in chunk]
    _write(args.out, "scan.csv", qio.table_csv(header, rows, cfg["seed"]))
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    suite = args.suite
    try:
        numbers = qverify.criteria_in_suite(suite)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    results = [qverify.run_criterion(k) for k in numbers]
    for r in results:
        print(r.summary(), file=sys.stderr)
    report = {"suite": suite, "passed": all(r.passed for r in results),
              "criteria": [r.to_json() for r in results]}
    _write(args.out, f"verify_{suite}.json", qio.dumps(report))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_near_sync(cfg, args) -> int:
    group = _group(cfg)
    rng = _rng(cfg)
    graph = qio.graph_from_json(cfg["graph"])
    f = CouplingSeries(tuple(cfg["coupling"]))
    omega = _forcing(cfg, group, graph.n, rng)
    if omega is None:
        omega = np.zeros((graph.n, group.d, group.d), dtype=group.dtype)
    eps = _finite("eps", args.eps if args.eps is not None else cfg["eps"])
    Y, Q = near_sync(graph, omega, eps, f, group)
    summary = {"seed": int(cfg["seed"]), "eps": eps,
               "residual": fixed_point_residual(Y, eps * omega, graph, f, group=group),
               "q_sum_norm": float(np.linalg.norm(Q.sum(axis=0)))}
    _write(args.out, "near_sync.json", qio.dumps(qio.configuration_to_json(Y, group.tag)))
    _write(args.out, "near_sync_summary.json", qio.dumps(summary))
    return EXIT_OK


def cmd_bounds(cfg, args) -> int:
    group = _group(cfg)
    rng = _rng(cfg)
    graph = qio.graph_from_json(cfg["graph"])
    omega = _forcing(cfg, group, graph.n, rng)
    if omega is None:
        omega = np.zeros((graph.n, group.d, group.d))
    p_grid = [math.inf if str(p) in ("inf", "Infinity") else float(p)
              for p in cfg.get("p_grid", DEFAULT_P_GRID)]
    report = so3_admissibility(omega, graph, p_grid, group).to_json()
    report["zero_sum"] = zero_sum_check(omega)
    report["seed"] = int(cfg["seed"])
    _write(args.out, "bounds.json", qio.dumps(report))
    return EXIT_OK


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="64-bit seed (overrides config)")
    common.add_argument("--out", type=Path, help="output directory (default: stdout)")
    common.add_argument("--threads", type=int, help="worker threads for scans")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qkuramoto",
                                     description="Quantum Kuramoto flows on matrix groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="integrate the flow")
    p.add_argument("--t-end", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--store-every", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", parents=[common], help="linearisation spectrum")
    p.add_argument("--compare", choices=["oracle"], help="add finite-difference oracle rows")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan", parents=[common], help="threshold and support scans")
    p.add_argument("--kind", choices=["rho_star", "alpha", "strict_k", "twist_spectrum",
                                      "thresholds"])
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    p.add_argument("suite", nargs="?", default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("near-sync", parents=[common], help="near-synchronous fixed point")
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_near_sync)

    p = sub.add_parser("bounds", parents=[common], help="forcing admissibility (SO(3))")
    p.set_defaults(func=cmd_bounds)
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg["seed"] = args.seed
    integ = cfg["integrator"]
    for flag, key in (("t_end", "t_end"), ("h", "h"), ("store_every", "store_every")):
        val = getattr(args, flag, None)
        if val is not None:
            integ[key] = val
    if getattr(args, "compare", None) is None:
        args.compare = cfg.get("compare")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        return args.func(cfg, args)
    except (BlowUpError, RankError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
