"""Configuration-driven experiment runner.

Subcommands:

* ``sample`` runs replicated chains from a JSON config, writing one CSV
  trace per replica plus a JSON summary,
* ``plan`` evaluates a parameter schedule for a target accuracy and prints
  it with verification margins (optionally feeding it into ``sample``),
* ``bound`` evaluates every envelope constant for a configured run,
* ``verify`` runs a module's invariant battery.

The config is one JSON file with nested keys; unknown keys are errors, not
warnings, because a silently ignored misspelling is the main failure mode of
numerical experiments.  Every output embeds the config hash and the seed it
was produced from.  Replica ``i`` runs under the seed derived from the root
seed by the splitmix64 scheme in :mod:`mollmc.rng`, so re-running any
experiment with the same config and seed reproduces the trace files byte for
byte regardless of worker scheduling.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

from . import bounds as _bounds
from . import rng as _rng
from .metrics import moment_report
from .planner import Plan, PlanRequest, plan_lmc, plan_ss_sg_lmc, verify_plan
from .potentials import BUILTIN_NAMES, FiniteSumPotential, builtin
from .samplers import (
    ChainConfig,
    ChainDivergenceError,
    ExactGradient,
    FiniteSumSpherical,
    InitLaw,
    SphericalSmoothed,
    run,
    write_trace_csv,
)
from .verify import SUITES, verify_suite

ALGORITHMS = ("lmc", "sg_lmc", "ss_lmc", "ss_sg_lmc")
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 3
EXIT_REFUSED = 4

_SCHEMA = {
    "potential": {"name", "d", "params"},
    "algorithm": None,
    "chain": {"beta", "eta", "k", "seed", "init", "record_stride"},
    "smoothing": {"r", "n_batch"},
    "finite_sum": {"n_components"},
    "replicas": None,
    "outputs": None,
}
_INIT_KEYS = {"kind", "x0"}


def validate_config(cfg: dict) -> dict:
    """Validate nested keys and ranges; returns the config unchanged."""
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    for key in cfg:
        if key not in _SCHEMA:
            raise ValueError(f"unknown key {key!r} at config top level")
    for key in ("potential", "algorithm", "chain"):
        if key not in cfg:
            raise ValueError(f"config is missing required key {key!r}")
    for section, allowed in _SCHEMA.items():
        if allowed is None or section not in cfg:
            continue
        if not isinstance(cfg[section], dict):
            raise ValueError(f"config section {section!r} must be an object")
        for key in cfg[section]:
            if key not in allowed:
                raise ValueError(f"unknown key {key!r} in config section {section!r}")

    pot = cfg["potential"]
    if pot.get("name") not in BUILTIN_NAMES:
        raise ValueError(
            f"potential name must be one of {BUILTIN_NAMES}, got {pot.get('name')!r}"
        )
    if "d" not in pot or int(pot["d"]) < 1:
        raise ValueError("potential.d must be a positive integer")
    if "params" in pot and not isinstance(pot["params"], dict):
        raise ValueError("potential.params must be an object")

    algo = cfg["algorithm"]
    if algo not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algo!r}")

    chain = cfg["chain"]
    for key in ("beta", "eta", "k", "seed"):
        if key not in chain:
            raise ValueError(f"chain section is missing {key!r}")
    if "init" in chain:
        init = chain["init"]
        if not isinstance(init, dict) or "kind" not in init:
            raise ValueError("chain.init must be an object with a 'kind'")
        for key in init:
            if key not in _INIT_KEYS:
                raise ValueError(f"unknown key {key!r} in chain.init")
        if init["kind"] not in ("gaussian", "point"):
            raise ValueError("chain.init.kind must be 'gaussian' or 'point'")
        if init["kind"] == "point" and "x0" not in init:
            raise ValueError("point init needs x0")

    needs_smoothing = algo in ("ss_lmc", "ss_sg_lmc", "sg_lmc")
    if needs_smoothing:
        if "smoothing" not in cfg:
            raise ValueError(f"algorithm {algo!r} needs a smoothing section")
        sm = cfg["smoothing"]
        if not (0.0 < float(sm.get("r", -1.0)) <= 1.0):
            raise ValueError("smoothing.r must lie in (0, 1]")
        if int(sm.get("n_batch", 0)) < 1:
            raise ValueError("smoothing.n_batch must be a positive integer")
    if algo in ("ss_sg_lmc", "sg_lmc"):
        if "finite_sum" not in cfg:
            raise ValueError(f"algorithm {algo!r} needs a finite_sum section")
        if int(cfg["finite_sum"].get("n_components", 0)) < 1:
            raise ValueError("finite_sum.n_components must be a positive integer")
    if "replicas" in cfg and int(cfg["replicas"]) < 1:
        raise ValueError("replicas must be a positive integer")
    return cfg


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(json.load(fh))


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()


def build_potential(cfg: dict):
    pot = cfg["potential"]
    return builtin(pot["name"], int(pot["d"]), **pot.get("params", {}))


def build_oracle(cfg: dict):
    algo = cfg["algorithm"]
    p = build_potential(cfg)
    if algo == "lmc":
        return ExactGradient(p)
    sm = cfg["smoothing"]
    if algo == "ss_lmc":
        return SphericalSmoothed(p, r=float(sm["r"]), n_batch=int(sm["n_batch"]))
    # sg_lmc is accepted as an alias of ss_sg_lmc: the smoothed mini-batch
    # estimator is the one stochastic gradient this package instantiates;
    # other stochastic oracles enter through the library API only.
    fs = FiniteSumPotential.equal_split(p, int(cfg["finite_sum"]["n_components"]))
    return FiniteSumSpherical(fs, r=float(sm["r"]), n_batch=int(sm["n_batch"]))


def build_chain_config(cfg: dict, seed: int) -> ChainConfig:
    chain = cfg["chain"]
    init_cfg = chain.get("init", {"kind": "gaussian"})
    if init_cfg["kind"] == "gaussian":
        init = InitLaw.gaussian()
    else:
        init = InitLaw.point(init_cfg["x0"])
    return ChainConfig(
        beta=float(chain["beta"]),
        eta=float(chain["eta"]),
        k=int(chain["k"]),
        seed=int(seed),
        init=init,
        record_stride=int(chain.get("record_stride", 1)),
    )


def _replica_worker(cfg: dict, root_seed: int, index: int) -> dict:
    """Run one replica; module-level so process pools can pickle it."""
    oracle = build_oracle(cfg)
    seed_i = _rng.replica_seed(root_seed, index)
    chain_cfg = build_chain_config(cfg, seed_i)
    try:
        trace = run(oracle, chain_cfg)
        diverged_at = None
    except ChainDivergenceError as err:
        trace = err.trace
        diverged_at = err.step_index
    return {
        "index": index,
        "seed": seed_i,
        "steps": trace.steps,
        "iterates": trace.iterates,
        "elapsed": trace.elapsed,
        "diverged_at": diverged_at,
        "config": chain_cfg,
    }


def _n_workers(replicas: int) -> int:
    env = os.environ.get("MOLLMC_WORKERS", "")
    if env:
        return max(1, int(env))
    return max(1, min(replicas, os.cpu_count() or 1))


def run_experiment(cfg: dict, root_seed: int, out_dir: Path) -> dict:
    """Run all replicas of a validated config and write traces + summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    replicas = int(cfg.get("replicas", 1))
    digest = config_hash(cfg)
    workers = _n_workers(replicas)

    if workers > 1 and replicas > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(_replica_worker, [cfg] * replicas, [root_seed] * replicas, range(replicas))
            )
    else:
        results = [_replica_worker(cfg, root_seed, i) for i in range(replicas)]

    potential = build_potential(cfg)
    summary_replicas = []
    any_diverged = False
    for res in sorted(results, key=lambda r: r["index"]):
        fname = f"chain_{res['index']:04d}.csv"
        from .samplers import Trace as _Trace

        trace = _Trace(
            steps=res["steps"],
            iterates=res["iterates"],
            config=res["config"],
            elapsed=res["elapsed"],
            diverged_at=res["diverged_at"],
        )
        write_trace_csv(
            trace,
            out_dir / fname,
            provenance={"config": digest, "seed": res["seed"], "replica": res["index"]},
        )
        entry = {
            "replica": res["index"],
            "seed": int(res["seed"]),
            "file": fname,
            "elapsed_s": res["elapsed"],
            "n_recorded": int(trace.n_recorded),
            "diverged_at": res["diverged_at"],
        }
        if res["diverged_at"] is None and trace.n_recorded > 1:
            entry["moments"] = moment_report(trace, m=potential.m)
        any_diverged = any_diverged or res["diverged_at"] is not None
        summary_replicas.append(entry)

    summary = {
        "config": cfg,
        "config_sha256": digest,
        "root_seed": int(root_seed),
        "replicas": summary_replicas,
        "diverged": any_diverged,
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    root_seed = int(args.seed) if args.seed is not None else int(cfg["chain"]["seed"])
    out = args.out or cfg.get("outputs")
    if not out:
        print("error: no output directory (set 'outputs' in the config or pass --out)",
              file=sys.stderr)
        return EXIT_ERROR
    summary = run_experiment(cfg, root_seed, Path(out))
    print(json.dumps({
        "config_sha256": summary["config_sha256"],
        "root_seed": summary["root_seed"],
        "diverged": summary["diverged"],
        "replicas": len(summary["replicas"]),
        "out": str(out),
    }, sort_keys=True))
    if summary["diverged"]:
        for entry in summary["replicas"]:
            if entry["diverged_at"] is not None:
                print(
                    f"replica {entry['replica']} diverged at step {entry['diverged_at']}",
                    file=sys.stderr,
                )
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_plan(args) -> int:
    req = PlanRequest(
        epsilon=args.epsilon,
        d=args.d,
        c_const=args.c_const,
        alpha=args.alpha,
        m=args.m,
        omega_one=args.omega_one,
    )
    if args.algorithm == "lmc":
        plan = plan_lmc(req)
    else:
        plan = plan_ss_sg_lmc(req)
    report = verify_plan(plan, req)
    print(json.dumps({"plan": plan.to_dict(), "verification": report.to_dict()}, indent=2))

    if not args.execute:
        return EXIT_OK if report.passed else EXIT_ERROR
    if plan.k > args.cap:
        log10k = mp.nstr(mp.log10(mp.mpf(plan.k)), 8)
        print(
            f"refusing to execute: k = {mp.nstr(mp.mpf(plan.k), 6)} exceeds the cap "
            f"{args.cap} (log10 k = {log10k})",
            file=sys.stderr,
        )
        return EXIT_REFUSED
    if not args.config:
        print("error: --execute needs --config with the potential/chain template",
              file=sys.stderr)
        return EXIT_ERROR
    cfg = load_config(args.config)
    cfg["chain"]["k"] = int(plan.k)
    cfg["chain"]["eta"] = float(plan.eta)
    if plan.algorithm == "ss_sg_lmc":
        cfg.setdefault("smoothing", {})
        cfg["smoothing"]["r"] = float(plan.r)
        cfg["smoothing"]["n_batch"] = int(plan.n_batch)
    validate_config(cfg)
    out = args.out or cfg.get("outputs")
    if not out:
        print("error: no output directory for --execute", file=sys.stderr)
        return EXIT_ERROR
    root_seed = int(args.seed) if args.seed is not None else int(cfg["chain"]["seed"])
    summary = run_experiment(cfg, root_seed, Path(out))
    return EXIT_DIVERGED if summary["diverged"] else EXIT_OK


def cmd_bound(args) -> int:
    cfg = load_config(args.config)
    potential = build_potential(cfg)
    oracle = build_oracle(cfg)
    if args.r is not None:
        r = float(args.r)
    elif "smoothing" in cfg:
        r = float(cfg["smoothing"]["r"])
    else:
        print("error: exact-gradient configs need --r (analysis radius)", file=sys.stderr)
        return EXIT_ERROR
    chain = cfg["chain"]
    init_kind = chain.get("init", {"kind": "gaussian"})["kind"]
    if init_kind != "gaussian":
        print("error: bound evaluation needs the gaussian initial law "
              "(a point mass has no density)", file=sys.stderr)
        return EXIT_ERROR
    inputs = _bounds.inputs_from(potential, oracle, beta=float(chain["beta"]), r=r,
                                 a_abs=args.a_abs)
    try:
        tb = _bounds.theorem_bound(inputs, r=r, eta=float(chain["eta"]), k=int(chain["k"]))
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    payload = tb.to_dict()
    payload["config_sha256"] = config_hash(cfg)
    payload["r"] = r
    payload["eta"] = float(chain["eta"])
    payload["k"] = int(chain["k"])
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_suite(args.suite)
    print(json.dumps(report, indent=2))
    if not report["passed"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mollmc",
        description="Langevin sampling experiments with explicit error-bound arithmetic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="run replicated chains from a config")
    p_sample.add_argument("--config", required=True, help="JSON experiment config")
    p_sample.add_argument("--seed", type=int, default=None, help="override the root seed")
    p_sample.add_argument("--out", default=None, help="override the output directory")
    p_sample.set_defaults(func=cmd_sample)

    p_plan = sub.add_parser("plan", help="evaluate a parameter schedule")
    p_plan.add_argument("--algorithm", choices=("lmc", "ss_sg_lmc"), default="lmc")
    p_plan.add_argument("--epsilon", type=float, required=True)
    p_plan.add_argument("--d", type=int, required=True)
    p_plan.add_argument("--alpha", type=float, default=None,
                        help="gradient regularity exponent (lmc only)")
    p_plan.add_argument("--c-const", type=float, default=1.0, dest="c_const")
    p_plan.add_argument("--m", type=float, default=1.0)
    p_plan.add_argument("--omega-one", type=float, default=1.0, dest="omega_one")
    p_plan.add_argument("--execute", action="store_true",
                        help="feed the plan into sample (needs --config)")
    p_plan.add_argument("--cap", type=int, default=1_000_000,
                        help="largest k that --execute will run")
    p_plan.add_argument("--config", default=None)
    p_plan.add_argument("--seed", type=int, default=None)
    p_plan.add_argument("--out", default=None)
    p_plan.set_defaults(func=cmd_plan)

    p_bound = sub.add_parser("bound", help="evaluate the error envelope for a config")
    p_bound.add_argument("--config", required=True)
    p_bound.add_argument("--r", type=float, default=None, help="analysis radius")
    p_bound.add_argument("--a-abs", type=float, default=1.0, dest="a_abs",
                         help="absolute constant of the Poincare bound")
    p_bound.set_defaults(func=cmd_bound)

    p_verify = sub.add_parser("verify", help="run a module invariant battery")
    p_verify.add_argument("--suite", choices=sorted(SUITES), required=True)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
