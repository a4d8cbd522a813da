"""Command-line entry point for every pipeline stage.

Machine-readable JSON goes to stdout, human logs to stderr. Every result
embeds the effective configuration so a run can be reproduced exactly.
Exit codes: 0 success, 1 negative verdict (formula violated / no
solution), 2 usage errors, 3 runtime errors. The `value` command exits
with 2 when the valuation is exactly zero and the boolean semantics had
the final say.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import session as sess
from .datafiles import (
    read_manifest,
    load_entry,
    read_observation,
    save_dataset,
    write_observation,
)
from .errors import DivergenceError, GenerationError, UsageError
from .learner import (
    LearnerConfig,
    evaluate_classifier,
    learn_ruleset,
    read_ruleset,
    ruleset_to_tssl,
    write_ruleset,
)
from .optimizer import FitnessSpec, SearchBox, SwarmConfig, synthesize
from .quadtree import QTS, build_qts, build_quadtree, qts_from_observation
from .rdsim import (
    FixedSampler,
    NotConverged,
    Observation,
    SteadyStateConfig,
    SystemParams,
    UniformDiffusionSampler,
    generate_dataset,
    initial_state,
    simulate_to_steady,
)
from .tssl import check as tssl_check
from .tssl import parse_file as tssl_parse_file
from .tssl import to_text as tssl_to_text
from .tssl import value as tssl_value


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=1, default=float)
    sys.stdout.write("\n")


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _steady_cfg(args) -> SteadyStateConfig:
    return SteadyStateConfig(epsilon=args.eps, T=args.T, t_max=args.tmax, dt=args.dt)


def _add_steady_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=0.02, help="integration step")
    p.add_argument("--eps", type=float, default=None,
                   help="steady-state tolerance (default 3e-2*K*K*N)")
    p.add_argument("--T", type=float, default=10.0, help="running-average window")
    p.add_argument("--tmax", type=float, default=60.0, help="abort horizon")


def _system_params(args) -> SystemParams:
    return SystemParams(K=args.K, N=args.N, D=_floats(args.D), R=_floats(args.R),
                        dynamics_id=args.dynamics)


def _add_system_flags(p: argparse.ArgumentParser, with_d: bool = True) -> None:
    p.add_argument("--K", type=int, default=32, help="grid side (power of two)")
    p.add_argument("--N", type=int, default=2, help="species count")
    if with_d:
        p.add_argument("--D", default="5.6,24.5", help="diffusion coefficients")
    p.add_argument("--R", default="1,-12,-1,16", help="local dynamics parameters")
    p.add_argument("--dynamics", default="turing2", help="local dynamics name")


def cmd_simulate(args) -> int:
    params = _system_params(args)
    cfg = _steady_cfg(args)
    x0 = initial_state(params, args.seed)
    result = simulate_to_steady(params, x0, cfg, rng_seed=args.seed)
    config = {"params": params.to_dict(), "steady": cfg.to_dict(), "seed": args.seed,
              "out": args.out, "format": args.format}
    if isinstance(result, NotConverged):
        _emit({"converged": False, "residual": result.residual, "config": config})
        _log(f"no steady state by t={cfg.t_max}")
        return 1
    paths = []
    if args.out:
        paths = [str(p) for p in write_observation(result, args.out, args.format)]
    _emit({"converged": True, "t_bar": result.meta.get("t_bar"),
           "std": float(result.values.std()), "files": paths, "config": config})
    return 0


def cmd_gen_data(args) -> int:
    params = _system_params(args)
    cfg = _steady_cfg(args)
    if args.negative:
        box = [tuple(iv) for iv in
               SearchBox.parse(args.d_box).intervals]
        sampler = UniformDiffusionSampler(params, box)
        label = "-"
    else:
        sampler = FixedSampler(params)
        label = "+"
    observations = generate_dataset(sampler, args.count, cfg, rng_seed=args.seed)
    manifest = save_dataset(observations, args.out_dir, label, fmt=args.format)
    _emit({"count": len(observations), "label": label, "manifest": str(manifest),
           "config": {"params": params.to_dict(), "steady": cfg.to_dict(),
                      "seed": args.seed, "count": args.count, "negative": args.negative,
                      "d_box": args.d_box if args.negative else None,
                      "out_dir": args.out_dir, "format": args.format}})
    return 0


def cmd_qts(args) -> int:
    values = read_observation(args.obs.split(",") if "," in args.obs else args.obs)
    qt = build_quadtree(values, args.quant)
    qts = build_qts(qt)
    text = qts.to_dot() if args.dot else qts.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        return 0
    _emit({"states": qts.n_states, "vertices": qt.vertex_count(), "out": args.out,
           "config": {"obs": args.obs, "quant": args.quant, "dot": args.dot}})
    return 0


def _load_qts_arg(args) -> QTS:
    if args.qts:
        return QTS.from_text(Path(args.qts).read_text(encoding="utf-8"))
    if args.obs:
        values = read_observation(args.obs.split(",") if "," in args.obs else args.obs)
        return qts_from_observation(values, args.quant)
    raise UsageError("provide --qts or --obs")


def cmd_check(args) -> int:
    qts = _load_qts_arg(args)
    phi = tssl_parse_file(args.formula, value_bound=qts.value_bound)
    sat = tssl_check(qts, phi)
    _emit({"satisfied": sat,
           "config": {"qts": args.qts, "obs": args.obs, "quant": args.quant,
                      "formula": args.formula}})
    return 0 if sat else 1


def cmd_value(args) -> int:
    qts = _load_qts_arg(args)
    phi = tssl_parse_file(args.formula, value_bound=qts.value_bound)
    val = tssl_value(qts, phi)
    sat = tssl_check(qts, phi)
    _emit({"value": f"{val:.9f}", "satisfied": sat,
           "config": {"qts": args.qts, "obs": args.obs, "quant": args.quant,
                      "formula": args.formula}})
    if val > 0:
        return 0
    if val < 0:
        return 1
    return 2  # exactly zero: boolean semantics decided


def _load_labeled(manifest_path: str) -> list[tuple]:
    manifest = Path(manifest_path)
    items = []
    for entry in read_manifest(manifest):
        items.append((Observation(load_entry(entry, root=manifest.parent)), entry.label))
    return items


def cmd_learn(args) -> int:
    items = []
    for manifest in args.train:
        items.extend(_load_labeled(manifest))
    cfg = LearnerConfig(max_depth=args.dmax, quant_levels=args.quant, seed=args.seed,
                        optimization_rounds=args.optimization_rounds)
    ruleset = learn_ruleset(items, cfg)
    phi = ruleset_to_tssl(ruleset)
    if args.out_rules:
        write_ruleset(ruleset, args.out_rules)
    if args.out_formula:
        Path(args.out_formula).write_text(tssl_to_text(phi) + "\n", encoding="utf-8")
    _emit({"n_rules": len(ruleset), "formula": tssl_to_text(phi),
           "config": {"train": args.train, "dmax": args.dmax, "quant": args.quant,
                      "seed": args.seed,
                      "optimization_rounds": args.optimization_rounds,
                      "out_rules": args.out_rules, "out_formula": args.out_formula}})
    return 0


def cmd_eval(args) -> int:
    phi = tssl_parse_file(args.formula)
    items = []
    for manifest in args.test:
        items.extend(_load_labeled(manifest))
    n_rules = len(read_ruleset(args.rules)) if args.rules else None
    metrics = evaluate_classifier(phi, items, quant_levels=args.quant, n_rules=n_rules)
    payload = metrics.to_dict()
    payload["config"] = {"formula": args.formula, "test": args.test,
                         "quant": args.quant, "rules": args.rules}
    _emit(payload)
    return 0


def cmd_optimize(args) -> int:
    params = _system_params(args)
    phi = tssl_parse_file(args.formula)
    box = SearchBox.parse(args.box)
    spec = FitnessSpec(template=params, free_params=tuple(args.free.split(",")),
                       formula=phi, x0_seeds=tuple(range(args.x0_seeds)),
                       steady=_steady_cfg(args), quant_levels=args.quant)
    swarm = SwarmConfig(swarm_size=args.swarm, iterations=args.iters, seed=args.seed,
                        stop_when_positive=args.stop_when_positive,
                        workers=args.workers)
    result = synthesize(spec, box, swarm)
    payload = result.to_dict()
    payload["config"] = {"params": params.to_dict(), "formula": args.formula,
                         "box": args.box, "free": args.free,
                         "x0_seeds": args.x0_seeds, "steady": _steady_cfg(args).to_dict(),
                         "swarm": swarm.swarm_size, "iters": swarm.iterations,
                         "seed": swarm.seed, "quant": args.quant,
                         "stop_when_positive": args.stop_when_positive}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, default=float)
    _emit(payload)
    _log(f"gamma={result.gamma:.6g} at p={list(map(float, result.p_star))}")
    return 0 if result.gamma >= 0 else 1


def _session_config_from_file(path: str) -> sess.SessionConfig:
    with open(path, encoding="utf-8") as fh:
        return sess.SessionConfig.from_dict(json.load(fh))


def _session_view(session: sess.Session) -> dict:
    return {"id": session.id, "state": session.state, "iteration": session.iteration,
            "capped": session.capped, "error": session.error,
            "history": sess.history_of(session)}


def cmd_synth(args) -> int:
    root = args.root
    if args.synth_cmd == "start":
        config = _session_config_from_file(args.config)
        session = sess.start_session(args.pos, args.neg, config, root, session_id=args.id)
        if not args.no_run:
            sess.run_until_review(session)
        _emit(_session_view(session))
        return 0 if session.state != sess.FAILED else 1
    if args.synth_cmd == "status":
        _emit(_session_view(sess.load_session(root, args.id)))
        return 0
    if args.synth_cmd == "decide":
        session = sess.load_session(root, args.id)
        decision = "approve" if args.approve else "reject"
        sess.decide(session, decision)
        if session.state == sess.LEARNING and not args.no_run:
            sess.run_until_review(session)
        _emit(_session_view(session))
        return 0 if session.state != sess.FAILED else 1
    if args.synth_cmd == "resume":
        session = sess.load_session(root, args.id)
        if session.state in (sess.LEARNING, sess.OPTIMIZING):
            sess.run_until_review(session)
        _emit(_session_view(session))
        return 0 if session.state != sess.FAILED else 1
    raise UsageError(f"unknown synth subcommand {args.synth_cmd!r}")


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_root, ui_dist=args.ui_dist)
    _log(f"serving on port {args.port}, data root {args.data_root}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patternsynth",
        description="spatial pattern detection and parameter synthesis")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="one run to steady state")
    _add_system_flags(p)
    _add_steady_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file base (per-channel files)")
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("gen-data", help="generate a labeled dataset")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--positive", action="store_true")
    group.add_argument("--negative", action="store_true")
    _add_system_flags(p)
    _add_steady_flags(p)
    p.add_argument("--d-box", default="0,30;0,30",
                   help="negative sampling box for D, e.g. 0,30;0,30")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("qts", help="build and export the QTS of an observation")
    p.add_argument("--obs", required=True, help="observation file (or comma list)")
    p.add_argument("--quant", type=int, default=16)
    p.add_argument("--dot", action="store_true", help="emit DOT instead of text")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_qts)

    for name, fn in (("check", cmd_check), ("value", cmd_value)):
        p = sub.add_parser(name, help=f"{name} a formula against a QTS")
        p.add_argument("--qts", help="QTS text file")
        p.add_argument("--obs", help="observation file (or comma list)")
        p.add_argument("--quant", type=int, default=16)
        p.add_argument("--formula", required=True)
        p.set_defaults(fn=fn)

    p = sub.add_parser("learn", help="learn a rule set and formula")
    p.add_argument("--train", nargs="+", required=True, help="manifest file(s)")
    p.add_argument("--dmax", type=int, default=4)
    p.add_argument("--quant", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimization-rounds", type=int, default=1)
    p.add_argument("--out-rules")
    p.add_argument("--out-formula")
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("eval", help="evaluate a formula classifier")
    p.add_argument("--formula", required=True)
    p.add_argument("--test", nargs="+", required=True, help="manifest file(s)")
    p.add_argument("--quant", type=int, default=16)
    p.add_argument("--rules", help="ruleset file, for n_rules reporting")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("optimize", help="swarm-search parameters for a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--box", default="0,30;0,30")
    p.add_argument("--free", default="D1,D2")
    _add_system_flags(p, with_d=True)
    _add_steady_flags(p)
    p.add_argument("--x0-seeds", type=int, default=4)
    p.add_argument("--quant", type=int, default=16)
    p.add_argument("--swarm", type=int, default=20)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stop-when-positive", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("synth", help="interactive design sessions")
    p.add_argument("--root", default="sessions")
    synth_sub = p.add_subparsers(dest="synth_cmd", required=True)
    ps = synth_sub.add_parser("start")
    ps.add_argument("--pos", required=True)
    ps.add_argument("--neg", required=True)
    ps.add_argument("--config", required=True, help="session config JSON")
    ps.add_argument("--id")
    ps.add_argument("--no-run", action="store_true")
    ps = synth_sub.add_parser("status")
    ps.add_argument("--id", required=True)
    ps = synth_sub.add_parser("decide")
    ps.add_argument("--id", required=True)
    group = ps.add_mutually_exclusive_group(required=True)
    group.add_argument("--approve", action="store_true")
    group.add_argument("--reject", action="store_true")
    ps.add_argument("--no-run", action="store_true")
    ps = synth_sub.add_parser("resume")
    ps.add_argument("--id", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-root", default="sessions")
    p.add_argument("--ui-dist", help="static UI bundle directory")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        _emit({"error": str(exc)})
        return 2
    except (DivergenceError, GenerationError) as exc:
        _log(f"runtime error: {exc}")
        _emit({"error": str(exc)})
        return 3
    except OSError as exc:
        _log(f"io error: {exc}")
        _emit({"error": str(exc)})
        return 3


if __name__ == "__main__":
    sys.exit(main())
