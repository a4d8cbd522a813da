"""Persistent, resumable design-loop sessions.

One directory per session holds everything: the (growing) dataset
manifests, one immutable subdirectory per iteration with the learned
rule set, formula, optimizer result and candidate observations, and a
session.json snapshot that is replaced atomically on every transition.
The loop is: learn a formula from the labeled sets, optimize parameters
against it, show the resulting patterns for review; approval finishes,
rejection appends the candidates to the negative set and retrains.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import shutil
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .datafiles import (
    ManifestEntry,
    load_entry,
    read_manifest,
    write_csv,
    write_manifest,
)
from .errors import SessionStateError, UsageError
from .learner import LearnerConfig, learn_ruleset, ruleset_to_tssl, write_ruleset
from .optimizer import FitnessSpec, SearchBox, SwarmConfig, synthesize
from .quadtree import qts_from_observation
from .rdsim import (
    NotConverged,
    Observation,
    SteadyStateConfig,
    SystemParams,
    initial_state,
    simulate_to_steady,
)
from .tssl import check as tssl_check
from .tssl import parse as tssl_parse
from .tssl import to_text as tssl_to_text
from .tssl import value as tssl_value

LEARNING = "learning"
OPTIMIZING = "optimizing"
AWAITING_REVIEW = "awaiting_review"
DONE = "done"
FAILED = "failed"


@dataclass
class SessionConfig:
    params: SystemParams
    box: SearchBox
    free_params: tuple[str, ...] = ("D1", "D2")
    steady: SteadyStateConfig = field(default_factory=SteadyStateConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    x0_seeds: tuple[int, ...] = (0, 1, 2, 3)
    candidate_count: int = 8
    max_iterations: int = 10
    formula_override: str | None = None

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "box": [list(iv) for iv in self.box.intervals],
            "free_params": list(self.free_params),
            "steady": self.steady.to_dict(),
            "learner": {
                "max_depth": self.learner.max_depth,
                "quant_levels": self.learner.quant_levels,
                "seed": self.learner.seed,
                "optimization_rounds": self.learner.optimization_rounds,
            },
            "swarm": {
                "swarm_size": self.swarm.swarm_size,
                "iterations": self.swarm.iterations,
                "inertia": self.swarm.inertia,
                "cognitive": self.swarm.cognitive,
                "social": self.swarm.social,
                "velocity_clamp": self.swarm.velocity_clamp,
                "seed": self.swarm.seed,
                "stop_when_positive": self.swarm.stop_when_positive,
                "workers": self.swarm.workers,
            },
            "x0_seeds": list(self.x0_seeds),
            "candidate_count": self.candidate_count,
            "max_iterations": self.max_iterations,
            "formula_override": self.formula_override,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        return cls(
            params=SystemParams.from_dict(d["params"]),
            box=SearchBox(tuple(tuple(iv) for iv in d["box"])),
            free_params=tuple(d["free_params"]),
            steady=SteadyStateConfig(**d["steady"]),
            learner=LearnerConfig(**d["learner"]),
            swarm=SwarmConfig(**d["swarm"]),
            x0_seeds=tuple(d["x0_seeds"]),
            candidate_count=int(d["candidate_count"]),
            max_iterations=int(d["max_iterations"]),
            formula_override=d.get("formula_override"),
        )


@dataclass
class Session:
    root: Path
    id: str
    state: str
    iteration: int
    config: SessionConfig
    capped: bool = False
    error: str | None = None

    @property
    def dir(self) -> Path:
        return self.root / self.id

    def iter_dir(self, iteration: int | None = None) -> Path:
        return self.dir / "iterations" / f"{iteration or self.iteration:04d}"

    @property
    def positive_manifest(self) -> Path:
        return self.dir / "datasets" / "positive.json"

    @property
    def negative_manifest(self) -> Path:
        return self.dir / "datasets" / "negative.json"

    def save(self) -> None:
        payload = {
            "id": self.id,
            "state": self.state,
            "iteration": self.iteration,
            "capped": self.capped,
            "error": self.error,
            "config": self.config.to_dict(),
            "updated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        tmp = self.dir / "session.json.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
        os.replace(tmp, self.dir / "session.json")


def _validate_manifest(path: Path) -> list[ManifestEntry]:
    entries = read_manifest(path)
    if not entries:
        raise UsageError(f"{path}: dataset manifest is empty")
    for entry in entries[:3]:  # spot-check readability
        load_entry(entry, root=path.parent)
    return entries


def start_session(positive_manifest: str | Path, negative_manifest: str | Path,
                  config: SessionConfig, root: str | Path,
                  session_id: str | None = None) -> Session:
    """Copy the dataset manifests into a fresh session directory and persist
    it in the learning state. Raises on empty or unreadable datasets."""
    root = Path(root)
    sid = session_id or uuid.uuid4().hex[:12]
    sdir = root / sid
    if sdir.exists():
        raise UsageError(f"session {sid} already exists")
    pos_src, neg_src = Path(positive_manifest), Path(negative_manifest)
    pos_entries = _validate_manifest(pos_src)
    neg_entries = _validate_manifest(neg_src)
    (sdir / "datasets").mkdir(parents=True)
    (sdir / "iterations").mkdir()

    def _rebase(entries: list[ManifestEntry], src_dir: Path) -> list[ManifestEntry]:
        out = []
        for e in entries:
            paths = e.path if isinstance(e.path, list) else [e.path]
            absolute = [str((src_dir / p).resolve()) for p in paths]
            out.append(ManifestEntry(
                path=absolute if len(absolute) > 1 else absolute[0],
                label=e.label, params=e.params, seed=e.seed))
        return out

    session = Session(root=root, id=sid, state=LEARNING, iteration=1, config=config)
    write_manifest(_rebase(pos_entries, pos_src.parent), session.positive_manifest)
    write_manifest(_rebase(neg_entries, neg_src.parent), session.negative_manifest)
    session.save()
    return session


def load_session(root: str | Path, session_id: str) -> Session:
    sdir = Path(root) / session_id
    path = sdir / "session.json"
    if not path.exists():
        raise UsageError(f"no session {session_id} under {root}")
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return Session(
        root=Path(root), id=payload["id"], state=payload["state"],
        iteration=payload["iteration"], config=SessionConfig.from_dict(payload["config"]),
        capped=payload.get("capped", False), error=payload.get("error"))


def _load_labeled(session: Session) -> list[tuple]:
    items = []
    for manifest in (session.positive_manifest, session.negative_manifest):
        for entry in read_manifest(manifest):
            values = load_entry(entry, root=manifest.parent)
            items.append((Observation(values), entry.label))
    return items


def _do_learning(session: Session) -> None:
    it_dir = session.iter_dir()
    it_dir.mkdir(parents=True, exist_ok=True)
    cfg = session.config
    if cfg.formula_override:
        phi = tssl_parse(cfg.formula_override)
    else:
        train = _load_labeled(session)
        ruleset = learn_ruleset(train, cfg.learner)
        write_ruleset(ruleset, it_dir / "ruleset.txt")
        phi = ruleset_to_tssl(ruleset)
    (it_dir / "formula.tssl").write_text(tssl_to_text(phi) + "\n", encoding="utf-8")
    session.state = OPTIMIZING
    session.save()


def _spec_for(session: Session) -> FitnessSpec:
    cfg = session.config
    phi = tssl_parse((session.iter_dir() / "formula.tssl").read_text(encoding="utf-8"))
    return FitnessSpec(
        template=cfg.params, free_params=cfg.free_params, formula=phi,
        x0_seeds=cfg.x0_seeds, steady=cfg.steady,
        quant_levels=cfg.learner.quant_levels)


def _do_optimizing(session: Session) -> None:
    cfg = session.config
    it_dir = session.iter_dir()
    spec = _spec_for(session)
    result = synthesize(spec, cfg.box, cfg.swarm)
    with open(it_dir / "result.json", "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=1)
    if result.gamma < 0:
        session.state = FAILED
        session.error = (f"no solution: best valuation {result.gamma:.6g} < 0 "
                         f"at p={list(map(float, result.p_star))}")
        session.save()
        return
    _write_candidates(session, spec, result.p_star)
    session.state = AWAITING_REVIEW
    session.save()


def _write_candidates(session: Session, spec: FitnessSpec, p_star) -> None:
    cfg = session.config
    params = spec.instantiate(p_star)
    cand_dir = session.iter_dir() / "candidates"
    cand_dir.mkdir(parents=True, exist_ok=True)
    seeds = list(cfg.x0_seeds)
    extra = 0
    records = []
    idx = 0
    attempts = 0
    while len(records) < max(cfg.candidate_count, len(cfg.x0_seeds)):
        if idx < len(seeds):
            seed = seeds[idx]
            core = True
        else:
            seed = 100_000 * session.iteration + extra
            extra += 1
            core = False
        idx += 1
        attempts += 1
        if attempts > 4 * max(cfg.candidate_count, 1) + len(seeds):
            break
        result = simulate_to_steady(params, initial_state(params, seed),
                                    cfg.steady, rng_seed=seed)
        if isinstance(result, NotConverged):
            if core:
                records.append({"seed": seed, "core": True, "converged": False,
                                "satisfied": False, "value": -1.0, "path": None})
            continue
        qts = qts_from_observation(result, cfg.learner.quant_levels)
        name = f"cand_{len(records):02d}.csv"
        write_csv(result.values[:, :, 0], cand_dir / name)
        records.append({
            "seed": seed,
            "core": core,
            "converged": True,
            "satisfied": bool(tssl_check(qts, spec.formula)),
            "value": float(tssl_value(qts, spec.formula)),
            "path": name,
        })
    with open(cand_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump({"p_star": [float(v) for v in p_star], "candidates": records}, fh, indent=1)


def advance(session: Session) -> Session:
    """Run the pending stage: learning trains and stores the formula, then
    optimizing synthesizes parameters and either fails (negative valuation)
    or simulates review candidates."""
    if session.state == LEARNING:
        _do_learning(session)
    elif session.state == OPTIMIZING:
        _do_optimizing(session)
    else:
        raise SessionStateError(f"cannot advance a session in state {session.state}")
    return session


def run_until_review(session: Session) -> Session:
    while session.state in (LEARNING, OPTIMIZING):
        advance(session)
    return session


def candidates_of(session: Session, iteration: int | None = None) -> dict:
    path = session.iter_dir(iteration) / "candidates" / "manifest.json"
    if not path.exists():
        return {"p_star": None, "candidates": []}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def result_of(session: Session, iteration: int | None = None) -> dict | None:
    path = session.iter_dir(iteration) / "result.json"
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def decide(session: Session, decision: str) -> Session:
    """Approve finishes the session; reject appends every candidate
    observation to the negative set (with provenance) and reopens the loop,
    unless the iteration cap parks the session instead."""
    if session.state != AWAITING_REVIEW:
        raise SessionStateError(f"decision in state {session.state}")
    if session.capped:
        raise SessionStateError("session hit its iteration cap; start a new one")
    if decision not in ("approve", "reject"):
        raise UsageError(f"decision must be approve or reject, got {decision!r}")
    it_dir = session.iter_dir()
    record = {"decision": decision,
              "at": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    if decision == "approve":
        with open(it_dir / "decision.json", "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1)
        session.state = DONE
        session.save()
        return session

    info = candidates_of(session)
    p_star = info.get("p_star")
    entries = read_manifest(session.negative_manifest)
    ds_dir = session.negative_manifest.parent
    added = 0
    for i, cand in enumerate(info["candidates"]):
        if not cand.get("path"):
            continue
        src = it_dir / "candidates" / cand["path"]
        dst = ds_dir / f"neg_i{session.iteration:04d}_{i:02d}.csv"
        shutil.copyfile(src, dst)
        params = dict(session.config.params.to_dict())
        if p_star is not None:
            params["p_star"] = p_star
        params["source_iteration"] = session.iteration
        entries.append(ManifestEntry(path=dst.name, label="-",
                                     params=params, seed=cand["seed"]))
        added += 1
    write_manifest(entries, session.negative_manifest)
    record["appended_negatives"] = added
    with open(it_dir / "decision.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=1)

    if session.iteration >= session.config.max_iterations:
        session.capped = True  # parked: negatives grew, but no new iteration
        session.save()
        return session
    session.iteration += 1
    session.state = LEARNING
    session.save()
    return session


def history_of(session: Session) -> list[dict]:
    out = []
    for it in range(1, session.iteration + 1):
        it_dir = session.iter_dir(it)
        if not it_dir.exists():
            continue
        entry: dict = {"iteration": it}
        result = result_of(session, it)
        if result:
            entry["gamma"] = result["gamma"]
            entry["p_star"] = result["p_star"]
        dec = it_dir / "decision.json"
        if dec.exists():
            with open(dec, encoding="utf-8") as fh:
                entry["decision"] = json.load(fh).get("decision")
        formula = it_dir / "formula.tssl"
        if formula.exists():
            entry["formula"] = formula.read_text(encoding="utf-8").strip()
        entry["n_candidates"] = len(candidates_of(session, it)["candidates"])
        out.append(entry)
    return out


def negative_count(session: Session) -> int:
    return len(read_manifest(session.negative_manifest))
