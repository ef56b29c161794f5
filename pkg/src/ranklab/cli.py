"""``ranklab`` command line: play, solve, verify, experiment."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Any, Sequence

from . import forest as fc
from .errors import BudgetExceeded, IllegalMove, InvalidLabel, RankLabError, StrategyError
from .experiments import SCENARIOS, ScenarioConfig, parse_config, run
from .game import ClassSpec, GameState, Transcript, is_legal_extension, play, present
from .oracles import online_rank_value
from .presenters import PRESENTERS, make_presenter
from .rankers import RANKERS, make_ranker, rankcomplete_lemmas, ranksmall_lemmas, replay_ranker

EXIT_OK, EXIT_VERIFY, EXIT_STRATEGY, EXIT_BUDGET, EXIT_SCENARIO = 0, 1, 2, 3, 4

_KV = re.compile(r"^[a-z_]+=[^,=]+$")


def parse_kv(text: str) -> dict[str, str]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        if not _KV.match(part):
            raise ValueError(f"expected key=value, got {part!r}")
        key, val = part.split("=")
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = val
    return out


def parse_strategy(text: str) -> tuple[str, dict[str, str]]:
    name, _, rest = text.partition(":")
    return name, parse_kv(rest)


def parse_class(text: str) -> ClassSpec:
    """``induced:P<n>`` | ``induced:@file`` | ``maxdegdiam:k=..,d=..`` | ``fewinternal:p=..,q=..``

    Every form also takes an optional ``n_cap``; for ``induced:P<n>`` write it
    as ``induced:P5,n_cap=3``.
    """
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"class spec {text!r} lacks a ':'")
    if kind == "induced":
        head, _, tail = rest.partition(",")
        extra = parse_kv(tail)
        if set(extra) - {"n_cap"}:
            raise ValueError(f"induced classes only take n_cap, got {sorted(extra)}")
        cap = int(extra["n_cap"]) if "n_cap" in extra else None
        m = re.fullmatch(r"P([1-9][0-9]*)", head)
        if m:
            return ClassSpec.induced_of(fc.path_forest(int(m.group(1))), cap)
        if head.startswith("@") and len(head) > 1:
            return ClassSpec.induced_of(fc.read_forest(head[1:]), cap)
        raise ValueError(f"induced host must be P<n> or @file, got {head!r}")
    params = parse_kv(rest)
    need = {"maxdegdiam": ("k", "d"), "fewinternal": ("p", "q")}.get(kind)
    if need is None:
        raise ValueError(f"unknown class kind {kind!r}")
    unknown = set(params) - set(need) - {"n_cap"}
    missing = set(need) - set(params)
    if unknown or missing:
        raise ValueError(f"{kind} needs {need} (+ optional n_cap); unknown {sorted(unknown)}, missing {sorted(missing)}")
    vals = {k: int(v) for k, v in params.items()}
    cap = vals.pop("n_cap", None)
    if kind == "maxdegdiam":
        return ClassSpec.max_deg_diam(vals["k"], vals["d"], cap)
    return ClassSpec.few_internal(vals["p"], vals["q"], cap)


# ---------------------------------------------------------------------------


def cmd_play(args: argparse.Namespace) -> int:
    spec = parse_class(args.cls)
    rname, rparams = parse_strategy(args.ranker)
    pname, pparams = parse_strategy(args.presenter)
    if pname == "random":
        pparams.setdefault("seed", str(args.seed))
        if args.n_max is not None:
            pparams.setdefault("n_max", str(args.n_max))
    ranker = make_ranker(rname, rparams)
    presenter = make_presenter(pname, pparams, spec=spec, ranker=ranker)
    try:
        t = play(spec, presenter, ranker, seed=args.seed)
    except StrategyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.transcript is not None and args.out:
            Path(args.out).write_text(exc.transcript.to_json() + "\n")
        return EXIT_STRATEGY
    if args.out:
        Path(args.out).write_text(t.to_json() + "\n")
    labels = [x for x in t.labels() if x is not None]
    top = max(labels) if labels else 0
    print(f"max_label={top} rounds={len(labels)}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    spec = parse_class(args.cls)
    n_cap = args.n_cap if args.n_cap is not None else spec.effective_cap()
    if n_cap is None:
        print("error: this class needs --n-cap", file=sys.stderr)
        return EXIT_STRATEGY
    try:
        res = online_rank_value(spec, n_cap, args.b_max, budget=args.budget)
    except BudgetExceeded as exc:
        print(json.dumps({"error": "budget", "nodes": exc.nodes}))
        return EXIT_BUDGET
    text = res.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def verify_transcript(t: Transcript) -> list[str]:
    """Problems found when replaying ``t``; empty when it checks out."""
    problems: list[str] = []
    state = GameState.initial(t.cls)
    for rnd, ev in enumerate(t.events, start=1):
        if ev.move.stop:
            if rnd != len(t.events):
                problems.append(f"round {rnd}: events continue after stop")
            break
        try:
            if not is_legal_extension(state, ev.move):
                problems.append(f"round {rnd}: move {list(ev.move.attachments)} leaves the class")
                return problems
            shown = present(state, ev.move)
        except (IllegalMove, fc.ForestError) as exc:
            problems.append(f"round {rnd}: {exc}")
            return problems
        if ev.label is None:
            problems.append(f"round {rnd}: missing label")
            return problems
        nxt = shown.forest.with_label(shown.pending, ev.label)
        if not fc.is_valid_ranking(nxt):
            problems.append(f"round {rnd}: label {ev.label} on vertex {shown.pending} breaks the ranking")
            return problems
        state = GameState(nxt, t.cls, shown.round + 1)
    rmeta = t.meta.get("ranker")
    if rmeta:
        name, params = rmeta["name"], rmeta.get("params", {})
        # structural lemmas first: they name what went wrong, a replay diff only says where
        if name == "rankcomplete":
            problems += [str(v) for v in rankcomplete_lemmas(t, int(params["k"]), int(params["d"]))]
        elif name == "ranksmall":
            p = params.get("p")
            problems += [str(v) for v in ranksmall_lemmas(t, int(params["q"]), None if p is None else int(p))]
        for rnd, rec, got in replay_ranker(make_ranker(name, params), t):
            problems.append(f"round {rnd}: ranker {name} would give {got}, transcript has {rec}")
            break
    pmeta = t.meta.get("presenter")
    if pmeta and not problems:
        problems += _replay_presenter(t, pmeta, rmeta)
    return problems


def _replay_presenter(t: Transcript, pmeta: dict[str, Any], rmeta: dict[str, Any] | None) -> list[str]:
    name = pmeta["name"]
    if name == "exhaustive" and not rmeta:
        return []
    ranker = make_ranker(rmeta["name"], rmeta.get("params", {})) if rmeta else None
    presenter = make_presenter(name, dict(pmeta.get("params", {})), spec=t.cls, ranker=ranker)
    presenter.reset()
    if ranker is not None:
        ranker.reset()
    state = GameState.initial(t.cls)
    for rnd, ev in enumerate(t.events, start=1):
        mv = presenter.move(state)
        if mv != ev.move:
            return [f"round {rnd}: presenter {name} would play {mv.to_json()}, transcript has {ev.move.to_json()}"]
        if mv.stop:
            break
        state = present(state, mv)
        if ranker is not None:
            ranker.label(state)
        state = GameState(state.forest.with_label(state.pending, ev.label), t.cls, state.round + 1)
    return []


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        t = Transcript.from_json(Path(args.transcript).read_text())
    except (OSError, ValueError, KeyError, RankLabError) as exc:
        print(f"fail: cannot read transcript: {exc}")
        return EXIT_VERIFY
    problems = verify_transcript(t)
    if problems:
        print(f"fail: {problems[0]}")
        return EXIT_VERIFY
    print(f"pass: {t.rounds} rounds")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.config:
        configs = parse_config(json.loads(Path(args.config).read_text()))
    else:
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(5))
        configs = [ScenarioConfig(name, {}, seeds) for name in args.scenario]
    if not configs:
        print("error: give a config file or --scenario", file=sys.stderr)
        return EXIT_SCENARIO
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.csv"
    try:
        with path.open("w", newline="") as sink:
            rows = run(configs, sink)
    except (ValueError, RankLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} rows pass; report at {path}")
    return EXIT_SCENARIO if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ranklab", description="On-line vertex ranking of trees.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="run one game and write its transcript")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--presenter", required=True, help=f"name:key=val,... with name in {', '.join(PRESENTERS)}")
    p.add_argument("--ranker", required=True, help=f"name:key=val,... with name in {', '.join(RANKERS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_play)

    s = sub.add_parser("solve", help="exact capped on-line ranking number")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--n-cap", type=int)
    s.add_argument("--b-max", type=int, default=6)
    s.add_argument("--budget", type=int, help="node budget (default: RANKLAB_BUDGET or 1e8)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="replay and check a transcript")
    v.add_argument("transcript")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run report scenarios into a CSV")
    e.add_argument("config", nargs="?")
    e.add_argument("--scenario", action="append", default=[], choices=sorted(SCENARIOS))
    e.add_argument("--seeds", help="comma-separated seeds when no config is given")
    e.add_argument("--out-dir", default=".")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRATEGY
    except InvalidLabel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRATEGY


if __name__ == "__main__":
    sys.exit(main())
