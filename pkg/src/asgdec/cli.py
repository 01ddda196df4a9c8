"""Command-line front end: grammar checking, completion queries, experiment
batches, and result aggregation.

Exit codes: 0 success / ACCEPT, 1 REJECT or dead end, 2 usage or grammar
errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import align, decoding, earley, mcts, tasks
from .align import EOS_ID, TerminalTokenizer
from .decoding import DecodeConfig
from .errors import AsgError, InvalidExtension, RemoteError
from .grammar import csg_projection, load_grammar, strip_annotations
from .mcts import Reward, SearchConfig, SearchTree
from .policy import CountingPolicy, NgramPolicy, RemotePolicy, UniformPolicy

ALGOS = ("base", "bon", "mcts")
POLICIES = ("uniform", "ngram", "remote")

# per-task generation budgets used when --budget is not given
DEFAULT_BUDGETS = {
    "anbncn": 50,
    "ambncmdn": 50,
    "copy": 50,
    "graph3color": 35,
    "sudoku3": 10,
    "sudoku4": 265,
    "blocksworld": 200,
    "json": 1,
}

# generation caps sized to each task's longest sensible output
DEFAULT_MAX_TOKENS = {
    "anbncn": 64,
    "ambncmdn": 64,
    "copy": 32,
    "sudoku3": 64,
    "sudoku4": 96,
    "graph3color": 160,
    "blocksworld": 160,
    "json": 64,
}


def _segment(grammar, text):
    """Greedy longest-match split of raw text into grammar terminals;
    returns (terminals, error offset or None)."""
    terms = sorted(grammar.terminals, key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        for t in terms:
            if text.startswith(t, i):
                out.append(t)
                i += len(t)
                break
        else:
            return out, i
    return out, None


def cmd_check(args):
    try:
        grammar = load_grammar(args.grammar)
    except (OSError, AsgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    word, bad = _segment(grammar, args.word)
    if bad is not None:
        print(f"REJECT: unknown terminal at offset {bad}: {args.word[bad:]!r}")
        return 1
    session = earley.Session()
    session.violation_log = []
    state = earley.init(grammar, session)
    for pos, t in enumerate(word):
        try:
            state = earley.extend(state, t)
        except InvalidExtension:
            reasons = sorted({v for _, v in session.violation_log if v})
            detail = f" (constraints: {', '.join(reasons)})" if reasons else ""
            print(f"REJECT: no parse at terminal {pos} ({t!r}){detail}")
            return 1
    if earley.is_complete(state):
        print("ACCEPT")
        return 0
    reasons = sorted({v for _, v in session.violation_log if v})
    if reasons:
        print(f"REJECT: constraints violated: {', '.join(reasons)}")
    else:
        print(f"REJECT: incomplete word of {len(word)} terminals")
    return 1


def cmd_complete(args):
    try:
        grammar = load_grammar(args.grammar)
    except (OSError, AsgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    word, bad = _segment(grammar, args.prefix)
    if bad is not None:
        print(f"error: unknown terminal at offset {bad}", file=sys.stderr)
        return 2
    state = earley.init(grammar, earley.Session())
    try:
        for t in word:
            state = earley.extend(state, t)
    except InvalidExtension as exc:
        print(f"dead end: {exc}", file=sys.stderr)
        return 1
    valid = earley.valid_terminals(state)
    names = sorted(
        "<EOS>" if t is earley.END_MARKER else t for t in valid
    )
    if not names:
        print("dead end: no valid continuation", file=sys.stderr)
        return 1
    for name in names:
        print(name)
    return 0


# ---------------------------------------------------------------------------
# run


def _free_grammar_source(terminals):
    """A grammar accepting every nonempty string over ``terminals`` (used
    for the flagged unconstrained-search baseline)."""

    def q(t):
        return '"' + t.replace("\\", "\\\\").replace('"', '\\"') + '"'

    alts = " | ".join(f"seq {q(t)} {{}}" for t in sorted(terminals))
    base = " | ".join(f"{q(t)} {{}}" for t in sorted(terminals))
    return f"start -> seq {{}}\nseq -> {alts} | {base}\n"


def _build_policy(name, vocab_size, instances, tokenizer, cfg):
    if name == "uniform":
        return UniformPolicy(vocab_size)
    if name == "ngram":
        exemplars = []
        for inst in instances:
            word = tasks.reference_solution(inst)
            exemplars.append(
                tuple(tokenizer.encode("".join(word))) + (EOS_ID,)
            )
        return NgramPolicy(vocab_size, exemplars)
    if name == "remote":
        return RemotePolicy(cfg["endpoint"], cfg["model"], vocab_size)
    raise ValueError(name)


def _projected(grammar, level, terminals):
    if level == "cfg":
        return strip_annotations(grammar)
    if level == "csg":
        return csg_projection(grammar)
    if level == "none":
        from .grammar import parse_grammar

        return parse_grammar(_free_grammar_source(terminals))
    return grammar


def run_one(cfg, index):
    """Execute one instance of a batch config; returns the result record."""
    instances = tasks.generate_instances(cfg["task"], cfg["count"], cfg["seed"])
    inst = instances[index]
    grammar = inst.grammar()
    terminals = sorted(grammar.terminals)
    tokenizer = TerminalTokenizer(terminals)
    token_map = align.build_map(terminals, tokenizer)
    policy = _build_policy(
        cfg["policy"], tokenizer.vocab_size, instances, tokenizer, cfg
    )
    rho = tasks.rho_for(inst)
    seed = cfg["seed"] * 100003 + index
    record = {
        "instance_id": inst.instance_id,
        "algo": cfg["algo"],
        "constraint": cfg["constraint"],
        "seed": seed,
        "config": cfg,
    }
    g_run = _projected(grammar, cfg["constraint"], terminals)
    dcfg = DecodeConfig(
        mode="sample",
        constraint=cfg["constraint"],
        n=cfg["budget"],
        max_tokens=cfg["max_tokens"],
        top_k=50,
        seed=seed,
    )
    try:
        if cfg["algo"] == "base":
            result = decoding.generate(
                g_run, token_map, policy, (), dcfg, session=earley.Session()
            )
        elif cfg["algo"] == "bon":

            def reward_fn(r):
                if rho is None:
                    return 0.0
                if r.terminals is None:
                    return -float(cfg["max_tokens"])
                return Reward(rho).of(r.terminals, r.outcome == "completed")

            def accept_fn(r):
                if cfg["constraint"] == "none":
                    return True
                return r.terminals is not None and earley.accepts(
                    g_run, tuple(r.terminals)
                )

            result, _ = decoding.best_of_n(
                g_run, token_map, policy, (), dcfg, reward_fn, accept_fn
            )
        else:
            counted = CountingPolicy(policy)
            tree = SearchTree(g_run, token_map, ())
            scfg = SearchConfig(
                budget=cfg["budget"], max_tokens=cfg["max_tokens"], seed=seed
            )
            result, _ = mcts.search(
                tree, counted, Reward(rho or (lambda w: 0.0)), scfg
            )
            if result is None:
                record.update(
                    outcome="dead_end", rho=None, reward=None, tokens=0,
                    t_constraint_ms=0.0, output="",
                )
                _attach_validity(record, inst, grammar, None)
                return record
    except RemoteError as exc:
        record.update(
            outcome="error", rho=None, reward=None, tokens=0,
            t_constraint_ms=0.0, output=str(exc),
        )
        _attach_validity(record, inst, grammar, None)
        return record
    word = result.terminals
    rho_val = float(rho(word)) if (rho is not None and word is not None) else None
    record.update(
        outcome=result.outcome,
        rho=rho_val,
        reward=result.reward,
        tokens=result.tokens_generated,
        t_constraint_ms=result.constraint_seconds * 1000.0,
        output="".join(word) if word else "",
    )
    _attach_validity(record, inst, grammar, word)
    return record


def _attach_validity(record, inst, grammar, word):
    levels = {"v_cfg": False, "v_csg": False, "v_sem": False}
    if word is not None:
        w = tuple(word)
        levels["v_cfg"] = earley.accepts(strip_annotations(grammar), w)
        levels["v_csg"] = earley.accepts(csg_projection(grammar), w)
        levels["v_sem"] = earley.accepts(grammar, w)
    record.update(levels)


def _summarize(records):
    n = len(records)
    if not n:
        return "n=0 (no results)"
    acc = sum(
        1
        for r in records
        if r["outcome"] == "completed" and r.get("rho") == 0
    )
    cols = {
        "A": acc / n,
        "V_CFG": sum(r.get("v_cfg", False) for r in records) / n,
        "V_CSG": sum(r.get("v_csg", False) for r in records) / n,
        "V_SEM": sum(r.get("v_sem", False) for r in records) / n,
    }
    toks = sum(r["tokens"] for r in records) / n
    tc = sum(r["t_constraint_ms"] for r in records) / n
    rates = "  ".join(f"{k}={v:.1%}" for k, v in cols.items())
    return f"n={n}  {rates}  tokens={toks:.1f}  T_C={tc:.1f}ms"


def _run_worker(payload):
    cfg, index = payload
    return run_one(cfg, index)


def cmd_run(args):
    if args.task not in tasks.TASK_IDS:
        print(f"error: unknown task {args.task!r}", file=sys.stderr)
        return 2
    if args.task == "json" and args.algo != "base":
        print("error: the json task has no reward; use --algo base", file=sys.stderr)
        return 2
    if args.algo == "mcts" and args.constraint == "none":
        print("note: unconstrained search baseline (flagged)", file=sys.stderr)
    budget = args.budget or DEFAULT_BUDGETS[args.task]
    cfg = {
        "task": args.task,
        "algo": args.algo,
        "constraint": args.constraint,
        "policy": args.policy,
        "budget": budget,
        "seed": args.seed,
        "count": args.count,
        "max_tokens": args.max_tokens or DEFAULT_MAX_TOKENS[args.task],
        "endpoint": args.endpoint
        or os.environ.get("ASGDEC_ENDPOINT", "http://127.0.0.1:8763"),
        "model": args.model,
    }
    payloads = [(cfg, i) for i in range(args.count)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(_run_worker, payloads))
    else:
        records = [run_one(cfg, i) for i in range(args.count)]
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
    print(_summarize(records))
    return 0


def cmd_report(args):
    groups = {}
    for path in args.results:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                r = json.loads(line)
                key = (
                    r["config"]["task"],
                    r["algo"],
                    r["constraint"],
                    r["config"]["policy"],
                )
                groups.setdefault(key, []).append(r)
    for key in sorted(groups):
        task, algo, constraint, policy = key
        print(f"{task:12s} {algo:5s} {constraint:5s} {policy:8s} "
              + _summarize(groups[key]))
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="asgdec", description="annotated-grammar constrained decoding"
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="test membership of a word")
    c.add_argument("grammar")
    c.add_argument("word")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("complete", help="valid next terminals for a prefix")
    c.add_argument("grammar")
    c.add_argument("prefix")
    c.set_defaults(func=cmd_complete)

    c = sub.add_parser("run", help="run an experiment batch")
    c.add_argument("--task", required=True)
    c.add_argument("--algo", choices=ALGOS, default="base")
    c.add_argument("--constraint", choices=decoding.CONSTRAINT_LEVELS, default="sem")
    c.add_argument("--policy", choices=POLICIES, default="uniform")
    c.add_argument("--budget", type=int, default=None)
    c.add_argument("--count", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-tokens", type=int, default=None)
    c.add_argument("--output", default=None)
    c.add_argument("--endpoint", default=None)
    c.add_argument("--model", default="stub")
    c.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("report", help="aggregate result files")
    c.add_argument("results", nargs="+")
    c.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AsgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
