#!/usr/bin/env python3
"""Schema validity of n-gram decoding with and without grammar masking.

Fits the n-gram policy on schema-conforming exemplars, then samples records
in both modes and reports what fraction parse under the schema grammar.

Usage:
    python scripts/json_validity.py --samples 200 --order 3
"""

import argparse

from asgdec import (
    DecodeConfig,
    EOS_ID,
    NgramPolicy,
    Session,
    TerminalTokenizer,
    accepts,
    build_map,
    generate,
    parse_grammar,
)
from asgdec.decoding import COMPLETED
from asgdec.tasks import jsontask


def run(constraint, policy, grammar, token_map, samples, max_tokens):
    session = Session()
    check = Session()
    completed = valid = 0
    for seed in range(samples):
        cfg = DecodeConfig(
            mode="sample", constraint=constraint, seed=seed, max_tokens=max_tokens
        )
        r = generate(grammar, token_map, policy, (), cfg, session=session)
        completed += r.outcome == COMPLETED
        if r.terminals and accepts(grammar, r.terminals, check):
            valid += 1
    return completed, valid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--order", type=int, default=3)
    ap.add_argument("--exemplars", type=int, default=200)
    ap.add_argument("--max-tokens", type=int, default=64)
    args = ap.parse_args()

    grammar = parse_grammar(jsontask.JSON_GRAMMAR)
    tokenizer = TerminalTokenizer(grammar.terminals)
    token_map = build_map(grammar.terminals, tokenizer)
    corpus = jsontask.exemplar_corpus(args.exemplars, seed=0)
    policy = NgramPolicy(
        token_map.vocab_size,
        [tuple(tokenizer.encode(doc)) + (EOS_ID,) for doc in corpus],
        order=args.order,
    )

    for constraint in ("none", "cfg"):
        completed, valid = run(
            constraint, policy, grammar, token_map, args.samples, args.max_tokens
        )
        print(
            f"constraint={constraint:4s}  completed={completed}/{args.samples}"
            f"  schema-valid={valid}/{args.samples}"
        )


if __name__ == "__main__":
    main()
