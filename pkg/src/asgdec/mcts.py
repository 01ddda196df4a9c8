"""Token-level tree search over the constraint-masked generation space.

PUCB selection over Q(s,a) + beta * prior * sqrt(sum_b N(s,b)) / (1 + N(s,a)),
expansion restricted to the valid-token set, greedy constrained rollouts,
and mean-value backpropagation.  Expansions and rollouts are computed once
per node and reused, including across searches that share the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import align, earley
from .align import EOS_ID, AlignCursor
from .decoding import COMPLETED, DEAD_END, MAX_LENGTH, DecodeResult, masked_logprobs
from .policy import PolicyContext


@dataclass
class Reward:
    """Distance-based reward: 1 on a complete zero-distance word, minus the
    distance otherwise (including truncated and dead-end sequences)."""

    rho: object  # callable: terminal tuple -> float

    def of(self, terminals, completed):
        d = abs(self.rho(tuple(terminals)))
        if completed and d == 0:
            return 1.0
        return -d


@dataclass(frozen=True)
class SearchConfig:
    budget: int = 50
    beta: float = 1.0
    max_tokens: int = 256
    max_depth: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1 or self.max_depth < 1:
            raise ValueError("budget and max_depth must be >= 1")


@dataclass
class SearchStats:
    rollouts: int = 0
    policy_calls: int = 0
    cache_hits: int = 0
    max_branching: int = 0
    simulations: int = 0


class SearchNode:
    __slots__ = (
        "state",
        "cursor",
        "terminals",
        "depth",
        "priors",
        "visits",
        "values",
        "children",
        "expanded",
        "terminal_reward",
        "rollout",
        "exhausted",
        "exact_value",
    )

    def __init__(self, state, cursor, terminals, depth):
        self.state = state
        self.cursor = cursor
        self.terminals = terminals  # emitted terminal tuple
        self.depth = depth  # generated token count
        self.priors = None  # token id -> prior prob
        self.visits = {}
        self.values = {}
        self.children = {}
        self.expanded = False
        self.terminal_reward = None  # set for EOS / dead-end nodes
        self.rollout = None  # cached (reward, DecodeResult)
        self.exhausted = False  # subtree fully evaluated; skip in selection
        self.exact_value = None  # best reward in an exhausted subtree

    def q(self, a):
        n = self.visits.get(a, 0)
        return self.values.get(a, 0.0) / n if n else 0.0


def select_child(node, beta):
    """PUCB argmax; ties broken by lowest token id.

    Actions leading into exhausted subtrees are skipped, since their value
    is already exact and revisiting them cannot improve the search.
    Returns None when every action is exhausted.
    """
    total = sum(node.visits.values())
    sqrt_total = math.sqrt(total)
    best, best_score = None, None
    for a in sorted(node.priors):
        child = node.children.get(a)
        if child is not None and child.exhausted:
            continue
        u = beta * node.priors[a] * sqrt_total / (1 + node.visits.get(a, 0))
        score = node.q(a) + u
        if best_score is None or score > best_score:
            best, best_score = a, score
    return best


def backpropagate(path, reward):
    """path: list of (node, action) pairs from root to the simulated node."""
    for node, action in path:
        node.visits[action] = node.visits.get(action, 0) + 1
        node.values[action] = node.values.get(action, 0.0) + reward


class SearchTree:
    """Reusable tree rooted at a fixed prompt + grammar."""

    def __init__(self, grammar, token_map, prompt_ids, session=None):
        self.grammar = grammar
        self.token_map = token_map
        self.prompt_ids = tuple(prompt_ids)
        self.session = session or earley.Session()
        state = earley.init(grammar, self.session)
        self.root = SearchNode(state, AlignCursor(), (), 0)


def search(tree, policy, reward, cfg):
    """Run PUCB MCTS; returns (best DecodeResult, SearchStats).

    Stops at the first reward-1 rollout (the reward's global maximum) or
    at budget exhaustion.  ``policy`` should expose a ``calls`` counter
    (CountingPolicy) for the policy-call statistic; otherwise that field
    stays zero.
    """
    stats = SearchStats()
    calls_before = getattr(policy, "calls", 0)
    best = None  # (reward, DecodeResult)
    rng = np.random.default_rng(cfg.seed)

    # the budget counts sampled full generations (rollouts); simulations
    # that only revisit terminal nodes are capped separately so a
    # saturated tree cannot spin forever
    while stats.rollouts < cfg.budget and stats.simulations < cfg.budget * 64:
        if tree.root.exhausted:
            break
        stats.simulations += 1
        value, result = _simulate(tree, policy, reward, cfg, stats, rng)
        if result is not None and (best is None or value > best[0]):
            best = (value, result)
        if best is not None and best[0] >= 1.0:
            break

    stats.policy_calls = getattr(policy, "calls", 0) - calls_before
    stats.cache_hits = tree.session.eval_cache_hits
    if best is None:
        return None, stats
    return best[1], stats


def _simulate(tree, policy, reward, cfg, stats, rng):
    node = tree.root
    path = []
    while True:
        if node.terminal_reward is not None:
            backpropagate(path, node.terminal_reward)
            _, cached = node.rollout or (None, None)
            return node.terminal_reward, cached
        if not node.expanded:
            _expand(tree, node, policy, stats)
            value, result = _rollout(tree, node, policy, reward, cfg, stats, rng)
            backpropagate(path, value)
            return value, result
        a = select_child(node, cfg.beta)
        if a is None:
            # every action runs into an exhausted subtree; fold the exact
            # values upward so ancestors skip this node too
            node.exhausted = True
            node.exact_value = max(
                c.exact_value for c in node.children.values()
            )
            backpropagate(path, node.exact_value)
            return node.exact_value, None
        path.append((node, a))
        child = node.children.get(a)
        if child is None:
            child = _make_child(tree, node, a, reward, cfg)
            node.children[a] = child
        node = child


def _expand(tree, node, policy, stats):
    valid = align.valid_tokens(node.state, tree.token_map, node.cursor)
    stats.max_branching = max(
        stats.max_branching, len(earley.valid_terminals(node.state))
    )
    if not valid:
        # dead end; _rollout scores it via the distance function
        node.expanded = True
        node.priors = {}
        return
    ctx = PolicyContext(tree.prompt_ids, _token_path(tree, node))
    dist = policy.next_distribution(ctx)
    ids, lp = masked_logprobs(dist, valid)
    node.priors = {int(i): float(p) for i, p in zip(ids, np.exp(lp))}
    node.expanded = True


def _token_path(tree, node):
    # reconstruct generated ids from the terminal sequence + buffer
    out = []
    for t in node.terminals:
        out.extend(tree.token_map.canonical[t])
    out.extend(node.cursor.buffer)
    return tuple(out)


def _make_child(tree, node, action, reward, cfg):
    if action == EOS_ID:
        child = SearchNode(node.state, node.cursor, node.terminals, node.depth + 1)
        result = _result(tree, child, COMPLETED)
        child.terminal_reward = reward.of(child.terminals, True)
        child.rollout = (child.terminal_reward, result)
        child.expanded = True
        child.priors = {}
        child.exhausted = True
        child.exact_value = child.terminal_reward
        return child
    state, cursor, emitted = align.apply_token(
        node.state, tree.token_map, node.cursor, action
    )
    terminals = node.terminals + (emitted,) if emitted else node.terminals
    depth = node.depth + 1
    # collapse forced moves: while exactly one token is admissible, take it,
    # so tree depth counts decision points rather than raw tokens
    while depth < cfg.max_depth:
        forced = align.valid_tokens(state, tree.token_map, cursor)
        if len(forced) != 1:
            break
        tok = next(iter(forced))
        if tok == EOS_ID:
            child = SearchNode(state, cursor, terminals, depth + 1)
            child.terminal_reward = reward.of(terminals, True)
            child.rollout = (child.terminal_reward, _result(tree, child, COMPLETED))
            child.expanded = True
            child.priors = {}
            child.exhausted = True
            child.exact_value = child.terminal_reward
            return child
        state, cursor, emitted = align.apply_token(
            state, tree.token_map, cursor, tok
        )
        if emitted is not None:
            terminals = terminals + (emitted,)
        depth += 1
    child = SearchNode(state, cursor, terminals, depth)
    if child.depth >= cfg.max_depth:
        child.terminal_reward = reward.of(terminals, False)
        child.rollout = (child.terminal_reward, _result(tree, child, MAX_LENGTH))
        child.expanded = True
        child.priors = {}
        child.exhausted = True
        child.exact_value = child.terminal_reward
    return child


def _argmax_pool(ids, weights):
    """Token ids tied (within float tolerance) for the highest weight."""
    ids = np.asarray(ids)
    weights = np.asarray(weights, dtype=np.float64)
    return ids[weights >= np.max(weights) - 1e-12]


def _single_token_terminals(token_map):
    """terminal lookup for tokens that spell a whole terminal on their own"""
    out = {}
    for term, enc in token_map.canonical.items():
        if len(enc) == 1:
            out[enc[0]] = term
    return out


def _distance_ties(pool, cursor, terminals, rho, singles, rng):
    """Break policy ties by the task distance of the word each token leads
    to, so a flat policy descends the distance function instead of walking
    blindly.  Tokens whose effect on the word is not immediate (mid-terminal
    subwords) score as the unchanged word; remaining ties stay random."""
    if len(pool) == 1:
        return int(pool[0])
    here = None
    scored = []
    for tok in pool:
        tok = int(tok)
        if tok == EOS_ID:
            cost = abs(rho(tuple(terminals)))
        elif cursor.at_boundary and tok in singles:
            cost = abs(rho(tuple(terminals) + (singles[tok],)))
        else:
            if here is None:
                here = abs(rho(tuple(terminals)))
            cost = here
        scored.append((cost, tok))
    best = min(c for c, _ in scored)
    finalists = [t for c, t in scored if c <= best + 1e-9]
    if len(finalists) == 1:
        return finalists[0]
    return finalists[rng.integers(len(finalists))]


def _rollout(tree, node, policy, reward, cfg, stats, rng):
    """Greedy constrained continuation, computed once per node."""
    if node.rollout is not None:
        return node.rollout
    if not node.priors:  # dead end discovered at expansion
        value = reward.of(node.terminals, False)
        node.terminal_reward = value
        node.rollout = (value, _result(tree, node, DEAD_END))
        node.exhausted = True
        node.exact_value = value
        return node.rollout
    stats.rollouts += 1
    state, cursor, terminals = node.state, node.cursor, list(node.terminals)
    singles = _single_token_terminals(tree.token_map)
    ids = list(_token_path(tree, node))
    outcome = MAX_LENGTH
    steps = node.depth
    prior_step = True
    best_stop = None  # (value, ids, terminals, steps) at a completable point
    # choice points for bounded backtracking: instead of scoring a dead-end
    # continuation, back up to the last step with untried tokens and take a
    # different branch.  hop cap bounds the total work per rollout.
    frames = []
    pending = None
    hops = 0
    while steps < cfg.max_tokens:
        hops += 1
        if hops > cfg.max_tokens * 8:
            break
        if pending is not None:
            valid, pending = pending, None
        elif prior_step:
            valid = set(node.priors)
        else:
            valid = align.valid_tokens(state, tree.token_map, cursor)
            if not valid:
                if frames:
                    state, cursor, n_t, n_i, steps, rest = frames.pop()
                    del terminals[n_t:]
                    del ids[n_i:]
                    pending = rest
                    continue
                outcome = DEAD_END
                break
        # optimal stopping: remember the best point where the word could
        # have been completed, and stop outright at a maximal-reward word
        if EOS_ID in valid:
            cand = reward.of(terminals, True)
            if best_stop is None or cand > best_stop[0]:
                best_stop = (cand, ids + [EOS_ID], tuple(terminals), steps + 1)
            if cand >= 1.0:
                tok = EOS_ID
                prior_step = False
                ids.append(tok)
                steps += 1
                outcome = COMPLETED
                break
        if prior_step:
            order = sorted(valid)
            pool = _argmax_pool(order, [node.priors[a] for a in order])
        else:
            ctx = PolicyContext(tree.prompt_ids, tuple(ids))
            dist = policy.next_distribution(ctx)
            vids, lp = masked_logprobs(dist, valid)
            pool = _argmax_pool(vids, lp)
        tok = _distance_ties(pool, cursor, terminals, reward.rho, singles, rng)
        rest = set(valid)
        rest.discard(tok)
        if rest:
            frames.append((state, cursor, len(terminals), len(ids), steps, rest))
        prior_step = False
        ids.append(tok)
        steps += 1
        if tok == EOS_ID:
            outcome = COMPLETED
            break
        state, cursor, emitted = align.apply_token(
            state, tree.token_map, cursor, tok
        )
        if emitted is not None:
            terminals.append(emitted)
    if outcome == MAX_LENGTH:
        # the loop never probes the word reached exactly at the cap
        valid = align.valid_tokens(state, tree.token_map, cursor)
        if EOS_ID in valid:
            cand = reward.of(terminals, True)
            if best_stop is None or cand > best_stop[0]:
                best_stop = (cand, ids + [EOS_ID], tuple(terminals), steps + 1)
    value = reward.of(terminals, outcome == COMPLETED)
    if best_stop is not None and best_stop[0] > value:
        value, ids, stop_terminals, steps = best_stop
        terminals = list(stop_terminals)
        outcome = COMPLETED
    result = DecodeResult(
        token_ids=tuple(ids),
        text="".join(terminals),
        terminals=tuple(terminals),
        outcome=outcome,
        tokens_generated=steps,
        reward=value,
    )
    node.rollout = (value, result)
    return node.rollout


def _result(tree, node, outcome):
    return DecodeResult(
        token_ids=_token_path(tree, node),
        text="".join(node.terminals),
        terminals=node.terminals,
        outcome=outcome,
        tokens_generated=node.depth,
        reward=None,
    )
