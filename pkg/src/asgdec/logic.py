"""Stratified logic fragment used by grammar annotations and backgrounds.

The fragment covers facts, normal rules, hard constraints, negation as
failure (stratified), integer arithmetic (+, -, *), comparison builtins,
tuple terms and quoted-string constants.  Child parse-tree nodes are
addressed with ``@k`` suffixes on body literals; during partial-tree
evaluation rules that (transitively, through negation) depend on a child
that has not been realised yet are deferred rather than enforced.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (
    AsgSyntaxError,
    GroundingOverflow,
    LogicEvalError,
    OracleTooLarge,
    StratificationError,
)

DEFAULT_ATOM_CAP = 100_000

# ---------------------------------------------------------------------------
# Terms.  Ground terms are plain python ints, strs (symbolic constants),
# QStr (quoted string constants) and Tup (tuples).  Var/Arith only appear in
# rule ASTs, never in ground atoms.


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class QStr:
    """Quoted string constant, distinct from a symbolic constant."""

    text: str

    def __repr__(self):
        return f'"{self.text}"'


@dataclass(frozen=True, slots=True)
class Tup:
    items: tuple

    def __repr__(self):
        return "(" + ",".join(repr(i) for i in self.items) + ")"


@dataclass(frozen=True, slots=True)
class Arith:
    op: str  # + - *
    left: object
    right: object

    def __repr__(self):
        return f"({self.left!r}{self.op}{self.right!r})"


COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True, slots=True)
class Literal:
    pred: str
    args: tuple
    neg: bool = False
    child: Optional[int] = None  # the @k tag, 1-based
    builtin: Optional[str] = None  # comparison operator, args has length 2

    def __repr__(self):
        return format_literal(self)


@dataclass(frozen=True, slots=True)
class Rule:
    head: Optional[Literal]  # None for hard constraints
    body: tuple
    rule_id: str = ""

    def __repr__(self):
        return format_rule(self)


def format_term(t):
    if isinstance(t, Tup):
        return "(" + ",".join(format_term(i) for i in t.items) + ")"
    if isinstance(t, Arith):
        return f"{format_term(t.left)}{t.op}{format_term(t.right)}"
    return repr(t) if isinstance(t, (QStr, Var)) else str(t)


def format_literal(lit):
    if lit.builtin:
        return f"{format_term(lit.args[0])} {lit.builtin} {format_term(lit.args[1])}"
    s = lit.pred
    if lit.args:
        s += "(" + ",".join(format_term(a) for a in lit.args) + ")"
    if lit.child is not None:
        s += f"@{lit.child}"
    if lit.neg:
        s = "not " + s
    return s


def format_rule(rule):
    body = ", ".join(format_literal(b) for b in rule.body)
    if rule.head is None:
        return f":- {body}."
    if not rule.body:
        return f"{format_literal(rule.head)}."
    return f"{format_literal(rule.head)} :- {body}."


def format_atom(atom):
    pred, args = atom
    if not args:
        return pred
    return pred + "(" + ",".join(format_term(a) for a in args) + ")"


# ---------------------------------------------------------------------------
# Tokenizer / parser for the textual rule syntax.

_TWO_CHAR = (":-", "!=", "<=", ">=")
_ONE_CHAR = "().,@+-*<>="


def tokenize_rules(text, line0=1, col0=1):
    """Yield (kind, value, line, col) tokens. kind in
    ident/var/int/str/op."""
    i, n = 0, len(text)
    line, col = line0, col0
    toks = []

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise AsgSyntaxError("unterminated string", line, col)
            toks.append(("str", "".join(buf), line, col))
            advance(j + 1 - i)
            continue
        if text[i : i + 2] in _TWO_CHAR:
            toks.append(("op", text[i : i + 2], line, col))
            advance(2)
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j]), line, col))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (c.isupper() or c == "_") else "ident"
            toks.append((kind, word, line, col))
            advance(j - i)
            continue
        if c in _ONE_CHAR:
            toks.append(("op", c, line, col))
            advance(1)
            continue
        raise AsgSyntaxError(f"unexpected character {c!r}", line, col)
    return toks


class _RuleParser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else ("eof", None, -1, -1)

    def next(self):
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, value):
        kind, val, line, col = self.next()
        if val != value:
            raise AsgSyntaxError(f"expected {value!r}, found {val!r}", line, col)

    def at_end(self):
        return self.pos >= len(self.toks)

    # -- terms ------------------------------------------------------------
    def parse_term(self):
        left = self.parse_simple_term()
        while self.peek()[1] in ("+", "-", "*") and self.peek()[0] == "op":
            op = self.next()[1]
            right = self.parse_simple_term()
            left = Arith(op, left, right)
        return left

    def parse_simple_term(self):
        kind, val, line, col = self.next()
        if kind == "int":
            return val
        if kind == "str":
            return QStr(val)
        if kind == "var":
            return Var(val)
        if kind == "ident":
            return val
        if val == "-":
            k2, v2, l2, c2 = self.next()
            if k2 != "int":
                raise AsgSyntaxError("expected integer after unary minus", l2, c2)
            return -v2
        if val == "(":
            items = [self.parse_term()]
            while self.peek()[1] == ",":
                self.next()
                items.append(self.parse_term())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return Tup(tuple(items))
        raise AsgSyntaxError(f"unexpected token {val!r} in term", line, col)

    # -- literals ---------------------------------------------------------
    def parse_literal(self):
        neg = False
        if self.peek() == ("ident", "not", self.peek()[2], self.peek()[3]) or (
            self.peek()[0] == "ident" and self.peek()[1] == "not"
        ):
            self.next()
            neg = True
        # try an atom: ident [ ( terms ) ] [@k], else a comparison
        kind, val, line, col = self.peek()
        if kind == "ident":
            save = self.pos
            self.next()
            pred = val
            args = ()
            if self.peek()[1] == "(":
                self.next()
                items = [self.parse_term()]
                while self.peek()[1] == ",":
                    self.next()
                    items.append(self.parse_term())
                self.expect(")")
                args = tuple(items)
            if self.peek()[1] in COMPARISONS and self.peek()[0] == "op":
                # it was actually the left side of a comparison
                self.pos = save
            else:
                child = None
                if self.peek()[1] == "@":
                    self.next()
                    k2, v2, l2, c2 = self.next()
                    if k2 != "int":
                        raise AsgSyntaxError("expected integer after '@'", l2, c2)
                    child = v2
                return Literal(pred, args, neg=neg, child=child)
        left = self.parse_term()
        k, op, l2, c2 = self.next()
        if op not in COMPARISONS:
            raise AsgSyntaxError(f"expected comparison operator, found {op!r}", l2, c2)
        right = self.parse_term()
        return Literal(op, (left, right), neg=neg, builtin=op)

    def parse_rule(self, rule_id):
        head = None
        if self.peek()[1] != ":-":
            head = self.parse_literal()
            if head.builtin or head.neg or head.child is not None:
                raise AsgSyntaxError(
                    "rule head must be a positive plain atom", *self.peek()[2:]
                )
        body = []
        if self.peek()[1] == ":-":
            self.next()
            body.append(self.parse_literal())
            while self.peek()[1] == ",":
                self.next()
                body.append(self.parse_literal())
        self.expect(".")
        return Rule(head, tuple(body), rule_id)


def parse_rules(text, fragment_name="frag", line0=1, col0=1):
    toks = tokenize_rules(text, line0, col0)
    parser = _RuleParser(toks)
    rules = []
    idx = 0
    while not parser.at_end():
        rules.append(parser.parse_rule(f"{fragment_name}:{idx}"))
        idx += 1
    return rules


# ---------------------------------------------------------------------------
# Fragment: a compiled list of rules.


def _term_vars(t, out):
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, Tup):
        for i in t.items:
            _term_vars(i, out)
    elif isinstance(t, Arith):
        _term_vars(t.left, out)
        _term_vars(t.right, out)


def _term_has_arith(t):
    if isinstance(t, Arith):
        return True
    if isinstance(t, Tup):
        return any(_term_has_arith(i) for i in t.items)
    return False


def literal_vars(lit):
    out = set()
    for a in lit.args:
        _term_vars(a, out)
    return out


def _binding_vars(lit):
    """Variables a positive body literal can bind: those outside arithmetic."""
    out = set()
    for a in lit.args:
        if not _term_has_arith(a):
            _term_vars(a, out)
    return out


@dataclass
class LogicFragment:
    rules: tuple
    name: str = "frag"
    # computed in __post_init__
    local_preds: frozenset = field(default_factory=frozenset)
    strata: dict = field(default_factory=dict)
    rule_defer_deps: dict = field(default_factory=dict)
    max_child: int = 0

    def __post_init__(self):
        self.rules = tuple(self.rules)
        self.local_preds = frozenset(
            r.head.pred for r in self.rules if r.head is not None
        )
        self.max_child = max(
            (lit.child for r in self.rules for lit in r.body if lit.child), default=0
        )
        self._validate_safety()
        self.strata = self._stratify()
        self._pred_child_deps = self._child_dep_closure()
        self.rule_defer_deps = {}
        for r in self.rules:
            deps = set()
            for lit in r.body:
                if lit.child is not None:
                    deps.add(lit.child)
                elif lit.neg and not lit.builtin:
                    deps |= self._pred_child_deps.get(lit.pred, set())
            self.rule_defer_deps[r.rule_id] = frozenset(deps)

    # -- static checks ----------------------------------------------------
    def _validate_safety(self):
        for r in self.rules:
            bound = set()
            for lit in r.body:
                if not lit.neg and not lit.builtin:
                    bound |= _binding_vars(lit)
            need = set()
            if r.head is not None:
                need |= literal_vars(r.head)
            for lit in r.body:
                if lit.neg or lit.builtin:
                    need |= literal_vars(lit)
                else:
                    # variables inside arithmetic must be bound elsewhere
                    for a in lit.args:
                        if _term_has_arith(a):
                            _term_vars(a, need)
            unsafe = need - bound
            if unsafe:
                raise AsgSyntaxError(
                    f"unsafe rule {format_rule(r)!r}: "
                    f"variable(s) {sorted(unsafe)} not bound by a positive body literal"
                )

    def dependency_edges(self):
        """(head_pred, body_pred_key, negative) edges; @k atoms become
        position-tagged predicate names so tree recursion is well founded."""
        edges = []
        for r in self.rules:
            hp = r.head.pred if r.head is not None else f"#constraint:{r.rule_id}"
            for lit in r.body:
                if lit.builtin:
                    continue
                key = lit.pred if lit.child is None else f"{lit.pred}@{lit.child}"
                edges.append((hp, key, lit.neg))
        return edges

    def _stratify(self):
        report = check_stratified([self])
        if not report.ok:
            raise StratificationError(
                f"fragment {self.name} is not stratified: {report.describe()}",
                report.cycles,
            )
        # compute stratum per local predicate: longest chain of negative edges
        deps = {}
        for hp, key, neg in self.dependency_edges():
            if hp.startswith("#constraint"):
                continue
            if key in self.local_preds:
                deps.setdefault(hp, []).append((key, neg))
        strata = {}

        def stratum(p, seen):
            if p in strata:
                return strata[p]
            if p in seen:
                return 0  # positive cycle: same stratum
            seen = seen | {p}
            s = 0
            for q, neg in deps.get(p, []):
                s = max(s, stratum(q, seen) + (1 if neg else 0))
            strata[p] = s
            return s

        for p in self.local_preds:
            stratum(p, frozenset())
        return strata

    def _child_dep_closure(self):
        """pred -> set of child positions it depends on, transitively."""
        direct = {}
        pred_deps = {}
        for r in self.rules:
            if r.head is None:
                continue
            d = direct.setdefault(r.head.pred, set())
            pd = pred_deps.setdefault(r.head.pred, set())
            for lit in r.body:
                if lit.builtin:
                    continue
                if lit.child is not None:
                    d.add(lit.child)
                elif lit.pred in self.local_preds:
                    pd.add(lit.pred)
        closure = {p: set(direct.get(p, ())) for p in self.local_preds}
        changed = True
        while changed:
            changed = False
            for p in self.local_preds:
                for q in pred_deps.get(p, ()):
                    extra = closure.get(q, set()) - closure[p]
                    if extra:
                        closure[p] |= extra
                        changed = True
        return closure

    def rule_is_deferred(self, rule, unrealized):
        return bool(self.rule_defer_deps[rule.rule_id] & unrealized)


# ---------------------------------------------------------------------------
# Stratification report over one or more fragments.


@dataclass
class StratReport:
    ok: bool
    cycles: tuple = ()

    def describe(self):
        if self.ok:
            return "ok"
        return "; ".join(
            "negation cycle through " + " -> ".join(c) for c in self.cycles
        )


def check_stratified(fragments):
    """Predicate dependency graph over the union of fragments; ok iff no
    cycle contains a negative edge."""
    pos = {}
    neg = {}
    nodes = set()
    for frag in fragments:
        for hp, key, is_neg in frag.dependency_edges():
            nodes.add(hp)
            nodes.add(key)
            (neg if is_neg else pos).setdefault(hp, set()).add(key)
    # find strongly connected components, flag ones with internal neg edge
    index = {}
    low = {}
    onstack = {}
    stack = []
    counter = itertools.count()
    sccs = []

    def strongconnect(v):
        work = [(v, iter(sorted(pos.get(v, set()) | neg.get(v, set()))))]
        index[v] = low[v] = next(counter)
        stack.append(v)
        onstack[v] = True
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, iter(sorted(pos.get(w, set()) | neg.get(w, set())))))
                    advanced = True
                    break
                elif onstack.get(w):
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)

    bad = []
    for comp in sccs:
        cset = set(comp)
        for v in comp:
            if neg.get(v, set()) & cset:
                bad.append(tuple(sorted(cset)))
                break
    return StratReport(ok=not bad, cycles=tuple(bad))


EMPTY_FRAGMENT = LogicFragment((), "empty")


# ---------------------------------------------------------------------------
# Evaluation.

SAT = "satisfiable"
UNSAT = "unsatisfiable"
DEFERRED = "deferred-ok"


@dataclass(frozen=True)
class SatResult:
    status: str
    model: frozenset = frozenset()
    violated: Optional[str] = None
    deferred: tuple = ()

    @property
    def ok(self):
        return self.status != UNSAT


def eval_ground_term(t, env):
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise LogicEvalError(f"unbound variable {t.name}")
    if isinstance(t, Tup):
        return Tup(tuple(eval_ground_term(i, env) for i in t.items))
    if isinstance(t, Arith):
        left = eval_ground_term(t.left, env)
        right = eval_ground_term(t.right, env)
        if not isinstance(left, int) or not isinstance(right, int):
            raise LogicEvalError(
                f"arithmetic over non-integers: {left!r} {t.op} {right!r}"
            )
        if t.op == "+":
            v = left + right
        elif t.op == "-":
            v = left - right
        else:
            v = left * right
        if v > 2**63 - 1 or v < -(2**63):
            raise LogicEvalError("integer overflow in arithmetic")
        return v
    return t


def _match_term(pattern, value, env):
    """Extend env to match pattern against ground value; None on mismatch."""
    if isinstance(pattern, Var):
        bound = env.get(pattern.name)
        if bound is None:
            env = dict(env)
            env[pattern.name] = value
            return env
        return env if bound == value else None
    if isinstance(pattern, Tup):
        if not isinstance(value, Tup) or len(pattern.items) != len(value.items):
            return None
        for p, v in zip(pattern.items, value.items):
            env = _match_term(p, v, env)
            if env is None:
                return None
        return env
    if isinstance(pattern, Arith):
        try:
            return env if eval_ground_term(pattern, env) == value else None
        except LogicEvalError:
            return None
    return env if pattern == value else None


def _match_atom(lit, atom_args, env):
    if len(lit.args) != len(atom_args):
        return None
    for p, v in zip(lit.args, atom_args):
        env = _match_term(p, v, env)
        if env is None:
            return None
    return env


class _Store:
    """Fact lookup: local derived atoms plus read-only background."""

    def __init__(self, background):
        self.local = {}
        self.background = background  # dict pred -> set(args)

    def add(self, pred, args):
        s = self.local.setdefault(pred, set())
        if args in s:
            return False
        s.add(args)
        return True

    def candidates(self, pred):
        # snapshot so self-recursive rules can add while a join iterates;
        # the outer fixpoint loop picks up anything added mid-pass
        yield from tuple(self.local.get(pred, ()))
        yield from self.background.get(pred, ())

    def holds(self, pred, args):
        return args in self.local.get(pred, ()) or args in self.background.get(
            pred, ()
        )

    def count(self):
        return sum(len(s) for s in self.local.values())


def index_model(model):
    idx = {}
    for pred, args in model:
        idx.setdefault(pred, set()).add(args)
    return idx


def _literal_ok_ground(lit, store, child_idx):
    """Check a fully-bound negative or builtin literal."""
    if lit.builtin:
        left, right = lit.args
        op = lit.builtin
        if op == "=":
            res = left == right
        elif op == "!=":
            res = left != right
        else:
            if not isinstance(left, int) or not isinstance(right, int):
                raise LogicEvalError(
                    f"comparison {op} over non-integers: {left!r}, {right!r}"
                )
            res = {
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
            }[op]
        return res != lit.neg
    if lit.child is not None:
        holds = lit.args in child_idx[lit.child - 1].get(lit.pred, set())
    else:
        holds = None
        raise AssertionError("plain literals handled in join")
    return holds != lit.neg


def _iter_bindings(body, store, child_idx, env):
    """Join the (reordered) body literals, yielding complete environments."""
    if not body:
        yield env
        return
    lit, rest = body[0], body[1:]
    if lit.builtin or lit.neg:
        glit = Literal(
            lit.pred,
            tuple(eval_ground_term(a, env) for a in lit.args),
            neg=lit.neg,
            child=lit.child,
            builtin=lit.builtin,
        )
        if glit.builtin:
            if _literal_ok_ground(glit, store, child_idx):
                yield from _iter_bindings(rest, store, child_idx, env)
            return
        # negated plain/child atom, fully ground
        if glit.child is not None:
            holds = glit.args in child_idx[glit.child - 1].get(glit.pred, set())
        else:
            holds = store.holds(glit.pred, glit.args)
        if holds != glit.neg:
            yield from _iter_bindings(rest, store, child_idx, env)
        return
    # positive atom: enumerate matching facts
    if lit.child is not None:
        source = child_idx[lit.child - 1].get(lit.pred, ())
    else:
        source = store.candidates(lit.pred)
    for args in source:
        env2 = _match_atom(lit, args, env)
        if env2 is not None:
            yield from _iter_bindings(rest, store, child_idx, env2)


def _reorder_body(body):
    pos = [l for l in body if not l.neg and not l.builtin]
    builtins = [l for l in body if l.builtin]
    negs = [l for l in body if l.neg and not l.builtin]
    return tuple(pos + builtins + negs)


def evaluate_node(
    fragment,
    child_models,
    background,
    atom_cap=DEFAULT_ATOM_CAP,
):
    """Evaluate one parse-tree node's annotation.

    ``child_models`` holds one entry per RHS position: a frozenset of atoms
    for realised children (terminals are always the empty model), or None
    for children not yet realised.  ``background`` is a pred->set(args)
    index, visible in rule bodies but not re-exported.
    """
    unrealized = frozenset(
        k + 1 for k, m in enumerate(child_models) if m is None
    )
    child_idx = [
        index_model(m) if isinstance(m, frozenset) else (m if m is not None else {})
        for m in child_models
    ]
    active = []
    deferred_ids = []
    for r in fragment.rules:
        if fragment.rule_is_deferred(r, unrealized):
            deferred_ids.append(r.rule_id)
        else:
            active.append(r)

    store = _Store(background)
    # group active definite rules by stratum
    max_stratum = max(fragment.strata.values(), default=0)
    by_stratum = {s: [] for s in range(max_stratum + 1)}
    constraints = []
    for r in active:
        if r.head is None:
            constraints.append(r)
        else:
            by_stratum[fragment.strata[r.head.pred]].append(r)

    for s in range(max_stratum + 1):
        rules = by_stratum[s]
        changed = True
        while changed:
            changed = False
            for r in rules:
                body = _reorder_body(r.body)
                for env in _iter_bindings(body, store, child_idx, {}):
                    head_args = tuple(
                        eval_ground_term(a, env) for a in r.head.args
                    )
                    if store.add(r.head.pred, head_args):
                        changed = True
                        if store.count() > atom_cap:
                            raise GroundingOverflow(
                                f"more than {atom_cap} ground atoms derived"
                            )

    for r in constraints:
        body = _reorder_body(r.body)
        for _env in _iter_bindings(body, store, child_idx, {}):
            return SatResult(UNSAT, violated=r.rule_id)

    model = frozenset(
        (pred, args) for pred, argset in store.local.items() for args in argset
    )
    if deferred_ids:
        return SatResult(DEFERRED, model=model, deferred=tuple(deferred_ids))
    return SatResult(SAT, model=model)


# ---------------------------------------------------------------------------
# Brute-force oracle over ground programs.


def enumerate_models_bruteforce(rules, max_atoms=20):
    """All answer sets of a ground program, by exhaustive 2^n enumeration.

    Each interpretation is checked to be the least model of its reduct and
    to violate no constraint.  Rules must be ground (no variables).
    """
    atoms = set()
    for r in rules:
        if r.head is not None:
            atoms.add((r.head.pred, r.head.args))
        for lit in r.body:
            if not lit.builtin:
                atoms.add((lit.pred, lit.args))
    for r in rules:
        for lit in itertools.chain(
            [r.head] if r.head else [], r.body
        ):
            if lit.builtin:
                continue
            if literal_vars(lit):
                raise LogicEvalError("oracle requires a ground program")
            if lit.child is not None:
                raise LogicEvalError("oracle does not support child references")
    atoms = sorted(atoms)
    if len(atoms) > max_atoms:
        raise OracleTooLarge(f"{len(atoms)} atoms exceeds the cap of {max_atoms}")

    definite = [r for r in rules if r.head is not None]
    constraints = [r for r in rules if r.head is None]

    def least_model_of_reduct(interp):
        reduct = []
        for r in definite:
            blocked = False
            posbody = []
            for lit in r.body:
                key = (lit.pred, lit.args)
                if lit.neg:
                    if key in interp:
                        blocked = True
                        break
                else:
                    posbody.append(key)
            if not blocked:
                reduct.append(((r.head.pred, r.head.args), posbody))
        model = set()
        changed = True
        while changed:
            changed = False
            for head, body in reduct:
                if head not in model and all(b in model for b in body):
                    model.add(head)
                    changed = True
        return frozenset(model)

    def violates(interp):
        for r in constraints:
            sat = True
            for lit in r.body:
                key = (lit.pred, lit.args)
                holds = key in interp
                if holds == lit.neg:
                    sat = False
                    break
            if sat:
                return True
        return False

    out = set()
    n = len(atoms)
    for bits in range(1 << n):
        interp = frozenset(atoms[i] for i in range(n) if bits >> i & 1)
        if least_model_of_reduct(interp) == interp and not violates(interp):
            out.add(interp)
    return out
