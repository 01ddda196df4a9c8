"""Terminal / vocabulary alignment.

Grammar terminals and model tokens live at different granularities: one
terminal may need several tokens to spell, and several terminals may share
token prefixes.  A TokenMap precomputes every tokenization of every
terminal; an AlignCursor tracks a partially spelled terminal during
decoding.  Token id 0 is reserved for EOS throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .earley import END_MARKER, extend, valid_terminals
from .errors import UncoverableTerminal

EOS_ID = 0


class Tokenizer(Protocol):
    vocab_size: int

    def encode(self, text: str) -> list: ...

    def decode(self, ids) -> str: ...


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TokenMap:
    """All token-sequence spellings of each terminal.

    ``expansions`` admits every segmentation so that masking never excludes
    a spelling the model could produce; ``canonical`` is the tokenizer's own
    encoding, used when the engine itself emits a terminal.
    """

    expansions: dict  # terminal -> tuple of token-id tuples
    canonical: dict  # terminal -> token-id tuple
    vocab_size: int
    ambiguous_boundaries: frozenset = frozenset()

    def terminals(self):
        return self.expansions.keys()


def build_map(terminals, tokenizer):
    pieces = {}
    for tid in range(1, tokenizer.vocab_size):
        text = tokenizer.decode([tid])
        if text:
            pieces.setdefault(text, []).append(tid)
    expansions = {}
    canonical = {}
    for term in sorted(terminals):
        segs = _segmentations(term, pieces)
        if not segs:
            raise UncoverableTerminal(
                f"vocabulary cannot spell terminal {term!r}"
            )
        expansions[term] = tuple(sorted(segs))
        enc = tuple(tokenizer.encode(term))
        canonical[term] = enc if tuple(enc) in segs else expansions[term][0]
    ambiguous = set()
    for a in expansions:
        for b in expansions:
            if a != b and b.startswith(a):
                ambiguous.add((a, b))
    return TokenMap(
        expansions=expansions,
        canonical=canonical,
        vocab_size=tokenizer.vocab_size,
        ambiguous_boundaries=frozenset(ambiguous),
    )


def _segmentations(text, pieces):
    """All ways to spell ``text`` as a concatenation of vocabulary pieces."""
    n = len(text)
    # starts[i] = segmentations of text[i:]
    starts = [None] * (n + 1)
    starts[n] = [()]
    for i in range(n - 1, -1, -1):
        out = []
        for j in range(i + 1, n + 1):
            chunk = text[i:j]
            ids = pieces.get(chunk)
            if not ids:
                continue
            for rest in starts[j]:
                for tid in ids:
                    out.append((tid,) + rest)
        starts[i] = out
    return {seg for seg in starts[0]}


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlignCursor:
    """Token buffer inside a partially spelled terminal (empty at terminal
    boundaries)."""

    buffer: tuple = ()

    @property
    def at_boundary(self):
        return not self.buffer


def tau(token_map, terminal_sequence):
    """Terminal sequence to canonical token ids."""
    out = []
    for t in terminal_sequence:
        out.extend(token_map.canonical[t])
    return tuple(out)


def tau_inverse(token_map, tokenizer, token_ids):
    """Token ids back to a terminal sequence by greedy longest match."""
    text = tokenizer.decode([t for t in token_ids if t != EOS_ID])
    terms = sorted(token_map.terminals(), key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        for t in terms:
            if text.startswith(t, i):
                out.append(t)
                i += len(t)
                break
        else:
            raise UncoverableTerminal(
                f"no terminal matches decoded text at offset {i}: {text[i:]!r}"
            )
    return tuple(out)


def valid_tokens(state, token_map, cursor):
    """Vocabulary ids admissible next, lifted from the valid terminals.

    A token is admissible iff the extended buffer is a prefix of (or
    completes) an expansion of some currently valid terminal.  EOS is
    admissible only at a terminal boundary when the parse is complete.
    """
    terms = valid_terminals(state)
    out = set()
    n = len(cursor.buffer)
    for term in terms:
        if term is END_MARKER:
            if cursor.at_boundary:
                out.add(EOS_ID)
            continue
        for exp in token_map.expansions[term]:
            if len(exp) > n and exp[:n] == cursor.buffer:
                out.add(exp[n])
    return out


def apply_token(state, token_map, cursor, token_id):
    """Advance by one vocabulary token.

    Returns (state, cursor, emitted terminal or None).  A token that
    completes an expansion advances the parse state immediately; when it
    both completes one terminal and continues another, completion wins
    (recorded as an ambiguous boundary on the map).
    """
    terms = valid_terminals(state)
    buffer = cursor.buffer + (token_id,)
    completed = None
    continues = False
    for term in sorted(t for t in terms if t is not END_MARKER):
        for exp in token_map.expansions[term]:
            if exp == buffer and completed is None:
                completed = term
            elif len(exp) > len(buffer) and exp[: len(buffer)] == buffer:
                continues = True
    if completed is not None:
        return extend(state, completed), AlignCursor(), completed
    if continues:
        return state, AlignCursor(buffer), None
    raise UncoverableTerminal(
        f"token {token_id} does not continue any valid terminal"
    )


# ---------------------------------------------------------------------------
# Tokenizers used by the benchmark harness and the test suite.


class TerminalTokenizer:
    """One token per grammar terminal (id 0 reserved for EOS)."""

    def __init__(self, terminals):
        self.terms = sorted(terminals)
        self.vocab_size = len(self.terms) + 1
        self._by_text = {t: i + 1 for i, t in enumerate(self.terms)}

    def encode(self, text):
        out = []
        i = 0
        while i < len(text):
            for t in sorted(self.terms, key=len, reverse=True):
                if text.startswith(t, i):
                    out.append(self._by_text[t])
                    i += len(t)
                    break
            else:
                raise UncoverableTerminal(f"cannot encode {text[i:]!r}")
        return out

    def decode(self, ids):
        return "".join(self.terms[i - 1] for i in ids if i != EOS_ID)


class SubwordTokenizer:
    """Deterministic longest-match tokenizer over a fixed piece list.

    Test fixture standing in for a real subword vocabulary.
    """

    def __init__(self, vocab_pieces):
        self.pieces = list(vocab_pieces)
        self.vocab_size = len(self.pieces) + 1
        self._by_text = {}
        for i, p in enumerate(self.pieces):
            self._by_text.setdefault(p, i + 1)

    def encode(self, text):
        out = []
        i = 0
        while i < len(text):
            best = None
            for p in self._by_text:
                if text.startswith(p, i) and (best is None or len(p) > len(best)):
                    best = p
            if best is None:
                raise UncoverableTerminal(f"cannot encode {text[i:]!r}")
            out.append(self._by_text[best])
            i += len(best)
        return out

    def decode(self, ids):
        return "".join(self.pieces[i - 1] for i in ids if i != EOS_ID)
