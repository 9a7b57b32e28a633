"""Stratification, grounding, entailment and answer-stream evaluation for LDSR."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from ..errors import SafetyError, StratificationError, ValidationError
from ..stream import Stream, backward_observation, observation_indices
from ..terms import Atom, PredKind, Var, unify
from .syntax import LdsrProgram, LdsrRule, Literal, SKind, StreamingAtom, check_safety

# -- stratification -------------------------------------------------------------


def _sccs(nodes: Sequence[str], edges: dict[str, set[str]]) -> list[list[str]]:
    """Tarjan's algorithm; components come out in reverse topological order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    out: list[list[str]] = []
    counter = itertools.count()

    def visit(v: str) -> None:
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in sorted(edges.get(v, ())):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp))

    for v in nodes:
        if v not in index:
            visit(v)
    return out


def stratify_predicates(
    heads: Iterable[str], arcs: Iterable[tuple[str, str, bool]]
) -> list[list[str]]:
    """Order defined predicates so negative arcs point strictly downwards.

    ``arcs`` are ``(body_pred, head_pred, strict)`` triples.  Returns strata of
    head predicates, lowest first.  Raises :class:`StratificationError` with a
    witness cycle when a strict arc lies on a cycle.
    """
    heads = sorted(set(heads))
    head_set = set(heads)
    succ: dict[str, set[str]] = {h: set() for h in heads}  # head -> body preds it uses
    strict: set[tuple[str, str]] = set()
    for q, p, is_strict in arcs:
        if q in head_set and p in head_set:
            succ[p].add(q)
            if is_strict:
                strict.add((q, p))
    comps = _sccs(heads, succ)  # dependencies first
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    for q, p in sorted(strict):
        if comp_of[q] == comp_of[p]:
            raise StratificationError(
                f"predicate {p} depends non-monotonically on {q} within a cycle",
                _cycle_through(q, p, succ),
            )
    # merge components into levels: level(p) = max over deps (+1 if strict)
    level: dict[int, int] = {}
    for i, comp in enumerate(comps):
        lv = 0
        for p in comp:
            for q in succ[p]:
                j = comp_of[q]
                if j == i:
                    continue
                lv = max(lv, level[j] + (1 if (q, p) in strict else 0))
        level[i] = lv
    n_levels = max(level.values(), default=-1) + 1
    strata: list[list[str]] = [[] for _ in range(n_levels)]
    for i, comp in enumerate(comps):
        strata[level[i]].extend(comp)
    return [sorted(s) for s in strata if s]


def _cycle_through(q: str, p: str, succ: dict[str, set[str]]) -> list[str]:
    """Predicates ``p, q, ..., p`` where each one's rules use the next."""
    prev: dict[str, str] = {q: q}
    frontier = [q]
    while frontier and p not in prev:
        nxt = []
        for v in frontier:
            for w in sorted(succ.get(v, ())):
                if w not in prev:
                    prev[w] = v
                    nxt.append(w)
        frontier = nxt
    path = [p]
    v = p
    while v != q:
        v = prev[v]
        path.append(v)
    # path runs p <- ... <- q backwards; flip to p -> q -> ... -> p
    return [p] + list(reversed(path[1:])) + [p] if p != q else [p, p]


def check_stratified(program: LdsrProgram) -> list[list[LdsrRule]]:
    """Return strata ``Π_1..Π_k`` of rules (lowest first) or raise.

    Harmless body literals may refer to predicates defined in the same or a
    lower stratum; non-harmless ones only to strictly lower strata.
    """
    arcs = [(l.pred, r.head.pred, not l.harmless) for r in program.rules for l in r.body]
    pred_strata = stratify_predicates(program.head_preds(), arcs)
    by_pred = {p: i for i, s in enumerate(pred_strata) for p in s}
    strata: list[list[LdsrRule]] = [[] for _ in pred_strata]
    for r in program.rules:
        strata[by_pred[r.head.pred]].append(r)
    return strata


# -- grounding ---------------------------------------------------------------


def count_variable_ranges(rule: LdsrRule) -> dict[Var, int]:
    """Counting-term variable -> largest useful value (``|D|``, min over uses)."""
    out: dict[Var, int] = {}
    for l in rule.body:
        if l.atom.has_count_variable:
            v = l.atom.bound
            out[v] = min(out.get(v, len(l.atom.offsets)), len(l.atom.offsets))
    return out


def ground_rule(rule: LdsrRule, constants: Iterable) -> list[LdsrRule]:
    consts = sorted(set(constants), key=lambda c: (isinstance(c, str), str(c) if isinstance(c, str) else c))
    counting = count_variable_ranges(rule)
    variables = sorted(rule.variables(), key=lambda v: v.name)
    domains = []
    for v in variables:
        if v in counting:
            domains.append([c for c in consts if isinstance(c, int) and 1 <= c <= counting[v]])
        else:
            domains.append(consts)
    out = []
    for values in itertools.product(*domains):
        out.append(rule.substitute(dict(zip(variables, values))))
    return out


def ground_ldsr(program: LdsrProgram, constants: Iterable) -> LdsrProgram:
    """``Gr(P)``: every rule instantiated over ``constants``.

    Counting-term variables only take values in ``constants ∩ 1..|D|``; a
    larger count is never entailed, so those instances are dead rules.
    """
    constants = list(constants)
    rules: list[LdsrRule] = []
    seen: set[LdsrRule] = set()
    for r in program.rules:
        for g in ground_rule(r, constants):
            if g not in seen:
                seen.add(g)
                rules.append(g)
    return LdsrProgram(tuple(rules), program.signature)


# -- entailment ------------------------------------------------------------------


def entails_atom(sigma: Stream, alpha: StreamingAtom) -> bool:
    if not alpha.is_ground:
        raise ValidationError(f"streaming atom {alpha} is not ground")
    obs = backward_observation(sigma, alpha.offsets)
    hits = obs.count(alpha.atom)
    if alpha.kind is SKind.AT_LEAST:
        return hits >= alpha.bound
    if alpha.kind is SKind.ALWAYS_IN:
        return hits == len(obs)
    return hits == alpha.bound


def entails(sigma: Stream, lit: Literal) -> bool:
    """Truth of a ground streaming literal at the last time point."""
    value = entails_atom(sigma, lit.atom)
    return value if lit.positive else not value


# -- evaluation --------------------------------------------------------------------


class _Prefix:
    """Stream prefix with a mutable last slot, indexed by predicate."""

    def __init__(self, previous: Sequence[frozenset], current: Iterable[Atom]):
        self.previous = list(previous)
        self.n = len(self.previous)
        self._index: list[dict[str, list[Atom]]] = [self._build(s) for s in self.previous]
        self.current: set[Atom] = set()
        self._cur_index: dict[str, list[Atom]] = {}
        for a in current:
            self.add(a)

    @staticmethod
    def _build(slot: Iterable[Atom]) -> dict[str, list[Atom]]:
        idx: dict[str, list[Atom]] = {}
        for a in slot:
            idx.setdefault(a.pred, []).append(a)
        return idx

    def add(self, atom: Atom) -> bool:
        if atom in self.current:
            return False
        self.current.add(atom)
        self._cur_index.setdefault(atom.pred, []).append(atom)
        return True

    def slot(self, i: int):
        return self.current if i == self.n else self.previous[i]

    def by_pred(self, i: int, pred: str) -> list[Atom]:
        idx = self._cur_index if i == self.n else self._index[i]
        return idx.get(pred, [])

    def count(self, atom: Atom, indices: Sequence[int]) -> int:
        return sum(1 for i in indices if atom in self.slot(i))


def _ground_counts(prefix: _Prefix, pattern: Atom, env: dict, indices: Sequence[int]) -> dict[Atom, int]:
    counts: dict[Atom, int] = {}
    pat = pattern.substitute(env)
    if pat.is_ground:
        c = prefix.count(pat, indices)
        return {pat: c} if c else {}
    for i in indices:
        for a in prefix.by_pred(i, pat.pred):
            if unify(pat, a, {}) is not None:
                counts[a] = counts.get(a, 0) + 1
    return counts


def _solve_literal(prefix: _Prefix, lit: Literal, env: dict, universe: Sequence) -> Iterator[dict]:
    sa = lit.atom
    indices = observation_indices(prefix.n, sa.offsets)
    if not lit.positive:
        g = sa.substitute(env)
        if not g.is_ground:
            raise SafetyError(f"negative literal {lit} reached with unbound variables")
        hits = prefix.count(g.atom, indices)
        if g.kind is SKind.AT_LEAST:
            holds = hits >= g.bound
        elif g.kind is SKind.ALWAYS_IN:
            holds = hits == len(indices)
        else:
            holds = hits == g.bound
        if not holds:
            yield env
        return
    if sa.kind is SKind.ALWAYS_IN and not indices:
        # vacuously true for every instance
        pat = sa.atom.substitute(env)
        free = sorted(set(pat.variables()), key=lambda v: v.name)
        for values in itertools.product(universe, repeat=len(free)):
            yield {**env, **dict(zip(free, values))}
        return
    counts = _ground_counts(prefix, sa.atom, env, indices)
    for ground, hits in sorted(counts.items(), key=lambda kv: kv[0].sort_key()):
        if sa.kind is SKind.AT_LEAST:
            ok = hits >= sa.bound
        elif sa.kind is SKind.ALWAYS_IN:
            ok = hits == len(indices)
        else:
            ok = None
        new = unify(sa.atom, ground, env)
        if new is None:
            continue
        if ok is None:  # count
            bound = sa.bound
            if isinstance(bound, Var):
                val = new.get(bound)
                if val is None:
                    new[bound] = hits
                    yield new
                elif val == hits:
                    yield new
            elif bound == hits:
                yield new
        elif ok:
            yield new


def solve_body(prefix: _Prefix, body: Sequence[Literal], universe: Sequence, env: dict | None = None) -> Iterator[dict]:
    ordered = [l for l in body if l.positive] + [l for l in body if not l.positive]

    def go(k: int, env: dict) -> Iterator[dict]:
        if k == len(ordered):
            yield env
            return
        for e in _solve_literal(prefix, ordered[k], env, universe):
            yield from go(k + 1, e)

    yield from go(0, dict(env or {}))


@dataclass(frozen=True)
class LdsrEvalResult:
    answer_stream: Stream
    streaming_model: frozenset
    temp_trace: tuple  # per time point: atoms dropped by the permanent-part step


def program_universe(program: LdsrProgram, sigma: Stream, background: Iterable[Atom]) -> list:
    consts = set(program.constants())
    for a in sigma.atoms() | set(background):
        consts.update(a.args)
    consts.update(range(1, program.max_offsets() + 1))
    return sorted(consts, key=lambda c: (isinstance(c, str), str(c) if isinstance(c, str) else c))


def check_input(program: LdsrProgram, sigma: Stream, background: Iterable[Atom]) -> None:
    for a in sigma.atoms():
        kind = program.kind(a.pred)
        if kind is not PredKind.STREAM:
            raise ValidationError(f"input stream atom {a} has a {kind.value} predicate")
    for b in background:
        if program.kind(b.pred) is PredKind.INTENSIONAL and b.pred not in program.signature.names(PredKind.BACKGROUND):
            raise ValidationError(f"background atom {b} has an intensional predicate")


def evaluate_slot(
    strata: Sequence[Sequence[LdsrRule]],
    previous: Sequence[frozenset],
    current: Iterable[Atom],
    universe: Sequence,
) -> tuple[set[Atom], set[Atom]]:
    """Stratified fixpoint for the last slot; returns (model, permanent atoms)."""
    base = set(current)
    prefix = _Prefix(previous, base)
    for stratum in strata:
        changed = True
        while changed:
            changed = False
            for rule in stratum:
                heads = [rule.head.substitute(env) for env in solve_body(prefix, rule.body, universe)]
                for h in heads:
                    if not h.is_ground:
                        raise SafetyError(f"rule '{rule}' derived non-ground {h}")
                    if prefix.add(h):
                        changed = True
    model = set(prefix.current)
    permanent = set(base)
    for stratum in strata:
        for rule in stratum:
            if rule.temp:
                continue
            for env in solve_body(prefix, rule.body, universe):
                permanent.add(rule.head.substitute(env))
    return model, permanent & model


def eval_answer_stream(
    program: LdsrProgram, sigma: Stream, background: Iterable[Atom] = ()
) -> LdsrEvalResult:
    """Answer stream and streaming model of ``P ∪ {b. | b ∈ B}`` for ``sigma``.

    Time points are processed left to right: slot ``i`` is the stratified
    model over ``<S'_0..S'_{i-1}, S_i>``; for ``i < n`` temporary atoms (those
    not in the input and not supported by a satisfied permanent rule) are then
    dropped.  Background facts are permanent and present in every slot.
    """
    background = frozenset(background)
    for r in program.rules:
        check_safety(r)
    check_input(program, sigma, background)
    strata = check_stratified(program)
    universe = program_universe(program, sigma, background)
    slots: list[frozenset] = []
    trace: list[frozenset] = []
    model: set[Atom] = set()
    for i in range(sigma.n + 1):
        model, permanent = evaluate_slot(strata, slots, sigma[i] | background, universe)
        if i < sigma.n:
            trace.append(frozenset(model - permanent))
            slots.append(frozenset(permanent))
        else:
            trace.append(frozenset())
            slots.append(frozenset(model))
    return LdsrEvalResult(Stream(tuple(slots)), frozenset(model), tuple(trace))
