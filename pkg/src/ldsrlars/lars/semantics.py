"""Entailment, grounding and answer streams for negation-stratified LARS programs.

Variables are classified per rule: one that occurs as an ``at[...]``
subscript is a time variable (ranging over ``0..n``), any other is a data
variable (ranging over the constants of program, input and background).
A variable that occurs only inside one negated subformula is local to it and
read existentially (``not exists``); all others are universally quantified
over the rule as usual.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from ..errors import SafetyError, StratificationError, UnsupportedProgramError, ValidationError
from ..ldsr.semantics import stratify_predicates
from ..stream import Stream, Substream
from ..terms import Atom, PredKind, Var, term_key, unify
from .syntax import (
    FALSE,
    And,
    At,
    AtomF,
    Bottom,
    Box,
    Cmp,
    Diamond,
    Formula,
    Implies,
    LarsProgram,
    LarsRule,
    Not,
    Or,
    Reset,
    Top,
    Window,
    _NO_VALUE,
    formula_vars,
    head_atom,
    rebuild,
    substitute,
    time_vars,
    walk,
)

# -- static analysis -------------------------------------------------------------


def _occurrences(phi: Formula, counter: Counter) -> None:
    for v in formula_vars(phi):
        counter[v] += 1


@dataclass
class Scope:
    """Per-rule variable information used by the solver."""

    time_vars: frozenset
    nonlocal_of: dict  # id(Not node) -> frozenset of its non-local variables
    # structure-independent caches shared by every solver over this scope
    free_cache: dict = field(default_factory=dict)
    order_cache: dict = field(default_factory=dict)

    def is_time(self, v: Var) -> bool:
        return v in self.time_vars


def analyse(formulas: Sequence[Formula], outer: Iterable[Var] = ()) -> Scope:
    """Compute time variables and non-local sets for every negation node."""
    total: Counter = Counter()
    for f in formulas:
        _occurrences(f, total)
    outer = set(outer)
    nonlocal_of: dict[int, frozenset] = {}
    tv: set[Var] = set()
    for f in formulas:
        tv |= time_vars(f)
        for node in walk(f):
            if isinstance(node, Not):
                inside: Counter = Counter()
                _occurrences(node.arg, inside)
                nonlocal_of[id(node)] = frozenset(v for v, k in inside.items() if total[v] > k or v in outer)
    return Scope(frozenset(tv), nonlocal_of)


def free_vars(phi: Formula, scope: Scope) -> set[Var]:
    """Variables of ``phi`` not bound inside one of its negations."""
    hit = scope.free_cache.get(id(phi))
    if hit is not None and hit[0] is phi:
        return set(hit[1])
    out: set[Var] = set()

    def go(node: Formula) -> None:
        if isinstance(node, Not):
            out.update(scope.nonlocal_of.get(id(node), ()))
            return
        if isinstance(node, AtomF):
            out.update(node.atom.variables())
        elif isinstance(node, At) and node.time.var is not None:
            out.add(node.time.var)
        elif isinstance(node, Cmp):
            out.update(e.var for e in (node.lhs, node.rhs) if e.var is not None)
        for c in node.children():
            go(c)

    go(phi)
    scope.free_cache[id(phi)] = (phi, frozenset(out))
    return out


# -- solver ------------------------------------------------------------------------


class Structure:
    """A stream under construction plus background knowledge.

    Slots are indexed by predicate so atom matching does not scan whole slots.
    """

    def __init__(self, slots: Sequence[Iterable[Atom]], background: Iterable[Atom] = ()):
        self.slots: list[set[Atom]] = [set(s) for s in slots]
        self.n = len(self.slots) - 1
        self._index: list[dict[str, set[Atom]]] = []
        for s in self.slots:
            idx: dict[str, set[Atom]] = {}
            for a in s:
                idx.setdefault(a.pred, set()).add(a)
            self._index.append(idx)
        self.background = frozenset(background)
        self._bindex: dict[str, set[Atom]] = {}
        for a in self.background:
            self._bindex.setdefault(a.pred, set()).add(a)

    def add(self, t: int, atom: Atom) -> bool:
        if atom in self.slots[t]:
            return False
        self.slots[t].add(atom)
        self._index[t].setdefault(atom.pred, set()).add(atom)
        return True

    def holds(self, t: int, atom: Atom, in_view: bool) -> bool:
        return atom in self.background or (in_view and atom in self.slots[t])

    def candidates(self, t: int, pred: str, in_view: bool) -> Iterable[Atom]:
        out = self._bindex.get(pred, set())
        if in_view:
            extra = self._index[t].get(pred)
            if extra:
                out = out | extra
        return out

    def stream(self) -> Stream:
        return Stream(tuple(frozenset(s) for s in self.slots))


class Solver:
    """Enumerates variable bindings under which a formula holds.

    ``solve(phi, env, t, lo, hi)`` yields extensions of ``env`` such that
    ``M, Σ', t ⊩ phi`` where ``Σ'`` is the structure's stream restricted to the
    interval ``lo..hi`` (empty when ``lo > hi``).
    """

    def __init__(self, m: Structure, scope: Scope, universe: Sequence):
        self.m = m
        self.scope = scope
        self.universe = list(universe)
        self._order_cache = scope.order_cache

    # domain fallback for variables that nothing binds
    def _domain(self, v: Var) -> Iterable:
        return range(self.m.n + 1) if self.scope.is_time(v) else self.universe

    def _enumerate(self, vars_: Iterable[Var], env: dict) -> Iterator[dict]:
        missing = sorted((v for v in set(vars_) if v not in env), key=lambda v: v.name)
        if not missing:
            yield env
            return
        for values in itertools.product(*(list(self._domain(v)) for v in missing)):
            yield {**env, **dict(zip(missing, values))}

    def holds(self, phi: Formula, env: dict, t: int, lo: int, hi: int) -> bool:
        for _ in self.solve(phi, env, t, lo, hi):
            return True
        return False

    def solve(self, phi: Formula, env: dict, t: int, lo: int, hi: int) -> Iterator[dict]:
        if isinstance(phi, AtomF):
            yield from self._solve_atom(phi.atom, env, t, lo <= t <= hi)
        elif isinstance(phi, Top):
            yield env
        elif isinstance(phi, Bottom):
            return
        elif isinstance(phi, And):
            yield from self._solve_and(self._order(phi.args, frozenset(env)), 0, env, t, lo, hi)
        elif isinstance(phi, Or):
            seen = set()
            for arg in phi.args:
                for e in self.solve(arg, env, t, lo, hi):
                    key = frozenset(e.items())
                    if key not in seen:
                        seen.add(key)
                        yield e
        elif isinstance(phi, Not):
            need = self.scope.nonlocal_of.get(id(phi))
            if need is None:
                raise ValidationError("negation node was not analysed; compile the formula first")
            for e in self._enumerate(need, env):
                if not self.holds(phi.arg, e, t, lo, hi):
                    yield e
        elif isinstance(phi, Implies):
            need = free_vars(phi, self.scope)
            for e in self._enumerate(need, env):
                if not self.holds(phi.ante, e, t, lo, hi) or self.holds(phi.cons, e, t, lo, hi):
                    yield e
        elif isinstance(phi, Diamond):
            for u in range(lo, hi + 1):
                yield from self.solve(phi.arg, env, u, lo, hi)
        elif isinstance(phi, Box):
            yield from self._solve_box(phi.arg, env, lo, hi)
        elif isinstance(phi, At):
            yield from self._solve_at(phi, env, lo, hi)
        elif isinstance(phi, Window):
            yield from self.solve(phi.arg, env, t, max(lo, t - phi.width), min(t, hi))
        elif isinstance(phi, Reset):
            yield from self.solve(phi.arg, env, t, 0, self.m.n)
        elif isinstance(phi, Cmp):
            yield from self._solve_cmp(phi, env)
        else:
            raise TypeError(f"not a formula: {phi!r}")

    def _solve_atom(self, pattern: Atom, env: dict, t: int, in_view: bool) -> Iterator[dict]:
        if not 0 <= t <= self.m.n:
            in_view = False
        pat = pattern.substitute(env)
        if pat.is_ground:
            if self.m.holds(t, pat, in_view):
                yield env
            return
        for a in sorted(self.m.candidates(t, pat.pred, in_view), key=Atom.sort_key):
            e = unify(pat, a, env)
            if e is not None:
                yield e

    def _solve_box(self, arg: Formula, env: dict, lo: int, hi: int) -> Iterator[dict]:
        if lo > hi:
            yield from self._enumerate(free_vars(arg, self.scope), env)
            return
        seen = set()
        for e in self.solve(arg, env, lo, lo, hi):
            key = frozenset(e.items())
            if key in seen:
                continue
            seen.add(key)
            if all(self.holds(arg, e, u, lo, hi) for u in range(lo + 1, hi + 1)):
                yield e

    def _solve_at(self, phi: At, env: dict, lo: int, hi: int) -> Iterator[dict]:
        expr = phi.time
        v = expr.var
        if v is not None and v not in env:
            for u in range(lo, hi + 1):
                base = u - expr.offset
                if 0 <= base <= self.m.n:
                    yield from self.solve(phi.arg, {**env, v: base}, u, lo, hi)
            return
        u = expr.value(env)
        if isinstance(u, int) and not isinstance(u, bool) and lo <= u <= hi:
            yield from self.solve(phi.arg, env, u, lo, hi)

    def _solve_cmp(self, phi: Cmp, env: dict) -> Iterator[dict]:
        lv, rv = phi.lhs.value(env), phi.rhs.value(env)
        if lv is not None and rv is not None:
            if lv is _NO_VALUE or rv is _NO_VALUE:
                ok = phi.op == "!=" and not (lv is _NO_VALUE and rv is _NO_VALUE)
            else:
                ok = (lv == rv) == (phi.op == "=")
            if ok:
                yield env
            return
        if phi.op == "=":
            # solve for the single unbound side
            if lv is None and rv is not None and rv is not _NO_VALUE:
                target, other = phi.lhs, rv
            elif rv is None and lv is not None and lv is not _NO_VALUE:
                target, other = phi.rhs, lv
            else:
                target = None
            if target is not None:
                var = target.var
                if target.offset:
                    if not isinstance(other, int):
                        return
                    value = other - target.offset
                else:
                    value = other
                if self.scope.is_time(var):
                    if not (isinstance(value, int) and 0 <= value <= self.m.n):
                        return
                elif isinstance(value, int) and value < 0:
                    return
                yield {**env, var: value}
                return
        need = [e.var for e in (phi.lhs, phi.rhs) if e.var is not None]
        for e in self._enumerate(need, env):
            yield from self._solve_cmp(phi, e)

    # conjunct scheduling -------------------------------------------------------

    def _needs(self, phi: Formula, bound: frozenset) -> set[Var]:
        """Variables that must be bound before ``phi`` can be solved without guessing."""
        if isinstance(phi, Not):
            return set(self.scope.nonlocal_of.get(id(phi), ())) - bound
        if isinstance(phi, Cmp):
            unbound = {e.var for e in (phi.lhs, phi.rhs) if e.var is not None and e.var not in bound}
            if phi.op == "=" and len(unbound) <= 1:
                return set()
            return unbound
        if isinstance(phi, Implies):
            return free_vars(phi, self.scope) - bound
        if isinstance(phi, And):
            order = self._order(phi.args, bound)
            need: set[Var] = set()
            b = set(bound)
            for c in order:
                need |= self._needs(c, frozenset(b)) - b
                b |= self._provides(c, frozenset(b))
            return need
        if isinstance(phi, Or):
            out: set[Var] = set()
            for a in phi.args:
                out |= self._needs(a, bound)
            return out
        if isinstance(phi, Box):
            return self._needs(phi.arg, bound)
        if isinstance(phi, (Diamond, Window, Reset, At)):
            inner = set(bound)
            if isinstance(phi, At) and phi.time.var is not None:
                inner.add(phi.time.var)
            return self._needs(phi.arg, frozenset(inner))
        return set()

    def _provides(self, phi: Formula, bound: frozenset) -> set[Var]:
        if isinstance(phi, (Not, Implies, Top, Bottom)):
            return set()
        if isinstance(phi, (AtomF, Cmp)):
            return free_vars(phi, self.scope)
        if isinstance(phi, Or):
            sets = [self._provides(a, bound) for a in phi.args]
            return set.intersection(*sets) if sets else set()
        return free_vars(phi, self.scope)

    def _order(self, conjuncts: Sequence[Formula], bound: frozenset) -> list[Formula]:
        key = (tuple(id(c) for c in conjuncts), bound)
        cached = self._order_cache.get(key)
        if cached is not None:
            return cached
        remaining = list(conjuncts)
        order: list[Formula] = []
        b = set(bound)
        while remaining:
            fb = frozenset(b)
            ready = [c for c in remaining if not (self._needs(c, fb) - b)]
            # cheap filters first, then generators
            filters = [c for c in ready if isinstance(c, (Not, Implies, Cmp)) and not (free_vars(c, self.scope) - b)]
            pick = (filters or ready or remaining)[0]
            remaining.remove(pick)
            order.append(pick)
            b |= self._provides(pick, fb)
        self._order_cache[key] = order
        return order

    def _solve_and(self, order: list, k: int, env: dict, t: int, lo: int, hi: int) -> Iterator[dict]:
        if k == len(order):
            yield env
            return
        for e in self.solve(order[k], env, t, lo, hi):
            yield from self._solve_and(order, k + 1, e, t, lo, hi)


# -- formula entailment ------------------------------------------------------------


def eval_formula(
    sigma: Stream,
    phi: Formula,
    t: int,
    *,
    background: Iterable[Atom] = (),
    interval: tuple[int, int] | Substream | None = None,
    env: dict | None = None,
    universe: Sequence = (),
) -> bool:
    """``M, Σ', t ⊩ phi`` for ``M = (sigma, W, background)``.

    ``interval`` is the defined interval of ``Σ'`` (default: all of ``sigma``);
    a :class:`Substream` may be passed directly.  Variables not bound by
    ``env`` must be local to a negation.
    """
    if not 0 <= t <= sigma.n:
        raise ValidationError(f"time point {t} outside 0..{sigma.n}")
    if isinstance(interval, Substream):
        r = interval.interval
        lo, hi = (r.start, r.stop - 1) if len(r) else (1, 0)
    elif interval is None:
        lo, hi = 0, sigma.n
    else:
        lo, hi = interval
    env = dict(env or {})
    phi = rebuild(phi)
    scope = analyse([phi])
    free = free_vars(phi, scope) - set(env)
    if free:
        names = ", ".join(sorted(v.name for v in free))
        raise ValidationError(f"formula has free variable(s) {names}")
    solver = Solver(Structure(sigma.slots, background), scope, universe)
    return solver.holds(phi, env, t, lo, hi)


class Query:
    """A formula analysed once, for evaluation against many structures."""

    def __init__(self, phi: Formula):
        self.formula = rebuild(phi)
        self.scope = analyse([self.formula])

    def satisfiable_in(self, m: Structure, t: int, env: dict | None = None, universe: Sequence = ()) -> bool:
        """Some extension of ``env`` makes the formula hold at ``t`` over all of ``m``."""
        solver = Solver(m, self.scope, universe)
        return next(iter(solver.solve(self.formula, dict(env or {}), t, 0, m.n)), None) is not None


def satisfiable(
    sigma: Stream,
    phi: Formula,
    t: int,
    *,
    background: Iterable[Atom] = (),
    env: dict | None = None,
    universe: Sequence = (),
) -> bool:
    """Like :func:`eval_formula`, reading unbound variables existentially (as in a rule body)."""
    if not 0 <= t <= sigma.n:
        raise ValidationError(f"time point {t} outside 0..{sigma.n}")
    return Query(phi).satisfiable_in(Structure(sigma.slots, background), t, env, universe)


# -- rules ------------------------------------------------------------------------


@dataclass
class CompiledRule:
    rule: LarsRule
    head: Formula
    body: Formula
    scope: Scope


def compile_rule(rule: LarsRule) -> CompiledRule:
    head = rebuild(rule.head)
    body = rebuild(And(rule.body)) if len(rule.body) != 1 else rebuild(rule.body[0])
    if not rule.body:
        body = Top()
    scope = analyse([head, body])
    return CompiledRule(rule, head, body, scope)


def head_instances(cr: CompiledRule, solver: Solver, env: dict, t: int) -> Iterator[tuple[int, Atom]]:
    """(time point, atom) pairs a rule head demands once its body holds under ``env``."""
    h = cr.head
    n = solver.m.n
    if isinstance(h, AtomF):
        atoms = [(t, h.atom.substitute(env))]
    elif isinstance(h, At):
        u = h.time.value(env)
        if u is None:
            raise SafetyError(f"head time of '{cr.rule}' is not bound by the body")
        if not (isinstance(u, int) and 0 <= u <= n):
            return
        atoms = [(u, h.arg.atom.substitute(env))]
    else:
        imp = h.arg
        atoms = []
        for u in range(n + 1):
            for e in solver.solve(imp.ante, env, u, 0, n):
                atoms.append((u, imp.cons.atom.substitute(e)))
    for u, a in atoms:
        if not a.is_ground:
            raise SafetyError(f"rule '{cr.rule}' derives non-ground {a}")
        yield u, a


def dependency_arcs(rule: LarsRule) -> Iterator[tuple[str, str, bool]]:
    """(body predicate, head predicate, negative?) for stratification."""
    target = head_atom(rule.head).pred

    def go(phi: Formula, negative: bool) -> Iterator[tuple[str, str, bool]]:
        if isinstance(phi, AtomF):
            yield phi.atom.pred, target, negative
        elif isinstance(phi, Not):
            yield from go(phi.arg, True)
        elif isinstance(phi, Implies):
            yield from go(phi.ante, True)
            yield from go(phi.cons, negative)
        else:
            for c in phi.children():
                yield from go(c, negative)

    for b in rule.body:
        yield from go(b, False)
    if isinstance(rule.head, Box):
        # premises of a boxed implication behave like a body
        yield from go(rule.head.arg.ante, False)


def lars_strata(program: LarsProgram) -> list[list[LarsRule]]:
    arcs = [arc for r in program.rules for arc in dependency_arcs(r)]
    try:
        pred_strata = stratify_predicates(program.head_preds(), arcs)
    except StratificationError as e:
        raise UnsupportedProgramError(f"program is not negation-stratified: {e}") from e
    by_pred = {p: i for i, s in enumerate(pred_strata) for p in s}
    strata: list[list[LarsRule]] = [[] for _ in pred_strata]
    for r in program.rules:
        strata[by_pred[head_atom(r.head).pred]].append(r)
    return strata


def lars_universe(program: LarsProgram, sigma: Stream, background: Iterable[Atom]) -> list:
    consts = set(program.constants())
    for a in sigma.atoms() | set(background):
        consts.update(a.args)
    return sorted(consts, key=term_key)


@dataclass(frozen=True)
class LarsAnswerStream:
    stream: Stream
    eval_point: int


def check_lars_input(program: LarsProgram, sigma: Stream, background: Iterable[Atom]) -> None:
    for a in sigma.atoms():
        if program.kind(a.pred) is PredKind.INTENSIONAL:
            raise ValidationError(f"input stream atom {a} has an intensional predicate")
    for b in background:
        if program.kind(b.pred) is PredKind.INTENSIONAL:
            raise ValidationError(f"background atom {b} has an intensional predicate")


def eval_answer_stream_lars(
    program: LarsProgram, sigma: Stream, background: Iterable[Atom] = (), t: int | None = None
) -> LarsAnswerStream:
    """The unique answer stream ``AS(P, I, t)`` of a negation-stratified program."""
    t = sigma.n if t is None else t
    if not 0 <= t <= sigma.n:
        raise ValidationError(f"evaluation point {t} outside 0..{sigma.n}")
    background = frozenset(background)
    check_lars_input(program, sigma, background)
    strata = lars_strata(program)
    universe = lars_universe(program, sigma, background)
    m = Structure(sigma.slots, background)
    n = sigma.n
    for stratum in strata:
        compiled = [compile_rule(r) for r in stratum]
        solvers = [Solver(m, cr.scope, universe) for cr in compiled]
        changed = True
        while changed:
            changed = False
            for cr, solver in zip(compiled, solvers):
                envs = list(solver.solve(cr.body, {}, t, 0, n))
                new = [pair for env in envs for pair in head_instances(cr, solver, env, t)]
                for u, a in new:
                    if m.add(u, a):
                        changed = True
    return LarsAnswerStream(m.stream(), t)


# -- grounding ------------------------------------------------------------------------


def rule_variables(rule: LarsRule) -> tuple[set[Var], set[Var]]:
    """(data variables, time variables) quantified over the whole rule."""
    cr = compile_rule(rule)
    outer = free_vars(cr.head, cr.scope) | free_vars(cr.body, cr.scope)
    tv = {v for v in outer if cr.scope.is_time(v)}
    return outer - tv, tv


def _past_start(node: Formula) -> bool:
    return isinstance(node, At) and isinstance(node.time.term, int) and node.time.value({}) < 0


def _prune_negative_times(phi: Formula) -> Formula:
    """Replace ``at[k] psi`` with a negative ground ``k`` by false."""
    if not any(_past_start(node) for node in walk(phi)):
        return phi
    if _past_start(phi):
        return FALSE
    if isinstance(phi, At):
        return At(phi.time, _prune_negative_times(phi.arg))
    if isinstance(phi, Window):
        return Window(phi.width, _prune_negative_times(phi.arg))
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(_prune_negative_times(a) for a in phi.args))
    if isinstance(phi, Implies):
        return Implies(_prune_negative_times(phi.ante), _prune_negative_times(phi.cons))
    return type(phi)(_prune_negative_times(phi.arg))


def ground_lars(program: LarsProgram | Iterable[LarsRule], constants: Iterable, timepoints: Iterable[int]) -> list[LarsRule]:
    """Instantiate rule variables over constants and time points.

    An @-head at a negative time point drops the instance; a negative time
    point in a body makes that @-subformula false.

    Variables local to a negation stay symbolic (they are existentially read).
    """
    rules = program.rules if isinstance(program, LarsProgram) else tuple(program)
    consts = sorted(set(constants), key=term_key)
    times = sorted(set(timepoints))
    out: list[LarsRule] = []
    seen: set[LarsRule] = set()
    for r in rules:
        data, tv = rule_variables(r)
        order = sorted(data, key=lambda v: v.name) + sorted(tv, key=lambda v: v.name)
        domains = [consts] * len(data) + [times] * len(tv)
        for values in itertools.product(*domains):
            env = dict(zip(order, values))
            try:
                head = substitute(r.head, env)
                body = tuple(substitute(b, env) for b in r.body)
            except ValidationError:
                continue
            if _past_start(head):
                continue  # the head would land before the stream start
            g = LarsRule(_prune_negative_times(head), tuple(_prune_negative_times(b) for b in body))
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out
