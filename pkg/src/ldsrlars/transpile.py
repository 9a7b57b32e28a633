"""Translations between LARS_D and LDSR (rho1..rho7) and their helper functions.

LARS_D to LDSR (rho1-rho3) maps each template formula to a streaming literal
via :func:`f_translate`.  LDSR to LARS_D (rho4-rho7) expresses streaming atoms
as formulas over time variables anchored at the reference point ``T`` bound by
``wplus[0] at[T] true``.

Generated predicates live in a reserved namespace: ``<a>__temp`` mirrors the
temporary derivations of ``a``; ``aux__present`` and ``aux__count`` encode
counting with a variable bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import FragmentViolation, SafetyError, UnsupportedProgramError, ValidationError
from .fragments import (
    Beta,
    BetaKind,
    FragmentVerdict,
    Shape,
    classify_lars_fragments,
    classify_ldsr_fragments,
    classify_rule_shape,
    match_beta,
)
from .lars.syntax import (
    FALSE,
    TRUE,
    And,
    At,
    AtomF,
    Bottom,
    Box,
    Cmp,
    Expr,
    Formula,
    Implies,
    LarsProgram,
    LarsRule,
    Not,
    Or,
    Top,
    Window,
    conj,
    disj,
    formula_vars,
    substitute,
)
from .ldsr.syntax import LdsrProgram, LdsrRule, Literal, SKind, StreamingAtom, check_safety
from .terms import Atom, Var, is_reserved

TEMP_SUFFIX = "__temp"
PRESENT = "aux__present"
COUNT = "aux__count"


@dataclass(frozen=True)
class TranslationOutput:
    program: object  # LdsrProgram or LarsProgram
    aux_predicates: frozenset = frozenset()
    provenance: tuple = field(default_factory=tuple)  # (output rule, source rule or None, helper)

    def provenance_obj(self) -> list[dict]:
        return [{"output_rule": o, "source_rule": s, "helper": h} for o, s, h in self.provenance]


# -- LARS_D to LDSR -------------------------------------------------------------------


def f_beta(beta: Beta) -> Literal:
    if beta.kind is BetaKind.DIAMOND:
        sa = StreamingAtom(SKind.AT_LEAST, beta.atom, frozenset(range(beta.width + 1)), 1)
    elif beta.kind is BetaKind.BOX:
        sa = StreamingAtom(SKind.ALWAYS_IN, beta.atom, frozenset(range(beta.width + 1)))
    elif beta.kind is BetaKind.ATOM:
        sa = StreamingAtom.plain(beta.atom)
    else:
        sa = StreamingAtom(SKind.AT_LEAST, beta.atom, frozenset({beta.width}), 1)
    return Literal(sa, not beta.negative)


def f_translate(phi: Formula) -> Literal:
    """Streaming literal for one template formula."""
    beta = match_beta(phi)
    if beta is None:
        raise UnsupportedProgramError(f"formula {phi} is outside the translatable template set")
    return f_beta(beta)


def _require(verdict: FragmentVerdict, fragment: str) -> None:
    if not verdict.member(fragment):
        bad = verdict.violations_for(fragment) or list(verdict.violations)
        detail = "; ".join(str(v) for v in bad[:3])
        raise FragmentViolation(f"program is not in {fragment}: {detail}", bad)


def _rho_lars(program: LarsProgram, fragment: str) -> TranslationOutput:
    _require(classify_lars_fragments(program), fragment)
    rules = []
    prov = []
    for i, r in enumerate(program.rules):
        s = classify_rule_shape(r)
        body = tuple(f_beta(b) for b in s.betas)
        rule = LdsrRule(s.atom, body, temp=s.shape is Shape.TYPE_II)
        try:
            check_safety(rule)
        except SafetyError as exc:
            # LARS reads such variables existentially under the negation; LDSR cannot
            raise UnsupportedProgramError(f"rule {i} has no safe LDSR image: {exc}") from None
        rules.append(rule)
        prov.append((i, i, "f"))
    return TranslationOutput(LdsrProgram(tuple(rules), program.signature), frozenset(), tuple(prov))


def rho1(program: LarsProgram) -> TranslationOutput:
    return _rho_lars(program, "F1")


def rho2(program: LarsProgram) -> TranslationOutput:
    return _rho_lars(program, "F2")


def rho3(program: LarsProgram) -> TranslationOutput:
    return _rho_lars(program, "F3")


# -- fresh names ------------------------------------------------------------------------


class Fresh:
    """Per-rule supply of variable names that avoid the rule's own variables."""

    def __init__(self, taken: Iterable[Var] = ()):
        self.taken = {v.name for v in taken}
        self._time = itertools.count(1)
        self._data: dict[str, itertools.count] = {}
        self.ref = self._claim("T") if "T" not in self.taken else self.time()

    def _claim(self, name: str) -> Var:
        self.taken.add(name)
        return Var(name)

    def time(self) -> Var:
        while True:
            name = f"T{next(self._time)}"
            if name not in self.taken:
                return self._claim(name)

    def data(self, base: str) -> Var:
        counter = self._data.setdefault(base, itertools.count(1))
        while True:
            name = f"{base}_{next(counter)}"
            if name not in self.taken:
                return self._claim(name)


def anchor(T: Var) -> Formula:
    """``wplus[0] at[T] true``: binds T to the evaluation point."""
    return Window(0, At(Expr(T), TRUE))


# -- sigma ------------------------------------------------------------------------------


def _offset_choice(Ti: Var, T: Var, offsets: Sequence[int]) -> Formula:
    return disj(*(Cmp("=", Expr(Ti), Expr(T, -d)) for d in offsets))


def _at_least(atom: Atom, c: int, offsets: Sequence[int], T: Var, fresh: Fresh) -> Formula:
    if c <= 0:
        return TRUE
    if c > len(offsets):
        return FALSE
    ts = [fresh.time() for _ in range(c)]
    parts: list[Formula] = [At(Expr(Ti), AtomF(atom)) for Ti in ts]
    parts += [Cmp("!=", Expr(a), Expr(b)) for a, b in itertools.combinations(ts, 2)]
    parts += [_offset_choice(Ti, T, offsets) for Ti in ts]
    return And(tuple(parts)) if len(parts) > 1 else parts[0]


def _always(atom: Atom, offsets: Sequence[int], T: Var, fresh: Fresh) -> Formula:
    # each offset either points before the stream start or holds the atom
    parts: list[Formula] = []
    for d in offsets:
        Ti = fresh.time()
        present = And((At(Expr(Ti), AtomF(atom)), Cmp("=", Expr(Ti), Expr(T, -d))))
        if d == 0:
            parts.append(present)
        else:
            probe = fresh.time()
            parts.append(Or((present, Not(Cmp("=", Expr(probe), Expr(T, -d))))))
    if not parts:
        return TRUE
    return And(tuple(parts)) if len(parts) > 1 else parts[0]


def _exactly(atom: Atom, c: int, offsets: Sequence[int], T: Var, fresh: Fresh) -> Formula:
    if c > len(offsets):
        return FALSE
    if c == 0:
        return _negate(_at_least(atom, 1, offsets, T, fresh))
    base = _at_least(atom, c, offsets, T, fresh)
    ts = [p.time.var for p in base.args if isinstance(p, At)]
    extra = fresh.time()
    witness: list[Formula] = [At(Expr(extra), AtomF(atom))]
    witness += [Cmp("!=", Expr(extra), Expr(Ti)) for Ti in ts]
    witness.append(_offset_choice(extra, T, offsets))
    return And(tuple(base.args) + (Not(And(tuple(witness))),))


def _negate(phi: Formula) -> Formula:
    if isinstance(phi, Top):
        return FALSE
    if isinstance(phi, Bottom):
        return TRUE
    return Not(phi)


def count_atom(sa: StreamingAtom, offsets: Sequence[int] | None = None, bound=None) -> Atom:
    """``aux__count_b(b, t1..tn, d1..dm, V)`` for ``b(t1..tn) count V in D``.

    Each counted predicate gets its own auxiliary names, so counting over two
    predicates that depend on each other stays stratified.
    """
    ds = sorted(sa.offsets if offsets is None else offsets)
    v = sa.bound if bound is None else bound
    return Atom(f"{COUNT}_{sa.atom.pred}", (sa.atom.pred,) + sa.atom.args + tuple(ds) + (v,))


def present_atom(atom: Atom, offsets: Sequence[int], c) -> Atom:
    return Atom(f"{PRESENT}_{atom.pred}", (atom.pred,) + atom.args + tuple(sorted(offsets)) + (c,))


def sigma(alpha: StreamingAtom, T: Var, fresh: Fresh | None = None) -> Formula:
    """LARS formula true at reference point T exactly when ``alpha`` is entailed."""
    fresh = fresh or Fresh(list(alpha.variables()) + [T])
    ds = sorted(alpha.offsets)
    if alpha.kind is SKind.AT_LEAST:
        return _at_least(alpha.atom, alpha.bound, ds, T, fresh)
    if alpha.kind is SKind.ALWAYS_IN:
        return _always(alpha.atom, ds, T, fresh)
    if alpha.has_count_variable:
        return AtomF(count_atom(alpha))
    return _exactly(alpha.atom, alpha.bound, ds, T, fresh)


def _sigma_on(kind: SKind, atom: Atom, c: int, offsets: Sequence[int], T: Var, fresh: Fresh) -> Formula:
    """sigma over a possibly empty offset set and a possibly zero bound."""
    if kind is SKind.AT_LEAST:
        return _at_least(atom, c, offsets, T, fresh)
    if kind is SKind.ALWAYS_IN:
        return _always(atom, offsets, T, fresh)
    return _exactly(atom, c, offsets, T, fresh)


# -- g, g', g'' -----------------------------------------------------------------------------


@dataclass
class _Ctx:
    """Per-rule translation state."""

    T: Var
    fresh: Fresh
    counts: list  # count-with-variable atoms needing auxiliary rules
    current: Callable[[Atom], Formula]  # "a held at the reference point when it was evaluated"


def _with_current(sa: StreamingAtom, ctx: _Ctx) -> Formula:
    """Shared case analysis of g and g'': split offset 0 from the rest."""
    a = sa.atom
    rest = sorted(sa.offsets - {0})
    T, fresh = ctx.T, ctx.fresh
    if 0 not in sa.offsets:
        if sa.has_count_variable:
            ctx.counts.append(sa)
            return AtomF(count_atom(sa))
        return _sigma_on(sa.kind, a, sa.bound or 0, rest, T, fresh)
    if sa.kind is SKind.AT_LEAST:
        c = sa.bound
        return disj(
            conj(ctx.current(a), _at_least(a, c - 1, rest, T, fresh)),
            _at_least(a, c, rest, T, fresh),
        )
    if sa.kind is SKind.ALWAYS_IN:
        return conj(ctx.current(a), _always(a, rest, T, fresh))
    if not sa.has_count_variable:
        c = sa.bound
        return disj(
            conj(ctx.current(a), _exactly(a, c - 1, rest, T, fresh)),
            conj(_negate(ctx.current(a)), _exactly(a, c, rest, T, fresh)),
        )
    C = sa.bound
    branches = [conj(ctx.current(a), Cmp("=", Expr(C), Expr(1)), _negate(_at_least(a, 1, rest, T, fresh)))]
    if rest:
        smaller = StreamingAtom(SKind.COUNT, a, frozenset(rest), C)
        ctx.counts.append(smaller)
        C1 = fresh.data(C.name)
        branches.append(conj(ctx.current(a), AtomF(count_atom(smaller, bound=C1)), Cmp("=", Expr(C1, 1), Expr(C))))
        branches.append(conj(_negate(ctx.current(a)), AtomF(count_atom(smaller))))
    return disj(*branches)


def _literal(lit: Literal, positive_part: Callable[[StreamingAtom], Formula]) -> Formula:
    phi = positive_part(lit.atom)
    return phi if lit.positive else _negate(phi)


def g_translate(lit: Literal, ctx: _Ctx) -> Formula:
    """Literal translation for rho4 (``current`` = a or its __temp mirror)."""
    return _literal(lit, lambda sa: _with_current(sa, ctx))


def gprime_translate(lit: Literal, ctx: _Ctx) -> Formula:
    """Literal translation for rho5/rho6 and form-(2) rules under rho7."""

    def positive(sa: StreamingAtom) -> Formula:
        if sa.has_count_variable:
            ctx.counts.append(sa)
            return AtomF(count_atom(sa))
        return sigma(sa, ctx.T, ctx.fresh)

    return _literal(lit, positive)


def definition_in(program: LdsrProgram, atom: Atom, fresh: Fresh) -> list[tuple[LdsrRule, tuple]]:
    """Form-(2) rules defining ``atom``'s predicate, renamed apart, with argument equalities."""
    out = []
    for r in program.form2():
        if r.head.pred != atom.pred or r.head.arity != atom.arity:
            continue
        env = {v: fresh.data(v.name) for v in sorted(r.variables(), key=lambda v: v.name)}
        rr = r.substitute(env)
        eqs = []
        ok = True
        for q, h in zip(atom.args, rr.head.args):
            if not isinstance(q, Var) and not isinstance(h, Var):
                ok = ok and q == h
            else:
                eqs.append((q, h))
        if ok:
            out.append((rr, tuple(eqs)))
    return out


def d_p(atom: Atom, program: LdsrProgram, fresh: Fresh | None = None) -> list:
    """``d_P(atom)`` as a list of disjuncts: the atom itself, then (body, equalities) pairs."""
    fresh = fresh or Fresh(atom.variables())
    return [atom] + definition_in(program, atom, fresh)


def sigma_definition(atom: Atom, program: LdsrProgram, T: Var, fresh: Fresh) -> Formula:
    """sigma(d_P(atom)) at reference point T."""
    parts: list[Formula] = [sigma(StreamingAtom.plain(atom), T, fresh)]
    for rule, eqs in definition_in(program, atom, fresh):
        body = [_literal(l, lambda sa: sigma(sa, T, fresh)) for l in rule.body]
        body += [Cmp("=", Expr(q), Expr(h)) for q, h in eqs]
        parts.append(conj(*body))
    return disj(*parts)


def gdoubleprime_translate(lit: Literal, ctx: _Ctx) -> Formula:
    """Literal translation for form-(1) rules under rho7 (``current`` = sigma(d_P(a)))."""
    return _literal(lit, lambda sa: _with_current(sa, ctx))


def c_alpha_rules(alpha: StreamingAtom) -> list[LarsRule]:
    """Auxiliary rules defining ``aux__count`` for a count-with-variable atom."""
    if not alpha.has_count_variable:
        raise ValidationError(f"{alpha} has no count variable")
    ds = sorted(alpha.offsets)
    m = len(ds)
    rules = []
    for c in range(1, m + 1):
        fresh = Fresh(list(alpha.atom.variables()))
        T = fresh.ref
        prem = [anchor(T), _at_least(alpha.atom, c, ds, T, fresh)]
        rules.append(LarsRule(Box(Implies(_premise(prem), AtomF(present_atom(alpha.atom, ds, c))))))
    for c in range(1, m + 1):
        fresh = Fresh(list(alpha.atom.variables()))
        T = fresh.ref
        prem = [anchor(T), AtomF(present_atom(alpha.atom, ds, c))]
        if c < m:
            prem.append(Not(AtomF(present_atom(alpha.atom, ds, c + 1))))
        rules.append(LarsRule(Box(Implies(_premise(prem), AtomF(count_atom(alpha, bound=c))))))
    return rules


def _premise(parts: Sequence[Formula]) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


# -- LDSR to LARS_D --------------------------------------------------------------------


def temp_atom(atom: Atom) -> Atom:
    return Atom(atom.pred + TEMP_SUFFIX, atom.args)


def _check_namespace(program: LdsrProgram) -> None:
    for p in program.preds():
        if is_reserved(p):
            raise ValidationError(f"predicate {p} uses the reserved translation namespace")


class _Builder:
    def __init__(self, program: LdsrProgram):
        self.program = program
        self.rules: list[LarsRule] = []
        self.prov: list[tuple] = []
        self.aux: set[str] = set()
        self._count_keys: set = set()

    def emit(self, rule: LarsRule, source: int | None, helper: str) -> None:
        self.prov.append((len(self.rules), source, helper))
        self.rules.append(rule)

    def ctx(self, rule: LdsrRule, current) -> _Ctx:
        fresh = Fresh(rule.variables())
        c = _Ctx(fresh.ref, fresh, [], lambda a: AtomF(a))
        if current is not None:
            c.current = lambda a, c=c: current(a, c)
        return c

    def add_counts(self, ctx: _Ctx) -> None:
        for sa in ctx.counts:
            # one generic definition per (predicate, offsets) serves every use
            key = (sa.atom.pred, tuple(sorted(sa.offsets)))
            if key in self._count_keys:
                continue
            self._count_keys.add(key)
            args = tuple(Var(f"X{i + 1}") for i in range(sa.atom.arity))
            generic = StreamingAtom(SKind.COUNT, Atom(sa.atom.pred, args), sa.offsets, Var("C"))
            for r in c_alpha_rules(generic):
                self.emit(r, None, "c_alpha")
            self.aux |= {f"{PRESENT}_{sa.atom.pred}", f"{COUNT}_{sa.atom.pred}"}

    def output(self) -> TranslationOutput:
        prog = LarsProgram(tuple(self.rules), self.program.signature)
        return TranslationOutput(prog, frozenset(self.aux), tuple(self.prov))


def _type1(head: Atom, T: Var, parts: Sequence[Formula]) -> LarsRule:
    return LarsRule(Box(Implies(_premise([anchor(T), *parts]), AtomF(head))))


def _type2(head: Atom, T: Var, parts: Sequence[Formula]) -> LarsRule:
    return LarsRule(AtomF(head), (anchor(T), *parts))


def rho4(program: LdsrProgram) -> TranslationOutput:
    _require(classify_ldsr_fragments(program), "F4")
    _check_namespace(program)
    temp_heads = {r.head.pred for r in program.form2()}

    def current(a: Atom, ctx: _Ctx) -> Formula:
        if a.pred in temp_heads:
            return Or((AtomF(a), AtomF(temp_atom(a))))
        return AtomF(a)

    b = _Builder(program)
    for i, r in enumerate(program.rules):
        ctx = b.ctx(r, current)
        parts = [g_translate(l, ctx) for l in r.body]
        if r.temp:
            b.emit(_type2(r.head, ctx.T, parts), i, "g")
            ctx2 = b.ctx(r, current)
            parts2 = [g_translate(l, ctx2) for l in r.body]
            b.emit(_type1(temp_atom(r.head), ctx2.T, parts2), i, "g")
            b.aux.add(temp_atom(r.head).pred)
            b.add_counts(ctx2)
        else:
            b.emit(_type1(r.head, ctx.T, parts), i, "g")
        b.add_counts(ctx)
    return b.output()


def _rho_prime(program: LdsrProgram, fragment: str) -> TranslationOutput:
    _require(classify_ldsr_fragments(program), fragment)
    _check_namespace(program)
    b = _Builder(program)
    for i, r in enumerate(program.rules):
        ctx = b.ctx(r, None)
        parts = [gprime_translate(l, ctx) for l in r.body]
        b.emit(_type2(r.head, ctx.T, parts), i, "g_prime")
        b.add_counts(ctx)
    return b.output()


def rho5(program: LdsrProgram) -> TranslationOutput:
    return _rho_prime(program, "F5")


def rho6(program: LdsrProgram) -> TranslationOutput:
    return _rho_prime(program, "F6")


def rho7(program: LdsrProgram) -> TranslationOutput:
    _require(classify_ldsr_fragments(program), "F7")
    _check_namespace(program)

    def current(a: Atom, ctx: _Ctx) -> Formula:
        return sigma_definition(a, program, ctx.T, ctx.fresh)

    b = _Builder(program)
    for i, r in enumerate(program.rules):
        if r.temp:
            ctx = b.ctx(r, None)
            b.emit(_type2(r.head, ctx.T, [gprime_translate(l, ctx) for l in r.body]), i, "g_prime")
        else:
            ctx = b.ctx(r, current)
            b.emit(_type1(r.head, ctx.T, [gdoubleprime_translate(l, ctx) for l in r.body]), i, "g_double_prime")
    return b.output()


RHO = {1: rho1, 2: rho2, 3: rho3, 4: rho4, 5: rho5, 6: rho6, 7: rho7}
SOURCE_LANGUAGE = {1: "lars", 2: "lars", 3: "lars", 4: "ldsr", 5: "ldsr", 6: "ldsr", 7: "ldsr"}
STRICT = frozenset({1, 2, 3, 6, 7})


def translate(program, rho: int) -> TranslationOutput:
    try:
        fn = RHO[rho]
    except KeyError:
        raise ValidationError(f"unknown translation rho{rho}; expected 1..7") from None
    return fn(program)


# -- canonical forms ---------------------------------------------------------------------


def canonical_lars_rule(rule: LarsRule) -> LarsRule:
    """Rename variables to V1, V2, ... in order of first occurrence."""
    order: list[Var] = []
    for f in rule.formulas():
        for v in formula_vars(f):
            if v not in order:
                order.append(v)
    env = {v: Var(f"V{i + 1}") for i, v in enumerate(order)}
    head = substitute(rule.head, env)
    body = tuple(substitute(b, env) for b in rule.body)
    return LarsRule(head, body)


def canonical_ldsr_rule(rule: LdsrRule) -> LdsrRule:
    order: list[Var] = []
    for v in list(rule.head.variables()) + [v for l in rule.body for v in l.atom.variables()]:
        if v not in order:
            order.append(v)
    return rule.substitute({v: Var(f"V{i + 1}") for i, v in enumerate(order)})


def canonical_program(program) -> tuple:
    if isinstance(program, LarsProgram):
        return tuple(canonical_lars_rule(r) for r in program.rules)
    return tuple(canonical_ldsr_rule(r) for r in program.rules)
