"""Seeded random programs, streams and background sets.

Programs are built from declarations outward: a signature first, then rules
drawn template-wise, then a rejection check (classifier, stratification).
Intensional predicates are ordered, and a rule for ``p_i`` only reads
``p_j`` with ``j <= i`` (``j < i`` under negation or counting), so most
draws are stratified by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from ..errors import GenerationBudgetExhausted, LdsrLarsError, ValidationError
from ..fragments import LARS_FRAGMENTS, LDSR_FRAGMENTS, classify_lars_fragments, classify_ldsr_fragments
from ..lars.semantics import lars_strata
from ..lars.syntax import (
    TRUE,
    And,
    At,
    AtomF,
    Box,
    Diamond,
    Expr,
    Formula,
    Implies,
    LarsProgram,
    LarsRule,
    Not,
    Or,
    Window,
)
from ..ldsr.semantics import check_stratified
from ..ldsr.syntax import LdsrProgram, LdsrRule, Literal, SKind, StreamingAtom
from ..stream import Stream
from ..terms import Atom, PredicateDecl, PredKind, Signature, Var


@dataclass(frozen=True)
class Bounds:
    max_n: int = 6
    max_constants: int = 4
    max_predicates: int = 5
    max_arity: int = 2
    max_rules: int = 6
    max_window: int = 3
    max_count: int = 2

    def __post_init__(self) -> None:
        for name in ("max_n", "max_constants", "max_predicates", "max_rules", "max_count"):
            if getattr(self, name) < 1:
                raise ValidationError(f"bound {name} must be positive")
        if self.max_arity < 0 or self.max_window < 0:
            raise ValidationError("arity and window bounds must be non-negative")
        if self.max_predicates < 2:
            raise ValidationError("need room for one input and one derived predicate")


DESK = Bounds()
TINY = Bounds(max_n=3, max_constants=2, max_predicates=4, max_arity=1, max_rules=3, max_window=2, max_count=2)

VARS = (Var("X"), Var("Y"))


@dataclass(frozen=True)
class Instance:
    program: LdsrProgram | LarsProgram
    stream: Stream
    background: frozenset
    acceptance_rate: float = 1.0


# -- signatures and data ------------------------------------------------------------


def random_signature(rng: random.Random, b: Bounds) -> Signature:
    k = rng.randint(2, b.max_predicates)
    n_stream = rng.randint(1, max(1, k // 2))
    n_bg = 1 if k - n_stream >= 3 and rng.random() < 0.5 else 0
    decls = []
    for i in range(k):
        if i < n_stream:
            name, kind = f"s{i + 1}", PredKind.STREAM
        elif i < n_stream + n_bg:
            name, kind = f"g{i - n_stream + 1}", PredKind.BACKGROUND
        else:
            name, kind = f"p{i - n_stream - n_bg + 1}", PredKind.INTENSIONAL
        decls.append(PredicateDecl(name, kind, rng.randint(0, b.max_arity)))
    return Signature(tuple(decls))


def constants_for(b: Bounds) -> list[int]:
    return list(range(1, b.max_constants + 1))


def random_atom(rng: random.Random, decl: PredicateDecl, consts: list) -> Atom:
    return Atom(decl.name, tuple(rng.choice(consts) for _ in range(decl.arity)))


def random_stream(
    rng: random.Random, sig: Signature, b: Bounds, n: int | None = None, density: float = 0.7, consts=None
) -> Stream:
    n = rng.randint(1, b.max_n) if n is None else n
    consts = consts or constants_for(b)
    preds = [sig.get(p) for p in sorted(sig.names(PredKind.STREAM))]
    slots = []
    for _ in range(n + 1):
        slot = set()
        for _ in range(4):
            if preds and rng.random() < density:
                slot.add(random_atom(rng, rng.choice(preds), consts))
        slots.append(frozenset(slot))
    return Stream(tuple(slots))


def random_background(rng: random.Random, sig: Signature, b: Bounds, consts=None) -> frozenset:
    consts = consts or constants_for(b)
    preds = [sig.get(p) for p in sorted(sig.names(PredKind.BACKGROUND))]
    out = set()
    for d in preds:
        for _ in range(rng.randint(0, 2)):
            out.add(random_atom(rng, d, consts))
    return frozenset(out)


# -- shared rule scaffolding ------------------------------------------------------------


@dataclass
class _Style:
    """Knobs that bias a draw towards one fragment."""

    temp_rate: float = 0.5  # LDSR: share of form-2 rules; LARS: share of type-II rules
    count_var_rate: float = 0.15
    negation_rate: float = 0.3
    wild_rate: float = 0.0  # chance of a non-template construct
    extensional_head_rate: float = 0.0
    disjoint_temp: bool = False  # F7: form-2 bodies avoid form-2 heads


def _readable(sig: Signature, head: str | None, strict: bool) -> list[PredicateDecl]:
    """Predicates a rule for ``head`` may read."""
    inten = sorted(sig.names(PredKind.INTENSIONAL))
    out = [d for d in sig.decls if d.kind is not PredKind.INTENSIONAL]
    if head in inten:
        i = inten.index(head)
        limit = i if strict else i + 1
        out += [sig.get(p) for p in inten[:limit]]
    return out


def _binder(rng: random.Random, sig: Signature, pool: list[PredicateDecl]) -> PredicateDecl:
    # mostly an input predicate, so rule bodies see data
    inputs = [d for d in pool if d.kind is PredKind.STREAM]
    return rng.choice(inputs if inputs and rng.random() < 0.7 else pool)


def _args(rng: random.Random, decl: PredicateDecl, bound: list[Var], consts: list, fresh_ok: bool) -> tuple:
    out = []
    for _ in range(decl.arity):
        r = rng.random()
        if fresh_ok and r < 0.6:
            out.append(rng.choice(VARS))
        elif bound and r < 0.8:
            out.append(rng.choice(bound))
        else:
            out.append(rng.choice(consts))
    return tuple(out)


def _offsets(rng: random.Random, b: Bounds) -> frozenset:
    size = rng.randint(1, min(3, b.max_window + 1))
    return frozenset(rng.sample(range(b.max_window + 1), size))


def _pick_head(rng: random.Random, heads: list, k: int) -> PredicateDecl:
    # the first rules cover the derived predicates bottom-up, so few stay empty
    return heads[k] if k < len(heads) else rng.choice(heads)


# -- LDSR ------------------------------------------------------------------------------


def _ldsr_rule(rng, sig: Signature, b: Bounds, head: PredicateDecl, temp: bool, style: _Style, avoid: set) -> LdsrRule:
    consts = constants_for(b)
    weak = [d for d in _readable(sig, head.name, False) if d.name not in avoid]
    strong = [d for d in _readable(sig, head.name, True) if d.name not in avoid]
    body: list[Literal] = []
    bound: list[Var] = []
    # a binding literal first: plain atom or at-least over offsets including 0
    d = _binder(rng, sig, weak)
    atom = Atom(d.name, _args(rng, d, bound, consts, True))
    if rng.random() < 0.5:
        sa = StreamingAtom.plain(atom)
    else:
        offs = _offsets(rng, b) | {0}
        sa = StreamingAtom(SKind.AT_LEAST, atom, offs, rng.randint(1, min(b.max_count, len(offs))))
    body.append(Literal(sa, True))
    bound += [v for v in atom.variables() if v not in bound]
    for _ in range(rng.randint(0, 2)):
        negative = rng.random() < style.negation_rate
        kind = rng.choice([SKind.AT_LEAST, SKind.ALWAYS_IN, SKind.COUNT, None])
        harmless = not negative and kind in (SKind.AT_LEAST, SKind.ALWAYS_IN, None)
        pool = weak if harmless else strong
        if not pool:
            continue
        d = rng.choice(pool)
        atom = Atom(d.name, _args(rng, d, bound, consts, False))
        offs = _offsets(rng, b)
        if kind is None:
            sa = StreamingAtom.plain(atom)
        elif kind is SKind.ALWAYS_IN:
            sa = StreamingAtom(kind, atom, offs)
        elif kind is SKind.COUNT and not negative and Var("N") not in bound and rng.random() < style.count_var_rate:
            sa = StreamingAtom(kind, atom, offs, Var("N"))
        else:
            sa = StreamingAtom(kind, atom, offs, rng.randint(1, b.max_count))
        body.append(Literal(sa, not negative))
        if not negative and sa.has_count_variable:
            bound.append(Var("N"))
    head_atom = Atom(head.name, tuple(rng.choice(bound) if bound and rng.random() < 0.7 else rng.choice(consts) for _ in range(head.arity)))
    return LdsrRule(head_atom, tuple(body), temp)


def gen_ldsr_program(rng: random.Random, b: Bounds = DESK, style: _Style | None = None, sig: Signature | None = None) -> LdsrProgram:
    style = style or _Style()
    sig = sig or random_signature(rng, b)
    heads = [sig.get(p) for p in sorted(sig.names(PredKind.INTENSIONAL))]
    extensional = [d for d in sig.decls if d.kind is not PredKind.INTENSIONAL]
    temp_heads = {h.name for h in heads} if style.disjoint_temp else set()
    rules = []
    for k in range(rng.randint(1, b.max_rules)):
        if extensional and rng.random() < style.extensional_head_rate:
            head = rng.choice(extensional)
        elif heads:
            head = _pick_head(rng, heads, k)
        else:
            break
        temp = rng.random() < style.temp_rate
        avoid = set()
        if style.disjoint_temp:
            # F7: form-2 heads come from the top half, form-2 bodies read only the rest
            split = len(heads) // 2
            top = {h.name for h in heads[split:]}
            if temp:
                head = rng.choice(heads[split:]) if heads[split:] else head
                avoid = top
        rules.append(_ldsr_rule(rng, sig, b, head, temp, style, avoid))
    return LdsrProgram(tuple(rules), sig)


# -- LARS ------------------------------------------------------------------------------


def _beta(rng, d: PredicateDecl, args: tuple, b: Bounds, kinds: str, T: Var) -> Formula:
    atom = AtomF(Atom(d.name, args))
    kind = rng.choice(kinds)
    m = rng.randint(0, b.max_window)
    if kind == "p":
        return atom
    if kind == "d":
        return Window(m, Diamond(atom))
    if kind == "b":
        return Window(m, Box(atom))
    return And((Window(0, At(Expr(T), TRUE)), At(Expr(T, -m), atom)))


def _wild(rng, d: PredicateDecl, args: tuple, b: Bounds, T: Var) -> Formula:
    atom = AtomF(Atom(d.name, args))
    m = rng.randint(0, b.max_window)
    choice = rng.randrange(4)
    if choice == 0:
        return Window(m, Diamond(Or((atom, Window(0, Box(atom))))))
    if choice == 1:
        return Diamond(atom)
    if choice == 2:
        return Window(m, Box(Implies(atom, atom)))
    return At(Expr(T, -m), atom)


def _lars_rule(rng, sig: Signature, b: Bounds, head: PredicateDecl, boxed: bool, style: _Style) -> LarsRule:
    consts = constants_for(b)
    weak = _readable(sig, head.name, False)
    strong = _readable(sig, head.name, True)
    T = Var("T")
    parts: list[Formula] = []
    bound: list[Var] = []
    d = _binder(rng, sig, weak)
    args = _args(rng, d, bound, consts, True)
    parts.append(_beta(rng, d, args, b, "pda", T))
    bound += [v for v in args if isinstance(v, Var) and v not in bound]
    for _ in range(rng.randint(0, 2)):
        negative = rng.random() < style.negation_rate
        pool = strong if negative else weak
        if not pool:
            continue
        d = rng.choice(pool)
        args = _args(rng, d, bound, consts, False)
        if rng.random() < style.wild_rate:
            phi = _wild(rng, d, args, b, T)
        else:
            phi = _beta(rng, d, args, b, "pdba", T)
        parts.append(Not(phi) if negative else phi)
    head_atom = AtomF(Atom(head.name, tuple(rng.choice(bound) if bound and rng.random() < 0.7 else rng.choice(consts) for _ in range(head.arity))))
    if boxed:
        ante = parts[0] if len(parts) == 1 else And(tuple(parts))
        return LarsRule(Box(Implies(ante, head_atom)))
    if rng.random() < style.wild_rate:
        # an @-head reading the same anchor
        anchor = And((Window(0, At(Expr(T), TRUE)), parts[0]))
        return LarsRule(At(Expr(T, -rng.randint(0, 1)), head_atom), (anchor,) + tuple(parts[1:]))
    return LarsRule(head_atom, tuple(parts))


def gen_lars_program(rng: random.Random, b: Bounds = DESK, style: _Style | None = None, sig: Signature | None = None) -> LarsProgram:
    style = style or _Style()
    sig = sig or random_signature(rng, b)
    heads = [sig.get(p) for p in sorted(sig.names(PredKind.INTENSIONAL))]
    extensional = [d for d in sig.decls if d.kind is not PredKind.INTENSIONAL]
    rules = []
    for k in range(rng.randint(1, b.max_rules)):
        if extensional and rng.random() < style.extensional_head_rate:
            head = rng.choice(extensional)
        elif heads:
            head = _pick_head(rng, heads, k)
        else:
            break
        boxed = rng.random() >= style.temp_rate
        rules.append(_lars_rule(rng, sig, b, head, boxed, style))
    return LarsProgram(tuple(rules), sig)


# -- fragment-constrained generation ----------------------------------------------------------


_STYLES: dict[str, _Style] = {
    "F1": _Style(temp_rate=0.5, count_var_rate=0.0),
    "F2": _Style(temp_rate=0.5, count_var_rate=0.0),
    "F3": _Style(temp_rate=1.0, count_var_rate=0.0),
    "F4": _Style(temp_rate=0.5, count_var_rate=0.5),
    "F5": _Style(temp_rate=1.0, count_var_rate=0.5),
    "F6": _Style(temp_rate=1.0, count_var_rate=0.0),
    "F7": _Style(temp_rate=0.5, count_var_rate=0.0, disjoint_temp=True),
}


def stratified(program) -> bool:
    try:
        if isinstance(program, LarsProgram):
            lars_strata(program)
        else:
            check_stratified(program)
    except LdsrLarsError:
        return False
    return True


def _drop_marked(program: LarsProgram) -> LarsProgram:
    """F2 draws: keep type-I premises clear of type-II heads by moving those rules to type II."""
    from ..fragments import Shape, classify_rule_shape

    shapes = [classify_rule_shape(r) for r in program.rules]
    type2 = {s.atom.pred for s in shapes if s.shape is Shape.TYPE_II}
    out = []
    for r, s in zip(program.rules, shapes):
        if s.shape is Shape.TYPE_I and s.preds() & type2:
            out.append(LarsRule(AtomF(s.atom), tuple(b.formula for b in s.betas)))
        else:
            out.append(r)
    return LarsProgram(tuple(out), program.signature)


def _draw(fragment: str, rng: random.Random, b: Bounds):
    style = _STYLES[fragment]
    if fragment in LARS_FRAGMENTS:
        program = gen_lars_program(rng, b, style)
        return _drop_marked(program) if fragment == "F2" else program
    return gen_ldsr_program(rng, b, style)


def accepts(fragment: str, program) -> bool:
    if fragment in LARS_FRAGMENTS:
        return classify_lars_fragments(program).member(fragment) and stratified(program)
    return classify_ldsr_fragments(program).member(fragment) and stratified(program)


def gen_fragment_instance(fragment: str, seed: int, bounds: Bounds = DESK, *, budget: int = 200) -> Instance:
    """A seeded (program, stream, background) with the program in ``fragment``."""
    if fragment not in LARS_FRAGMENTS + LDSR_FRAGMENTS:
        raise ValidationError(f"unknown fragment {fragment!r}")
    rng = random.Random(f"{fragment}:{seed}")
    for attempt in range(1, budget + 1):
        program = _draw(fragment, rng, bounds)
        if accepts(fragment, program):
            sig = program.signature
            stream = random_stream(rng, sig, bounds)
            background = random_background(rng, sig, bounds)
            return Instance(program, stream, background, 1.0 / attempt)
    raise GenerationBudgetExhausted(f"no {fragment} program in {budget} draws", 0.0)


def acceptance_rate(fragment: str, draws: int, bounds: Bounds = DESK, seed: int = 0) -> float:
    rng = random.Random(f"rate:{fragment}:{seed}")
    hits = sum(accepts(fragment, _draw(fragment, rng, bounds)) for _ in range(draws))
    return hits / draws


def gen_instance(language: str, seed: int, bounds: Bounds = TINY, *, wild: bool = True) -> Instance:
    """An unconstrained stratified instance of either language."""
    rng = random.Random(f"{language}:{seed}")
    style = _Style(wild_rate=0.3 if wild else 0.0, extensional_head_rate=0.1 if language == "LDSR" else 0.0)
    make: Callable = gen_ldsr_program if language == "LDSR" else gen_lars_program
    for _ in range(200):
        program = make(rng, bounds, style)
        if stratified(program):
            stream = random_stream(rng, program.signature, bounds)
            return Instance(program, stream, random_background(rng, program.signature, bounds))
    raise GenerationBudgetExhausted(f"no stratified {language} program in 200 draws", 0.0)


@dataclass(frozen=True)
class Lemma1Case:
    program: LdsrProgram
    stream: Stream
    background: frozenset
    t: int
    mutated: Stream  # agrees with ``stream`` on slots 0..t
    mutator: str


def gen_lemma1_case(seed: int, bounds: Bounds = DESK) -> Lemma1Case:
    """A stratified LDSR instance, a time point and a stream differing only after it."""
    rng = random.Random(f"lemma1:{seed}")
    inst = gen_instance("LDSR", rng.randrange(1 << 30), bounds, wild=False)
    sigma = inst.stream
    t = rng.randint(0, sigma.n)
    kind = rng.choice(("clear", "add", "resample"))
    later = random_stream(rng, inst.program.signature, bounds, n=sigma.n)
    slots = list(sigma.slots)
    for i in range(t + 1, sigma.n + 1):
        if kind == "clear":
            slots[i] = frozenset()
        elif kind == "add":
            slots[i] = slots[i] | later[i]
        else:
            slots[i] = later[i]
    return Lemma1Case(inst.program, sigma, inst.background, t, Stream(tuple(slots)), kind)
