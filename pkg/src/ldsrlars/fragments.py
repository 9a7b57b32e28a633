"""Syntactic fragment classification for LARS_D (F1-F3) and LDSR (F4-F7)."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lars.syntax import (
    And,
    At,
    AtomF,
    Box,
    Diamond,
    Formula,
    Implies,
    LarsProgram,
    LarsRule,
    Not,
    Top,
    Window,
)
from .ldsr.semantics import _sccs
from .ldsr.syntax import LdsrProgram
from .terms import Atom, PredKind, Var


class BetaKind(enum.Enum):
    DIAMOND = "diamond"  # wplus[m] diamond p
    BOX = "box"  # wplus[m] box p
    ATOM = "atom"  # p
    AT = "at"  # wplus[0] at[T] true and at[T-K] p


@dataclass(frozen=True)
class Beta:
    """A body formula matching one of the fragment templates."""

    kind: BetaKind
    atom: Atom
    width: int  # window size m, or the lag K for BetaKind.AT
    negative: bool
    formula: Formula
    time: Var | None = None  # the anchored time variable of BetaKind.AT

    @property
    def pred(self) -> str:
        return self.atom.pred


class Shape(enum.Enum):
    TYPE_I = "type_I"
    TYPE_II = "type_II"
    OTHER = "other"


@dataclass(frozen=True)
class RuleShape:
    shape: Shape
    atom: Atom | None = None  # cons for type I, head for type II
    betas: tuple = ()  # prem for type I, body for type II
    reason: str = ""

    def preds(self) -> set[str]:
        return {b.pred for b in self.betas}


def _is_now_anchor(phi: Formula) -> Var | None:
    """``wplus[0] at[T] true`` -> T."""
    if isinstance(phi, Window) and phi.width == 0 and isinstance(phi.arg, At):
        at = phi.arg
        if isinstance(at.arg, Top) and at.time.var is not None and at.time.offset == 0:
            return at.time.var
    return None


def _lagged_atom(phi: Formula) -> tuple[Var, int, Atom] | None:
    """``at[T-K] p`` -> (T, K, p)."""
    if isinstance(phi, At) and isinstance(phi.arg, AtomF) and phi.time.var is not None and phi.time.offset <= 0:
        return phi.time.var, -phi.time.offset, phi.arg.atom
    return None


def match_beta(phi: Formula) -> Beta | None:
    negative = False
    inner = phi
    if isinstance(phi, Not):
        negative, inner = True, phi.arg
    if isinstance(inner, AtomF):
        return Beta(BetaKind.ATOM, inner.atom, 0, negative, phi)
    if isinstance(inner, Window) and isinstance(inner.arg, (Diamond, Box)) and isinstance(inner.arg.arg, AtomF):
        kind = BetaKind.DIAMOND if isinstance(inner.arg, Diamond) else BetaKind.BOX
        return Beta(kind, inner.arg.arg.atom, inner.width, negative, phi)
    if isinstance(inner, And) and len(inner.args) == 2:
        for x, y in (inner.args, inner.args[::-1]):
            t = _is_now_anchor(x)
            lag = _lagged_atom(y)
            if t is not None and lag is not None and lag[0] == t:
                return Beta(BetaKind.AT, lag[2], lag[1], negative, phi, t)
    return None


def _split_betas(parts: Sequence[Formula]) -> tuple | None:
    """Match each part as a template; conjunctions are split, pairing anchors with lags."""
    out: list[Beta] = []
    for part in parts:
        b = match_beta(part)
        if b is not None:
            out.append(b)
            continue
        if not isinstance(part, And):
            return None
        items = list(part.args)
        anchors = [x for x in items if _is_now_anchor(x) is not None]
        rest = [x for x in items if _is_now_anchor(x) is None]
        for x in rest:
            lag = _lagged_atom(x)
            if lag is not None:
                pair = next((a for a in anchors if _is_now_anchor(a) == lag[0]), None)
                if pair is None:
                    return None
                anchors.remove(pair)
                out.append(Beta(BetaKind.AT, lag[2], lag[1], False, And((pair, x)), lag[0]))
                continue
            b = match_beta(x)
            if b is None:
                return None
            out.append(b)
        if anchors:
            return None
    return tuple(out)


def _unpinned_time(betas: Sequence[Beta]) -> Var | None:
    """A time variable shared by negated anchors but pinned by no positive one.

    Such a variable ranges over every time point, so the negated anchors no
    longer refer to the evaluation point.
    """
    pos = {b.time for b in betas if b.kind is BetaKind.AT and not b.negative}
    neg = [b.time for b in betas if b.kind is BetaKind.AT and b.negative]
    for v in neg:
        if v not in pos and neg.count(v) > 1:
            return v
    return None


def classify_rule_shape(rule: LarsRule) -> RuleShape:
    shape = _classify_rule_shape(rule)
    if shape.shape is not Shape.OTHER:
        v = _unpinned_time(shape.betas)
        if v is not None:
            return RuleShape(Shape.OTHER, reason=f"time variable {v} is shared by negated anchors only")
    return shape


def _classify_rule_shape(rule: LarsRule) -> RuleShape:
    head = rule.head
    if isinstance(head, Box):
        if rule.body:
            return RuleShape(Shape.OTHER, reason="boxed rule with a body")
        imp = head.arg
        if not isinstance(imp, Implies) or not isinstance(imp.cons, AtomF):
            return RuleShape(Shape.OTHER, reason="box head is not an implication to an atom")
        betas = _split_betas([imp.ante])
        if betas is None:
            return RuleShape(Shape.OTHER, reason="premise outside the template set")
        return RuleShape(Shape.TYPE_I, imp.cons.atom, betas)
    if isinstance(head, AtomF):
        betas = _split_betas(rule.body)
        if betas is None:
            return RuleShape(Shape.OTHER, reason="body outside the template set")
        return RuleShape(Shape.TYPE_II, head.atom, betas)
    return RuleShape(Shape.OTHER, reason="@-head")


# -- dependency graph ----------------------------------------------------------------


@dataclass(frozen=True)
class DepGraph:
    nodes: frozenset
    arcs: frozenset  # (q, p, "+" | "-")


def marked_predicates(program: LarsProgram | Iterable[LarsRule]) -> set[str]:
    rules = program.rules if isinstance(program, LarsProgram) else tuple(program)
    shapes = [classify_rule_shape(r) for r in rules]
    type2_heads = {s.atom.pred for s in shapes if s.shape is Shape.TYPE_II}
    return {s.atom.pred for s in shapes if s.shape is Shape.TYPE_I and s.preds() & type2_heads}


def build_dep_graph(program: LarsProgram | Iterable[LarsRule]) -> DepGraph:
    rules = program.rules if isinstance(program, LarsProgram) else tuple(program)
    nodes: set[str] = set()
    arcs: set[tuple[str, str, str]] = set()
    for r in rules:
        s = classify_rule_shape(r)
        if s.shape is Shape.OTHER:
            continue
        nodes.add(s.atom.pred)
        for b in s.betas:
            arcs.add((b.pred, s.atom.pred, "-" if b.negative else "+"))
    return DepGraph(frozenset(nodes), frozenset(arcs))


def negative_cycle(graph: DepGraph) -> list[str] | None:
    """A cycle through a '-' arc, as a predicate list, or None."""
    succ: dict[str, set[str]] = {p: set() for p in graph.nodes}
    for q, p, _ in graph.arcs:
        if q in graph.nodes:
            succ[q].add(p)
    comps = _sccs(sorted(graph.nodes), succ)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    for q, p, label in sorted(graph.arcs):
        if label == "-" and q in comp_of and comp_of[q] == comp_of.get(p):
            return _path(p, q, succ) + [p] if p != q else [q, p]
    return None


def _path(src: str, dst: str, succ: dict[str, set[str]]) -> list[str]:
    """A shortest path src ->* dst, then the closing arc back to src is implied."""
    prev = {src: src}
    frontier = [src]
    while frontier and dst not in prev:
        nxt = []
        for v in frontier:
            for w in sorted(succ[v]):
                if w not in prev:
                    prev[w] = v
                    nxt.append(w)
        frontier = nxt
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    # path is p ... q; the '-' arc q -> p closes the cycle
    return path


# -- verdicts -------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    fragment: str
    condition: str
    witness: dict

    def __str__(self) -> str:
        detail = ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return f"{self.fragment} ({self.condition}): {detail}"


@dataclass(frozen=True)
class FragmentVerdict:
    memberships: frozenset
    violations: tuple = field(default_factory=tuple)

    def member(self, fragment: str) -> bool:
        return fragment in self.memberships

    def violations_for(self, fragment: str) -> list[Violation]:
        return [v for v in self.violations if v.fragment == fragment]

    def to_obj(self, fragments: Sequence[str]) -> dict:
        return {
            f: {"member": f in self.memberships, "violations": [{"condition": v.condition, **v.witness} for v in self.violations_for(f)]}
            for f in fragments
        }


def _inherited(members: set, parent: dict[str, str]) -> list[Violation]:
    """Record that a fragment fails because the fragment it refines does."""
    return [Violation(f, "requires", {"fragment": p}) for f, p in parent.items() if p not in members]


LARS_FRAGMENTS = ("F1", "F2", "F3")
LDSR_FRAGMENTS = ("F4", "F5", "F6", "F7")


def classify_lars_fragments(program: LarsProgram) -> FragmentVerdict:
    shapes = [classify_rule_shape(r) for r in program.rules]
    v: list[Violation] = []
    for i, s in enumerate(shapes):
        if s.shape is Shape.OTHER:
            v.append(Violation("F1", "i", {"rule": i, "reason": s.reason}))
        elif program.kind(s.atom.pred) is not PredKind.INTENSIONAL:
            v.append(Violation("F1", "i", {"rule": i, "reason": f"head predicate {s.atom.pred} is extensional"}))
    marked = marked_predicates(program)
    type1 = [(i, s) for i, s in enumerate(shapes) if s.shape is Shape.TYPE_I]
    type2 = [(i, s) for i, s in enumerate(shapes) if s.shape is Shape.TYPE_II]
    for i, s in type1:
        for p in sorted(s.preds() & marked):
            v.append(Violation("F1", "ii", {"rule": i, "predicate": p}))
    for i, s in type2:
        for p in sorted(s.preds() & marked):
            v.append(Violation("F1", "iii", {"rule": i, "predicate": p}))
    cycle = negative_cycle(build_dep_graph(program))
    if cycle is not None:
        v.append(Violation("F1", "iv", {"cycle": cycle}))
    f1 = not v
    heads2 = {s.atom.pred for _, s in type2}
    for i, s in type1:
        for p in sorted(s.preds() & heads2):
            v.append(Violation("F2", "type-II head in type-I premise", {"rule": i, "predicate": p}))
    f2 = f1 and not any(x.fragment == "F2" for x in v)
    for i, s in type1:
        v.append(Violation("F3", "type-I rule", {"rule": i}))
    f3 = f2 and not type1
    members = {name for name, ok in (("F1", f1), ("F2", f2), ("F3", f3)) if ok}
    return FragmentVerdict(frozenset(members), tuple(v + _inherited(members, {"F2": "F1", "F3": "F2"})))


def classify_ldsr_fragments(program: LdsrProgram) -> FragmentVerdict:
    v: list[Violation] = []
    for i, r in enumerate(program.rules):
        if program.kind(r.head.pred) is not PredKind.INTENSIONAL:
            v.append(Violation("F4", "extensional head", {"rule": i, "predicate": r.head.pred}))
    f4 = not v
    for i, r in enumerate(program.rules):
        if not r.temp:
            v.append(Violation("F5", "form-1 rule", {"rule": i}))
    f5 = f4 and not any(x.fragment == "F5" for x in v)
    counting = [
        (i, l.pred)
        for i, r in enumerate(program.rules)
        for l in r.body
        if l.atom.has_count_variable
    ]
    for i, p in counting:
        v.append(Violation("F6", "count variable", {"rule": i, "predicate": p}))
    f6 = f5 and not counting
    heads2 = {r.head.pred for r in program.form2()}
    for i, r in enumerate(program.rules):
        if r.temp:
            for p in sorted(r.body_preds() & heads2):
                v.append(Violation("F7", "i", {"rule": i, "predicate": p}))
    for i, p in counting:
        v.append(Violation("F7", "ii", {"rule": i, "predicate": p}))
    f7 = f4 and not any(x.fragment == "F7" for x in v)
    members = {name for name, ok in (("F4", f4), ("F5", f5), ("F6", f6), ("F7", f7)) if ok}
    return FragmentVerdict(frozenset(members), tuple(v + _inherited(members, {"F5": "F4", "F6": "F5", "F7": "F4"})))
