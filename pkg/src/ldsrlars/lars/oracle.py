"""Answer-stream verification by grounding and subset enumeration."""

from __future__ import annotations

import itertools
from typing import Iterable

from ..errors import InstanceTooLarge
from ..stream import Stream
from ..terms import Atom, PredKind, sorted_atoms
from .semantics import (
    LarsAnswerStream,
    Solver,
    Structure,
    analyse,
    ground_lars,
    lars_universe,
)
from .syntax import And, Formula, LarsProgram, Top, rebuild


class _Checker:
    """Evaluates ground formulas against one stream, caching their analysis."""

    def __init__(self, universe):
        self.universe = universe
        self._compiled: dict[Formula, tuple] = {}

    def _compile(self, phi: Formula):
        hit = self._compiled.get(phi)
        if hit is None:
            node = rebuild(phi)
            hit = (node, analyse([node]))
            self._compiled[phi] = hit
        return hit

    def holds(self, m: Structure, phi: Formula, t: int) -> bool:
        node, scope = self._compile(phi)
        return Solver(m, scope, self.universe).holds(node, {}, t, 0, m.n)


def _body(rule) -> Formula:
    if not rule.body:
        return Top()
    return rule.body[0] if len(rule.body) == 1 else And(rule.body)


def explain_answer_stream(
    program: LarsProgram,
    sigma: Stream,
    background: Iterable[Atom],
    t: int,
    candidate: LarsAnswerStream,
    *,
    max_extra: int = 12,
) -> str | None:
    """Why ``candidate`` is not ``AS(P, I, t)``, or None when it is."""
    background = frozenset(background)
    a = candidate.stream
    if candidate.eval_point != t:
        return f"candidate is for time point {candidate.eval_point}, not {t}"
    if len(a) != len(sigma):
        return "candidate and input differ in length"
    if not sigma.issubset(a):
        return "candidate does not contain the input stream"
    extras: list[tuple[int, Atom]] = []
    for i, (si, ai) in enumerate(zip(sigma.slots, a.slots)):
        for atom in sorted_atoms(ai - si):
            if program.kind(atom.pred) is not PredKind.INTENSIONAL:
                return f"atom {atom} at {i} is new but its predicate is not intensional"
            extras.append((i, atom))
    universe = lars_universe(program, sigma, background)
    rules = ground_lars(program, universe, range(sigma.n + 1))
    checker = _Checker(universe)
    m = Structure(a.slots, background)
    reduct = []
    for r in rules:
        if checker.holds(m, _body(r), t):
            if not checker.holds(m, r.head, t):
                return f"not a model: rule instance '{r}' is violated"
            reduct.append(r)
    if len(extras) > max_extra:
        raise InstanceTooLarge(f"{len(extras)} derived atoms exceed the limit of {max_extra}")
    for k in range(len(extras)):
        for keep in itertools.combinations(extras, k):
            slots = [set(s) for s in sigma.slots]
            for i, atom in keep:
                slots[i].add(atom)
            omega = Structure(slots, background)
            if all(not checker.holds(omega, _body(r), t) or checker.holds(omega, r.head, t) for r in reduct):
                dropped = sorted(set(extras) - set(keep), key=lambda p: (p[0], p[1].sort_key()))
                i, atom = dropped[0]
                return f"not minimal: a smaller model of the reduct omits {atom} at {i}"
    return None


def verify_answer_stream(
    program: LarsProgram,
    sigma: Stream,
    background: Iterable[Atom],
    t: int,
    candidate: LarsAnswerStream,
    *,
    max_extra: int = 12,
) -> bool:
    return explain_answer_stream(program, sigma, background, t, candidate, max_extra=max_extra) is None
