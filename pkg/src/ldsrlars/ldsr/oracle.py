"""Brute-force answer streams straight from the model-theoretic definition.

Deliberately naive: the program is fully grounded, every subset of candidate
head atoms is tried at each time point, and minimality is checked against
all strictly smaller interpretations.  Used only to cross-check
:func:`~ldsrlars.ldsr.semantics.eval_answer_stream` on tiny instances.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from ..errors import InstanceTooLarge, LdsrLarsError
from ..stream import Stream
from ..terms import Atom
from .semantics import LdsrEvalResult, entails, ground_ldsr, program_universe
from .syntax import LdsrProgram


def _body_holds(rule, stream: Stream) -> bool:
    return all(entails(stream, lit) for lit in rule.body)


def _is_model(rules, prefix: list, last: frozenset) -> bool:
    stream = Stream(tuple(prefix) + (last,))
    return all(r.head in last for r in rules if _body_holds(r, stream))


def _subsets(items: list):
    for k in range(len(items) + 1):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def _answer_sets(rules, prefix: list, base: frozenset, limit: int) -> list[frozenset]:
    candidates = sorted({r.head for r in rules} - base, key=Atom.sort_key)
    if len(candidates) > limit:
        raise InstanceTooLarge(f"{len(candidates)} candidate atoms exceed the limit of {limit}")
    found = []
    for extra in _subsets(candidates):
        m = base | extra
        if not _is_model(rules, prefix, m):
            continue
        stream = Stream(tuple(prefix) + (m,))
        reduct = [r for r in rules if _body_holds(r, stream)]
        extra_list = sorted(extra, key=Atom.sort_key)
        minimal = True
        for smaller in _subsets(extra_list):
            if smaller == extra:
                continue
            if _is_model(reduct, prefix, base | smaller):
                minimal = False
                break
        if minimal:
            found.append(m)
    return found


def brute_force_answer_stream(
    program: LdsrProgram,
    sigma: Stream,
    background: Iterable[Atom] = (),
    *,
    max_candidates: int = 12,
) -> LdsrEvalResult:
    background = frozenset(background)
    full = program.with_facts(background)
    universe = program_universe(program, sigma, background)
    rules = list(ground_ldsr(full, universe).rules)
    permanent_rules = [r for r in rules if not r.temp]
    facts = frozenset(r.head for r in rules if not r.body)  # forced into every model
    prefix: list[frozenset] = []
    trace: list[frozenset] = []
    model = frozenset()
    for i in range(sigma.n + 1):
        models = _answer_sets(rules, prefix, sigma[i] | facts, max_candidates)
        if len(models) != 1:
            raise LdsrLarsError(f"time point {i}: expected one minimal model, found {len(models)}")
        model = models[0]
        if i == sigma.n:
            prefix.append(model)
            trace.append(frozenset())
            break
        stream = Stream(tuple(prefix) + (model,))
        temporary = frozenset(
            a
            for a in model - sigma[i]
            if not any(r.head == a and _body_holds(r, stream) for r in permanent_rules)
        )
        trace.append(temporary)
        prefix.append(model - temporary)
    return LdsrEvalResult(Stream(tuple(prefix)), model, tuple(trace))
