"""LDSR: syntax, stratification, grounding and answer-stream evaluation."""

from .oracle import brute_force_answer_stream
from .semantics import (
    LdsrEvalResult,
    check_stratified,
    entails,
    entails_atom,
    eval_answer_stream,
    ground_ldsr,
)
from .syntax import (
    LdsrProgram,
    LdsrRule,
    Literal,
    SKind,
    StreamingAtom,
    check_safety,
    format_program,
    parse_ldsr,
)

__all__ = [
    "LdsrEvalResult",
    "LdsrProgram",
    "LdsrRule",
    "Literal",
    "SKind",
    "StreamingAtom",
    "brute_force_answer_stream",
    "check_safety",
    "check_stratified",
    "entails",
    "entails_atom",
    "eval_answer_stream",
    "format_program",
    "ground_ldsr",
    "parse_ldsr",
]
