"""LARS_D: formulas, entailment, grounding and answer streams."""

from .oracle import explain_answer_stream, verify_answer_stream
from .semantics import (
    LarsAnswerStream,
    Query,
    Structure,
    eval_answer_stream_lars,
    eval_formula,
    ground_lars,
    lars_strata,
    satisfiable,
)
from .syntax import (
    TRUE,
    And,
    At,
    AtomF,
    Bottom,
    Box,
    Cmp,
    Diamond,
    Expr,
    Formula,
    Implies,
    LarsProgram,
    LarsRule,
    Not,
    Or,
    Reset,
    Top,
    Window,
    format_formula,
    format_lars,
    parse_formula,
    parse_lars,
)

__all__ = [
    "TRUE",
    "And",
    "At",
    "AtomF",
    "Bottom",
    "Box",
    "Cmp",
    "Diamond",
    "Expr",
    "Formula",
    "Implies",
    "LarsAnswerStream",
    "LarsProgram",
    "LarsRule",
    "Not",
    "Or",
    "Query",
    "Reset",
    "Structure",
    "Top",
    "Window",
    "eval_answer_stream_lars",
    "eval_formula",
    "explain_answer_stream",
    "format_formula",
    "format_lars",
    "ground_lars",
    "lars_strata",
    "parse_formula",
    "parse_lars",
    "satisfiable",
    "verify_answer_stream",
]
