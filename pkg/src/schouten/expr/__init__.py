"""Expression language: parse, differentiate, simplify, evaluate."""
from .calculus import DEFAULT_NODE_BUDGET, Differentiator, NodeBudgetExceeded, differentiate
from .evaluate import DomainError, EvaluationError, Program, UnboundVariableError, evaluate
from .nodes import (
    FUNCTIONS,
    ONE,
    ZERO,
    Expr,
    ExprError,
    add,
    as_expr,
    const,
    div,
    func,
    make,
    mul,
    neg,
    power,
    simplify,
    size,
    sub,
    var,
)
from .parser import EmptyInputError, ExprSyntaxError, UnknownFunctionError, parse
from .printer import to_source

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "Differentiator",
    "DomainError",
    "EmptyInputError",
    "EvaluationError",
    "Expr",
    "ExprError",
    "ExprSyntaxError",
    "FUNCTIONS",
    "NodeBudgetExceeded",
    "ONE",
    "Program",
    "UnboundVariableError",
    "UnknownFunctionError",
    "ZERO",
    "add",
    "as_expr",
    "const",
    "differentiate",
    "div",
    "evaluate",
    "func",
    "make",
    "mul",
    "neg",
    "parse",
    "power",
    "simplify",
    "size",
    "sub",
    "to_source",
    "var",
]
