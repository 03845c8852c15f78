"""Interpreter and execution-tree explorer for the QPAlg quantum process algebra."""
from .context import Context, ProbContext
from .explorer import ExecutionTree, Sampler, distribution, explore, sample
from .kernels import BACKEND
from .library import corpus
from .quantum import DensityMatrix
from .semantics import Engine, State, Transition, enabled, initial_state, run_to_terminal, step
from .syntax import parse_process, parse_program, pretty_print

__all__ = [
    "BACKEND",
    "Context",
    "DensityMatrix",
    "Engine",
    "ExecutionTree",
    "ProbContext",
    "Sampler",
    "State",
    "Transition",
    "corpus",
    "distribution",
    "enabled",
    "explore",
    "initial_state",
    "parse_process",
    "parse_program",
    "pretty_print",
    "run_to_terminal",
    "sample",
    "step",
]
