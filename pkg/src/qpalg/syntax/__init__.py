from .diagnostics import Diagnostic, ParseError
from .parser import parse_process, parse_program, tokenize
from .printer import flat, pretty_print, print_program
from .terms import *  # noqa: F401,F403
from .validate import validate
