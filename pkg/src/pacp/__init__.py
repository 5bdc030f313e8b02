"""Process-algebra workbench for probabilistic choice over a rational
meadow: terms, rewriting to canonical form, probabilistic transition
systems, bisimulation checking, scheduled interleaving, and simulation.
"""

__version__ = "0.1.0"

from .meadow import Rat, ZERO, ONE, rat
from .terms import (Action, Act, Alt, Seq, PChoice, Par, LMerge, CMerge,
                    Encap, Deadlock, DELTA, Var, Rec, RecSpec, Interleave,
                    Scheduled, plain, control, create, created)
from .parse import parse_term, parse_spec, print_term, ParseError
from .config import Config, ConfigError, default_config, load_config

__all__ = [
    "Rat", "ZERO", "ONE", "rat",
    "Action", "Act", "Alt", "Seq", "PChoice", "Par", "LMerge", "CMerge",
    "Encap", "Deadlock", "DELTA", "Var", "Rec", "RecSpec", "Interleave",
    "Scheduled", "plain", "control", "create", "created",
    "parse_term", "parse_spec", "print_term", "ParseError",
    "Config", "ConfigError", "default_config", "load_config",
    "__version__",
]
