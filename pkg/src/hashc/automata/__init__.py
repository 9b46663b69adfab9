"""Guide automata: compilation from behavior expressions, execution, analysis."""

from hashc.automata.compiler import compile_behavior
from hashc.automata.dot import to_dot
from hashc.automata.inclusion import check_inclusion, compare_languages, invert_mapping
from hashc.automata.language import language_upto, words_as_strings
from hashc.automata.model import GuideAutomaton, check_structure, compute_kappa
from hashc.automata.runtime import (
    AutomatonState,
    accepting,
    advance,
    enabled_letters,
    enabled_ports,
    initial_state,
    set_flag,
)

__all__ = [
    "AutomatonState",
    "GuideAutomaton",
    "accepting",
    "advance",
    "check_inclusion",
    "check_structure",
    "compare_languages",
    "compile_behavior",
    "compute_kappa",
    "enabled_letters",
    "enabled_ports",
    "initial_state",
    "invert_mapping",
    "language_upto",
    "set_flag",
    "to_dot",
    "words_as_strings",
]
