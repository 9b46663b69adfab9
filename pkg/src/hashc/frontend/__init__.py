from hashc.frontend.lexer import lex
from hashc.frontend.loader import (
    DirSource,
    Loader,
    Program,
    SourceBundle,
    load_path,
    resolve_uses,
)
from hashc.frontend.parser import parse, parse_file
from hashc.frontend.preprocess import expand_macros, fold_expr, fold_int, unfold_indexed
from hashc.frontend.pretty import pretty_config, pretty_decl

__all__ = [
    "lex",
    "parse",
    "parse_file",
    "expand_macros",
    "fold_expr",
    "fold_int",
    "unfold_indexed",
    "pretty_config",
    "pretty_decl",
    "SourceBundle",
    "DirSource",
    "Loader",
    "Program",
    "load_path",
    "resolve_uses",
]
