from .codefile import (
    CodeFile,
    CodeFileError,
    fixture_path,
    format_e_matrix,
    parse_code_file,
    parse_code_text,
    parse_e_matrix_text,
    serialize_code,
)
from .cli import main

__all__ = [
    "CodeFile",
    "CodeFileError",
    "fixture_path",
    "format_e_matrix",
    "main",
    "parse_code_file",
    "parse_code_text",
    "parse_e_matrix_text",
    "serialize_code",
]
