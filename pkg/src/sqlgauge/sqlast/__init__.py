from .errors import AmbiguousColumn, ParseError, SqlAstError, UnsupportedConstruct
from .fingerprint import ast_fingerprint
from .match import ComponentDiff, Mismatch, exact_match
from .mutate import drop_order_by, perturb_first_literal, rename_aliases, swap_select_columns
from .normalize import normalize
from .parser import parse_sql
from .render import render, render_query
from .taxonomy import (ALL_SUBCATEGORIES, CATEGORY_NAMES,
                       SUBCATEGORY_DESCRIPTIONS, TAXONOMY_VERSION,
                       TaxonomyLabel, classify)

__all__ = [
    "ALL_SUBCATEGORIES",
    "SUBCATEGORY_DESCRIPTIONS",
    "AmbiguousColumn",
    "CATEGORY_NAMES",
    "ComponentDiff",
    "Mismatch",
    "ParseError",
    "SqlAstError",
    "TAXONOMY_VERSION",
    "TaxonomyLabel",
    "UnsupportedConstruct",
    "ast_fingerprint",
    "classify",
    "drop_order_by",
    "exact_match",
    "normalize",
    "parse_sql",
    "perturb_first_literal",
    "rename_aliases",
    "render",
    "render_query",
    "swap_select_columns",
]
