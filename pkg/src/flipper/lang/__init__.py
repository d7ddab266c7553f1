"""Language core: tokens, AST, grammar, canonical printing, core parsing."""
from . import ast
from .ast import Program
from .grammar import (CORE_AUTHOR, Category, GrammarRule, Slot, SlotRef,
                      apply_rule, core_rules, display_rule, rule_content_id,
                      rule_from_json, rule_to_json, with_context)
from .parser import ParseError, parse_core, parse_core_derivation
from .pretty import detokenize, pretty, pretty_tokens
from .tokens import Token, token_texts, tokenize

__all__ = [
    "ast", "Program", "Category", "GrammarRule", "Slot", "SlotRef",
    "CORE_AUTHOR", "apply_rule", "core_rules", "display_rule",
    "rule_content_id", "rule_from_json", "rule_to_json", "with_context",
    "ParseError", "parse_core", "parse_core_derivation",
    "detokenize", "pretty", "pretty_tokens", "Token", "token_texts",
    "tokenize",
]
