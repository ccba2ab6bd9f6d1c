"""Expansion of the named quantities back into jets.

The main catalogs eliminate jets in favour of the named heads (A, B,
C, S, g, ...).  The identity checks need the opposite direction: a
statement is first expanded to a polynomial in jets of the potential,
then differentiated, then normalized.  Expansion is itself a small
rewrite system run to fixpoint; it shares the slot-swap licenses with
the main catalogs so both directions agree on canonical form.
"""

from __future__ import annotations

from .expr import Expression
from .rewrite import RuleSet, make_rule

_CR = (
    ("swap-2", "phi[;a,b] => phi[;b,a]"),
    ("swap-2c", "phi[;a~,b~] => phi[;b~,a~]"),
    ("swap-3", "phi[;a,b,c] => phi[;a,c,b]"),
    ("swap-3c", "phi[;a,b~,c~] => phi[;a,c~,b~]"),
    ("exp-A", "A[a] => phi[;a,s]*phi[;s~]"),
    ("exp-Ac", "A[a~] => phi[;a~,s~]*phi[;s]"),
    ("exp-B", "B[a] => B2[a,s~]*phi[;s]"),
    ("exp-Bc", "B[a~] => B2[s,a~]*phi[;s~]"),
    ("exp-B2", "B2[a,b~] => phi[;a,b~] - phi^-1*phi[;a]*phi[;b~] - (1/2)*(g - phi)*delta[a,b~]"),
    ("exp-C", "C[a] => i*phi[;a,0] + (1/2)*phi^-1*gb*phi[;a]"),
    ("exp-Cc", "C[a~] => -i*phi[;a~,0] + (1/2)*phi^-1*g*phi[;a~]"),
    (
        "exp-S",
        "S => -(m/2)*(phi[;0,0] - (1/2)*phi^-1*((1 - phi^2)/4 + phi^-1*phi[;s]*phi[;s~]"
        " + phi^-2*phi[;s]*phi[;s~]*phi[;t]*phi[;t~] + phi[;0]*phi[;0]))",
    ),
    ("exp-gb", "gb => 1/2 + (1/2)*phi + phi^-1*phi[;s]*phi[;s~] - i*phi[;0]"),
    ("exp-g", "g => 1/2 + (1/2)*phi + phi^-1*phi[;s]*phi[;s~] + i*phi[;0]"),
)

_RIEM = (
    ("hess-swap", "v[;a,b] => v[;b,a]"),
    ("exp-phi", "phi => v^-1*(v[;k]*v[;k] + v^2 + 1)"),
)

_CACHE: dict[str, RuleSet] = {}


def expansion_ruleset(mode: str) -> RuleSet:
    if mode not in _CACHE:
        texts = _CR if mode == "cr" else _RIEM
        rules = [
            make_rule(mode, name, "definition", "expansion of a named quantity", text)
            for name, text in texts
        ]
        _CACHE[mode] = RuleSet(mode, rules)
    return _CACHE[mode]


def expand_names(mode: str, e: Expression) -> Expression:
    """Rewrite every named head into jets of the potential."""
    out, _ = expansion_ruleset(mode).normalize(e)
    return out
