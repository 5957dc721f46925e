"""Built-in decompositions E0..E3 for bounded binary circuits.

Each theory pairs the shared circuit signature with an oriented rule system;
the rule sources below are in the same external rule-file format accepted by
:func:`bbc.syntax.load_rule_system`, so the built-ins exercise the exact code
path used for user-supplied theories.  Structural axioms: E0 declares none on
``or``, E1 commutativity only, E2 and E3 associativity plus commutativity.
The ``shared_ac`` flag instead gives every theory the full AC reading.
"""

from __future__ import annotations

from .syntax import parse_rule_file
from .terms import AC, COMM_ONLY, FREE, Decomposition, RuleSystem, builtin_signature

SIGNATURE_SOURCE = """
sorts BitSort Circuit Msg Fresh .
subsort BitSort < Circuit .
subsort Circuit < Msg .
op top : -> BitSort .
op not : BitSort -> BitSort .
op not : Circuit -> Circuit .
op or : Circuit Circuit -> Circuit [assoc comm] .
op asBit : Fresh -> BitSort .
"""

VARS_SOURCE = """
vars B0 B1 B2 B3 : BitSort .
vars C0 C1 C2 : Circuit .
"""

DELTA0_SOURCE = VARS_SOURCE + """
*** DoubleNegation
eq not(not(C0)) = C0 .
"""

DELTA1_EXTRA = """
*** Annihilation
eq or(top, C0) = top .
*** Identity
eq or(not(top), C0) = C0 .
*** Idempotence
eq or(B0, B0) = B0 .
*** Complementation
eq or(B0, not(B0)) = top .
"""

DELTA2_EXTRA = """
*** DistrCompl
eq or(not(or(B1, B0)), B0) = or(B0, not(B1)) .
*** Absorption
eq or(not(or(B1, B0)), not(B0)) = not(B0) .
*** AbsorptionDual
eq or(not(or(not(B0), B1)), B0) = B0 .
"""

DELTA3_EXTRA = """
*** Distributivity
eq not(or(B0, not(or(B1, B2)))) = or(not(or(B0, not(B1))), not(or(B0, not(B2)))) .
*** DistributivityDual
eq not(or(not(or(B0, B1)), not(or(B0, B2)))) = or(B0, not(or(not(B1), not(B2)))) .
*** Idempotence1
eq or(not(or(B0, B1)), not(or(B0, B1))) = not(or(B0, B1)) .
*** Distributivity1
eq or(not(or(B0, B1)), not(or(not(B0), B1))) = not(B1) .
*** Distributivity2
eq or(not(or(B0, B1, B2)), B0) = or(B0, not(or(B1, B2))) .
*** Absorption2
eq or(not(or(B0, B1, B2)), not(B0)) = not(B0) .
*** Absorption2Dual
eq or(not(or(not(B0), B1, B2)), B0) = B0 .
"""

DELTA_SOURCES = {
    "E0": DELTA0_SOURCE,
    "E1": DELTA0_SOURCE + DELTA1_EXTRA,
    "E2": DELTA0_SOURCE + DELTA1_EXTRA + DELTA2_EXTRA,
    "E3": DELTA0_SOURCE + DELTA1_EXTRA + DELTA2_EXTRA + DELTA3_EXTRA,
}

DECLARED_AXIOMS = {"E0": FREE, "E1": COMM_ONLY, "E2": AC, "E3": AC}

THEORY_LABELS = ("E0", "E1", "E2", "E3")


def theory(label: str, shared_ac: bool = False) -> Decomposition:
    """Build a built-in decomposition by label (E0, E1, E2 or E3)."""
    if label not in DELTA_SOURCES:
        raise ValueError(f"unknown theory {label!r}")
    signature = builtin_signature()
    parsed = parse_rule_file(DELTA_SOURCES[label], signature)
    system = RuleSystem(label, tuple(parsed.rules))
    return Decomposition(label, signature, DECLARED_AXIOMS[label], system, shared_ac)


def all_theories(shared_ac: bool = False) -> dict[str, Decomposition]:
    return {label: theory(label, shared_ac) for label in THEORY_LABELS}
