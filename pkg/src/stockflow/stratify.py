"""Typed diagrams and pullback stratification.

A typed diagram pairs a system-structure diagram with a structure-preserving
map into a small type system.  Stratifying two or more diagrams typed over
the same system takes their fiber product: elements are tuples agreeing on
type, so e.g. every disease stock is paired with every stratum stock of the
same kind.  Formulas do not transport; reattach them afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .acset import (
    Homomorphism,
    compose_hom,
    is_natural,
    naturality_failures,
    pullback,
)
from .diagrams import DiagramError, SystemStructureDiagram


@dataclass
class TypedDiagram:
    diagram: SystemStructureDiagram
    type_system: SystemStructureDiagram
    typing: Homomorphism  # diagram -> type system; names play no role


def make_typed(
    d: SystemStructureDiagram,
    type_system: SystemStructureDiagram,
    components: Mapping[str, Sequence[int]],
) -> TypedDiagram:
    """Check the per-object assignment and wrap it; rejects non-natural maps
    listing every failing square."""
    comps = {obj: list(components.get(obj, ())) for obj in d.inst.schema.objects}
    typing = Homomorphism(d.inst, type_system.inst, comps)
    failures = naturality_failures(typing)
    if failures:
        shown = ", ".join(f"({m}, {i})" for m, i in failures)
        raise DiagramError(f"typing is not structure-preserving; failing squares: {shown}")
    return TypedDiagram(d, type_system, typing)


def stratify(*typed: TypedDiagram) -> SystemStructureDiagram:
    """The fiber product of two or more typed diagrams, with concatenated
    element names."""
    return typed_stratify(*typed).diagram


def typed_stratify(*typed: TypedDiagram) -> TypedDiagram:
    """Like :func:`stratify` but keeps the induced typing (first projection
    followed by the first argument's typing)."""
    if len(typed) < 2:
        raise DiagramError("stratification needs at least two typed diagrams")
    first = typed[0]
    for other in typed[1:]:
        if other.type_system.inst != first.type_system.inst:
            raise DiagramError("typed diagrams target different type systems")

    acc = first
    for other in typed[1:]:
        result = pullback(acc.typing, other.typing)
        acc = TypedDiagram(
            SystemStructureDiagram(result.apex),
            first.type_system,
            compose_hom(result.leg1, acc.typing),
        )
    assert is_natural(acc.typing)
    return acc
