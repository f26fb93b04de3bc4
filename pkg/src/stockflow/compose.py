"""Gluing open diagrams along shared interfaces, driven by a wiring pattern.

A pattern declares junctions, boxes whose ports attach to junctions, and the
outer ports of the composite.  Feet wired to a common junction are identified
element-by-element (matched positionally after sorting by name), the apexes
are merged by :func:`stockflow.acset.pushout_quotient`, and each outer port
contributes one foot of the result.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .acset import Homomorphism, pushout_quotient, subpart
from .diagrams import (
    DiagramError,
    Foot,
    OpenStockFlow,
    StockFlowDiagram,
    SystemStructureDiagram,
    interface_part,
)


@dataclass
class Box:
    name: str
    ports: list[str]  # junction names, one per foot of the attached diagram


@dataclass
class WiringPattern:
    junctions: list[str]
    boxes: list[Box]
    outer_ports: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        declared = set(self.junctions)
        if len(declared) != len(self.junctions):
            raise DiagramError("duplicate junction name")
        for box in self.boxes:
            for port in box.ports:
                if port not in declared:
                    raise DiagramError(f"box {box.name!r} wires unknown junction {port!r}")
        for port in self.outer_ports:
            if port not in declared:
                raise DiagramError(f"outer port references unknown junction {port!r}")


def apex(open_diag: OpenStockFlow) -> StockFlowDiagram:
    """The underlying closed diagram, discarding feet and legs."""
    return open_diag.apex


def _foot_shape(ft: Foot) -> tuple[list[int], list[int], list[tuple[int, int]], list[int]]:
    """Name-sorted element orders plus the link pattern in sorted coordinates."""
    inst = ft.inst
    s_order = sorted(range(1, inst.n["S"] + 1), key=lambda i: (inst.name_of("S", i), i))
    sv_order = sorted(range(1, inst.n["SV"] + 1), key=lambda i: (inst.name_of("SV", i), i))
    s_pos = {e: k for k, e in enumerate(s_order)}
    sv_pos = {e: k for k, e in enumerate(sv_order)}
    link_keys = [
        (s_pos[subpart(inst, "lss", row)], sv_pos[subpart(inst, "lssv", row)])
        for row in range(1, inst.n["LS"] + 1)
    ]
    ls_order = sorted(range(1, inst.n["LS"] + 1), key=lambda row: (link_keys[row - 1], row))
    return s_order, sv_order, sorted(link_keys), ls_order


def oapply(pattern: WiringPattern, opens: list[OpenStockFlow]) -> OpenStockFlow:
    """Compose one open diagram per box; formulas ride along unchanged."""
    if len(opens) != len(pattern.boxes):
        raise DiagramError(
            f"pattern has {len(pattern.boxes)} boxes but {len(opens)} diagrams were given"
        )
    for box, open_diag in zip(pattern.boxes, opens):
        if len(box.ports) != len(open_diag.feet):
            raise DiagramError(
                f"box {box.name!r} has {len(box.ports)} ports but the diagram has "
                f"{len(open_diag.feet)} feet"
            )

    attachments: dict[str, list[tuple[int, int]]] = {j: [] for j in pattern.junctions}
    for box_i, box in enumerate(pattern.boxes):
        for port_i, junction in enumerate(box.ports):
            attachments[junction].append((box_i, port_i))

    parts = [open_diag.apex.inst for open_diag in opens]
    identifications: list[tuple[int, str, int, int, int]] = []
    junction_foot: dict[str, tuple[int, int]] = {}
    for junction, attached in attachments.items():
        if not attached:
            continue
        junction_foot[junction] = attached[0]
        base_box, base_port = attached[0]
        base_shape = _foot_shape(opens[base_box].feet[base_port])
        for box_i, port_i in attached[1:]:
            shape = _foot_shape(opens[box_i].feet[port_i])
            if (
                len(shape[0]) != len(base_shape[0])
                or len(shape[1]) != len(base_shape[1])
                or shape[2] != base_shape[2]
            ):
                raise DiagramError(f"junction {junction!r} joins non-isomorphic feet")
            for obj, key in (("S", 0), ("SV", 1), ("LS", 3)):
                base_leg = opens[base_box].legs[base_port]
                leg = opens[box_i].legs[port_i]
                for base_elem, elem in zip(base_shape[key], shape[key]):
                    identifications.append(
                        (
                            base_box,
                            obj,
                            base_leg.apply(obj, base_elem),
                            box_i,
                            leg.apply(obj, elem),
                        )
                    )

    glued, injections = pushout_quotient(parts, identifications)
    for obj, kind in (("S", "stock"), ("F", "flow"), ("V", "variable"), ("SV", "sum variable")):
        names = glued.names_of(obj)
        clash = sorted({nm for nm in names if names.count(nm) > 1})
        if clash:
            raise DiagramError(
                f"composition leaves duplicate {kind} name(s): {', '.join(clash)}"
                " (identify them through a junction or rename)"
            )

    expressions: dict[str, object] = {}
    glued_vars = glued.names_of("V")
    for open_diag, inj in zip(opens, injections):
        for v_idx, v_name in enumerate(open_diag.apex.variables, start=1):
            expressions[glued_vars[inj.apply("V", v_idx) - 1]] = open_diag.apex.expressions[v_name]
    composed = StockFlowDiagram(SystemStructureDiagram(glued), expressions)

    target = interface_part(glued)
    feet: list[Foot] = []
    legs: list[Homomorphism] = []
    for junction in pattern.outer_ports:
        if junction not in junction_foot:
            raise DiagramError(f"outer port {junction!r} is wired to no box")
        box_i, port_i = junction_foot[junction]
        ft = opens[box_i].feet[port_i]
        leg = opens[box_i].legs[port_i]
        inj = injections[box_i]
        comps = {
            obj: [inj.apply(obj, leg.apply(obj, e)) for e in range(1, ft.inst.n[obj] + 1)]
            for obj in ("S", "SV", "LS")
        }
        feet.append(ft)
        legs.append(Homomorphism(ft.inst, target, comps))
    return OpenStockFlow(composed, feet, legs)
