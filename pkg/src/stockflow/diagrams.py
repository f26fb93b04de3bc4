"""Stock-flow, system-structure and interface diagram types with builders.

The builders take the four-block layout used throughout the bundled models:
a stock block (per stock: inflows, outflows, linked variables, linked sum
variables), a flow block (flow -> rate variable), a variable block
(variable -> formula; absent for bare structures) and a sum block
(sum variable -> the variables it feeds).

Element order is fixed by the blocks: stocks, flows, variables and sum
variables in block order; inflow/outflow/link rows in stock-major order;
sum-variable links in sum-major order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .acset import (
    Homomorphism,
    Instance,
    add_part,
    empty_instance,
    incident,
    set_subpart,
    subpart,
    validate_instance,
)
from .expressions import Expression, identifiers, parse_expression
from .schema import schema_interface, schema_stockflow


class DiagramError(Exception):
    """A builder input that does not describe a well-formed diagram."""


@dataclass
class SystemStructureDiagram:
    inst: Instance

    @property
    def stocks(self) -> list[str]:
        return self.inst.names_of("S")

    @property
    def flows(self) -> list[str]:
        return self.inst.names_of("F")

    @property
    def variables(self) -> list[str]:
        return self.inst.names_of("V")

    @property
    def sum_variables(self) -> list[str]:
        return self.inst.names_of("SV")


@dataclass
class StockFlowDiagram:
    structure: SystemStructureDiagram
    expressions: dict[str, Expression]  # one formula per auxiliary variable

    @property
    def inst(self) -> Instance:
        return self.structure.inst

    @property
    def stocks(self) -> list[str]:
        return self.structure.stocks

    @property
    def flows(self) -> list[str]:
        return self.structure.flows

    @property
    def variables(self) -> list[str]:
        return self.structure.variables

    @property
    def sum_variables(self) -> list[str]:
        return self.structure.sum_variables


@dataclass
class Foot:
    inst: Instance  # over the interface schema


@dataclass
class OpenStockFlow:
    apex: StockFlowDiagram
    feet: list[Foot]
    legs: list[Homomorphism]  # foot -> interface part of the apex


StockSpec = tuple
_NONE = (None, (), [])


def _as_names(value) -> list[str]:
    """Normalize a block entry: a bare name, a sequence of names, or none."""
    if value in _NONE:
        return []
    if isinstance(value, str):
        return [value]
    return list(value)


def build_system_structure(
    stocks: Mapping[str, StockSpec] | Sequence[tuple[str, StockSpec]],
    flows: Mapping[str, str] | Sequence[tuple[str, str]],
    sums: Mapping[str, object] | Sequence[tuple[str, object]] = (),
    variable_order: Sequence[str] | None = None,
) -> SystemStructureDiagram:
    """Assemble the instance tables from the block layout (no formulas)."""
    stock_items = list(stocks.items() if isinstance(stocks, Mapping) else stocks)
    flow_items = list(flows.items() if isinstance(flows, Mapping) else flows)
    sum_items = list(sums.items() if isinstance(sums, Mapping) else sums)

    inst = empty_instance(schema_stockflow())

    stock_index: dict[str, int] = {}
    for name, _ in stock_items:
        if name in stock_index:
            raise DiagramError(f"duplicate stock {name!r}")
        stock_index[name] = add_part(inst, "S", name)

    flow_index: dict[str, int] = {}
    for name, _ in flow_items:
        if name in flow_index:
            raise DiagramError(f"duplicate flow {name!r}")
        flow_index[name] = add_part(inst, "F", name)

    # An explicit order (the formula block) wins; otherwise variables appear
    # in flow-block order, then any extras from links.
    var_index: dict[str, int] = {}
    if variable_order is not None:
        for var in variable_order:
            if var in var_index:
                raise DiagramError(f"duplicate variable {var!r}")
            var_index[var] = add_part(inst, "V", var)
    mentioned = [var for _, var in flow_items]
    mentioned += [var for _, spec in stock_items for var in _as_names(spec[2])]
    mentioned += [var for _, targets in sum_items for var in _as_names(targets)]
    for var in mentioned:
        if var not in var_index:
            if variable_order is not None:
                raise DiagramError(f"unknown variable {var!r}")
            var_index[var] = add_part(inst, "V", var)

    sum_index: dict[str, int] = {}
    for name, _ in sum_items:
        if name in sum_index:
            raise DiagramError(f"duplicate sum variable {name!r}")
        sum_index[name] = add_part(inst, "SV", name)

    for flow, var in flow_items:
        set_subpart(inst, "fv", flow_index[flow], var_index[var])

    def flow_of(name: str, context: str) -> int:
        if name not in flow_index:
            raise DiagramError(f"{context} references unknown flow {name!r}")
        return flow_index[name]

    for stock, spec in stock_items:
        if len(spec) != 4:
            raise DiagramError(f"stock {stock!r}: expected (inflows, outflows, variables, sums)")
        inflows, outflows, link_vars, link_sums = spec
        s = stock_index[stock]
        for flow in _as_names(inflows):
            row = add_part(inst, "I")
            set_subpart(inst, "is", row, s)
            set_subpart(inst, "ifn", row, flow_of(flow, f"stock {stock!r} inflow"))
        for flow in _as_names(outflows):
            row = add_part(inst, "O")
            set_subpart(inst, "os", row, s)
            set_subpart(inst, "ofn", row, flow_of(flow, f"stock {stock!r} outflow"))
        for var in _as_names(link_vars):
            row = add_part(inst, "LV")
            set_subpart(inst, "lvs", row, s)
            set_subpart(inst, "lvv", row, var_index[var])
        for sv in _as_names(link_sums):
            if sv not in sum_index:
                raise DiagramError(f"stock {stock!r} links unknown sum variable {sv!r}")
            row = add_part(inst, "LS")
            set_subpart(inst, "lss", row, s)
            set_subpart(inst, "lssv", row, sum_index[sv])

    for sv, targets in sum_items:
        for var in _as_names(targets):
            row = add_part(inst, "LSV")
            set_subpart(inst, "lsvsv", row, sum_index[sv])
            set_subpart(inst, "lsvv", row, var_index[var])

    clash = set(stock_index) & set(sum_index)
    if clash:
        # Formulas resolve identifiers by name, so this would be ambiguous.
        raise DiagramError(f"stock and sum variable share a name: {', '.join(sorted(clash))}")
    problems = validate_instance(inst)
    if problems:
        raise DiagramError("; ".join(problems))
    return SystemStructureDiagram(inst)


def build_stockflow(
    stocks,
    flows,
    variables: Mapping[str, object] | Sequence[tuple[str, object]],
    sums=(),
) -> StockFlowDiagram:
    """Like :func:`build_system_structure` plus a formula per variable; the
    formula block fixes the variable order."""
    var_items = list(variables.items() if isinstance(variables, Mapping) else variables)
    structure = build_system_structure(
        stocks, flows, sums, variable_order=[name for name, _ in var_items]
    )
    return attach_dynamics(structure, dict(var_items))


def attach_dynamics(
    structure: SystemStructureDiagram,
    exprs: Mapping[str, object],
) -> StockFlowDiagram:
    """Promote a structure to a stock-flow diagram by giving every auxiliary
    variable a formula (text or parsed).  Formulas may only mention linked
    quantities, parameters and ``t``."""
    inst = structure.inst
    compiled: dict[str, Expression] = {}
    for name, expr in exprs.items():
        compiled[name] = parse_expression(expr) if isinstance(expr, str) else expr

    var_names = structure.variables
    if len(set(var_names)) != len(var_names):
        raise DiagramError("variable names are not unique; formulas cannot be assigned")
    missing = [v for v in var_names if v not in compiled]
    if missing:
        raise DiagramError(f"missing formula for variable(s): {', '.join(missing)}")
    extra = [v for v in compiled if v not in var_names]
    if extra:
        raise DiagramError(f"formula for unknown variable(s): {', '.join(extra)}")

    stocks = set(structure.stocks)
    sums = set(structure.sum_variables)
    for v_idx, v_name in enumerate(var_names, start=1):
        linked_stocks = {
            inst.name_of("S", subpart(inst, "lvs", row))
            for row in incident(inst, "lvv", v_idx)
        }
        linked_sums = {
            inst.name_of("SV", subpart(inst, "lsvsv", row))
            for row in incident(inst, "lsvv", v_idx)
        }
        for ident in sorted(identifiers(compiled[v_name])):
            if ident in stocks and ident not in linked_stocks:
                raise DiagramError(f"variable {v_name!r} uses stock {ident!r} without a link")
            if ident in sums and ident not in linked_sums:
                raise DiagramError(f"variable {v_name!r} uses sum variable {ident!r} without a link")
    return StockFlowDiagram(structure, {v: compiled[v] for v in var_names})


def to_system_structure(d: StockFlowDiagram) -> SystemStructureDiagram:
    """Forget the formulas, keeping the instance unchanged."""
    return d.structure


def flatten_names(s: SystemStructureDiagram) -> SystemStructureDiagram:
    """Rewrite tuple-style composite names such as ``(inf, id_F)`` to plain
    labels: keep the first component not starting with ``id``, or ``id`` if
    every component does.  Plain names pass through unchanged."""
    inst = s.inst
    out = Instance(
        schema=inst.schema,
        n=dict(inst.n),
        columns={m: list(col) for m, col in inst.columns.items()},
        names={attr: [_flatten(nm) for nm in col] for attr, col in inst.names.items()},
    )
    for attr, col in out.names.items():
        dupes = {nm for nm in col if col.count(nm) > 1}
        if dupes:
            raise DiagramError(f"flattening collides on {attr}: {', '.join(sorted(dupes))}")
    return SystemStructureDiagram(out)


def _flatten(name: str) -> str:
    if "(" not in name and "," not in name:
        return name
    cleaned = name.replace("(", "").replace(")", "").replace(":", "").replace(" ", "")
    for part in cleaned.split(","):
        if not part.startswith("id"):
            return part
    return "id"


def foot(stock: str, sum_variable: str, links: Iterable[tuple[str, str]] = ()) -> Foot:
    """An interface with one stock, one sum variable and the given links."""
    inst = empty_instance(schema_interface())
    s = add_part(inst, "S", stock)
    sv = add_part(inst, "SV", sum_variable)
    for src, dst in links:
        if src != stock or dst != sum_variable:
            raise DiagramError(f"foot link ({src!r}, {dst!r}) references undeclared names")
        row = add_part(inst, "LS")
        set_subpart(inst, "lss", row, s)
        set_subpart(inst, "lssv", row, sv)
    return Foot(inst)


def interface_part(inst: Instance) -> Instance:
    """The stock/sum-variable/sum-link fragment of a stock-flow instance,
    with element indices unchanged."""
    out = empty_instance(schema_interface())
    for obj in ("S", "SV", "LS"):
        out.n[obj] = inst.n[obj]
    out.names["sname"] = list(inst.names["sname"])
    out.names["svname"] = list(inst.names["svname"])
    out.columns["lss"] = list(inst.columns["lss"])
    out.columns["lssv"] = list(inst.columns["lssv"])
    return out


def open_diagram(d: StockFlowDiagram, feet: Sequence[Foot]) -> OpenStockFlow:
    """Attach feet to a diagram, inferring each leg by unique name matching."""
    target = interface_part(d.inst)
    legs = []
    for ft in feet:
        comps: dict[str, list[int]] = {"S": [], "SV": [], "LS": []}
        for name in ft.inst.names_of("S"):
            comps["S"].append(_unique_named(d.inst, "S", name))
        for name in ft.inst.names_of("SV"):
            comps["SV"].append(_unique_named(d.inst, "SV", name))
        for row in range(1, ft.inst.n["LS"] + 1):
            s_img = comps["S"][subpart(ft.inst, "lss", row) - 1]
            sv_img = comps["SV"][subpart(ft.inst, "lssv", row) - 1]
            hits = [
                ls
                for ls in incident(d.inst, "lss", s_img)
                if subpart(d.inst, "lssv", ls) == sv_img
            ]
            if len(hits) != 1:
                raise DiagramError(
                    f"foot link {ft.inst.name_of('S', subpart(ft.inst, 'lss', row))!r} -> "
                    f"{ft.inst.name_of('SV', subpart(ft.inst, 'lssv', row))!r} matches {len(hits)} links"
                )
            comps["LS"].append(hits[0])
        legs.append(Homomorphism(ft.inst, target, comps))
    return OpenStockFlow(d, list(feet), legs)


def _unique_named(inst: Instance, obj: str, name: str) -> int:
    hits = [i + 1 for i, nm in enumerate(inst.names_of(obj)) if nm == name]
    if len(hits) != 1:
        kind = {"S": "stock", "SV": "sum variable"}.get(obj, obj)
        raise DiagramError(f"foot {kind} {name!r} matches {len(hits)} apex elements")
    return hits[0]


def upstream(d: StockFlowDiagram | SystemStructureDiagram, flow: str) -> str | None:
    """The stock the flow drains, or None for a source cloud."""
    inst = d.inst
    rows = incident(inst, "ofn", inst.index_of("F", flow))
    return inst.name_of("S", subpart(inst, "os", rows[0])) if rows else None


def downstream(d: StockFlowDiagram | SystemStructureDiagram, flow: str) -> str | None:
    """The stock the flow fills, or None for a sink cloud."""
    inst = d.inst
    rows = incident(inst, "ifn", inst.index_of("F", flow))
    return inst.name_of("S", subpart(inst, "is", rows[0])) if rows else None


def inflows_of(d: StockFlowDiagram | SystemStructureDiagram, stock: str) -> list[str]:
    inst = d.inst
    return [
        inst.name_of("F", subpart(inst, "ifn", row))
        for row in incident(inst, "is", inst.index_of("S", stock))
    ]


def outflows_of(d: StockFlowDiagram | SystemStructureDiagram, stock: str) -> list[str]:
    inst = d.inst
    return [
        inst.name_of("F", subpart(inst, "ofn", row))
        for row in incident(inst, "os", inst.index_of("S", stock))
    ]
