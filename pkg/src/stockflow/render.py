"""Graphviz DOT and CSV emission.

Stocks render as filled squares, sum variables as filled circles, auxiliary
variables as plaintext waypoints; each flow is a two-segment edge through its
variable's waypoint, labelled on the second segment.  The typed variant
colours every element by its image in the type system.  Output is
deterministic: node ids are s1.., v1.., sv1.. in table order.
"""
from __future__ import annotations

from typing import Sequence

from .acset import incident, subpart
from .diagrams import StockFlowDiagram, SystemStructureDiagram, _flatten
from .odes import Trajectory
from .stratify import TypedDiagram
from .views import CausalLoopGraph

# Default palettes for typed rendering (flow kinds, stock kinds, sum kinds).
FLOW_COLORS = ["antiquewhite4", "antiquewhite", "gold", "saddlebrown", "slateblue", "blueviolet", "olive"]
STOCK_COLORS = ["deeppink", "darkorchid", "darkred", "coral"]
SUM_COLORS = ["cornflowerblue", "cyan4", "cyan", "chartreuse"]


class RenderError(Exception):
    pass


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(**kwargs: str) -> str:
    body = ", ".join(f"{k}={_quote(v)}" for k, v in kwargs.items())
    return f" [{body}]"


def _emit_diagram(
    d: StockFlowDiagram | SystemStructureDiagram,
    stock_fill,
    sum_fill,
    var_color,
    flow_color,
) -> str:
    inst = d.inst
    lines = ["digraph G {", "  rankdir=LR;"]
    for i, name in enumerate(inst.names_of("S"), start=1):
        lines.append(
            f"  s{i}"
            + _attrs(label=name, shape="square", color="black", style="filled", fillcolor=stock_fill(i))
        )
    for i, name in enumerate(inst.names_of("SV"), start=1):
        lines.append(
            f"  sv{i}"
            + _attrs(label=name, shape="circle", color="black", style="filled", fillcolor=sum_fill(i))
        )
    for i, name in enumerate(inst.names_of("V"), start=1):
        lines.append(
            f"  v{i}" + _attrs(label=_flatten(name), shape="plaintext", fontcolor=var_color(i))
        )
    clouds = 0
    for f_idx, f_name in enumerate(inst.names_of("F"), start=1):
        v = subpart(inst, "fv", f_idx)
        color = flow_color(f_idx)
        ups = incident(inst, "ofn", f_idx)
        downs = incident(inst, "ifn", f_idx)
        if ups:
            head = f"s{subpart(inst, 'os', ups[0])}"
        else:
            clouds += 1
            head = f"cloud{clouds}"
            lines.append(f"  {head}" + _attrs(label="", shape="point", color=color))
        if downs:
            tail = f"s{subpart(inst, 'is', downs[0])}"
        else:
            clouds += 1
            tail = f"cloud{clouds}"
            lines.append(f"  {tail}" + _attrs(label="", shape="point", color=color))
        lines.append(f"  {head} -> v{v}" + _attrs(arrowhead="none", color=color))
        lines.append(f"  v{v} -> {tail}" + _attrs(label=_flatten(f_name), labelfontsize="6", color=color))
    for r in range(1, inst.n["LV"] + 1):
        lines.append(f"  s{subpart(inst, 'lvs', r)} -> v{subpart(inst, 'lvv', r)};")
    for r in range(1, inst.n["LS"] + 1):
        lines.append(f"  s{subpart(inst, 'lss', r)} -> sv{subpart(inst, 'lssv', r)};")
    for r in range(1, inst.n["LSV"] + 1):
        lines.append(f"  sv{subpart(inst, 'lsvsv', r)} -> v{subpart(inst, 'lsvv', r)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_dot(d: StockFlowDiagram | SystemStructureDiagram) -> str:
    return _emit_diagram(
        d,
        stock_fill=lambda i: "lightblue",
        sum_fill=lambda i: "lightgray",
        var_color=lambda i: "black",
        flow_color=lambda i: "black",
    )


def emit_dot_typed(
    t: TypedDiagram,
    flow_colors: Sequence[str] = FLOW_COLORS,
    stock_colors: Sequence[str] = STOCK_COLORS,
    sum_colors: Sequence[str] = SUM_COLORS,
) -> str:
    """Colour stocks/sums by their kind and flows (plus their variables) by
    the flow kind; the flow edge uses the layered `c:invis:c` style."""
    inst = t.diagram.inst
    kinds = t.type_system.inst
    for palette, obj in ((flow_colors, "F"), (stock_colors, "S"), (sum_colors, "SV")):
        if kinds.n[obj] > len(palette):
            raise RenderError(f"palette for {obj} has {len(palette)} colours, need {kinds.n[obj]}")

    def var_color(i: int) -> str:
        flows = incident(inst, "fv", i)
        if len(flows) != 1:
            return "black"
        return flow_colors[t.typing.apply("F", flows[0]) - 1]

    def flow_color(i: int) -> str:
        c = flow_colors[t.typing.apply("F", i) - 1]
        return f"{c}:invis:{c}"

    return _emit_diagram(
        t.diagram,
        stock_fill=lambda i: stock_colors[t.typing.apply("S", i) - 1],
        sum_fill=lambda i: sum_colors[t.typing.apply("SV", i) - 1],
        var_color=var_color,
        flow_color=flow_color,
    )


def emit_dot_causal(cl: CausalLoopGraph) -> str:
    lines = ["digraph G {", "  rankdir=LR;"]
    for i, name in enumerate(cl.nodes, start=1):
        lines.append(f"  n{i}" + _attrs(label=name))
    for s, t in cl.edges:
        lines.append(f"  n{s} -> n{t};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_csv(traj: Trajectory) -> str:
    """Header ``t,<stocks...>``; values at full double precision."""
    if not traj.states:
        raise RenderError("empty trajectory")
    names = list(traj.states[0])
    lines = [",".join(["t"] + names)]
    for t, state in zip(traj.times, traj.states):
        lines.append(",".join([repr(t)] + [repr(state[s]) for s in names]))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> Trajectory:
    """Inverse of :func:`emit_csv`."""
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    if not header or header[0] != "t":
        raise RenderError("first column must be t")
    names = header[1:]
    times = []
    states = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise RenderError(f"row has {len(cells)} cells, expected {len(header)}")
        times.append(float(cells[0]))
        states.append({s: float(x) for s, x in zip(names, cells[1:])})
    return Trajectory(times, states, {"method": "csv"})
