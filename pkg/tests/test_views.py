from stockflow import models
from stockflow.diagrams import build_stockflow, to_system_structure
from stockflow.views import to_causal_loop


def test_seir_node_and_edge_counts():
    cl = to_causal_loop(models.seir())
    assert cl.inst.n["N"] == 13  # 4 stocks + 1 sum + 8 variables
    assert cl.inst.n["E"] == 25  # 8 LV + 4 LS + 2 LSV + 4 I + 7 O


def test_seir_node_order_and_flow_labels():
    cl = to_causal_loop(models.seir())
    assert cl.nodes[:5] == ["S", "E", "I", "R", "N"]
    # fv is one-to-one here, so variable nodes borrow the flow names
    assert cl.nodes[5:] == ["birth", "incid", "inf", "rec", "deathS", "deathE", "deathI", "deathR"]


def test_edge_sources_and_targets_follow_the_rules():
    d = models.seir()
    inst = d.inst
    cl = to_causal_loop(d)
    n_stocks, n_sums = inst.n["S"], inst.n["SV"]
    edges = cl.edges
    lv, ls, lsv = inst.n["LV"], inst.n["LS"], inst.n["LSV"]
    for s, t in edges[:lv]:  # stock -> variable
        assert s <= n_stocks and t > n_stocks + n_sums
    for s, t in edges[lv:lv + ls]:  # stock -> sum
        assert s <= n_stocks and n_stocks < t <= n_stocks + n_sums
    for s, t in edges[lv + ls:lv + ls + lsv]:  # sum -> variable
        assert n_stocks < s <= n_stocks + n_sums and t > n_stocks + n_sums
    for s, t in edges[lv + ls + lsv:lv + ls + lsv + inst.n["I"]]:  # variable -> stock
        assert s > n_stocks + n_sums and t <= n_stocks
    for s, t in edges[lv + ls + lsv + inst.n["I"]:]:  # stock -> variable
        assert s <= n_stocks and t > n_stocks + n_sums


def test_seir_exact_edge_endpoints():
    # Independent reconstruction of the edge rules straight from the tables.
    d = models.seir()
    inst = d.inst
    n_s, n_sv = inst.n["S"], inst.n["SV"]
    var = lambda v: n_s + n_sv + v
    expected = []
    for r in range(1, inst.n["LV"] + 1):
        expected.append((inst.columns["lvs"][r - 1], var(inst.columns["lvv"][r - 1])))
    for r in range(1, inst.n["LS"] + 1):
        expected.append((inst.columns["lss"][r - 1], n_s + inst.columns["lssv"][r - 1]))
    for r in range(1, inst.n["LSV"] + 1):
        expected.append((n_s + inst.columns["lsvsv"][r - 1], var(inst.columns["lsvv"][r - 1])))
    for r in range(1, inst.n["I"] + 1):
        flow = inst.columns["ifn"][r - 1]
        expected.append((var(inst.columns["fv"][flow - 1]), inst.columns["is"][r - 1]))
    for r in range(1, inst.n["O"] + 1):
        flow = inst.columns["ofn"][r - 1]
        expected.append((inst.columns["os"][r - 1], var(inst.columns["fv"][flow - 1])))
    assert to_causal_loop(d).edges == expected


def test_empty_diagram_gives_empty_graph():
    d = build_stockflow({}, {}, {}, {})
    cl = to_causal_loop(d)
    assert cl.inst.n["N"] == 0 and cl.inst.n["E"] == 0


def test_minimal_two_cycle():
    d = build_stockflow(
        {"X": ("f", "f", None, None)},
        {"f": "v"},
        {"v": "1.0"},
    )
    cl = to_causal_loop(d)
    assert cl.inst.n["N"] == 2
    assert sorted(cl.edges) == [(1, 2), (2, 1)]


def test_count_law_on_bundled_models():
    for d in (models.seir(), models.sve(), models.sis(), models.sis_sex()):
        cl = to_causal_loop(d)
        inst = d.inst
        assert cl.inst.n["N"] == inst.n["S"] + inst.n["SV"] + inst.n["V"]
        assert cl.inst.n["E"] == (
            inst.n["LV"] + inst.n["LS"] + inst.n["LSV"] + inst.n["I"] + inst.n["O"]
        )


def test_triangle_of_semantics_commutes():
    for d in (models.seir(), models.sve(), models.sis()):
        direct = to_causal_loop(d)
        via_structure = to_causal_loop(to_system_structure(d))
        assert direct.inst == via_structure.inst


def test_shared_variable_keeps_its_own_label():
    d = build_stockflow(
        {"A": (None, ("f", "g"), "v", None), "B": (("f", "g"), None, None, None)},
        {"f": "v", "g": "v"},  # two flows share one rate variable
        {"v": "A"},
    )
    cl = to_causal_loop(d)
    assert cl.nodes == ["A", "B", "v"]
