import random

import pytest

from stockflow import models
from stockflow.acset import (
    AcsetError,
    Homomorphism,
    add_part,
    canonical_sort,
    compose_hom,
    empty_instance,
    identity_hom,
    incident,
    is_natural,
    naturality_failures,
    pullback,
    pushout_quotient,
    set_subpart,
    subpart,
    validate_instance,
)
from stockflow.schema import schema_causalloop, schema_interface, schema_stockflow


def test_schema_constants():
    sf = schema_stockflow()
    assert len(sf.objects) == 9
    assert len(sf.morphisms) == 11
    assert len(sf.name_attributes) == 4
    iface = schema_interface()
    assert iface.objects == ("S", "SV", "LS")
    assert {m[0] for m in iface.morphisms} == {"lss", "lssv"}
    cl = schema_causalloop()
    assert cl.objects == ("N", "E")
    assert {m[0] for m in cl.morphisms} == {"s", "t"}


def test_add_part_indices():
    inst = empty_instance(schema_stockflow())
    assert add_part(inst, "S", "S") == 1
    for name in ("E", "I", "R"):
        add_part(inst, "S", name)
    assert inst.n["S"] == 4
    for k in range(8):
        idx = add_part(inst, "F", f"f{k}")
    assert idx == 8 and inst.n["F"] == 8
    with pytest.raises(AcsetError):
        add_part(inst, "Q")


def test_subpart_write_read():
    inst = empty_instance(schema_stockflow())
    add_part(inst, "S", "S")
    add_part(inst, "V", "v")
    lv = add_part(inst, "LV")
    set_subpart(inst, "lvs", lv, 1)
    assert subpart(inst, "lvs", lv) == 1
    with pytest.raises(AcsetError):
        subpart(inst, "lvv", lv)  # never assigned
    with pytest.raises(AcsetError):
        set_subpart(inst, "lvs", lv, 2)  # out of range value
    with pytest.raises(AcsetError):
        set_subpart(inst, "lvs", 5, 1)  # out of range element


def test_seir_subpart_and_incident():
    seir = models.seir().inst
    inf = seir.index_of("F", "inf")
    assert seir.name_of("V", subpart(seir, "fv", inf)) == "v_inf"

    s = seir.index_of("S", "S")
    rows = incident(seir, "is", s)
    assert [seir.name_of("F", subpart(seir, "ifn", r)) for r in rows] == ["birth"]

    i = seir.index_of("S", "I")
    rows = incident(seir, "os", i)
    assert {seir.name_of("F", subpart(seir, "ofn", r)) for r in rows} == {"rec", "deathI"}

    empty = empty_instance(schema_causalloop())
    add_part(empty, "N", "x")
    assert incident(empty, "s", 1) == []


def test_incident_subpart_consistency():
    # e is incident to v exactly when its column points at v.
    for inst in (models.seir().inst, models.sve().inst, models.type_system().inst):
        for m, dom, cod in inst.schema.morphisms:
            for v in range(1, inst.n[cod] + 1):
                hits = set(incident(inst, m, v))
                for e in range(1, inst.n[dom] + 1):
                    assert (e in hits) == (subpart(inst, m, e) == v)


def test_validate_bundled_models_clean():
    for d in (models.seir(), models.sve(), models.sis(), models.type_system(),
              models.seir_structure(), models.age_strata_structure()):
        assert validate_instance(d.inst) == []


def test_validate_flags_shared_inflow():
    inst = empty_instance(schema_stockflow())
    add_part(inst, "S", "A")
    add_part(inst, "S", "B")
    add_part(inst, "F", "f")
    add_part(inst, "V", "v")
    set_subpart(inst, "fv", 1, 1)
    for s in (1, 2):
        row = add_part(inst, "I")
        set_subpart(inst, "is", row, s)
        set_subpart(inst, "ifn", row, 1)
    problems = validate_instance(inst)
    assert len(problems) == 1 and "share flow" in problems[0]


def test_validate_flags_dangling_column():
    inst = empty_instance(schema_stockflow())
    add_part(inst, "S", "A")
    add_part(inst, "F", "f")
    add_part(inst, "V", "v")
    set_subpart(inst, "fv", 1, 1)
    row = add_part(inst, "O")
    set_subpart(inst, "os", row, 1)
    inst.columns["ofn"][row - 1] = 7  # bypass the setter to plant a dangler
    problems = validate_instance(inst)
    assert len(problems) == 1 and "outside" in problems[0]


def test_identity_is_natural():
    seir = models.seir().inst
    assert is_natural(identity_hom(seir))


def test_bundled_typing_is_natural():
    t = models.seir_typed()
    assert is_natural(t.typing)
    assert naturality_failures(t.typing) == []


def test_mutated_typing_fails():
    t = models.seir_typed()
    comp = dict(t.typing.components)
    flows = list(comp["F"])
    flows[0] = 3 if flows[0] != 3 else 4
    comp["F"] = flows
    broken = Homomorphism(t.typing.source, t.typing.target, comp)
    assert not is_natural(broken)
    assert len(naturality_failures(broken)) >= 1


def test_identity_composition():
    seir = models.seir().inst
    t = models.seir_typed().typing
    assert compose_hom(identity_hom(t.source), t).components == t.components
    assert compose_hom(t, identity_hom(t.target)).components == t.components


def _random_graph(rng, max_n=6):
    inst = empty_instance(schema_causalloop())
    for k in range(rng.randint(1, max_n)):
        add_part(inst, "N", f"n{k}")
    for _ in range(rng.randint(0, max_n)):
        e = add_part(inst, "E")
        set_subpart(inst, "s", e, rng.randint(1, inst.n["N"]))
        set_subpart(inst, "t", e, rng.randint(1, inst.n["N"]))
    return inst


def _random_hom_into(rng, target, max_n=6):
    """A random instance with a natural map into `target`, built by choosing
    images first and then only structure the images support."""
    source = empty_instance(schema_causalloop())
    n_comp = []
    for k in range(rng.randint(1, max_n)):
        add_part(source, "N", f"m{k}")
        n_comp.append(rng.randint(1, target.n["N"]))
    e_comp = []
    if target.n["E"]:
        for _ in range(rng.randint(0, max_n)):
            te = rng.randint(1, target.n["E"])
            src_candidates = [i for i, v in enumerate(n_comp, 1) if v == subpart(target, "s", te)]
            dst_candidates = [i for i, v in enumerate(n_comp, 1) if v == subpart(target, "t", te)]
            if not src_candidates or not dst_candidates:
                continue
            e = add_part(source, "E")
            set_subpart(source, "s", e, rng.choice(src_candidates))
            set_subpart(source, "t", e, rng.choice(dst_candidates))
            e_comp.append(te)
    return Homomorphism(source, target, {"N": n_comp, "E": e_comp})


def test_composition_of_naturals_is_natural():
    rng = random.Random(7)
    for _ in range(50):
        c = _random_graph(rng)
        h = _random_hom_into(rng, c)
        g = _random_hom_into(rng, h.source)
        assert is_natural(g) and is_natural(h)
        assert is_natural(compose_hom(g, h))


def test_composition_associative():
    rng = random.Random(8)
    for _ in range(30):
        d = _random_graph(rng, max_n=3)
        h3 = _random_hom_into(rng, d, max_n=3)
        h2 = _random_hom_into(rng, h3.source, max_n=3)
        h1 = _random_hom_into(rng, h2.source, max_n=3)
        lhs = compose_hom(compose_hom(h1, h2), h3)
        rhs = compose_hom(h1, compose_hom(h2, h3))
        assert lhs.components == rhs.components


def test_kernel_endpoint_mismatches_are_rejected():
    seir = models.seir().inst
    sve = models.sve().inst
    with pytest.raises(AcsetError):
        compose_hom(identity_hom(seir), identity_hom(sve))
    with pytest.raises(AcsetError):
        pullback(identity_hom(seir), identity_hom(sve))
    cl = empty_instance(schema_causalloop())
    with pytest.raises(AcsetError):
        pullback(identity_hom(seir), identity_hom(cl))


def test_pushout_single_part_is_copy():
    seir = models.seir().inst
    out, (inj,) = pushout_quotient([seir], [])
    assert out == seir
    assert inj.components == identity_hom(seir).components


def test_pushout_glues_single_stock():
    a = empty_instance(schema_stockflow())
    add_part(a, "S", "S")
    b = empty_instance(schema_stockflow())
    add_part(b, "S", "S")
    out, injections = pushout_quotient([a, b], [(0, "S", 1, 1, 1)])
    assert out.n["S"] == 1
    assert all(inj.components["S"] == [1] for inj in injections)


def test_pushout_rejects_bad_references():
    a = empty_instance(schema_stockflow())
    add_part(a, "S", "S")
    with pytest.raises(AcsetError):
        pushout_quotient([a, a], [(0, "S", 1, 1, 5)])
    with pytest.raises(AcsetError):
        pushout_quotient([a, a], [(0, "Q", 1, 1, 1)])


def test_pushout_seir_sve_stock_counts():
    seir = models.seir().inst
    sve = models.sve().inst
    idents = []
    for name in ("S", "E", "I"):
        idents.append((0, "S", seir.index_of("S", name), 1, sve.index_of("S", name)))
    idents.append((0, "SV", 1, 1, 1))
    out, _ = pushout_quotient([seir, sve], idents)
    assert out.n["S"] == 5
    assert out.n["SV"] == 1
    assert sorted(out.names_of("S")) == ["E", "I", "R", "S", "V"]


def test_pushout_count_law_matches_independent_union_find():
    # Independent oracle: count classes over the disjoint union using a plain
    # dict-based partition refinement, including morphism congruence.
    rng = random.Random(21)
    for _ in range(25):
        parts = [_random_graph(rng, max_n=4) for _ in range(rng.randint(1, 3))]
        idents = []
        for _ in range(rng.randint(0, 4)):
            obj = rng.choice(["N", "E"])
            pa, pb = rng.randrange(len(parts)), rng.randrange(len(parts))
            if parts[pa].n[obj] == 0 or parts[pb].n[obj] == 0:
                continue
            idents.append((pa, obj, rng.randint(1, parts[pa].n[obj]), pb, rng.randint(1, parts[pb].n[obj])))
        out, injections = pushout_quotient(parts, idents)

        classes = {obj: {} for obj in ("N", "E")}
        def find(obj, key):
            while classes[obj].get(key, key) != key:
                key = classes[obj][key]
            return key
        def union(obj, a, b):
            ra, rb = find(obj, a), find(obj, b)
            if ra != rb:
                classes[obj][max(ra, rb)] = min(ra, rb)
        for pa, obj, ea, pb, eb in idents:
            union(obj, (pa, ea), (pb, eb))
        changed = True
        while changed:
            changed = False
            for m, dom, cod in parts[0].schema.morphisms:
                images = {}
                for pi, part in enumerate(parts):
                    for e in range(1, part.n[dom] + 1):
                        root = find(dom, (pi, e))
                        img = find(cod, (pi, subpart(part, m, e)))
                        if root in images and images[root] != img:
                            union(cod, images[root], img)
                            changed = True
                        images[root] = find(cod, img)
        for obj in ("N", "E"):
            total = sum(p.n[obj] for p in parts)
            keys = [(pi, e) for pi, p in enumerate(parts) for e in range(1, p.n[obj] + 1)]
            n_classes = len({find(obj, k) for k in keys})
            merges = total - n_classes
            assert out.n[obj] == total - merges
        for inj in injections:
            assert is_natural(inj)


def test_pullback_full_product_over_singleton_types():
    ts = models.type_system()
    t_seir = models.seir_typed(ts)
    t_age = models.age_strata_typed(ts)
    result = pullback(t_seir.typing, t_age.typing)
    assert result.apex.n["S"] == 4 * 3  # a single stock type forces the product


def test_pullback_flow_count_against_enumeration_oracle():
    ts = models.type_system()
    t_seir = models.seir_typed(ts)
    t_age = models.age_strata_typed(ts)
    result = pullback(t_seir.typing, t_age.typing)
    for obj in result.apex.schema.objects:
        expected = sum(
            1
            for i in range(t_seir.typing.source.n[obj])
            for j in range(t_age.typing.source.n[obj])
            if t_seir.typing.components[obj][i] == t_age.typing.components[obj][j]
        )
        assert result.apex.n[obj] == expected
    assert result.apex.n["F"] == 30
    assert is_natural(result.leg1) and is_natural(result.leg2)


def test_pullback_square_commutes():
    ts = models.type_system()
    t_seir = models.seir_typed(ts)
    t_age = models.age_strata_typed(ts)
    result = pullback(t_seir.typing, t_age.typing)
    via_left = compose_hom(result.leg1, t_seir.typing)
    via_right = compose_hom(result.leg2, t_age.typing)
    assert via_left.components == via_right.components


def test_pullback_of_identities_is_identity():
    seir = models.seir().inst
    ident = identity_hom(seir)
    result = pullback(ident, ident)
    assert {o: result.apex.n[o] for o in seir.schema.objects} == dict(seir.n)
    assert result.leg1.components == identity_hom(seir).components


def test_pullback_names_concatenate():
    ts = models.type_system()
    result = pullback(models.sis_typed(ts).typing, models.sex_strata_typed(ts).typing)
    assert result.apex.names_of("S") == ["SF", "SM", "IF", "IM"]
    assert "v_birthsv_birthsF" in result.apex.names_of("V")


def test_pullback_universal_property_exhaustive():
    # Desk-scale check: every commuting cone factors uniquely through the apex.
    rng = random.Random(42)
    for _ in range(20):
        t = _random_graph(rng, max_n=2)
        left = _random_hom_into(rng, t, max_n=3)
        right = _random_hom_into(rng, t, max_n=3)
        result = pullback(left, right)
        apex = result.apex
        u = _random_hom_into(rng, apex, max_n=2)
        q1 = compose_hom(u, result.leg1)
        q2 = compose_hom(u, result.leg2)
        # Exhaustively enumerate candidate maps Q -> apex.
        q = u.source
        candidates = [[]]
        for obj in ("N", "E"):
            new = []
            for partial in candidates:
                options = range(1, apex.n[obj] + 1)
                stack = [[]]
                for _ in range(q.n[obj]):
                    stack = [pre + [o] for pre in stack for o in options]
                for comp in stack:
                    new.append(partial + [comp])
            candidates = new
        matches = []
        for n_comp, e_comp in candidates:
            w = Homomorphism(q, apex, {"N": n_comp, "E": e_comp})
            if (
                compose_hom(w, result.leg1).components == q1.components
                and compose_hom(w, result.leg2).components == q2.components
            ):
                matches.append(w)
        assert len(matches) == 1
        assert matches[0].components == u.components


def test_canonical_sort_is_isomorphism_invariant():
    seir = models.seir().inst
    rng = random.Random(5)
    for _ in range(10):
        # A random relabelling of every table is isomorphic to the original.
        perm = {}
        back = {}
        for obj in seir.schema.objects:
            order = list(range(1, seir.n[obj] + 1))
            rng.shuffle(order)
            perm[obj] = order  # new position k holds old element order[k]
            back[obj] = {old: k + 1 for k, old in enumerate(order)}
        shuffled = empty_instance(seir.schema)
        for obj in seir.schema.objects:
            shuffled.n[obj] = seir.n[obj]
            attr = seir.schema.name_attribute_of(obj)
            if attr is not None:
                shuffled.names[attr] = [seir.names[attr][old - 1] for old in perm[obj]]
        for m, dom, cod in seir.schema.morphisms:
            shuffled.columns[m] = [
                back[cod][seir.columns[m][old - 1]] for old in perm[dom]
            ]
        assert canonical_sort(shuffled) == canonical_sort(seir)
