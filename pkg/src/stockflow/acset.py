"""Generic instance store over a fixed schema, plus the categorical kernels.

An :class:`Instance` is a categorical database: one table per schema object,
one foreign-key column per morphism, one text column per name attribute.
Element identity is a dense 1-based integer per table; tables are append-only.

On top of instances live :class:`Homomorphism` (structure-preserving maps,
checked by :func:`is_natural`), the quotient used for gluing
(:func:`pushout_quotient`, a coproduct followed by a union-find coequalizer)
and the matched product used for stratification (:func:`pullback`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .schema import SchemaDef


class AcsetError(Exception):
    """Structural misuse of an instance, homomorphism or kernel operation."""


@dataclass
class Instance:
    schema: SchemaDef
    n: dict[str, int] = field(default_factory=dict)
    columns: dict[str, list[int | None]] = field(default_factory=dict)
    names: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for obj in self.schema.objects:
            self.n.setdefault(obj, 0)
        for m, _, _ in self.schema.morphisms:
            self.columns.setdefault(m, [])
        for attr, _ in self.schema.name_attributes:
            self.names.setdefault(attr, [])

    def name_of(self, obj: str, index: int) -> str:
        attr = self.schema.name_attribute_of(obj)
        if attr is None:
            raise AcsetError(f"object {obj!r} has no name attribute")
        return self.names[attr][index - 1]

    def names_of(self, obj: str) -> list[str]:
        attr = self.schema.name_attribute_of(obj)
        if attr is None:
            raise AcsetError(f"object {obj!r} has no name attribute")
        return list(self.names[attr])

    def index_of(self, obj: str, name: str) -> int:
        """1-based index of the uniquely named element of `obj`."""
        hits = [i + 1 for i, nm in enumerate(self.names_of(obj)) if nm == name]
        if not hits:
            raise AcsetError(f"no {obj} element named {name!r}")
        if len(hits) > 1:
            raise AcsetError(f"ambiguous {obj} name {name!r}")
        return hits[0]


def empty_instance(schema: SchemaDef) -> Instance:
    return Instance(schema=schema)


def add_part(inst: Instance, obj: str, name: str = "") -> int:
    """Append a fresh element to `obj`; its outgoing columns start unset."""
    if obj not in inst.schema.objects:
        raise AcsetError(f"unknown object: {obj!r}")
    inst.n[obj] += 1
    for m, dom, _ in inst.schema.morphisms:
        if dom == obj:
            inst.columns[m].append(None)
    attr = inst.schema.name_attribute_of(obj)
    if attr is not None:
        inst.names[attr].append(name)
    return inst.n[obj]


def set_subpart(inst: Instance, morphism: str, element: int, value: int) -> None:
    _, dom, cod = inst.schema.morphism(morphism)
    if not 1 <= element <= inst.n[dom]:
        raise AcsetError(f"{morphism}: element {element} out of range for {dom}")
    if not 1 <= value <= inst.n[cod]:
        raise AcsetError(f"{morphism}: value {value} out of range for {cod}")
    inst.columns[morphism][element - 1] = value


def subpart(inst: Instance, morphism: str, element: int) -> int:
    _, dom, _ = inst.schema.morphism(morphism)
    if not 1 <= element <= inst.n[dom]:
        raise AcsetError(f"{morphism}: element {element} out of range for {dom}")
    value = inst.columns[morphism][element - 1]
    if value is None:
        raise AcsetError(f"{morphism}: element {element} is unset")
    return value


def incident(inst: Instance, morphism: str, value: int) -> list[int]:
    """All domain elements whose column equals `value`, ascending."""
    _, _, cod = inst.schema.morphism(morphism)
    if not 1 <= value <= inst.n[cod]:
        raise AcsetError(f"{morphism}: value {value} out of range for {cod}")
    return [i + 1 for i, v in enumerate(inst.columns[morphism]) if v == value]


def validate_instance(inst: Instance) -> list[str]:
    """Invariant violations as printable strings; empty means valid."""
    out: list[str] = []
    for m, dom, cod in inst.schema.morphisms:
        col = inst.columns[m]
        if len(col) != inst.n[dom]:
            out.append(f"column {m}: length {len(col)} != |{dom}| = {inst.n[dom]}")
            continue
        for i, v in enumerate(col, start=1):
            if v is None:
                out.append(f"column {m}: element {i} is unset")
            elif not 1 <= v <= inst.n[cod]:
                out.append(f"column {m}: element {i} points to {v}, outside {cod} (1..{inst.n[cod]})")
    for attr, carrier in inst.schema.name_attributes:
        if len(inst.names[attr]) != inst.n[carrier]:
            out.append(f"names {attr}: length {len(inst.names[attr])} != |{carrier}| = {inst.n[carrier]}")
    # Each flow may feed at most one downstream and one upstream stock.
    for m in ("ifn", "ofn"):
        if any(mm[0] == m for mm in inst.schema.morphisms):
            seen: dict[int, int] = {}
            for i, v in enumerate(inst.columns[m], start=1):
                if v is None:
                    continue
                if v in seen:
                    out.append(f"column {m}: elements {seen[v]} and {i} share flow {v}")
                else:
                    seen[v] = i
    return out


@dataclass
class Homomorphism:
    source: Instance
    target: Instance
    components: dict[str, list[int]]  # per object: 1-based target indices

    def apply(self, obj: str, index: int) -> int:
        return self.components[obj][index - 1]


def identity_hom(inst: Instance) -> Homomorphism:
    comps = {obj: list(range(1, inst.n[obj] + 1)) for obj in inst.schema.objects}
    return Homomorphism(inst, inst, comps)


def compose_hom(g: Homomorphism, h: Homomorphism) -> Homomorphism:
    """Composite mapping each element through `g` and then `h`."""
    if g.target is not h.source and g.target != h.source:
        raise AcsetError("compose_hom: codomain of first map != domain of second")
    comps = {
        obj: [h.components[obj][v - 1] for v in g.components[obj]]
        for obj in g.source.schema.objects
    }
    return Homomorphism(g.source, h.target, comps)


def _check_components(h: Homomorphism) -> None:
    if h.source.schema != h.target.schema:
        raise AcsetError("homomorphism endpoints have different schemas")
    for obj in h.source.schema.objects:
        comp = h.components.get(obj)
        if comp is None or len(comp) != h.source.n[obj]:
            raise AcsetError(f"component {obj} is not total")
        for v in comp:
            if not 1 <= v <= h.target.n[obj]:
                raise AcsetError(f"component {obj} maps outside the target")


def naturality_failures(h: Homomorphism) -> list[tuple[str, int]]:
    """(morphism, source element) pairs whose square fails to commute.

    Name attributes are deliberately ignored: maps need not preserve labels.
    """
    _check_components(h)
    failures: list[tuple[str, int]] = []
    for m, dom, cod in h.source.schema.morphisms:
        for i in range(1, h.source.n[dom] + 1):
            via_source = h.source.columns[m][i - 1]
            if via_source is None:
                failures.append((m, i))
                continue
            lhs = h.components[cod][via_source - 1]
            rhs = h.target.columns[m][h.components[dom][i - 1] - 1]
            if lhs != rhs:
                failures.append((m, i))
    return failures


def is_natural(h: Homomorphism) -> bool:
    return not naturality_failures(h)


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> bool:
        """Merge the classes of i and j; the smaller index wins as root."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


def pushout_quotient(
    parts: list[Instance],
    identifications: list[tuple[int, str, int, int, int]],
) -> tuple[Instance, list[Homomorphism]]:
    """Glue `parts` along `identifications`, returning the quotient and the
    injection of each part into it.

    Each identification is ``(part_a, object, element_a, part_b, element_b)``
    with 0-based part positions and 1-based elements.  The quotient is the
    disjoint union with identified elements merged; merging is closed under
    the schema morphisms so columns stay well defined even on inputs that are
    not leg-generated.  A merged element keeps the lexicographically first of
    its names; element order follows the smallest disjoint-union index.
    """
    if not parts:
        raise AcsetError("pushout_quotient: need at least one part")
    schema = parts[0].schema
    for p in parts:
        if p.schema != schema:
            raise AcsetError("pushout_quotient: parts over different schemas")

    offsets: dict[str, list[int]] = {obj: [] for obj in schema.objects}
    totals: dict[str, int] = {}
    for obj in schema.objects:
        acc = 0
        for p in parts:
            offsets[obj].append(acc)
            acc += p.n[obj]
        totals[obj] = acc

    uf = {obj: _UnionFind(totals[obj]) for obj in schema.objects}
    for part_a, obj, elem_a, part_b, elem_b in identifications:
        if obj not in schema.objects:
            raise AcsetError(f"identification on unknown object {obj!r}")
        for part_i, elem in ((part_a, elem_a), (part_b, elem_b)):
            if not 0 <= part_i < len(parts):
                raise AcsetError(f"identification references part {part_i}")
            if not 1 <= elem <= parts[part_i].n[obj]:
                raise AcsetError(f"identification references {obj} element {elem} of part {part_i}")
        uf[obj].union(
            offsets[obj][part_a] + elem_a - 1,
            offsets[obj][part_b] + elem_b - 1,
        )

    def global_image(m: str, dom: str, cod: str, g: int) -> int | None:
        part_i = 0
        while part_i + 1 < len(parts) and offsets[dom][part_i + 1] <= g:
            part_i += 1
        local = g - offsets[dom][part_i]
        v = parts[part_i].columns[m][local]
        return None if v is None else offsets[cod][part_i] + v - 1

    # Close the merge relation under the morphisms so columns are single-valued.
    changed = True
    while changed:
        changed = False
        for m, dom, cod in schema.morphisms:
            image_root: dict[int, int] = {}
            for g in range(totals[dom]):
                img = global_image(m, dom, cod, g)
                if img is None:
                    continue
                root = uf[dom].find(g)
                img_root = uf[cod].find(img)
                if root in image_root:
                    if uf[cod].union(image_root[root], img_root):
                        changed = True
                        image_root[root] = uf[cod].find(img_root)
                else:
                    image_root[root] = img_root

    reps: dict[str, list[int]] = {}
    index_of_root: dict[str, dict[int, int]] = {}
    for obj in schema.objects:
        roots = sorted({uf[obj].find(g) for g in range(totals[obj])})
        reps[obj] = roots
        index_of_root[obj] = {r: k + 1 for k, r in enumerate(roots)}

    out = empty_instance(schema)
    for obj in schema.objects:
        attr = schema.name_attribute_of(obj)
        out.n[obj] = len(reps[obj])
        if attr is not None:
            merged_names: dict[int, list[str]] = {r: [] for r in reps[obj]}
            for part_i, p in enumerate(parts):
                for local in range(p.n[obj]):
                    g = offsets[obj][part_i] + local
                    merged_names[uf[obj].find(g)].append(p.names[attr][local])
            out.names[attr] = [min(merged_names[r]) for r in reps[obj]]
    for m, dom, cod in schema.morphisms:
        col: list[int | None] = [None] * out.n[dom]
        for g in range(totals[dom]):
            img = global_image(m, dom, cod, g)
            if img is None:
                continue
            col[index_of_root[dom][uf[dom].find(g)] - 1] = index_of_root[cod][uf[cod].find(img)]
        out.columns[m] = col

    injections = []
    for part_i, p in enumerate(parts):
        comps = {
            obj: [
                index_of_root[obj][uf[obj].find(offsets[obj][part_i] + local)]
                for local in range(p.n[obj])
            ]
            for obj in schema.objects
        }
        injections.append(Homomorphism(p, out, comps))
    return out, injections


@dataclass
class PullbackResult:
    apex: Instance
    leg1: Homomorphism  # apex -> left source
    leg2: Homomorphism  # apex -> right source
    pairs: dict[str, list[tuple[int, int]]]  # per object: (left, right) indices


def pullback(left: Homomorphism, right: Homomorphism) -> PullbackResult:
    """Fiber product of two maps into a shared target.

    Elements of the apex are the (left, right) pairs agreeing in the target,
    enumerated in lexicographic order; a paired element is named by the
    punctuation-free concatenation of its component names.
    """
    if left.source.schema != right.source.schema or left.target != right.target:
        raise AcsetError("pullback: maps must share schema and target")
    schema = left.source.schema

    pairs: dict[str, list[tuple[int, int]]] = {}
    pair_index: dict[str, dict[tuple[int, int], int]] = {}
    for obj in schema.objects:
        lst = [
            (i, j)
            for i in range(1, left.source.n[obj] + 1)
            for j in range(1, right.source.n[obj] + 1)
            if left.components[obj][i - 1] == right.components[obj][j - 1]
        ]
        pairs[obj] = lst
        pair_index[obj] = {p: k + 1 for k, p in enumerate(lst)}

    apex = empty_instance(schema)
    for obj in schema.objects:
        apex.n[obj] = len(pairs[obj])
        attr = schema.name_attribute_of(obj)
        if attr is not None:
            apex.names[attr] = [
                _strip_punctuation(left.source.names[attr][i - 1])
                + _strip_punctuation(right.source.names[attr][j - 1])
                for i, j in pairs[obj]
            ]
    for m, dom, cod in schema.morphisms:
        col: list[int | None] = []
        for i, j in pairs[dom]:
            vi = left.source.columns[m][i - 1]
            vj = right.source.columns[m][j - 1]
            if vi is None or vj is None:
                raise AcsetError(f"pullback: column {m} has unset entries")
            key = (vi, vj)
            if key not in pair_index[cod]:
                raise AcsetError(f"pullback: column {m} image disagrees in the target (maps not natural?)")
            col.append(pair_index[cod][key])
        apex.columns[m] = col

    leg1 = Homomorphism(apex, left.source, {obj: [i for i, _ in pairs[obj]] for obj in schema.objects})
    leg2 = Homomorphism(apex, right.source, {obj: [j for _, j in pairs[obj]] for obj in schema.objects})
    return PullbackResult(apex, leg1, leg2, pairs)


def _strip_punctuation(name: str) -> str:
    return name.replace("(", "").replace(")", "").replace(":", "").replace(",", "").replace(" ", "")


def canonical_sort(inst: Instance) -> Instance:
    """Reorder every named table by name and remap columns; unnamed tables
    are then ordered by their remapped column tuples.

    For instances whose names are unique per table (every diagram built or
    composed here), equal canonical forms mean isomorphic instances.
    """
    perm: dict[str, list[int]] = {}
    for obj in inst.schema.objects:
        attr = inst.schema.name_attribute_of(obj)
        order = list(range(1, inst.n[obj] + 1))
        if attr is not None:
            order.sort(key=lambda i: (inst.names[attr][i - 1], i))
        perm[obj] = order  # new position k holds old element order[k]

    new_index: dict[str, dict[int, int]] = {
        obj: {old: k + 1 for k, old in enumerate(perm[obj])} for obj in inst.schema.objects
    }

    def remapped_row(obj: str, old: int) -> tuple:
        row = []
        for m, dom, cod in inst.schema.morphisms:
            if dom != obj:
                continue
            v = inst.columns[m][old - 1]
            row.append(None if v is None else new_index[cod][v])
        return tuple(row)

    # Order unnamed tables by their (already remapped) foreign keys.
    for obj in inst.schema.objects:
        if inst.schema.name_attribute_of(obj) is None:
            order = list(range(1, inst.n[obj] + 1))
            order.sort(key=lambda i: (remapped_row(obj, i), i))
            perm[obj] = order
            new_index[obj] = {old: k + 1 for k, old in enumerate(order)}

    out = empty_instance(inst.schema)
    for obj in inst.schema.objects:
        out.n[obj] = inst.n[obj]
        attr = inst.schema.name_attribute_of(obj)
        if attr is not None:
            out.names[attr] = [inst.names[attr][old - 1] for old in perm[obj]]
    for m, dom, cod in inst.schema.morphisms:
        col: list[int | None] = []
        for old in perm[dom]:
            v = inst.columns[m][old - 1]
            col.append(None if v is None else new_index[cod][v])
        out.columns[m] = col
    return out
