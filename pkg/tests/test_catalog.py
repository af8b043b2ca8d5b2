import itertools
from collections import Counter

import numpy as np
import pytest

from polydyn.core import FinSet
from polydyn.comonoid import (
    FinCat,
    cat_isomorphic,
    category_to_comonoid,
    check_category,
    check_cofunctor,
    check_comonoid_laws,
    check_comonoid_morphism,
    comonoid_to_category,
    contractible,
    lens_to_cofunctor,
)
from polydyn.catalog import (
    _canonical_key,
    _typed_tables,
    generate_categories,
    monoid_tables,
)

from conftest import all_lenses


# ---------------------------------------------------------------------------
# Independent oracles.  The library searches with pruning and symmetry
# breaking; these enumerate everything and filter afterwards, so agreement
# pins the clever search to the definitions.


def _canon_monoid(table):
    """Least relabeling of a multiplication table fixing the identity."""
    n = len(table)
    best = None
    for tail in itertools.permutations(range(1, n)):
        pi = (0,) + tail
        inv = [0] * n
        for i, v in enumerate(pi):
            inv[v] = i
        flat = tuple(inv[table[pi[a]][pi[b]]] for a in range(n) for b in range(n))
        if best is None or flat < best:
            best = flat
    return best


def _naive_monoid_canon_set(n):
    """Canonical forms of all order-n monoids by unpruned enumeration.

    Every filling of the non-identity cells is generated and associativity
    is checked on the complete table, vectorized so that order 4 (4^9
    candidate tables) stays fast.
    """
    cells = [(a, b) for a in range(1, n) for b in range(1, n)]
    total = n ** len(cells)
    tables = np.zeros((total, n, n), dtype=np.int8)
    tables[:, 0, :] = np.arange(n, dtype=np.int8)
    tables[:, :, 0] = np.arange(n, dtype=np.int8)
    rem = np.arange(total, dtype=np.int64)
    for a, b in cells:
        tables[:, a, b] = (rem % n).astype(np.int8)
        rem //= n
    keep = np.ones(total, dtype=bool)
    rows = np.arange(total)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                lhs = tables[rows, tables[:, a, b].astype(np.int64), c]
                rhs = tables[rows, a, tables[:, b, c].astype(np.int64)]
                keep &= lhs == rhs
    return {_canon_monoid(t.tolist()) for t in tables[keep]}


def _assoc_table(n, dom, cod, comp):
    for f in range(n):
        for g in range(n):
            if cod[f] != dom[g]:
                continue
            u = comp[(g, f)]
            for h in range(n):
                if cod[g] != dom[h]:
                    continue
                if comp[(h, u)] != comp[(comp[(h, g)], f)]:
                    return False
    return True


def _fincat_relabeled(num_objects, dom, cod, comp):
    """Build a FinCat with a label scheme unlike the catalog's, on purpose."""
    objs = FinSet(tuple(f"X{i}" for i in range(num_objects)))
    names = [f"f{j}" for j in range(len(dom))]
    mors = [(names[j], f"X{dom[j]}", f"X{cod[j]}") for j in range(len(dom))]
    ident = {f"X{i}": names[i] for i in range(num_objects)}
    table = {(names[g], names[f]): names[v] for (g, f), v in comp.items()}
    return FinCat(objs, mors, ident, table)


def _naive_categories(num_objects, total):
    """All categories with these exact counts, by ordered typings and
    unpruned tables, deduplicated with the isomorphism search."""
    m = total - num_objects
    slots = [(a, b) for a in range(num_objects) for b in range(num_objects)]
    reps = []
    for typing in itertools.product(slots, repeat=m):
        dom = list(range(num_objects)) + [s[0] for s in typing]
        cod = list(range(num_objects)) + [s[1] for s in typing]
        n = total
        free = [
            (g, f)
            for g in range(num_objects, n)
            for f in range(num_objects, n)
            if cod[f] == dom[g]
        ]
        cand = [
            [h for h in range(n) if dom[h] == dom[f] and cod[h] == cod[g]]
            for g, f in free
        ]
        if any(not c for c in cand):
            continue
        base = {}
        for f in range(n):
            base[(f, dom[f])] = f
            base[(cod[f], f)] = f
        for values in itertools.product(*cand):
            comp = dict(base)
            comp.update(zip(free, values))
            if not _assoc_table(n, dom, cod, comp):
                continue
            k = _fincat_relabeled(num_objects, dom, cod, comp)
            if not any(cat_isomorphic(k, r) for r in reps):
                reps.append(k)
    return reps


def _perm_group_category(n):
    """The symmetric group on n letters as a one-object category."""
    elems = sorted(itertools.permutations(range(n)))
    name = {p: "g" + "".join(map(str, p)) for p in elems}
    mors = [(name[p], "*", "*") for p in elems]
    ident = {"*": name[tuple(range(n))]}
    table = {
        (name[g], name[f]): name[tuple(g[f[x]] for x in range(n))]
        for g in elems
        for f in elems
    }
    return FinCat(FinSet(("*",)), mors, ident, table)


def _cyclic_category(n):
    mors = [(f"r{j}", "*", "*") for j in range(n)]
    table = {(f"r{a}", f"r{b}"): f"r{(a + b) % n}" for a in range(n) for b in range(n)}
    return FinCat(FinSet(("*",)), mors, {"*": "r0"}, table)


# ---------------------------------------------------------------------------
# The one-object stream.


def test_monoid_counts_through_order_six():
    assert [len(monoid_tables(n)) for n in range(1, 7)] == [1, 2, 7, 35, 228, 2237]


def test_monoid_tables_match_unpruned_enumeration():
    for n in range(1, 5):
        naive = _naive_monoid_canon_set(n)
        mine = {tuple(int(x) for x in t.reshape(-1)) for t in monoid_tables(n)}
        assert mine == naive


def test_monoid_tables_are_monoids():
    for n in range(1, 7):
        for arr in monoid_tables(n):
            t = arr.tolist()
            assert all(t[0][b] == b and t[b][0] == b for b in range(n))
            assert all(
                t[t[a][b]][c] == t[a][t[b][c]]
                for a in range(n)
                for b in range(n)
                for c in range(n)
            )


def test_monoid_tables_rejects_nonpositive_order():
    with pytest.raises(ValueError, match="order"):
        monoid_tables(0)


def test_typed_search_agrees_with_monoid_kernel_on_one_object():
    for n in range(1, 5):
        dom = [0] * n
        cod = [0] * n
        keys = set()
        for comp in _typed_tables(1, dom, cod):
            keys.add(_canonical_key(1, dom, cod, comp))
        assert len(keys) == len(monoid_tables(n))


# ---------------------------------------------------------------------------
# The full catalog.


def test_multi_object_streams_match_naive_enumeration():
    cats = generate_categories(4, 4)
    for num_objects in (2, 3, 4):
        for total in range(num_objects, 5):
            naive = _naive_categories(num_objects, total)
            group = [
                k
                for k in cats
                if len(k.objects.elements) == num_objects
                and len(k.morphisms) == total
            ]
            assert len(group) == len(naive)
            for r in naive:
                assert sum(1 for k in group if cat_isomorphic(r, k)) == 1


def test_catalog_census():
    cats = generate_categories(3, 6)
    census = Counter((len(k.objects.elements), len(k.morphisms)) for k in cats)
    assert census == Counter(
        {
            (0, 0): 1,
            (1, 1): 1,
            (1, 2): 2,
            (1, 3): 7,
            (1, 4): 35,
            (1, 5): 228,
            (1, 6): 2237,
            (2, 2): 1,
            (2, 3): 3,
            (2, 4): 16,
            (2, 5): 77,
            (2, 6): 485,
            (3, 3): 1,
            (3, 4): 3,
            (3, 5): 20,
            (3, 6): 111,
        }
    )
    assert len(cats) == 3228


def test_catalog_by_morphism_count_with_object_bound_lifted():
    # with the object bound at the morphism bound nothing is excluded, so
    # grouping by morphism count gives the enumeration of all finite
    # categories with up to six morphisms
    cats = generate_categories(6, 6)
    by_mor = Counter(len(k.morphisms) for k in cats)
    assert [by_mor[n] for n in range(7)] == [1, 1, 3, 11, 55, 329, 2858]


def test_every_catalog_category_passes_check_category():
    for k in generate_categories(3, 6):
        assert check_category(k)["ok"]


def test_catalog_has_no_isomorphic_duplicates_at_small_sizes():
    # one-object entries are distinct lex-minimal canonical forms (checked
    # against the unpruned enumeration above), so the quadratic sweep here
    # concentrates on the multi-object streams plus the small monoids
    groups = {}
    for k in generate_categories(3, 6):
        num_objects = len(k.objects.elements)
        total = len(k.morphisms)
        if total <= 5 and (num_objects >= 2 or total <= 4):
            groups.setdefault((num_objects, total), []).append(k)
    for group in groups.values():
        for a, b in itertools.combinations(group, 2):
            assert not cat_isomorphic(a, b)


def test_catalog_is_deterministic():
    before = generate_categories(2, 4)
    generate_categories.cache_clear()
    after = generate_categories(2, 4)
    assert before == after


def test_generate_categories_rejects_negative_bounds():
    with pytest.raises(ValueError, match="non-negative"):
        generate_categories(-1, 4)


def test_catalog_contains_familiar_categories():
    groups = {}
    for k in generate_categories(3, 6):
        key = (len(k.objects.elements), len(k.morphisms))
        groups.setdefault(key, []).append(k)

    empty = groups[(0, 0)]
    assert len(empty) == 1 and empty[0].objects.elements == ()

    z3 = _cyclic_category(3)
    assert sum(1 for k in groups[(1, 3)] if cat_isomorphic(z3, k)) == 1

    s3 = _perm_group_category(3)
    assert sum(1 for k in groups[(1, 6)] if cat_isomorphic(s3, k)) == 1

    arrow = FinCat(
        FinSet(("A", "B")),
        [("iA", "A", "A"), ("iB", "B", "B"), ("u", "A", "B")],
        {"A": "iA", "B": "iB"},
        {
            ("iA", "iA"): "iA",
            ("iB", "iB"): "iB",
            ("u", "iA"): "u",
            ("iB", "u"): "u",
        },
    )
    assert sum(1 for k in groups[(2, 3)] if cat_isomorphic(arrow, k)) == 1

    walking_iso = comonoid_to_category(contractible(FinSet(("a", "b"))))
    assert sum(1 for k in groups[(2, 4)] if cat_isomorphic(walking_iso, k)) == 1

    discrete3 = FinCat(
        FinSet(("A", "B", "C")),
        [("iA", "A", "A"), ("iB", "B", "B"), ("iC", "C", "C")],
        {"A": "iA", "B": "iB", "C": "iC"},
        {("iA", "iA"): "iA", ("iB", "iB"): "iB", ("iC", "iC"): "iC"},
    )
    assert len(groups[(3, 3)]) == 1
    assert cat_isomorphic(discrete3, groups[(3, 3)][0])


# ---------------------------------------------------------------------------
# The catalog as a test bed for the comonoid side.


def test_catalog_round_trips_through_comonoids():
    for k in generate_categories(3, 6):
        c = category_to_comonoid(k)
        assert check_comonoid_laws(c)["ok"]
        assert cat_isomorphic(k, comonoid_to_category(c))


def test_morphism_squares_match_cofunctor_laws_across_small_catalog():
    small = generate_categories(2, 3)
    seen_good = 0
    seen_bad = 0
    for ks in small:
        c = category_to_comonoid(ks)
        for kt in small:
            d = category_to_comonoid(kt)
            for phi in all_lenses(c.carrier, d.carrier):
                squares_ok = check_comonoid_morphism(phi, c, d)["ok"]
                laws_ok = check_cofunctor(lens_to_cofunctor(phi, ks, kt))["ok"]
                assert squares_ok == laws_ok
                if squares_ok:
                    seen_good += 1
                else:
                    seen_bad += 1
    assert seen_good > 0 and seen_bad > 0
