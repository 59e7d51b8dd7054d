import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from scriwave.indexsets import (
    Expansion,
    IndexSet,
    IndexSetError,
    closure,
    ebar_union,
    ebar_union_raw,
    expansion_apply_euler,
    min_element,
    ode_integrate_expansion,
    shift,
    sum_sets,
    truncate_below,
)


def entries(e):
    return {(Fraction(z) if not isinstance(z, float) else z, k) for (z, k) in e.entries}


class TestClosure:
    def test_single_smooth_generator(self):
        e = closure([(0, 0)], 5)
        assert entries(e) == {(Fraction(n), 0) for n in range(6)}

    def test_empty(self):
        e = closure([], 7)
        assert len(e) == 0

    def test_log_generator_enumerated_by_hand(self):
        # closure rules: lower k freely, raise z by one while below truncation
        e = closure([(1, 2)], 3)
        expected = {(z, k) for z in (1, 2, 3) for k in (0, 1, 2)}
        assert {(int(z), k) for (z, k) in e.entries} == expected

    def test_idempotent(self):
        e = closure([(Fraction(1, 2), 1), (2, 0)], 4)
        again = closure(e.entries, 4)
        assert entries(again) == entries(e)

    def test_accumulation_guard(self):
        raw = [(i / 1e5, 0) for i in range(5000)]
        with pytest.raises(IndexSetError):
            closure(raw, 60)

    def test_invalid_entries_rejected(self):
        with pytest.raises(IndexSetError):
            IndexSet(((Fraction(0), 1),), Fraction(2))  # E.1: missing (0,0)
        with pytest.raises(IndexSetError):
            IndexSet(((Fraction(0), 0),), Fraction(2))  # E.2: missing (1,0)


class TestOperations:
    def test_ebar_union_log_bump(self):
        # 0bar unionbar qbar = 0bar plus the closure of (q,1)
        q = 2
        left = ebar_union(closure([(0, 0)], 6), closure([(q, 0)], 6))
        right = closure([(0, 0), (q, 1)], 6)
        assert entries(left) == entries(right)

    def test_ebar_union_empty_identity(self):
        e = closure([(1, 1)], 4)
        assert entries(ebar_union(e, closure([], 4))) == entries(e)

    def test_ebar_union_raw_non_index_set(self):
        # a bare {(0,0)} absorbs qbar without producing logs
        q = 3
        raw = ebar_union_raw({(0, 0)}, closure([(q, 0)], 6).entries)
        got = closure(raw, 6)
        assert entries(got) == entries(closure([(0, 0)], 6))

    def test_ebar_union_not_associative_on_raw_sets(self):
        p, q, C = 1, 2, 6
        pbar = closure([(p, 0)], C)
        qbar = closure([(q, 0)], C)
        zero_raw = {(Fraction(0), 0)}
        # (0 ubar pbar) then ubar qbar keeps the log at q
        inner = closure(ebar_union_raw(zero_raw, pbar.entries), C)
        left = ebar_union(inner, qbar)
        # pbar ubar (0 ubar qbar) puts the log at p
        inner2 = closure(ebar_union_raw(zero_raw, qbar.entries), C)
        right = ebar_union(pbar, inner2)
        assert entries(left) == entries(closure([(0, 0), (q, 1)], C))
        assert entries(right) == entries(closure([(0, 0), (p, 1)], C))
        assert entries(left) != entries(right)

    def test_sum_power_laws(self):
        p, q = Fraction(1, 2), Fraction(3, 2)
        s = sum_sets(closure([(p, 0)], 4 + q), closure([(q, 0)], 4 + p))
        expected = closure([(p + q, 0)], 4)
        tr = min(float(s.truncation), 4.0)
        assert {e for e in entries(s) if float(e[0]) <= tr} == {
            e for e in entries(expected) if float(e[0]) <= tr
        }

    def test_shift_zero_identity(self):
        e = closure([(1, 1)], 3)
        assert entries(shift(e, 0)) == entries(e)

    def test_shift_moves_truncation(self):
        e = shift(closure([(0, 0)], 3), Fraction(1, 2))
        assert float(e.truncation) == 3.5
        assert (Fraction(1, 2), 0) in e

    def test_min_element_prefers_higher_log(self):
        # min convention: smallest power, then the largest log exponent
        e = closure([(1, 0), (1, 1)], 5)
        assert min_element(e) == (Fraction(1), 1)

    def test_min_element_after_ebar_union(self):
        # the bar-union of two sets sharing power 1 climbs to k1+k2+1
        e = ebar_union(closure([(1, 0)], 5), closure([(1, 1)], 5))
        assert min_element(e) == (Fraction(1), 2)

    def test_min_of_empty_raises(self):
        with pytest.raises(IndexSetError):
            min_element(closure([], 3))

    def test_truncate_below_filters(self):
        e = closure([(0, 1)], 5)
        low = truncate_below(e, 2, "<=")
        assert all(float(z) <= 2 for (z, _) in low.entries)
        high = truncate_below(e, 2, ">")
        assert all(float(z) > 2 for (z, _) in high.entries)
        assert len(low) + len(high) == len(e)


small_powers = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)])
small_logs = st.integers(min_value=0, max_value=2)
gen_sets = st.lists(st.tuples(small_powers, small_logs), min_size=0, max_size=3)


@st.composite
def index_sets(draw):
    return closure(draw(gen_sets), 6)


class TestProperties:
    @given(index_sets(), index_sets())
    @settings(max_examples=60, deadline=None)
    def test_ebar_union_commutative(self, e1, e2):
        assert entries(ebar_union(e1, e2)) == entries(ebar_union(e2, e1))

    @given(index_sets(), index_sets(), index_sets())
    @settings(max_examples=40, deadline=None)
    def test_ebar_union_associative_on_index_sets(self, e1, e2, e3):
        left = ebar_union(ebar_union(e1, e2), e3)
        right = ebar_union(e1, ebar_union(e2, e3))
        assert entries(left) == entries(right)

    @given(index_sets(), index_sets())
    @settings(max_examples=40, deadline=None)
    def test_sum_commutative(self, e1, e2):
        assert entries(sum_sets(e1, e2)) == entries(sum_sets(e2, e1))

    @given(index_sets())
    @settings(max_examples=40, deadline=None)
    def test_closure_idempotent(self, e):
        assert entries(closure(e.entries, e.truncation)) == entries(e)

    @given(index_sets(), index_sets())
    @settings(max_examples=40, deadline=None)
    def test_min_of_union_is_min_of_mins(self, e1, e2):
        if not e1.entries or not e2.entries:
            return
        zu, _ = min_element(ebar_union(e1, e2))
        assert float(zu) == min(float(min_element(e1)[0]), float(min_element(e2)[0]))


class TestEulerOperator:
    def test_apply_to_log_kernel(self):
        c = Fraction(2)
        g = expansion_apply_euler(Expansion(((c, 1, 1.0),)), c)
        assert g.coeff(c, 0) == pytest.approx(1.0) and g.coeff(c, 1) == 0.0

    def test_kernel_annihilated(self):
        g = expansion_apply_euler(Expansion(((Fraction(2), 0, 1.0),)), 2)
        assert len(g) == 0

    def test_integrate_simple_pole(self):
        # g = x^z with z != c integrates to x^z / (z - c)
        g = Expansion(((Fraction(3), 0, 1.0),), 10)
        G = ode_integrate_expansion(g, 1)
        assert G.coeff(3, 0) == pytest.approx(0.5)

    def test_integrate_resonant_term_makes_log(self):
        g = Expansion(((Fraction(1), 0, 1.0),), 10)
        G = ode_integrate_expansion(g, 1)
        assert G.coeff(1, 1) == pytest.approx(1.0)
        assert G.coeff(1, 0) == 0.0

    def test_zero_source_kernel_only(self):
        G = ode_integrate_expansion(Expansion((), 10), Fraction(5, 2), free_coeff=7.0)
        assert G.terms == ((Fraction(5, 2), 0, 7.0),)

    def test_output_index_set_containment(self):
        g = Expansion(
            ((Fraction(1, 2), 1, 2.0), (Fraction(1), 0, -1.0), (Fraction(2), 2, 0.5)), 4
        )
        c = Fraction(1)
        G = ode_integrate_expansion(g, c, free_coeff=3.0)
        allowed = ebar_union(g.index_set(), closure([(c, 0)], 4))
        for (z, k, _) in G.terms:
            assert (z, k) in allowed


@st.composite
def expansions(draw):
    n = draw(st.integers(min_value=0, max_value=5))
    terms = []
    for _ in range(n):
        z = draw(small_powers)
        k = draw(small_logs)
        coeff = draw(
            st.floats(min_value=-10, max_value=10, allow_nan=False).filter(
                lambda x: abs(x) > 1e-3
            )
        )
        terms.append((z, k, coeff))
    return Expansion(tuple(terms), 10)


class TestRoundTrip:
    @given(expansions(), small_powers, st.floats(min_value=-5, max_value=5, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_euler_round_trip(self, g, c, alpha0):
        G = ode_integrate_expansion(g, c, free_coeff=alpha0)
        back = expansion_apply_euler(G, c)
        assert back.isclose(g, tol=1e-12)

    def test_round_trip_numeric_spot_check(self):
        # numerically differentiate x G'(x) - c G and compare with g
        g = Expansion(((Fraction(1, 2), 1, 2.0), (Fraction(2), 0, -3.0)), 10)
        c = Fraction(1, 2)
        G = ode_integrate_expansion(g, c, free_coeff=0.3)
        for x in (0.2, 0.05):
            h = 1e-6 * x
            dG = (G(x + h) - G(x - h)) / (2 * h)
            assert x * dG - float(c) * G(x) == pytest.approx(g(x), rel=1e-5)


class TestSerialization:
    def test_expansion_json_round_trip(self):
        e = Expansion(((Fraction(1, 2), 1, 2.5), (Fraction(2), 0, -1.0)), Fraction(4))
        d = e.to_json_dict()
        assert d["terms"][0] == {"z": "1/2", "k": 1, "coeff": 2.5}
        assert Expansion.from_json_dict(d).isclose(e)

    def test_index_set_json_round_trip(self):
        e = closure([(Fraction(1, 2), 1)], 3)
        got = IndexSet.from_json_dict(e.to_json_dict())
        assert entries(got) == entries(e)

    def test_generators_minimal(self):
        e = closure([(0, 0), (2, 1)], 5)
        gens = {(int(z), k) for (z, k) in e.generators()}
        assert gens == {(0, 0), (2, 1)}
