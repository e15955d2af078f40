"""Weight lattice tests: transposition, dominance, balancing, strata."""

import itertools
import random

import pytest

from bowforge.diagram import parse_diagram, separated_view
from bowforge.rewrite import replay
from bowforge.susy import check_finite_separated, decide_supersymmetry
from bowforge.weights import (
    AffineWeight,
    balanced_form,
    dominance_ge,
    is_gyd,
    separated_triple,
    stratum_check_affine,
    stratum_check_finite,
    transpose_gyd,
    transpose_weight,
)

# ---------------------------------------------------------------------------
# transposition


def _transpose_closed_form(values, level):
    w = len(values)
    return tuple(w + sum((lam - s) // level for lam in values) for s in range(1, level + 1))


def test_transpose_pinned():
    assert transpose_gyd((4, 1), 3) == (3, 1, 1)
    assert transpose_gyd((3, 1, 1), 2) == (4, 1)
    assert transpose_gyd((0, 0), 2) == (0, 0)
    assert transpose_gyd((-1, -1), 2) == (0, -2)


def test_transpose_matches_closed_form():
    rng = random.Random(20240818)
    for _ in range(300):
        w = rng.randint(1, 5)
        level = rng.randint(1, 5)
        base = rng.randint(-6, 6)
        values = sorted((base - rng.randint(0, level) for _ in range(w)), reverse=True)
        if values[0] - values[-1] > level:
            continue
        got = transpose_gyd(tuple(values), level)
        assert got == _transpose_closed_form(values, level), (values, level)


def test_transpose_involution_and_charge():
    rng = random.Random(99)
    for _ in range(200):
        w = rng.randint(1, 4)
        level = rng.randint(1, 4)
        base = rng.randint(-5, 5)
        values = sorted((base - rng.randint(0, level) for _ in range(w)), reverse=True)
        if values[0] - values[-1] > level:
            continue
        t = transpose_gyd(tuple(values), level)
        assert is_gyd(t, w)
        assert sum(t) == sum(values)
        assert transpose_gyd(t, w) == tuple(values)


def test_transpose_classical_conjugate():
    rng = random.Random(7)
    for _ in range(200):
        w = rng.randint(1, 5)
        level = rng.randint(1, 5)
        values = sorted((rng.randint(0, level) for _ in range(w)), reverse=True)
        conj = tuple(sum(1 for v in values if v >= i) for i in range(1, level + 1))
        assert transpose_gyd(tuple(values), level) == conj


def test_transpose_rejects_bad_input():
    with pytest.raises(ValueError):
        transpose_gyd((1, 2), 3)
    with pytest.raises(ValueError):
        transpose_gyd((5, 0), 3)


def test_is_gyd():
    assert is_gyd((4, 1), 3)
    assert not is_gyd((4, 1), 2)
    assert is_gyd((), 1)
    assert is_gyd((0, -1, -2), 2)
    assert not is_gyd((0, 1), 5)


# ---------------------------------------------------------------------------
# weights and dominance


def test_weight_transpose_flips_pairing():
    wt = AffineWeight(values=(4, 1), level=3, dpair=2)
    twt = transpose_weight(wt)
    assert twt == AffineWeight(values=(3, 1, 1), level=2, dpair=-2)
    assert transpose_weight(twt) == wt
    assert wt.charge == twt.charge == 5


def test_dominance_basics():
    a = AffineWeight((2, 0), 2, 0)
    b = AffineWeight((1, 1), 2, 0)
    assert dominance_ge(a, b)
    assert not dominance_ge(b, a)
    assert dominance_ge(a, a)
    # the pairing rescues a losing partial sum
    assert dominance_ge(AffineWeight((1, 1), 2, 1), a)
    assert not dominance_ge(AffineWeight((1, 1), 2, 0), a)
    with pytest.raises(ValueError):
        dominance_ge(a, AffineWeight((1, 0), 2, 0))
    with pytest.raises(ValueError):
        dominance_ge(a, AffineWeight((2, 0), 3, 0))
    with pytest.raises(ValueError):
        dominance_ge(a, AffineWeight((2, 0, 0), 2, 0))


# ---------------------------------------------------------------------------
# reading the triple


def test_separated_triple_pinned():
    fin = separated_view(parse_diagram("[ 0 o 3 x 2 x 0 ]"))
    triple = separated_triple(fin)
    assert triple.tlam == (3,)
    assert triple.mu == (1, 2)
    assert triple.v == 0


def test_separated_triple_inverts():
    for text in ["( 4 x 3 x 3 o 4 o )", "( 2 x 1 x 2 o 1 o )", "( 2 o 5 x )"]:
        sep = separated_view(parse_diagram(text))
        triple = separated_triple(sep)
        for s in range(sep.n + 1):
            assert sep.v_arr[s] == triple.v + sum(triple.tlam[s:])
        for i in range(sep.w + 1):
            assert sep.v_x[i] == sep.v_x[0] - sum(triple.mu[:i])


# ---------------------------------------------------------------------------
# balanced form


def test_balanced_form_pinned():
    d = parse_diagram("( 2 x 1 x 2 o 1 o )")
    sep = separated_view(d)
    assert separated_triple(sep).tlam == (1, -1)
    bal = balanced_form(sep)
    assert replay(d, bal.log) == bal.diagram
    assert bal.diagram.dims == (1, 1, 1, 1)
    assert bal.lam == AffineWeight((1, -1), 2, 1)
    assert bal.mu == AffineWeight((1, -1), 2, 0)
    assert dominance_ge(bal.lam, bal.mu)


def test_balanced_form_rejects_steep_arcs():
    sep = separated_view(parse_diagram("( 3 x 1 x 2 o 0 o )"))
    assert separated_triple(sep).tlam == (3, -2)
    with pytest.raises(ValueError):
        balanced_form(sep)


def test_balanced_form_agrees_with_decision():
    checked = 0
    for dims in itertools.product(range(4), repeat=4):
        v0, vm1, v2, v1 = dims
        d = parse_diagram(f"( {v0} x {vm1} x {v2} o {v1} o )")
        sep = separated_view(d)
        triple = separated_triple(sep)
        if not is_gyd(triple.tlam, sep.w):
            continue
        bal = balanced_form(sep)
        nonneg = min(bal.diagram.dims) >= 0
        assert dominance_ge(bal.lam, bal.mu) == nonneg
        assert decide_supersymmetry(d).verdict == nonneg, dims
        checked += 1
    assert checked > 30


# ---------------------------------------------------------------------------
# stratum membership, finite side


def test_stratum_finite_pinned():
    fin = separated_view(parse_diagram("[ 0 o 1 o 2 x 1 x 0 ]"))
    assert stratum_check_finite(fin) == (1, 1)
    fin = separated_view(parse_diagram("[ 0 o 2 x 0 ]"))
    assert stratum_check_finite(fin) is None
    fin = separated_view(parse_diagram("[ 0 o 3 x 2 x 0 ]"))
    assert stratum_check_finite(fin) is None


def test_stratum_finite_agrees_with_finite_check():
    checked = 0
    for dims in itertools.product(range(4), repeat=3):
        v1, v0, vm1 = dims
        fin = separated_view(parse_diagram(f"[ 0 o {v1} o {v0} x {vm1} x 0 ]"))
        verdict = check_finite_separated(fin).verdict
        assert (stratum_check_finite(fin) is not None) == verdict, dims
        checked += 1
    assert checked == 64


def test_stratum_finite_requires_layout():
    with pytest.raises(ValueError):
        stratum_check_finite(separated_view(parse_diagram("( 2 o 5 x )")))


# ---------------------------------------------------------------------------
# stratum membership, affine side


def test_stratum_affine_requires_normalized():
    with pytest.raises(ValueError):
        stratum_check_affine(separated_view(parse_diagram("( 2 o 5 x )")))
    with pytest.raises(ValueError):
        stratum_check_affine(separated_view(parse_diagram("[ 0 o 2 x 0 ]")))


def test_stratum_affine_agrees_with_decision():
    checked = hits = 0
    shapes = [
        ("( {0} x {1} o )", 2),
        ("( {0} x {1} x {2} o )", 3),
        ("( {0} x {1} o {2} o )", 3),
        ("( {0} x {1} x {2} o {3} o )", 4),
    ]
    for template, arity in shapes:
        for dims in itertools.product(range(4), repeat=arity):
            d = parse_diagram(template.format(*dims))
            sep = separated_view(d)
            if sep is None or not 0 <= sep.gap < sep.w:
                continue
            weight = stratum_check_affine(sep)
            verdict = decide_supersymmetry(d).verdict
            assert (weight is not None) == verdict, (template, dims)
            if weight is not None:
                assert weight.level == sep.n
                assert len(weight.values) == sep.w
                hits += 1
            checked += 1
    assert checked > 100 and hits > 30
