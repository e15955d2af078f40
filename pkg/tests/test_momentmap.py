"""Moment-map residuals, stability, exact transports, and the solver."""

import numpy as np
import pytest

from bowforge.diagram import (
    Direction,
    HwMove,
    IncrementArrows,
    IncrementX,
    NodeKind,
    parse_diagram,
)
from bowforge.momentmap import (
    Solution,
    TriangleData,
    _param_layout,
    _real_jr,
    construct_solution,
    extend_increment,
    moment_residual,
    residual_blocks,
    solution_from_json,
    solution_to_json,
    solve_numeric,
    stability_check,
    stability_report,
    transport_hw_solution,
    zero_solution,
)
from bowforge.rewrite import apply_entry
from bowforge.susy import decide_supersymmetry

CW, ACW = Direction.CW, Direction.ACW

# ---------------------------------------------------------------------------
# closed-form family: two arrows, two x points, one populated x segment


def two_x_closed_form(v1: int, m: int) -> Solution:
    """Diagonal solution on [ 0 o v1 o 0 x m x 0 ] with distinct shifts."""

    d = parse_diagram(f"[ 0 o {v1} o 0 x {m} x 0 ]")
    sol = zero_solution(d)
    first, second = [node.id for node in d.nodes if node.kind == NodeKind.XPOINT]
    shifts = np.diag(np.arange(1, m + 1)).astype(complex)
    sol.triangles[first].B_out = shifts.copy()
    sol.triangles[first].a = np.ones((m, 1), dtype=complex)
    sol.triangles[second].B_in = shifts.copy()
    sol.triangles[second].b = np.ones((1, m), dtype=complex)
    return sol


def test_closed_form_residual_and_stability():
    for v1, m in [(0, 1), (2, 3), (1, 4), (3, 2)]:
        sol = two_x_closed_form(v1, m)
        assert moment_residual(sol) == 0.0
        report = stability_report(sol)
        assert report.ok
        for entry in report.entries.values():
            assert entry.cond_a == 0.0


def test_closed_form_perturbation_raises_residual():
    sol = two_x_closed_form(2, 3)
    first = [n.id for n in sol.diagram.nodes if n.kind == NodeKind.XPOINT][0]
    sol.triangles[first].B_out[0, 0] += 1e-3
    assert moment_residual(sol) > 1e-4


def test_residual_blocks_shapes():
    d = parse_diagram("( 1 o 2 x 3 x 4 o )")
    blocks = residual_blocks(zero_solution(d))
    assert [b.shape for b in blocks[:4]] == [(2, 2), (3, 3), (4, 4), (1, 1)]
    assert len(blocks) == 4 + 2


def test_residual_gauge_invariance():
    rng = np.random.default_rng(5)
    sol = construct_solution(parse_diagram("( 1 x 2 o 2 x 1 o )"), seed=3)
    assert sol.converged
    d = sol.diagram
    gauges = []
    for m in d.dims:
        q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        gauges.append(q if m else np.zeros((0, 0), dtype=complex))
    for node in d.nodes:
        pos = d.position(node.id)
        g_in = gauges[(pos - 1) % d.k]
        g_out = gauges[pos]
        if node.kind == NodeKind.XPOINT:
            t = sol.triangles[node.id]
            t.A = g_out @ t.A @ g_in.conj().T
            t.B_in = g_in @ t.B_in @ g_in.conj().T
            t.B_out = g_out @ t.B_out @ g_out.conj().T
            t.a = g_out @ t.a
            t.b = t.b @ g_in.conj().T
        else:
            ad = sol.arrows[node.id]
            ad.C = g_out @ ad.C @ g_in.conj().T
            ad.D = g_in @ ad.D @ g_out.conj().T
    assert moment_residual(sol) < 1e-8
    assert stability_check(sol)


# ---------------------------------------------------------------------------
# stability report details


def test_stability_vacuous_sides():
    d = parse_diagram("[ 0 o 2 o 0 x 3 x 0 ]")
    sol = two_x_closed_form(2, 3)
    report = stability_report(sol)
    first, second = [n.id for n in d.nodes if n.kind == NodeKind.XPOINT]
    assert report.entries[first].krylov_rank == 3
    assert report.entries[second].chain_dim == 0


def test_stability_zero_span_fails():
    sol = two_x_closed_form(0, 2)
    first = [n.id for n in sol.diagram.nodes if n.kind == NodeKind.XPOINT][0]
    sol.triangles[first].a = np.zeros((2, 1), dtype=complex)
    report = stability_report(sol)
    assert not report.entries[first].s2
    assert not stability_check(sol)


# ---------------------------------------------------------------------------
# analytic gradient against central differences


def test_gradient_matches_finite_differences():
    d = parse_diagram("( 1 x 2 o 2 x 1 o )")
    layout, size = _param_layout(d)
    jr = _real_jr(d, layout, size, {})
    rng = np.random.default_rng(11)
    x = rng.standard_normal(2 * size)
    jac, res = jr(x)
    grad = 2.0 * jac.T @ res

    def cost(point):
        _, r = jr(point)
        return float(r @ r)

    h = 1e-6
    fd = np.zeros_like(grad)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        fd[i] = (cost(x + step) - cost(x - step)) / (2 * h)
    rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
    assert rel < 1e-5


# ---------------------------------------------------------------------------
# numerical search


def test_solve_numeric_trivial_diagram():
    sol = solve_numeric(parse_diagram("( 0 x 0 o )"))
    assert sol.converged
    assert sol.residual == 0.0


def test_solve_numeric_small_cases():
    for text in ["( 1 x 1 o )", "( 2 x 2 o )", "( 1 x 2 o 2 x 1 o )"]:
        d = parse_diagram(text)
        assert decide_supersymmetry(d).verdict
        sol = solve_numeric(d, seed=1)
        assert sol.converged, text
        assert sol.residual <= 1e-8
        assert sol.stable


def test_solve_numeric_rejects_empty_variety():
    d = parse_diagram("[ 0 o 2 x 0 ]")
    for seed in range(8):
        sol = solve_numeric(d, seed=seed, retries=2)
        assert not sol.converged


# ---------------------------------------------------------------------------
# exact extensions


def test_extend_arrow_arc_keeps_residual():
    base = construct_solution(parse_diagram("( 1 o 2 x 2 x 1 o )"), seed=2)
    assert base.converged
    entry = IncrementArrows(start=0, end=3, direction=CW, amount=2)
    out = extend_increment(base, entry)
    assert out.diagram == apply_entry(base.diagram, entry)
    assert moment_residual(out) < 1e-10
    assert stability_check(out)


def test_extend_x_segment_keeps_residual():
    base = construct_solution(parse_diagram("( 1 o 2 x 2 x 1 o )"), seed=2)
    assert base.converged
    entry = IncrementX(start=1, end=2, direction=ACW, amount=3)
    out = extend_increment(base, entry)
    assert out.diagram == apply_entry(base.diagram, entry)
    assert moment_residual(out) < 1e-10
    assert stability_check(out)


def test_extend_orders_commute_on_residual():
    base = construct_solution(parse_diagram("( 1 o 2 x 2 x 1 o )"), seed=2)
    arrows = IncrementArrows(start=0, end=3, direction=CW, amount=1)
    xseg = IncrementX(start=1, end=2, direction=ACW, amount=1)
    one = extend_increment(extend_increment(base, arrows), xseg)
    two = extend_increment(extend_increment(base, xseg), arrows)
    assert one.diagram == two.diagram
    assert moment_residual(one) < 1e-10
    assert moment_residual(two) < 1e-10


def test_extend_arrow_arc_needs_level_zero():
    d = parse_diagram("( 1 o 2 x 2 x 1 o )")
    sol = zero_solution(d, {0: 1.0})
    with pytest.raises(ValueError):
        extend_increment(sol, IncrementArrows(start=0, end=3, direction=CW, amount=1))


def test_extend_x_segment_shift_choices():
    base = construct_solution(parse_diagram("( 1 o 2 x 2 x 1 o )"), seed=2)
    entry = IncrementX(start=1, end=2, direction=ACW, amount=1)
    shifted = extend_increment(base, entry, c=7.5)
    assert moment_residual(shifted) < 1e-10
    spectrum = np.linalg.eigvals(base.triangles[1].B_out)
    with pytest.raises(ValueError):
        extend_increment(base, entry, c=complex(spectrum[0]))


# ---------------------------------------------------------------------------
# exact transport across a swap


def test_transport_forward_and_back():
    d = parse_diagram("( 2 x 2 o )")
    base = construct_solution(d, seed=0)
    assert base.converged
    moved = transport_hw_solution(base, 0, 1)
    assert moved.diagram == apply_entry(d, HwMove(left=0, right=1))
    assert moment_residual(moved) < 1e-10
    assert stability_check(moved)
    back = transport_hw_solution(moved, 1, 0)
    assert back.diagram == d
    assert moment_residual(back) < 1e-10
    assert stability_check(back)


def test_transport_longer_diagram():
    d = parse_diagram("( 1 x 3 o 1 x 3 o )")
    base = construct_solution(d, seed=4)
    assert base.converged
    moved = transport_hw_solution(base, 0, 1)
    assert moment_residual(moved) < 1e-9
    assert stability_check(moved)
    back = transport_hw_solution(moved, 1, 0)
    assert back.diagram == d
    assert moment_residual(back) < 1e-9
    assert stability_check(back)


def test_transport_needs_level_zero_and_adjacency():
    d = parse_diagram("( 2 x 2 o )")
    sol = zero_solution(d, {1: 0.5})
    with pytest.raises(ValueError):
        transport_hw_solution(sol, 0, 1)
    sol = zero_solution(parse_diagram("( 1 x 1 o 1 x 1 o )"))
    with pytest.raises(ValueError):
        transport_hw_solution(sol, 0, 2)


def test_transport_detects_rank_collapse():
    # the all-zero point on a populated diagram is not stable, and the
    # stacked segment map collapses in rank, which transport refuses
    sol = zero_solution(parse_diagram("( 2 x 2 o )"))
    with pytest.raises(ValueError):
        transport_hw_solution(sol, 0, 1)


def test_transport_keeps_unstable_zeros_honest():
    # a level-zero point with vanishing B, b, C blocks is an exact zero
    # even when unstable; transport carries it and recomputes residual
    d = parse_diagram("( 2 x 2 o )")
    sol = zero_solution(d)
    rng = np.random.default_rng(0)
    sol.triangles[0].A = rng.standard_normal((2, 2)) + 0j
    sol.triangles[0].a = rng.standard_normal((2, 1)) + 0j
    sol.arrows[1].D = rng.standard_normal((2, 2)) + 0j
    assert moment_residual(sol) == 0.0
    moved = transport_hw_solution(sol, 0, 1)
    assert moved.residual < 1e-12


# ---------------------------------------------------------------------------
# staged construction


def test_construct_zero_diagram():
    sol = construct_solution(parse_diagram("( 0 x 0 o 0 x 0 o )"))
    assert sol.converged
    assert sol.residual == 0.0


def test_construct_rejects_non_susy():
    with pytest.raises(ValueError):
        construct_solution(parse_diagram("[ 0 o 2 x 0 ]"))


def test_construct_small_family():
    texts = [
        "( 1 x 1 o )",
        "( 2 x 1 o )",
        "( 1 x 2 o )",
        "( 3 x 2 o )",
        "( 1 x 2 o 2 x 1 o )",
        "( 2 o 2 o 1 x 1 x )",
    ]
    for text in texts:
        d = parse_diagram(text)
        assert decide_supersymmetry(d).verdict, text
        sol = construct_solution(d, seed=1)
        assert sol.converged, text
        assert sol.diagram == d
        assert sol.residual <= 1e-8
        assert sol.stable


def test_construct_thin_stratum_family():
    # these hosts admit zeros whose stable locus random starts miss;
    # only the exact swap transport reaches them reliably
    texts = [
        "( 0 x 1 x 2 x 3 o )",
        "( 0 x 2 x 2 x 3 o )",
        "( 1 x 3 o 1 x 3 o )",
    ]
    for text in texts:
        d = parse_diagram(text)
        assert decide_supersymmetry(d).verdict, text
        sol = construct_solution(d, seed=0)
        assert sol.converged, text
        assert sol.residual <= 1e-8
        assert sol.stable


def test_construct_matches_closed_form_family():
    d = parse_diagram("[ 0 o 2 o 0 x 3 x 0 ]")
    sol = construct_solution(d, seed=0)
    assert sol.converged
    assert sol.diagram == d
    assert sol.residual <= 1e-8


# ---------------------------------------------------------------------------
# serialization


def test_solution_json_round_trip():
    sol = construct_solution(parse_diagram("( 1 x 2 o 2 x 1 o )"), seed=3)
    data = solution_to_json(sol)
    clone = solution_from_json(data)
    assert clone.diagram == sol.diagram
    assert clone.converged == sol.converged
    assert clone.stable == sol.stable
    assert abs(moment_residual(clone) - moment_residual(sol)) < 1e-12
    for nid, t in sol.triangles.items():
        assert np.allclose(clone.triangles[nid].A, t.A)
        assert np.allclose(clone.triangles[nid].b, t.b)
    for nid, ad in sol.arrows.items():
        assert np.allclose(clone.arrows[nid].C, ad.C)
        assert np.allclose(clone.arrows[nid].D, ad.D)


def test_solution_json_keeps_level():
    d = parse_diagram("( 1 x 1 o )")
    sol = zero_solution(d, {1: 0.25 + 1j})
    clone = solution_from_json(solution_to_json(sol))
    assert clone.lam == {1: 0.25 + 1j}
