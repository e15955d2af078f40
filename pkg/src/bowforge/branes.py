"""Brane ledgers: certificates for supersymmetric diagrams.

A ledger decorates a bow diagram with a multiset of branes.  Every brane
runs from one five-brane to another in a definite sense around the
circle, possibly winding a number of complete laps on the way.  The
segment dimensions of the host diagram must equal the total brane
coverage; that identity is kept as an invariant through every move.

A brane with endpoints of different kinds is *fixed*: it is pinned by
its endpoints and cannot be deformed away.  The ledger certifies a
supersymmetric diagram precisely when no fixed slot (ordered endpoint
pair, sense, lap count) is occupied more than once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import (
    BowDiagram,
    CutAt,
    Direction,
    HwMove,
    IncrementArrows,
    IncrementX,
    MoveEntry,
    NodeKind,
    SubtractArrowArc,
    arc_segments,
    separated_view,
)
from .rewrite import apply_entry

# ---------------------------------------------------------------------------
# branes and ledgers


@dataclass(frozen=True)
class Brane:
    """One brane: start node to end node, travelling ``direction``.

    ``laps`` counts complete extra loops beyond the open arc.  Fixed
    branes (endpoints of different kinds) are stored with the arrow
    node as ``start``.
    """

    start: int
    end: int
    direction: Direction
    laps: int


@dataclass
class BraneLedger:
    diagram: BowDiagram
    branes: dict[Brane, int]


def brane_is_fixed(d: BowDiagram, brane: Brane) -> bool:
    return d.node_by_id(brane.start).kind != d.node_by_id(brane.end).kind


def brane_coverage(d: BowDiagram, brane: Brane) -> tuple[int, ...]:
    """How many times the brane passes over each segment."""

    arc = set(arc_segments(d, brane.start, brane.end, brane.direction))
    return tuple(brane.laps + (1 if seg in arc else 0) for seg in range(d.k))


def coverage(ledger: BraneLedger) -> tuple[int, ...]:
    total = [0] * ledger.diagram.k
    for brane, mult in ledger.branes.items():
        per = brane_coverage(ledger.diagram, brane)
        for seg in range(ledger.diagram.k):
            total[seg] += mult * per[seg]
    return tuple(total)


def ledger_is_susy(ledger: BraneLedger) -> bool:
    """No fixed slot may hold more than one brane."""

    return all(
        mult <= 1
        for brane, mult in ledger.branes.items()
        if brane_is_fixed(ledger.diagram, brane)
    )


def check_ledger(ledger: BraneLedger) -> list[str]:
    """Structural problems, empty when the ledger is a valid certificate."""

    problems = []
    d = ledger.diagram
    ids = {node.id for node in d.nodes}
    for brane, mult in ledger.branes.items():
        if mult < 1:
            problems.append(f"brane {brane} has multiplicity {mult}")
        if brane.laps < 0:
            problems.append(f"brane {brane} has negative laps")
        if brane.start not in ids or brane.end not in ids:
            problems.append(f"brane {brane} references missing nodes")
        elif brane_is_fixed(d, brane):
            if d.node_by_id(brane.start).kind != NodeKind.ARROW:
                problems.append(f"fixed brane {brane} not stored arrow-first")
            if mult > 1:
                problems.append(f"fixed slot {brane} occupied {mult} times")
    if not any("missing nodes" in p for p in problems):
        got = coverage(ledger)
        if got != d.dims:
            problems.append(f"coverage {got} != dims {d.dims}")
    return problems


# ---------------------------------------------------------------------------
# serialization


def brane_to_json(brane: Brane, mult: int) -> dict:
    return {
        "start": brane.start,
        "end": brane.end,
        "dir": brane.direction.value,
        "laps": brane.laps,
        "mult": mult,
    }


def ledger_to_json(ledger: BraneLedger) -> dict:
    from .diagram import diagram_to_json

    items = sorted(
        ledger.branes.items(),
        key=lambda kv: (kv[0].start, kv[0].end, kv[0].direction.value, kv[0].laps),
    )
    return {
        "diagram": diagram_to_json(ledger.diagram),
        "branes": [brane_to_json(brane, mult) for brane, mult in items],
    }


def ledger_from_json(data: dict) -> BraneLedger:
    from .diagram import diagram_from_json

    d = diagram_from_json(data["diagram"])
    branes: dict[Brane, int] = {}
    for item in data["branes"]:
        key = Brane(
            start=int(item["start"]),
            end=int(item["end"]),
            direction=Direction(item["dir"]),
            laps=int(item["laps"]),
        )
        branes[key] = branes.get(key, 0) + int(item["mult"])
    return BraneLedger(diagram=d, branes=branes)


# ---------------------------------------------------------------------------
# move transport

# Crossing an arrow through an x point annihilates the unique fixed
# brane that spans the shrinking side, or creates one on the grown side
# when no such brane exists.  Fixed branes between the same pair with
# laps wound in the shrinking sense unwind by one; branes wound in the
# grown sense pick an extra lap up.  Branes with any other endpoint
# pair keep their keys; their coverage follows the moved endpoints.


def _put(branes: dict[Brane, int], key: Brane, mult: int) -> None:
    if mult == 0:
        return
    total = branes.get(key, 0) + mult
    if total:
        branes[key] = total
    else:
        branes.pop(key, None)


def _remove(branes: dict[Brane, int], key: Brane, mult: int) -> None:
    have = branes.get(key, 0)
    if have < mult:
        raise ValueError(f"ledger holds {have} of {key}, cannot remove {mult}")
    if have == mult:
        del branes[key]
    else:
        branes[key] = have - mult


def _transport_hw(
    branes: dict[Brane, int], d: BowDiagram, left: int, right: int
) -> dict[Brane, int]:
    kinds = {node.id: node.kind for node in d.nodes}
    u = left if kinds[left] == NodeKind.ARROW else right
    xp = right if u == left else left
    assert kinds[u] == NodeKind.ARROW and kinds[xp] == NodeKind.XPOINT
    shrink = Direction.ACW if u == left else Direction.CW
    grow = Direction.CW if shrink == Direction.ACW else Direction.ACW

    out: dict[Brane, int] = {}
    candidate = Brane(u, xp, shrink, 0)
    annihilated = branes.get(candidate, 0) >= 1
    for key, mult in branes.items():
        if {key.start, key.end} != {u, xp}:
            _put(out, key, mult)
            continue
        m = mult
        if key == candidate and annihilated:
            m -= 1
        if m == 0:
            continue
        if key.direction == shrink:
            _put(out, Brane(key.start, key.end, shrink, max(key.laps - 1, 0)), m)
        else:
            _put(out, Brane(key.start, key.end, grow, key.laps + 1), m)
    if not annihilated:
        _put(out, Brane(u, xp, grow, 0), 1)
    return out


def _subtract_key(d: BowDiagram) -> Brane:
    sep = separated_view(d)
    assert sep is not None and sep.w >= 1
    return Brane(
        start=sep.x_ids[0],
        end=sep.x_ids[-1],
        direction=Direction.CW,
        laps=1 if sep.w == 1 else 0,
    )


def ledger_apply_move(
    ledger: BraneLedger, entry: MoveEntry, inverse: bool = False
) -> BraneLedger:
    """Advance host and branes together through one move.

    The coverage identity is checked after the move; a failure means
    the ledger did not match its host to begin with.
    """

    d = ledger.diagram
    host = apply_entry(d, entry, inverse=inverse)
    branes = dict(ledger.branes)

    if isinstance(entry, HwMove):
        left, right = (entry.right, entry.left) if inverse else (entry.left, entry.right)
        branes = _transport_hw(branes, d, left, right)
    elif isinstance(entry, (IncrementArrows, IncrementX)):
        if entry.amount:
            key = Brane(
                start=entry.start,
                end=entry.end,
                direction=entry.direction,
                laps=1 if entry.start == entry.end else 0,
            )
            if inverse:
                _remove(branes, key, entry.amount)
            else:
                _put(branes, key, entry.amount)
    elif isinstance(entry, SubtractArrowArc):
        if entry.amount:
            key = _subtract_key(d)
            if inverse:
                _put(branes, key, entry.amount)
            else:
                _remove(branes, key, entry.amount)
    elif isinstance(entry, CutAt):
        pass
    else:
        raise ValueError(f"unknown move entry {entry!r}")

    result = BraneLedger(diagram=host, branes=branes)
    assert coverage(result) == host.dims, "brane coverage lost track of the host"
    return result


# ---------------------------------------------------------------------------
# synthesis on a separated finite layout


def greedy_fixed_counts(v_arr, v_x) -> tuple[tuple[int, ...], list[int]]:
    """Per-arrow fixed-brane counts and the leftover x-side profile.

    Arrow s takes branes to x_1 .. x_{f_s} where f_s is the largest
    count the remaining x-side budget admits; the brane to x_k crosses
    v_0, v_{-1}, .., v_{-(k-1)} on that side.  Returns (f_1..f_n) and
    the budget left over after all arrows are served.
    """

    n = len(v_arr) - 1
    w = len(v_x) - 1
    cur = list(v_x)
    counts = []
    for _ in range(n):
        best = 0
        for f in range(w, -1, -1):
            if all(f <= cur[j] + j for j in range(f + 1)):
                best = f
                break
        counts.append(best)
        for j in range(best):
            cur[j] -= best - j
        assert min(cur) >= 0
    return tuple(counts), cur


def _histogram_runs(values: list[int]) -> list[tuple[int, int, int]]:
    """Decompose a nonnegative profile into stacked runs (lo, hi, mult)."""

    out: list[tuple[int, int, int]] = []

    def rec(lo: int, hi: int, base: int) -> None:
        i = lo
        while i <= hi:
            if values[i] == base:
                i += 1
                continue
            j = i
            level = values[i]
            while j + 1 <= hi and values[j + 1] > base:
                j += 1
                level = min(level, values[j])
            out.append((i, j, level - base))
            rec(i, j, level)
            i = j + 1

    if values:
        assert min(values) >= 0
        rec(0, len(values) - 1, 0)
    return out


def synthesize_finite(fin) -> BraneLedger:
    """Build a certifying ledger on a separated finite layout.

    Refuses (by assertion) unless the layout is actually
    supersymmetric; callers should decide first.
    """

    assert fin.is_finite_layout, "synthesis needs a separated finite layout"
    d = fin.diagram
    n, w = fin.n, fin.w
    counts, cur = greedy_fixed_counts(fin.v_arr, fin.v_x)
    assert cur[0] == 0, "x-side budget at the arrow arc must be used up"
    assert cur[w] == 0

    branes: dict[Brane, int] = {}
    for s in range(1, n + 1):
        for k in range(1, counts[s - 1] + 1):
            _put(branes, Brane(fin.arrow_ids[s - 1], fin.x_ids[k - 1], Direction.ACW, 0), 1)

    # leftover arrow-arc dimensions become arrow-to-arrow branes
    for m in range(1, n):
        residual = fin.v_arr[m] - sum(counts[m:])
        assert residual >= 0, "greedy overshot an arrow-arc dimension"
        if residual:
            _put(
                branes,
                Brane(fin.arrow_ids[m - 1], fin.arrow_ids[m], Direction.CW, 0),
                residual,
            )
    assert fin.v_arr[0] == sum(counts)
    assert fin.v_arr[n] == 0

    # leftover x-side profile becomes x-to-x branes
    for i, j, mult in _histogram_runs(cur[1:w]):
        lo, hi = i + 1, j + 1
        _put(branes, Brane(fin.x_ids[hi], fin.x_ids[lo - 1], Direction.CW, 0), mult)

    ledger = BraneLedger(diagram=d, branes=branes)
    assert coverage(ledger) == d.dims, "synthesized coverage does not match"
    assert ledger_is_susy(ledger)
    return ledger


def _synthesize_one_kind(d: BowDiagram) -> BraneLedger:
    """Ledger for a diagram whose nodes are all of one kind.

    Every brane is unfixed, so only coverage matters: peel the global
    minimum off as full loops, then decompose what is left into runs
    anchored at a zero.
    """

    branes: dict[Brane, int] = {}
    k = d.k
    floor = min(d.dims)
    if floor > 0:
        anchor = min(node.id for node in d.nodes)
        _put(branes, Brane(anchor, anchor, Direction.CW, 1), floor)
    residual = [v - floor for v in d.dims]
    zero = d.cut if d.cut is not None else residual.index(0)
    line = [(zero + 1 + i) % k for i in range(k - 1)]
    for i, j, mult in _histogram_runs([residual[seg] for seg in line]):
        first, last = line[i], line[j]
        _put(
            branes,
            Brane(d.nodes[(last + 1) % k].id, d.nodes[first].id, Direction.CW, 0),
            mult,
        )
    ledger = BraneLedger(diagram=d, branes=branes)
    assert coverage(ledger) == d.dims
    return ledger


def synthesize(d: BowDiagram) -> BraneLedger:
    """Certifying brane ledger for a supersymmetric diagram.

    Raises ValueError when the diagram is not supersymmetric: no valid
    ledger exists in that case.
    """

    from .susy import _decide_full

    cert, fin = _decide_full(d)
    if not cert.verdict:
        raise ValueError("diagram is not supersymmetric; no brane ledger exists")
    if d.n_arrows == 0 or d.n_xpoints == 0:
        return _synthesize_one_kind(d)

    ledger = synthesize_finite(fin)
    for entry in reversed(cert.pipeline):
        ledger = ledger_apply_move(ledger, entry, inverse=True)
        assert ledger_is_susy(ledger), "transport broke the fixed-slot bound"
    assert ledger.diagram == d
    assert coverage(ledger) == d.dims
    return ledger
