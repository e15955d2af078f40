"""Core data model for cyclic brane diagrams.

A diagram is a circle of nodes of two kinds, arrows ("o") and x-points
("x"), with a nonnegative-or-not integer dimension attached to every
segment between consecutive nodes.  Positions and segments are indexed
anticlockwise: segment ``i`` sits between ``nodes[i]`` and
``nodes[(i + 1) % k]``.  A finite diagram is the same circle with one
distinguished segment (the cut) that must carry dimension zero; an
affine diagram has no cut.

This module owns parsing/rendering of the text grammar, the JSON
mirrors for diagrams and move logs, structural validation, the
separated view (all x-points contiguous) with its standard segment
labelling, arc walks, and the reflection swapping the two node kinds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

# ---------------------------------------------------------------------------
# nodes and diagrams


class NodeKind(str, Enum):
    ARROW = "o"
    XPOINT = "x"


class Direction(str, Enum):
    CW = "cw"
    ACW = "acw"


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind


@dataclass(frozen=True)
class BowDiagram:
    """Circle of nodes with per-segment dimensions and an optional cut.

    ``dims[i]`` is the dimension of the segment that follows ``nodes[i]``
    anticlockwise.  ``cut`` is a segment index for finite diagrams and
    ``None`` for affine ones.  Dimensions may be negative; only shape
    constraints are enforced by :func:`validate`.
    """

    nodes: tuple[Node, ...]
    dims: tuple[int, ...]
    cut: int | None = None

    @property
    def k(self) -> int:
        return len(self.nodes)

    @property
    def is_finite(self) -> bool:
        return self.cut is not None

    def position(self, node_id: int) -> int:
        for pos, node in enumerate(self.nodes):
            if node.id == node_id:
                return pos
        raise KeyError(f"no node with id {node_id}")

    def node_by_id(self, node_id: int) -> Node:
        return self.nodes[self.position(node_id)]

    def count(self, kind: NodeKind) -> int:
        return sum(1 for node in self.nodes if node.kind == kind)

    @property
    def n_arrows(self) -> int:
        return self.count(NodeKind.ARROW)

    @property
    def n_xpoints(self) -> int:
        return self.count(NodeKind.XPOINT)


def validate(d: BowDiagram) -> list[str]:
    """Return the list of shape violations, empty when the diagram is legal.

    Negative dimensions are legal data and are not reported here.
    """

    problems: list[str] = []
    if len(d.nodes) == 0:
        problems.append("diagram has no nodes")
    if len(d.dims) != len(d.nodes):
        problems.append(
            f"expected {len(d.nodes)} segment dims, found {len(d.dims)}"
        )
    ids = [node.id for node in d.nodes]
    if len(set(ids)) != len(ids):
        problems.append("node ids are not distinct")
    for value in d.dims:
        if not isinstance(value, int) or isinstance(value, bool):
            problems.append(f"dimension {value!r} is not an integer")
    if d.cut is not None:
        if not (0 <= d.cut < len(d.dims)):
            problems.append(f"cut index {d.cut} out of range")
        elif d.dims[d.cut] != 0:
            problems.append(f"cut segment carries dimension {d.dims[d.cut]} != 0")
    return problems


def fresh_node_id(d: BowDiagram) -> int:
    return max(node.id for node in d.nodes) + 1


# ---------------------------------------------------------------------------
# text grammar

_KIND_TOKENS = {kind.value: kind for kind in NodeKind}


def _parse_int(token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ValueError(f"expected an integer dimension, found {token!r}") from None


def parse_diagram(text: str) -> BowDiagram:
    """Parse the whitespace-token grammar.

    Affine diagrams are written ``( d0 n0 d1 n1 ... )`` with each
    dimension preceding its node; the circle closes by wrapping ``d0``
    behind the last node.  Finite diagrams are written
    ``[ d0 n0 d1 ... n_last d_end ]``.  A finite end segment with
    nonzero dimension gets a fresh boundary arrow with a zero segment
    behind it, which changes nothing up to the usual moves; the two
    zero ends are then identified into the single cut segment.
    Node ids are assigned in storage order starting from 0.
    """

    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("diagram text too short")
    opener, closer = tokens[0], tokens[-1]
    inner = tokens[1:-1]
    if opener == "(" and closer == ")":
        if len(inner) % 2 != 0 or len(inner) == 0:
            raise ValueError("affine diagram needs dimension/node token pairs")
        dims_text = [_parse_int(tok) for tok in inner[0::2]]
        kinds = [_token_kind(tok) for tok in inner[1::2]]
        k = len(kinds)
        nodes = tuple(Node(i, kind) for i, kind in enumerate(kinds))
        dims = tuple(dims_text[(j + 1) % k] for j in range(k))
        return BowDiagram(nodes=nodes, dims=dims, cut=None)
    if opener == "[" and closer == "]":
        if len(inner) % 2 != 1 or len(inner) < 3:
            raise ValueError("finite diagram needs dims around every node")
        dims_text = [_parse_int(tok) for tok in inner[0::2]]
        kinds = [_token_kind(tok) for tok in inner[1::2]]
        if dims_text[0] != 0:
            dims_text.insert(0, 0)
            kinds.insert(0, NodeKind.ARROW)
        if dims_text[-1] != 0:
            dims_text.append(0)
            kinds.append(NodeKind.ARROW)
        k = len(kinds)
        nodes = tuple(Node(i, kind) for i, kind in enumerate(kinds))
        dims = tuple(dims_text[1:k]) + (0,)
        return BowDiagram(nodes=nodes, dims=dims, cut=k - 1)
    raise ValueError(f"unbalanced diagram delimiters {opener!r} ... {closer!r}")


def _token_kind(token: str) -> NodeKind:
    if token not in _KIND_TOKENS:
        raise ValueError(f"expected node token 'o' or 'x', found {token!r}")
    return _KIND_TOKENS[token]


def render_diagram(d: BowDiagram) -> str:
    """Inverse of :func:`parse_diagram` on valid diagrams."""

    assert not validate(d), validate(d)
    k = d.k
    if d.cut is None:
        parts = []
        for j in range(k):
            parts.append(str(d.dims[(j - 1) % k]))
            parts.append(d.nodes[j].kind.value)
        return "( " + " ".join(parts) + " )"
    start = (d.cut + 1) % k
    parts = [str(d.dims[d.cut])]
    for i in range(k):
        pos = (start + i) % k
        parts.append(d.nodes[pos].kind.value)
        parts.append(str(d.dims[pos]))
    return "[ " + " ".join(parts) + " ]"


# ---------------------------------------------------------------------------
# JSON mirrors

def diagram_to_json(d: BowDiagram) -> dict:
    """Dict mirror of the text grammar (dimension precedes node).

    Node ids ride along so that move logs written against the diagram
    stay meaningful after a round trip.
    """

    assert not validate(d), validate(d)
    k = d.k
    if d.cut is None:
        return {
            "shape": "affine",
            "nodes": [node.kind.value for node in d.nodes],
            "ids": [node.id for node in d.nodes],
            "dims": [d.dims[(j - 1) % k] for j in range(k)],
        }
    start = (d.cut + 1) % k
    order = [(start + i) % k for i in range(k)]
    return {
        "shape": "finite",
        "nodes": [d.nodes[pos].kind.value for pos in order],
        "ids": [d.nodes[pos].id for pos in order],
        "dims": [d.dims[d.cut]] + [d.dims[pos] for pos in order],
    }


def _restore_ids(base: BowDiagram, ids) -> BowDiagram:
    ids = [int(v) for v in ids]
    if len(ids) != len(base.nodes):
        raise ValueError(f"expected {len(base.nodes)} node ids, found {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ValueError("node ids are not distinct")
    nodes = tuple(Node(id=i, kind=node.kind) for i, node in zip(ids, base.nodes))
    return BowDiagram(nodes=nodes, dims=base.dims, cut=base.cut)


def diagram_from_json(data: dict) -> BowDiagram:
    shape = data.get("shape")
    kinds = [_token_kind(tok) for tok in data.get("nodes", [])]
    dims = [int(v) for v in data.get("dims", [])]
    if shape == "affine":
        body = " ".join(f"{d} {kd.value}" for d, kd in zip(dims, kinds, strict=True))
        base = parse_diagram(f"( {body} )")
    elif shape == "finite":
        if len(dims) != len(kinds) + 1:
            raise ValueError("finite diagram needs one more dim than nodes")
        parts = []
        for i, kd in enumerate(kinds):
            parts.append(str(dims[i]))
            parts.append(kd.value)
        parts.append(str(dims[-1]))
        base = parse_diagram("[ " + " ".join(parts) + " ]")
    else:
        raise ValueError(f"unknown diagram shape {shape!r}")
    if "ids" in data:
        return _restore_ids(base, data["ids"])
    return base


# ---------------------------------------------------------------------------
# move log entries

@dataclass(frozen=True)
class HwMove:
    """Swap of the adjacent pair (left, right), left anticlockwise-first."""

    left: int
    right: int


@dataclass(frozen=True)
class IncrementArrows:
    """Uniform raise along the arc from one arrow to another."""

    start: int
    end: int
    direction: Direction
    amount: int


@dataclass(frozen=True)
class IncrementX:
    """Uniform raise along the arc from one x-point to another."""

    start: int
    end: int
    direction: Direction
    amount: int


@dataclass(frozen=True)
class SubtractArrowArc:
    """Uniform drop on the arc of segments touching an arrow."""

    amount: int


@dataclass(frozen=True)
class CutAt:
    """Turn an affine diagram finite by cutting a zero segment."""

    segment: int


MoveEntry = Union[HwMove, IncrementArrows, IncrementX, SubtractArrowArc, CutAt]
MoveLog = tuple[MoveEntry, ...]


def entry_to_json(entry: MoveEntry) -> dict:
    if isinstance(entry, HwMove):
        return {"op": "hw", "left": entry.left, "right": entry.right}
    if isinstance(entry, IncrementArrows):
        return {
            "op": "increment_arrows",
            "start": entry.start,
            "end": entry.end,
            "dir": entry.direction.value,
            "amount": entry.amount,
        }
    if isinstance(entry, IncrementX):
        return {
            "op": "increment_x",
            "start": entry.start,
            "end": entry.end,
            "dir": entry.direction.value,
            "amount": entry.amount,
        }
    if isinstance(entry, SubtractArrowArc):
        return {"op": "subtract_arrow_arc", "amount": entry.amount}
    if isinstance(entry, CutAt):
        return {"op": "cut_at", "segment": entry.segment}
    raise TypeError(f"unknown move entry {entry!r}")


def entry_from_json(data: dict) -> MoveEntry:
    op = data.get("op")
    if op == "hw":
        return HwMove(left=int(data["left"]), right=int(data["right"]))
    if op == "increment_arrows":
        return IncrementArrows(
            start=int(data["start"]),
            end=int(data["end"]),
            direction=Direction(data["dir"]),
            amount=int(data["amount"]),
        )
    if op == "increment_x":
        return IncrementX(
            start=int(data["start"]),
            end=int(data["end"]),
            direction=Direction(data["dir"]),
            amount=int(data["amount"]),
        )
    if op == "subtract_arrow_arc":
        return SubtractArrowArc(amount=int(data["amount"]))
    if op == "cut_at":
        return CutAt(segment=int(data["segment"]))
    raise ValueError(f"unknown move op {op!r}")


def log_to_json(log: Iterable[MoveEntry]) -> list[dict]:
    return [entry_to_json(entry) for entry in log]


def log_from_json(data: Iterable[dict]) -> MoveLog:
    return tuple(entry_from_json(item) for item in data)


# ---------------------------------------------------------------------------
# arcs

def arc_segments(d: BowDiagram, start_id: int, end_id: int, direction: Direction) -> tuple[int, ...]:
    """Segment indices of the directed open arc from start to end.

    Walking anticlockwise from position ``i`` to position ``j`` covers
    the segments ``i, i+1, ..., j-1``; clockwise covers
    ``i-1, i-2, ..., j``.  Equal endpoints give the empty arc: a full
    loop is bookkept as a lap count, not an arc.
    """

    k = d.k
    i = d.position(start_id)
    j = d.position(end_id)
    if i == j:
        return ()
    segs = []
    if direction == Direction.ACW:
        pos = i
        while pos != j:
            segs.append(pos)
            pos = (pos + 1) % k
    else:
        pos = i
        while pos != j:
            pos = (pos - 1) % k
            segs.append(pos)
    return tuple(segs)


# ---------------------------------------------------------------------------
# separated view

@dataclass(frozen=True)
class SeparatedForm:
    """Labelled view of a diagram whose x-points are contiguous.

    Going anticlockwise: ``v_0``, then ``x_1 .. x_w`` with the segments
    ``v_-1 .. v_-w`` between and after them, then the arrows in the
    order ``e_n, ..., e_1`` with ``v_s`` the tail segment of ``e_s``.
    The circle identifies ``v_n`` with ``v_-w``; ``v_arr`` stores
    ``(v_0, ..., v_n)`` and ``v_x`` stores ``(v_0, v_-1, ..., v_-w)``,
    so ``v_arr[0] == v_x[0]`` and ``v_arr[n] == v_x[w]``.
    ``seg_arr``/``seg_x`` give the underlying segment indices.
    """

    diagram: BowDiagram
    arrow_ids: tuple[int, ...]
    x_ids: tuple[int, ...]
    v_arr: tuple[int, ...]
    v_x: tuple[int, ...]
    seg_arr: tuple[int, ...]
    seg_x: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.arrow_ids)

    @property
    def w(self) -> int:
        return len(self.x_ids)

    @property
    def gap(self) -> int:
        return self.v_arr[0] - self.v_x[-1]

    @property
    def is_finite_layout(self) -> bool:
        """True when the diagram is finite with the cut on the v_n segment."""

        return self.diagram.is_finite and self.diagram.cut == self.seg_x[-1]


def separated_view(d: BowDiagram) -> SeparatedForm | None:
    """Labelled separated form, or None when the x-points are not contiguous.

    Diagrams with no arrows or no x-points are trivially separated; the
    lowest-id node of the populated kind anchors the labelling.  For a
    finite diagram with both kinds present the cut must not sit between
    two x-points of the run (the run may not straddle the cut); it may
    sit anywhere on the arrow arc, and :attr:`SeparatedForm.is_finite_layout`
    tells whether it sits on the ``v_n`` boundary segment.
    """

    assert not validate(d), validate(d)
    k = d.k
    xpos = [pos for pos, node in enumerate(d.nodes) if node.kind == NodeKind.XPOINT]
    w = len(xpos)
    n = k - w

    if w == 0:
        anchor = min(range(k), key=lambda pos: d.nodes[pos].id)
        arrow_ids = [d.nodes[anchor].id]
        for s in range(2, n + 1):
            arrow_ids.append(d.nodes[(anchor + n - s + 1) % k].id)
        # with no x-points the v_0 and v_n labels land on the same segment
        seg_arr = [anchor] + [(d.position(a) - 1) % k for a in arrow_ids]
        v_arr = tuple(d.dims[s] for s in seg_arr)
        assert seg_arr[0] == seg_arr[-1]
        return SeparatedForm(
            diagram=d,
            arrow_ids=tuple(arrow_ids),
            x_ids=(),
            v_arr=v_arr,
            v_x=(v_arr[0],),
            seg_arr=tuple(seg_arr),
            seg_x=(anchor,),
        )

    if n == 0:
        anchor = min(xpos, key=lambda pos: d.nodes[pos].id)
        x_ids = [d.nodes[(anchor + i) % k].id for i in range(w)]
        seg_x = [(anchor - 1) % k] + [(anchor + i) % k for i in range(w)]
        v_x = tuple(d.dims[s] for s in seg_x)
        return SeparatedForm(
            diagram=d,
            arrow_ids=(),
            x_ids=tuple(x_ids),
            v_arr=(v_x[0],),
            v_x=v_x,
            seg_arr=((anchor - 1) % k,),
            seg_x=tuple(seg_x),
        )

    starts = [pos for pos in xpos if d.nodes[(pos - 1) % k].kind == NodeKind.ARROW]
    if len(starts) != 1:
        return None
    p1 = starts[0]
    if any(d.nodes[(p1 + i) % k].kind != NodeKind.XPOINT for i in range(w)):
        return None

    x_ids = tuple(d.nodes[(p1 + i) % k].id for i in range(w))
    seg_x = tuple([(p1 - 1) % k] + [(p1 + i) % k for i in range(w)])
    arrow_ids = tuple(d.nodes[(p1 + w + (n - s)) % k].id for s in range(1, n + 1))
    # seg_arr[0] is the head segment of e_1; seg_arr[s] the tail segment of e_s
    seg_arr = tuple([d.position(arrow_ids[0])] + [(d.position(a) - 1) % k for a in arrow_ids])
    if d.is_finite and d.cut in seg_x[1:w]:
        return None
    v_arr = tuple(d.dims[s] for s in seg_arr)
    v_x = tuple(d.dims[s] for s in seg_x)
    assert v_arr[0] == v_x[0] and v_arr[-1] == v_x[-1]
    return SeparatedForm(
        diagram=d,
        arrow_ids=arrow_ids,
        x_ids=x_ids,
        v_arr=v_arr,
        v_x=v_x,
        seg_arr=seg_arr,
        seg_x=seg_x,
    )


def s_dual(d: BowDiagram) -> BowDiagram:
    """Swap the two node kinds everywhere, keeping dims, ids and the cut."""

    flipped = tuple(
        Node(node.id, NodeKind.XPOINT if node.kind == NodeKind.ARROW else NodeKind.ARROW)
        for node in d.nodes
    )
    return BowDiagram(nodes=flipped, dims=d.dims, cut=d.cut)
