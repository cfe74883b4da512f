"""Materialization of a search leaf into the challenge cut tree.

A solution tree has one root per used plate.  Children of a node tile it
exactly; the split direction alternates with the cut level (1-cuts and
3-cuts vertical, 2-cuts and the single 4-cut horizontal).  Leaf types:
item id >= 0, -1 waste, -3 the leftover right of the last 1-cut of the last
plate; -2 marks internal branches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import Instance, Node, SolutionError
from .branching import Insertion, InsertionKind

TYPE_WASTE = -1
TYPE_BRANCH = -2
TYPE_RESIDUAL = -3


@dataclass
class TreeNode:
    node_id: int
    plate_id: int
    x: int
    y: int
    width: int
    height: int
    type: int
    cut_level: int
    parent_id: Optional[int]


@dataclass
class SolutionTree:
    nodes: list[TreeNode] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._index()

    def _index(self) -> None:
        self.by_id = {n.node_id: n for n in self.nodes}
        if len(self.by_id) != len(self.nodes):
            raise SolutionError("DUPLICATE_ID repeated node id")
        self.children_of: dict[int, list[TreeNode]] = {n.node_id: [] for n in self.nodes}
        self.roots: list[TreeNode] = []
        for n in self.nodes:
            if n.parent_id is None:
                self.roots.append(n)
            else:
                if n.parent_id not in self.by_id:
                    raise SolutionError(f"ORPHAN_NODE node {n.node_id} has no parent row")
                self.children_of[n.parent_id].append(n)

    def item_nodes(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.type >= 0]

    def plates(self) -> list[TreeNode]:
        return sorted(self.roots, key=lambda n: n.plate_id)


def objective(tree: SolutionTree, instance: Optional[Instance] = None) -> int:
    """Total waste: used plate area minus the leftover and the item areas."""
    plates = tree.plates()
    if not plates:
        raise SolutionError("INCOMPLETE empty solution tree")
    if instance is not None:
        want = {it.id for it in instance.items}
        got = [n.type for n in tree.item_nodes()]
        if sorted(got) != sorted(want):
            raise SolutionError("INCOMPLETE solution does not produce every item once")
    last = plates[-1]
    width, height = last.width, last.height
    residuals = [n for n in tree.children_of[last.node_id] if n.type == TYPE_RESIDUAL]
    w_last = residuals[0].x if residuals else width
    item_area = sum(n.width * n.height for n in tree.item_nodes())
    return len(plates) * width * height - height * (width - w_last) - item_area


# ---------------------------------------------------------------------------
# building the tree from a completed search node

class _Draft:
    __slots__ = ("x", "y", "w", "h", "type", "kids")

    def __init__(self, x, y, w, h, type_, kids=None):
        self.x, self.y, self.w, self.h = x, y, w, h
        self.type = type_
        self.kids: list[_Draft] = kids or []


class _Cell:
    __slots__ = ("x0", "x1", "kind", "placements", "split_y")

    def __init__(self, ins: Insertion):
        self.x0 = ins.x3_prev
        self.x1 = ins.x3_curr
        self.kind = ins.kind
        self.placements = ins.placements
        self.split_y = ins.split_y


class _Shelf:
    __slots__ = ("y0", "y1", "cells")

    def __init__(self, ins: Insertion):
        self.y0 = ins.y2_prev
        self.y1 = ins.y2_curr
        self.cells = [_Cell(ins)]


class _Column:
    __slots__ = ("x0", "x1", "shelves")

    def __init__(self, ins: Insertion):
        self.x0 = ins.x1_prev
        self.x1 = None  # fixed when the column closes
        self.shelves = [_Shelf(ins)]


def build_solution_tree(leaf: Node, instance: Instance) -> SolutionTree:
    """Replay the insertion sequence of a complete leaf into a cut tree."""
    if not leaf.complete:
        raise SolutionError("INCOMPLETE leaf does not pack all items")
    insertions: list[Insertion] = []
    node = leaf
    while node.parent is not None:
        insertions.append(node.insertion)
        node = node.parent
    insertions.reverse()
    if not insertions:
        raise SolutionError("NO_ITEMS nothing to materialize")

    plates: list[list[_Column]] = []
    for ins in insertions:
        if ins.depth == 0:
            if plates and ins.prev_col_x1 is not None:
                plates[-1][-1].x1 = ins.prev_col_x1
            plates.append([_Column(ins)])
        elif ins.depth == 1:
            plates[-1][-1].x1 = ins.prev_col_x1
            plates[-1].append(_Column(ins))
        elif ins.depth == 2:
            plates[-1][-1].shelves.append(_Shelf(ins))
        else:
            plates[-1][-1].shelves[-1].cells.append(_Cell(ins))
    plates[-1][-1].x1 = leaf.x1_curr

    W = instance.params.plate_width
    H = instance.params.plate_height
    rows: list[TreeNode] = []
    next_id = 0

    def emit(plate_id: int, draft: _Draft, parent_id: Optional[int], level: int) -> None:
        nonlocal next_id
        nid = next_id
        next_id += 1
        rows.append(
            TreeNode(nid, plate_id, draft.x, draft.y, draft.w, draft.h, draft.type, level, parent_id)
        )
        for kid in draft.kids:
            emit(plate_id, kid, nid, level + 1)

    for plate_id, columns in enumerate(plates):
        root = _Draft(0, 0, W, H, TYPE_BRANCH)
        for col in columns:
            root.kids.append(_draft_column(col, H))
        gap = W - columns[-1].x1
        if gap > 0:
            last_plate = plate_id == len(plates) - 1
            root.kids.append(
                _Draft(columns[-1].x1, 0, gap, H, TYPE_RESIDUAL if last_plate else TYPE_WASTE)
            )
        _normalize(root)
        emit(plate_id, root, None, 0)

    return SolutionTree(rows)


def _draft_column(col: _Column, plate_h: int) -> _Draft:
    x0, x1 = col.x0, col.x1
    assert x1 is not None, "column never closed"
    node = _Draft(x0, 0, x1 - x0, plate_h, TYPE_BRANCH)
    for shelf in col.shelves:
        node.kids.append(_draft_shelf(shelf, x0, x1))
    y_top = col.shelves[-1].y1
    if y_top < plate_h:
        node.kids.append(_Draft(x0, y_top, x1 - x0, plate_h - y_top, TYPE_WASTE))
    return node


def _draft_shelf(shelf: _Shelf, col_x0: int, col_x1: int) -> _Draft:
    y0, y1 = shelf.y0, shelf.y1
    node = _Draft(col_x0, y0, col_x1 - col_x0, y1 - y0, TYPE_BRANCH)
    for cell in shelf.cells:
        node.kids.append(_draft_cell(cell, y0, y1))
    edge = shelf.cells[-1].x1
    if edge < col_x1:
        node.kids.append(_Draft(edge, y0, col_x1 - edge, y1 - y0, TYPE_WASTE))
    return node


def _draft_cell(cell: _Cell, y0: int, y1: int) -> _Draft:
    w = cell.x1 - cell.x0
    if cell.kind is InsertionKind.WASTE_ONLY:
        return _Draft(cell.x0, y0, w, y1 - y0, TYPE_WASTE)
    if cell.kind is InsertionKind.ONE_ITEM:
        pl = cell.placements[0]
        assert (pl.x, pl.y, pl.width, pl.height) == (cell.x0, y0, w, y1 - y0)
        return _Draft(pl.x, pl.y, pl.width, pl.height, pl.item_id)
    node = _Draft(cell.x0, y0, w, y1 - y0, TYPE_BRANCH)
    split = cell.split_y
    if cell.kind is InsertionKind.ITEM_WASTE_ABOVE:
        pl = cell.placements[0]
        node.kids = [
            _Draft(pl.x, pl.y, pl.width, pl.height, pl.item_id),
            _Draft(cell.x0, split, w, y1 - split, TYPE_WASTE),
        ]
    elif cell.kind is InsertionKind.ITEM_WASTE_BELOW:
        pl = cell.placements[0]
        node.kids = [
            _Draft(cell.x0, y0, w, split - y0, TYPE_WASTE),
            _Draft(pl.x, pl.y, pl.width, pl.height, pl.item_id),
        ]
    else:  # TWO_ITEMS
        a, b = cell.placements
        node.kids = [
            _Draft(a.x, a.y, a.width, a.height, a.item_id),
            _Draft(b.x, b.y, b.width, b.height, b.item_id),
        ]
    return node


def _normalize(node: _Draft) -> None:
    """Bottom-up cleanup: a branch whose sole child is a leaf becomes that
    leaf, and runs of adjacent waste leaves fuse into one (the plate root is
    never collapsed, so a full-plate item stays root + leaf)."""
    for kid in node.kids:
        _normalize(kid)
        if kid.type == TYPE_BRANCH and len(kid.kids) == 1 and not kid.kids[0].kids:
            only = kid.kids[0]
            assert (only.x, only.y, only.w, only.h) == (kid.x, kid.y, kid.w, kid.h)
            kid.type = only.type
            kid.kids = []
    if len(node.kids) < 2:
        return
    merged: list[_Draft] = []
    for kid in node.kids:
        prev = merged[-1] if merged else None
        if (
            prev is not None
            and prev.type == TYPE_WASTE
            and kid.type == TYPE_WASTE
            and not prev.kids
            and not kid.kids
        ):
            prev.w = max(prev.x + prev.w, kid.x + kid.w) - prev.x
            prev.h = max(prev.y + prev.h, kid.y + kid.h) - prev.y
        else:
            merged.append(kid)
    node.kids = merged
