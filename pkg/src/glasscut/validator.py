"""Independent feasibility checker for solution trees.

This module re-derives every constraint directly from the tree geometry; it
deliberately shares no logic with the branching code so that solver bugs
cannot hide behind a matching validator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Instance, SolutionError
from .solution import (
    SolutionTree,
    TreeNode,
    TYPE_BRANCH,
    TYPE_RESIDUAL,
    TYPE_WASTE,
)

VERTICAL_LEVELS = (0, 2)  # children of these levels are split by vertical cuts


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    nodes: tuple[int, ...] = ()

    def __str__(self) -> str:
        where = f" [nodes {', '.join(map(str, self.nodes))}]" if self.nodes else ""
        return f"{self.code}: {self.message}{where}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, *nodes: int) -> None:
        self.violations.append(Violation(code, message, tuple(nodes)))

    def __str__(self) -> str:
        if self.ok:
            return "feasible"
        return "\n".join(str(v) for v in self.violations)


def validate(instance: Instance, tree: SolutionTree) -> ValidationReport:
    """Every rule violation in the tree, with the offending node ids."""
    rep = ValidationReport()
    p = instance.params
    W, H = p.plate_width, p.plate_height

    plates = tree.plates()
    if not plates:
        rep.add("NO_PLATES", "solution uses no plate")
        return rep
    if [r.plate_id for r in plates] != list(range(len(plates))):
        rep.add("PLATE_ORDER", "plates out of order or skipped")
    if len(plates) > p.n_plates:
        rep.add("PLATE_ORDER", f"{len(plates)} plates exceed the stock of {p.n_plates}")

    for root in plates:
        if (root.x, root.y, root.width, root.height) != (0, 0, W, H):
            rep.add("PLATE_GEOMETRY", "plate root does not span the plate", root.node_id)
        if root.cut_level != 0:
            rep.add("PLATE_GEOMETRY", "plate root must have cut level 0", root.node_id)

    for n in tree.nodes:
        if n.parent_id is not None:
            parent = tree.by_id[n.parent_id]
            if n.cut_level != parent.cut_level + 1:
                rep.add("CUT_LEVEL", "child level must be parent level + 1", n.node_id)
            if n.plate_id != parent.plate_id:
                rep.add("CUT_LEVEL", "child on a different plate than its parent", n.node_id)
        if n.cut_level > 4:
            rep.add("CUT_LEVEL", "more than four cutting stages", n.node_id)
        if n.cut_level == 4 and tree.children_of[n.node_id]:
            rep.add("CUT_LEVEL", "a level-4 piece cannot be subdivided", n.node_id)
        if n.cut_level == 3 and len(tree.children_of[n.node_id]) > 2:
            rep.add("FOUR_CUTS", "multiple 4-cuts in one third-level sub-plate", n.node_id)
        if n.type >= 0 and tree.children_of[n.node_id]:
            rep.add("ITEM_NODE", "an item node cannot have children", n.node_id)
        if n.width <= 0 or n.height <= 0:
            rep.add("GEOMETRY", "empty node rectangle", n.node_id)

    _check_tiling(tree, rep)
    _check_cut_defects(instance, tree, rep)
    _check_items(instance, tree, rep)
    _check_size_limits(instance, tree, rep)
    _check_residual(instance, tree, rep)
    _check_precedence(instance, tree, rep)
    return rep


def _check_tiling(tree: SolutionTree, rep: ValidationReport) -> None:
    for n in tree.nodes:
        kids = tree.children_of[n.node_id]
        if not kids:
            if n.type == TYPE_BRANCH:
                rep.add("TILING", "branch node without children", n.node_id)
            continue
        if len(kids) == 1:
            k = kids[0]
            if (k.x, k.y, k.width, k.height) != (n.x, n.y, n.width, n.height):
                rep.add("TILING", "single child does not cover its parent", n.node_id)
            continue
        vertical = n.cut_level in VERTICAL_LEVELS
        if vertical:
            ordered = sorted(kids, key=lambda k: k.x)
            pos = n.x
            for k in ordered:
                if k.x != pos or k.y != n.y or k.height != n.height:
                    rep.add("TILING", "children do not tile the parent", n.node_id, k.node_id)
                    break
                pos += k.width
            else:
                if pos != n.x + n.width:
                    rep.add("TILING", "children leave the parent uncovered", n.node_id)
        else:
            ordered = sorted(kids, key=lambda k: k.y)
            pos = n.y
            for k in ordered:
                if k.y != pos or k.x != n.x or k.width != n.width:
                    rep.add("TILING", "children do not tile the parent", n.node_id, k.node_id)
                    break
                pos += k.height
            else:
                if pos != n.y + n.height:
                    rep.add("TILING", "children leave the parent uncovered", n.node_id)


def _check_cut_defects(instance: Instance, tree: SolutionTree, rep: ValidationReport) -> None:
    for n in tree.nodes:
        kids = tree.children_of[n.node_id]
        if len(kids) < 2:
            continue
        defects = instance.plate_defects(n.plate_id)
        if not defects:
            continue
        vertical = n.cut_level in VERTICAL_LEVELS
        ordered = sorted(kids, key=(lambda k: k.x) if vertical else (lambda k: k.y))
        for k in ordered[:-1]:
            if vertical:
                cut = k.x + k.width
                for d in defects:
                    if d.x < cut < d.x + d.width and d.y < n.y + n.height and n.y < d.y + d.height:
                        rep.add(
                            "CUT_DEFECT",
                            f"1/3-cut at x={cut} crosses a defect",
                            n.node_id,
                            k.node_id,
                        )
            else:
                cut = k.y + k.height
                for d in defects:
                    if d.y < cut < d.y + d.height and d.x < n.x + n.width and n.x < d.x + d.width:
                        rep.add(
                            "CUT_DEFECT",
                            f"2/4-cut at y={cut} crosses a defect",
                            n.node_id,
                            k.node_id,
                        )


def _check_items(instance: Instance, tree: SolutionTree, rep: ValidationReport) -> None:
    seen: dict[int, int] = {}
    for n in tree.item_nodes():
        if n.type >= instance.n_items:
            rep.add("UNKNOWN_ITEM", f"no item with id {n.type}", n.node_id)
            continue
        if n.type in seen:
            rep.add("DUPLICATE_ITEM", f"item {n.type} produced twice", seen[n.type], n.node_id)
        seen[n.type] = n.node_id
        item = instance.items[n.type]
        if (n.width, n.height) not in (
            (item.width, item.height),
            (item.height, item.width),
        ):
            rep.add(
                "ITEM_DIMENSIONS",
                f"wrong item dimensions: item {n.type} is {item.width}x{item.height}, "
                f"node is {n.width}x{n.height}",
                n.node_id,
            )
        for d in instance.plate_defects(n.plate_id):
            if d.intersects(n.x, n.y, n.x + n.width, n.y + n.height):
                rep.add("ITEM_DEFECT", f"item {n.type} overlaps a defect", n.node_id)
    for it in instance.items:
        if it.id not in seen:
            rep.add("MISSING_ITEM", f"item {it.id} is not produced")


def _subtree_has_item(tree: SolutionTree, node: TreeNode) -> bool:
    if node.type >= 0:
        return True
    return any(_subtree_has_item(tree, k) for k in tree.children_of[node.node_id])


def _check_size_limits(instance: Instance, tree: SolutionTree, rep: ValidationReport) -> None:
    p = instance.params
    for n in tree.nodes:
        if n.type == TYPE_WASTE and (n.width < p.min_waste or n.height < p.min_waste):
            rep.add("MIN_WASTE", f"waste piece {n.width}x{n.height} is too thin", n.node_id)
        if n.cut_level == 1 and n.type != TYPE_RESIDUAL:
            if _subtree_has_item(tree, n) and not (p.min1 <= n.width <= p.max1):
                rep.add(
                    "COLUMN_WIDTH",
                    f"first-level width {n.width} outside [{p.min1}, {p.max1}]",
                    n.node_id,
                )
        if n.cut_level == 2:
            if _subtree_has_item(tree, n) and n.height < p.min2:
                rep.add(
                    "SHELF_HEIGHT", f"second-level height {n.height} below {p.min2}", n.node_id
                )


def _check_residual(instance: Instance, tree: SolutionTree, rep: ValidationReport) -> None:
    residuals = [n for n in tree.nodes if n.type == TYPE_RESIDUAL]
    if not residuals:
        return
    plates = tree.plates()
    last = plates[-1]
    if len(residuals) > 1:
        rep.add("RESIDUAL", "more than one residual node", *(n.node_id for n in residuals))
    for n in residuals:
        if n.plate_id != last.plate_id:
            rep.add("RESIDUAL", "residual not on the last plate", n.node_id)
        if n.parent_id != last.node_id or n.cut_level != 1:
            rep.add("RESIDUAL", "residual must be a first-level piece", n.node_id)
        if n.x + n.width != last.x + last.width:
            rep.add("RESIDUAL", "residual is not the rightmost piece", n.node_id)


def _check_precedence(instance: Instance, tree: SolutionTree, rep: ValidationReport) -> None:
    """Extraction order: plates in order; vertical splits left to right,
    horizontal splits bottom to top."""
    chain_pos = {}
    for ci, chain in enumerate(instance.chains):
        for pos, item_id in enumerate(chain):
            chain_pos[item_id] = (ci, pos)
    progress = [0] * len(instance.chains)

    def walk(node: TreeNode) -> None:
        if node.type >= 0 and node.type in chain_pos:
            ci, pos = chain_pos[node.type]
            if pos != progress[ci]:
                rep.add(
                    "PRECEDENCE",
                    f"item {node.type} extracted out of chain order",
                    node.node_id,
                )
            progress[ci] = max(progress[ci], pos + 1)
            return
        kids = tree.children_of[node.node_id]
        vertical = node.cut_level in VERTICAL_LEVELS
        for k in sorted(kids, key=(lambda k: k.x) if vertical else (lambda k: k.y)):
            walk(k)

    for root in tree.plates():
        walk(root)


def objective_of(instance: Instance, tree: SolutionTree) -> int:
    """Waste of a feasible tree; the formula and the waste-leaf sum must agree."""
    report = validate(instance, tree)
    if not report.ok:
        raise SolutionError(f"INFEASIBLE {report.violations[0]}")
    p = instance.params
    plates = tree.plates()
    last = plates[-1]
    residuals = [n for n in tree.children_of[last.node_id] if n.type == TYPE_RESIDUAL]
    w_last = residuals[0].x if residuals else p.plate_width
    item_area = sum(n.width * n.height for n in tree.item_nodes())
    value = (
        len(plates) * p.plate_height * p.plate_width
        - p.plate_height * (p.plate_width - w_last)
        - item_area
    )
    leaf_sum = sum(n.width * n.height for n in tree.nodes if n.type == TYPE_WASTE)
    if value != leaf_sum:
        raise SolutionError(
            f"INTERNAL objective mismatch: formula {value} != waste leaves {leaf_sum}"
        )
    return value
