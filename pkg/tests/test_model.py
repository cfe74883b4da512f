"""Geometry accounting: areas, waste, fronts and dominance."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from glasscut.model import (
    Front,
    Instance,
    InstanceError,
    Item,
    Params,
    area,
    dominates,
    front_leq,
    root_node,
    waste,
)
from glasscut.branching import children

from conftest import (
    SMALL_PARAMS,
    front_leq_grid,
    make_instance,
    random_front,
    random_small_instance,
    random_walk,
    raster_front_area,
)


class TestParams:
    def test_defaults(self):
        p = Params()
        assert (p.plate_width, p.plate_height) == (6000, 3210)
        assert (p.min1, p.max1, p.min2, p.min_waste) == (100, 3500, 100, 20)
        assert p.n_plates == 100

    @pytest.mark.parametrize(
        "kw",
        [
            {"min1": 0},
            {"min1": 4000, "max1": 3500},
            {"max1": 7000},
            {"min2": 0},
            {"min_waste": 0},
            {"min_waste": 150},
            {"plate_width": 0},
            {"n_plates": 0},
        ],
    )
    def test_rejects_bad_limits(self, kw):
        with pytest.raises(InstanceError):
            Params(**kw)


class TestInstance:
    def test_rejects_item_outside_plate(self):
        with pytest.raises(InstanceError):
            make_instance([(1100, 700)])

    def test_rejects_sliver_item(self):
        with pytest.raises(InstanceError):
            make_instance([(5, 300)])

    def test_rejects_overlapping_defects(self):
        from glasscut.model import Defect

        with pytest.raises(InstanceError):
            Instance(
                params=SMALL_PARAMS,
                items=[Item(0, 100, 100, 0, 0)],
                chains=[[0]],
                defects={0: (Defect(0, 10, 10, 50, 50), Defect(0, 30, 30, 50, 50))},
            )

    def test_rejects_out_of_plate_defect(self):
        from glasscut.model import Defect

        with pytest.raises(InstanceError):
            Instance(
                params=SMALL_PARAMS,
                items=[Item(0, 100, 100, 0, 0)],
                chains=[[0]],
                defects={0: (Defect(0, 990, 0, 50, 50),)},
            )


def _node_with(instance, **coords):
    """A bare node carrying given coordinates (area bookkeeping only)."""
    base = root_node(instance)
    node = root_node(instance)
    for key, value in coords.items():
        setattr(node, key, value)
    node.area = area(node)
    node.waste = node.area - node.item_area
    assert base.area == 0
    return node


class TestArea:
    def test_root_is_zero(self):
        inst = make_instance([(100, 100)])
        assert area(root_node(inst)) == 0
        assert waste(root_node(inst)) == 0

    def test_single_shelf_partial(self):
        # one 2000x1000 item in a [0,2000]x[0,1000] shelf, items remaining
        inst = make_instance([(2000, 1000), (500, 500)], params=Params())
        node = _node_with(
            inst, bin=0, x1_prev=0, x1_curr=2000, y2_prev=0, y2_curr=1000,
            x3_prev=0, x3_curr=2000, item_area=2000 * 1000,
        )
        assert area(node) == 2_000_000
        assert waste(node) == 0
        assert raster_front_area(node) == 2_000_000

    def test_complete_uses_last_cut(self):
        inst = make_instance([(2000, 1000)], params=Params())
        node = _node_with(
            inst, bin=0, x1_prev=0, x1_curr=4000, y2_prev=0, y2_curr=3210,
            x3_prev=0, x3_curr=4000, item_area=10_000_000, complete=True,
            n_packed=1,
        )
        assert area(node) == 12_840_000
        assert waste(node) == 2_840_000
        assert raster_front_area(node) == 12_840_000

    def test_area_matches_raster_on_random_walks(self, rng):
        for _ in range(40):
            inst = random_small_instance(rng)
            for node in random_walk(rng, inst):
                assert node.area == raster_front_area(node)


class TestWasteMonotonicity:
    def test_waste_never_decreases_along_edges(self, rng):
        checked = 0
        while checked < 3000:
            inst = random_small_instance(rng)
            path = random_walk(rng, inst)
            for parent, child in zip(path, path[1:]):
                assert child.waste >= parent.waste >= 0
                checked += 1


class TestFrontLeq:
    def test_reflexive(self, rng):
        f = random_front(rng)
        assert front_leq(f, f)

    def test_bin_mismatch_raises(self):
        f1 = Front(0, 0, 100, 50, 10, 20)
        f2 = Front(1, 0, 100, 50, 10, 20)
        with pytest.raises(ValueError, match="BIN_MISMATCH"):
            front_leq(f1, f2)

    def test_flat_fronts_compare_by_width(self):
        # a column committed to x=2000 vs one committed to x=3000, both up to y=3000
        a = Front(0, 0, 2000, 2000, 3000, 3000)
        b = Front(0, 0, 3000, 3000, 3000, 3000)
        assert front_leq(a, b)
        assert not front_leq(b, a)

    def test_spec_counterexample(self):
        f1 = Front(0, 500, 3000, 1000, 1000, 2000)
        f2 = Front(0, 500, 2900, 1000, 1000, 2000)
        assert not front_leq(f1, f2)  # f1 sticks out below y=1000
        assert front_leq(f2, f1)
        assert front_leq_grid(f2, f1, 3210)
        assert not front_leq_grid(f1, f2, 3210)

    def test_matches_grid_oracle(self, rng):
        for _ in range(2000):
            f1, f2 = random_front(rng), random_front(rng)
            assert front_leq(f1, f2) == front_leq_grid(f1, f2, 600)

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_partial_order_laws(self, data):
        def fronts(label):
            W, H = 400, 300
            x1_prev = data.draw(st.integers(0, W), label=label + "_x1p")
            x1_curr = data.draw(st.integers(x1_prev, W), label=label + "_x1c")
            x3_curr = data.draw(st.integers(x1_prev, x1_curr), label=label + "_x3")
            y2_prev = data.draw(st.integers(0, H), label=label + "_y2p")
            y2_curr = data.draw(st.integers(y2_prev, H), label=label + "_y2c")
            return Front(0, x1_prev, x1_curr, x3_curr, y2_prev, y2_curr)

        a, b, c = fronts("a"), fronts("b"), fronts("c")
        assert front_leq(a, a)
        if front_leq(a, b) and front_leq(b, c):
            assert front_leq(a, c)
        if front_leq(a, b) and front_leq(b, a):
            # equal as step functions
            for y in range(0, 301, 7):
                assert a.x_at(y) == b.x_at(y)


class TestDominates:
    def test_same_node(self):
        inst = make_instance([(100, 100), (200, 150)])
        node = random_walk(random.Random(1), inst)[-1]
        assert dominates(node, node)

    def test_same_items_tighter_front_dominates(self):
        # in a 300-tall shelf, item 1 standing (200 wide) commits less of the
        # plate than item 1 lying flat (300 wide): same items, comparable fronts
        inst = make_instance([(400, 300), (200, 300)], chains=[[0], [1]])
        root = root_node(inst)
        parent = next(
            k
            for k in children(root, inst)
            if k.insertion.placements[0].item_id == 0
            and not k.insertion.placements[0].rotated
        )
        kids = children(parent, inst, use_dominance=False)
        depth3 = [k for k in kids if k.insertion.depth == 3 and k.insertion.has_items]
        upright = next(k for k in depth3 if not k.insertion.placements[0].rotated)
        flat = next(k for k in depth3 if k.insertion.placements[0].rotated)
        assert dominates(upright, flat)
        assert not dominates(flat, upright)
        filtered = children(parent, inst, use_dominance=True)
        assert not any(
            k.insertion.depth == 3 and k.insertion.has_items and k.insertion.placements[0].rotated
            for k in filtered
        )

    def test_different_items_never_dominate(self):
        inst = make_instance([(300, 200), (300, 200)], chains=[[0], [1]])
        root = root_node(inst)
        kids = children(root, inst, use_dominance=False)
        k0 = next(k for k in kids if k.insertion.placements[0].item_id == 0)
        k1 = next(k for k in kids if k.insertion.placements[0].item_id == 1)
        assert k0.front_key()[1:] == k1.front_key()[1:]
        assert not dominates(k0, k1)
        assert not dominates(k1, k0)
