import pytest

from core.geometry import Box, first_containing, union_contains


class TestBox:
    def test_corner_order(self):
        box = Box(0.0, 2.0, 1.0, 3.0)
        assert box.corners() == [(0.0, 1.0), (2.0, 1.0), (0.0, 3.0), (2.0, 3.0)]

    def test_degenerate_corners_are_unique(self):
        assert Box(1.0, 1.0, 0.0, 2.0).corners() == [(1.0, 0.0), (1.0, 2.0)]
        assert Box(1.0, 1.0, 2.0, 2.0).corners() == [(1.0, 2.0)]

    def test_contains_is_closed(self):
        box = Box(0.0, 1.0, 0.0, 1.0)
        assert box.contains((1.0, 0.0))
        assert not box.contains((1.0 + 1e-6, 0.5))

    def test_intersection_and_area(self):
        a = Box(0.0, 2.0, 0.0, 1.0)
        b = Box(1.0, 3.0, 0.0, 2.0)
        assert a.intersection(b) == Box(1.0, 2.0, 0.0, 1.0)
        assert a.overlaps_with_area(b)

    def test_edge_contact_has_no_area(self):
        a = Box(0.0, 1.0, 0.0, 1.0)
        b = Box(1.0, 2.0, 0.0, 1.0)
        assert not a.overlaps_with_area(b)
        assert not a.intersection(b).is_empty()

    def test_disjoint_intersection_is_empty(self):
        assert Box(0.0, 1.0, 0.0, 1.0).intersection(Box(2.0, 3.0, 0.0, 1.0)).is_empty()

    def test_shrink_and_center(self):
        box = Box(0.0, 2.0, 0.0, 1.0).shrink(0.25, 0.25)
        assert box == Box(0.25, 1.75, 0.25, 0.75)
        assert box.center() == pytest.approx((1.0, 0.5))

    def test_shrink_past_size_is_empty(self):
        assert Box(0.0, 0.4, 0.0, 1.0).shrink(0.25, 0.25).is_empty()

    def test_clamp_and_bounds(self):
        box = Box(0.0, 1.0, 2.0, 3.0)
        assert box.clamp((5.0, -1.0)) == (1.0, 2.0)
        assert box.bounds(0) == (0.0, 1.0)
        assert box.bounds(1) == (2.0, 3.0)


class TestUnion:
    def test_first_containing(self):
        boxes = [Box(0.0, 1.0, 0.0, 1.0), Box(0.5, 2.0, 0.0, 1.0)]
        assert first_containing(boxes, (0.75, 0.5)) == 0
        assert first_containing(boxes, (1.5, 0.5)) == 1
        assert first_containing(boxes, (3.0, 0.5)) is None
        assert union_contains(boxes, (2.0, 1.0))
