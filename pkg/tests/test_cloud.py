import math

import numpy as np
import pytest

from spreadgas.cloud import (CloudSegment, CloudSpec, classic_tr, plan_layers,
                             project_3d, total_tr)
from spreadgas.distribution import SpreadDistribution
from spreadgas.engine import product_tr, square_detector_tr


def segment(depth=1.2039728043259361, transverse=122.0, thickness=1.0):
    # number_density * thickness * cross_section = depth with sigma = 1e-4
    return CloudSegment(number_density=depth / (thickness * 1e-4),
                        cross_section=1e-4, thickness=thickness,
                        transverse_extent=transverse)


def gauss(stdev):
    return SpreadDistribution.gaussian(stdev)


class TestClassicTr:
    def test_typical_cloud(self):
        spec = CloudSpec(segments=(segment(depth=1.20397),))
        out = classic_tr(spec)
        assert out.tr_cl == pytest.approx(0.3, abs=1e-5)
        assert out.g == pytest.approx(0.7, abs=1e-5)

    def test_thin_cloud_transparent(self):
        spec = CloudSpec(segments=(segment(depth=1e-12),))
        assert classic_tr(spec).tr_cl == pytest.approx(1.0, abs=1e-11)

    def test_two_identical_segments_double_tau(self):
        one = CloudSpec(segments=(segment(depth=0.6),))
        two = CloudSpec(segments=(segment(depth=0.6), segment(depth=0.6)))
        assert classic_tr(two).tau == pytest.approx(2 * classic_tr(one).tau, rel=1e-15)

    def test_overflow_saturates_opaque(self):
        spec = CloudSpec(segments=(segment(depth=1e6),))
        out = classic_tr(spec)
        assert out.g == 1.0 and out.tr_cl == 0.0

    def test_split_invariance(self):
        whole = CloudSpec(segments=(segment(depth=0.9, thickness=2.0),))
        halves = CloudSpec(segments=(segment(depth=0.45, thickness=1.0),
                                     segment(depth=0.45, thickness=1.0)))
        assert classic_tr(halves).tau == pytest.approx(classic_tr(whole).tau, abs=1e-12)


class TestPlanLayers:
    def test_single_layer_override(self):
        spec = CloudSpec(segments=(segment(depth=-math.log(0.3)),))
        plan = plan_layers(spec, 1.0, layers_per_segment=1)
        assert len(plan.layers) == 1
        assert plan.layers[0].opacity.g == pytest.approx(0.7, rel=1e-12)

    def test_two_layers_solve_sqrt(self):
        spec = CloudSpec(segments=(segment(depth=-math.log(0.25)),))
        plan = plan_layers(spec, 1.0, layers_per_segment=2)
        assert len(plan.layers) == 2
        for layer in plan.layers:
            assert layer.opacity.g == pytest.approx(0.5, rel=1e-12)
        residual = math.prod(1 - l.opacity.g for l in plan.layers)
        assert residual == pytest.approx(0.25, rel=1e-12)

    def test_default_layer_count_is_depth_ceiling(self):
        spec = CloudSpec(segments=(segment(depth=3.4),))
        plan = plan_layers(spec, 1.0)
        assert len(plan.layers) == 4
        # per-layer g stays at or below 1 - 1/e
        assert all(l.opacity.g <= 1 - math.exp(-1) + 1e-12 for l in plan.layers)

    def test_layers_multiply_back_to_classic(self):
        spec = CloudSpec(segments=(segment(depth=2.7), segment(depth=0.4)))
        plan = plan_layers(spec, 1.0)
        residual = math.prod(1 - l.opacity.g for l in plan.layers)
        assert residual == pytest.approx(classic_tr(spec).tr_cl, rel=1e-12)

    def test_lattice_spans_transverse_extent(self):
        spec = CloudSpec(segments=(segment(transverse=122.0),))
        plan = plan_layers(spec, 1.0)
        lat = plan.layers[0].lattice
        assert len(lat) == 61
        assert lat.spacing == 2.0
        assert 0.0 in lat.offsets

    def test_even_count_forced_odd(self):
        spec = CloudSpec(segments=(segment(transverse=8.0),))
        plan = plan_layers(spec, 1.0)
        assert len(plan.layers[0].lattice) == 5

    def test_narrow_cloud_warns(self):
        spec = CloudSpec(segments=(segment(transverse=0.5),))
        with pytest.warns(UserWarning, match="transverse"):
            plan = plan_layers(spec, 1.0)
        assert len(plan.layers[0].lattice) == 1

    def test_fat_cross_section_warns(self):
        seg = CloudSegment(number_density=1.0, cross_section=0.5, thickness=1.0,
                           transverse_extent=10.0)
        with pytest.warns(UserWarning, match="cross section"):
            plan_layers(CloudSpec(segments=(seg,)), 1.0)

    def test_rejects_bad_inputs(self):
        spec = CloudSpec(segments=(segment(),))
        with pytest.raises(ValueError):
            plan_layers(spec, 0.0)
        with pytest.raises(ValueError):
            plan_layers(spec, 1.0, layers_per_segment=0)
        with pytest.raises(ValueError):
            CloudSpec(segments=())
        with pytest.raises(ValueError):
            CloudSegment(number_density=0.0, cross_section=1e-4, thickness=1.0,
                         transverse_extent=10.0)
        with pytest.raises(ValueError):
            CloudSpec(segments=(segment(),), dimensionality="d7")


class TestTotalTr:
    def test_one_layer_equals_product(self):
        spec = CloudSpec(segments=(segment(depth=-math.log(0.3)),))
        plan = plan_layers(spec, 1.0, layers_per_segment=1)
        dist = gauss(2.0)
        assert total_tr(plan, dist, 1.0) == product_tr(plan.layers[0].lattice, dist, 1.0,
                                                       plan.layers[0].opacity.g)

    def test_classical_recovery(self):
        spec = CloudSpec(segments=(segment(depth=1.1), segment(depth=0.3)))
        plan = plan_layers(spec, 1.0)
        got = total_tr(plan, gauss(1e-7), 1.0)
        assert got == pytest.approx(classic_tr(spec).tr_cl, abs=1e-9)

    def test_layer_count_invariance_in_classical_limit(self):
        spec = CloudSpec(segments=(segment(depth=1.9),))
        dist = gauss(1e-6)
        values = [total_tr(plan_layers(spec, 1.0, layers_per_segment=L), dist, 1.0)
                  for L in (1, 2, 5, 11)]
        assert max(values) - min(values) <= 1e-9

    def test_two_half_layers_reach_combined_limit(self):
        # two layers with g = 0.5 each plateau near (e^-0.5)^2 = e^-1
        spec = CloudSpec(segments=(segment(depth=-math.log(0.25)),))
        plan = plan_layers(spec, 1.0, layers_per_segment=2)
        got = total_tr(plan, gauss(20.0), 1.0)
        assert got == pytest.approx(math.exp(-1.0), rel=0.01)

    def test_segments_attenuate_independently(self):
        first = CloudSpec(segments=(segment(depth=1.1, transverse=40.0),))
        second = CloudSpec(segments=(segment(depth=0.5, transverse=80.0),))
        both = CloudSpec(segments=first.segments + second.segments)
        dist = gauss(3.0)
        partial = (total_tr(plan_layers(first, 1.0), dist, 1.0) *
                   total_tr(plan_layers(second, 1.0), dist, 1.0))
        assert total_tr(plan_layers(both, 1.0), dist, 1.0) == pytest.approx(partial, rel=1e-12)

    def test_plateau_matches_summed_limit(self):
        spec = CloudSpec(segments=(segment(depth=1.5), segment(depth=0.6)))
        plan = plan_layers(spec, 1.0)
        g_sum = math.fsum(l.opacity.g for l in plan.layers)
        got = total_tr(plan, gauss(20.0), 1.0)
        assert got == pytest.approx(math.exp(-g_sum), rel=0.01)

    def test_bounds(self):
        spec = CloudSpec(segments=(segment(depth=2.2),))
        plan = plan_layers(spec, 1.0)
        floor = math.prod(1 - l.opacity.g for l in plan.layers)
        for stdev in (1e-6, 0.5, 3.0, 50.0, 1e5):
            tr = total_tr(plan, gauss(stdev), 1.0)
            assert floor - 1e-12 <= tr <= 1.0


class TestProject3d:
    def test_grid_from_transverse_extent(self):
        spec = CloudSpec(segments=(segment(transverse=122.0),), dimensionality="d2_projected")
        layers = project_3d(spec, 1.0)
        assert all(l.grid_n == 61 for l in layers)

    def test_minimal_grid(self):
        spec = CloudSpec(segments=(segment(transverse=2.0),), dimensionality="d2_projected")
        assert project_3d(spec, 1.0)[0].grid_n == 1

    def test_classical_recovery_2d(self):
        spec = CloudSpec(segments=(segment(depth=0.9, transverse=20.0),),
                         dimensionality="d2_projected")
        layers = project_3d(spec, 1.0)
        dist = gauss(1e-7)
        tr = math.prod(square_detector_tr(l.grid_n, dist, 1.0, l.g) for l in layers)
        assert tr == pytest.approx(classic_tr(spec).tr_cl, abs=1e-9)

    def test_plateau_2d(self):
        spec = CloudSpec(segments=(segment(depth=0.7, transverse=80.0),),
                         dimensionality="d2_projected")
        layers = project_3d(spec, 1.0)
        dist = gauss(8.0)
        tr = math.prod(square_detector_tr(l.grid_n, dist, 1.0, l.g) for l in layers)
        g_sum = math.fsum(l.g for l in layers)
        assert tr == pytest.approx(math.exp(-g_sum), rel=0.01)

    def test_requires_projected_dimensionality(self):
        spec = CloudSpec(segments=(segment(),), dimensionality="d1")
        with pytest.raises(ValueError, match="d2_projected"):
            project_3d(spec, 1.0)
