"""Concrete distance problems wired to the net-and-prune driver."""

from .base import dual_radius
from .clusters import (ConnectedCluster, MinBall, MinComponent, MinMaxCluster, attach_sketches,
                       connected_cluster, min_ball, min_component, minmax_cluster)
from .connectivity import (MstKthEdge, Partition, connectivity_partition, mst_kth_edge,
                           mst_kth_edge_decider)
from .kcenter import KCenter, KCenterContext, kcenter_2approx, kcenter_decider
from .nonzero import smallest_nonzero_distance
from .ranks import (BichromaticNN, KthDistance, KthMNN, RankContext, closest_pair,
                    exact_kth_nn, furthest_nn, kth_bichromatic, kth_distance,
                    kth_distance_decider, kth_mnn, kth_mnn_decider)
from .sketches import (AtLeastPoints, ColorCoverage, ContainsFlagged, LinearInequalities,
                       PointAttributes, WeightAtLeast, family_from_name)

__all__ = [name for name in dir() if not name.startswith("_")]
