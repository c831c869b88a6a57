"""Angular depth, depth-trimmed means and robust spatio-temporal clustering
(RSTC) for functional data observed at spatial sites."""
from .core import (ConfigError, ContractError, Dataset, DegenerateAngleError, IngestError,
                   InsufficientSampleError, NumericError, Partition, RSTCError, TimeGrid,
                   inner_product, interpolate_missing, l2_distance)
from .depth import (DepthReport, TrimmedMean, angle, angular_depth, depth_vector,
                    projection_depth_oracle, trimmed_mean)
from .engine import RSTCConfig, RSTCResult, reassign_step, rstc_cluster, stopping_check
from .metrics import adjusted_rand_index, match_clusters, standardized_rmse
from .spatial import (DistanceMatrix, distance_percentile, geodesic_km, min_distance_to_cluster,
                      pairwise_distances)

__version__ = "0.1.0"
