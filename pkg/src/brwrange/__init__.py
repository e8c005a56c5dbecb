"""Monte Carlo laboratory for the range of a branching random walk indexed
by the Kesten tree with geometric offspring."""
from .contour import (
    CertificationError,
    ContourPath,
    TreeIndex,
    WindowError,
    excursion_statistic,
    gen_contour,
    gen_contour_certified,
    reconstruct_tree,
    tree_distance,
)
from .ranges import RangeLedger, XiVector, ball_count, range_size, xi_k_all, y_windowed
from .snake import SnakeTrajectory, gen_snake, gen_snake_certified, shift_origin
from .streams import ReplicaStreams, replica_seed

__version__ = "0.1.0"
