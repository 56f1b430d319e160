"""Random projection tree vector quantization, with a 3SAT to 2-means hardness reduction."""
from .geometry_stats import avg_sq_diameter, diameter, local_cov_dimension, set_stats, split_decrease
from .rptree import TreeParams, make_tree, quantization_error, route, route_many, serialize, deserialize
from .datagen_eval import ManifoldSpec, error_vs_k, generate, lloyd_kmeans, brute_force_kmeans
from .hardness import end_to_end_reduce, parse_dimacs

__version__ = "0.1.0"
