"""Graph-based approximate nearest neighbor search with query-driven repair."""

from .builder import BaseBuildConfig, build_base, insert_point
from .core import DistanceCounter, Metric, VectorStore, distance, medoid
from .evaluation import rderr_at_k, recall_at_k, rows_to_csv, sweep
from .fixing import DEFAULT_SCHEDULE, FixConfig, FixReport, fix_query, fix_workload, ngfix
from .graph import INF_TAG, EdgeResult, GraphIndex, IndexFormatError
from .hardness import (INF_EH, HardnessMatrix, NeighboringGraph, brute_force_eh,
                       compute_hardness, neighboring_graph, query_hardness, reachable_matrix)
from .io import VecsFormatError, load_vectors, read_id_lists, read_vecs, write_id_lists, write_vecs
from .maintenance import MaintenanceConfig, compact, delete_point, partial_rebuild
from .properties import run_property_suite
from .rfix import RFixStatus, rfix, rfix_once
from .search import SearchResult, greedy_search, range_collect
from .workload import (KnnList, QuerySet, approx_knn, attach_ground_truth, augment, dedup,
                       exact_knn, synth_ood)

__version__ = "0.1.0"
