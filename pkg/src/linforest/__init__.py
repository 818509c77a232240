"""Two-edge-colouring of cubic graphs into (near-)isomorphic linear forests.

A library plus CLI for the constructive route: a randomized colouring whose
monochromatic components are short paths, gadget construction around long
geodesics, extendability repair of the pre-colouring, and exact balancing
of the per-length path counts, with a brute-force oracle at desk scale.
"""

from .graph import (CubicGraph, Geodesic, Config, parse_graph6, to_graph6,
                    parse_edge_list, to_edge_list, random_cubic,
                    harvest_geodesics, distance, diameter)
from .colouring import (RED, BLUE, UNCOLOURED, Colouring,
                        monochromatic_components, profile,
                        is_isomorphic_linear_forests, check_extendable)
from .basecol import (vizing_four_colour, merge_to_two, weak_thomassen,
                      decompose_h123, build_chi0)
from .pipeline import (chi1_step, chi2_step, chi3_step, chi4_step,
                       run_approx, prepare_chi0, PipelineDiagnostics)
from .gadgets import (GadgetTemplate, GadgetInstance, instantiate,
                      apply_swap, measure_delta, find_surviving)
from .geodesic import (classify_comb_case, comb_colour, precolour,
                       fix_exceptional, detect_gadget_case, create_gadget,
                       colour_around_geodesic, GeodesicContext)
from .repair import (fix_bad_cycle, destroy_all_bad_cycles, assemble_g0,
                     list_bad_cycles)
from .balance import (balance_long_paths, balance_edge_counts, gadget_ladder,
                      assert_final_balance, run_exact, Certificate)
from .oracle import (exhaustive_decompose, verify_small_range,
                     verify_gadget_semantics, enumerate_cubic_graphs)

__version__ = "0.1.0"
