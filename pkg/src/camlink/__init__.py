"""camlink: camera-to-camera trajectory association via dual decomposition."""

from .affinity import (AffinityConfig, CbtfTable, appearance_similarity_cbtf,
                       appearance_similarity_direct, bhattacharyya_coefficient,
                       learn_cbtf, learn_cbtf_table, link_cost, pair_cost,
                       spatio_temporal_factor, travel_time_factor)
from .energy import (EnergyModel, LinkingConfig, Partition, build_energy_model,
                     energy_linear, energy_quadratic, is_feasible_linear,
                     is_feasible_quadratic, linking_to_partition,
                     partition_to_linking)
from .ldd import run_ldd
from .metrics import Evaluation, evaluate
from .model import (AppearanceHistogram, CameraTopology, CandidateLinkSet,
                    Link, Observation, build_candidate_links, neighbors)
from .oracle import (brute_force_linear, brute_force_quadratic,
                     exact_linear_assignment, lrmcf_lower_bound)
from .qdd import run_qdd
from .scenario import ScenarioSpec, generate, make_topology, benchmark_spec
from .simnet import MessageLog, audit_locality, run_distributed
from .subgradient import RunReport, StepSchedule, StoppingRule

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
