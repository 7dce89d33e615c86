"""Non-reversible random walks on a cycle with a few extra matching edges.

Build instances (:mod:`ringmix.graph`), the transition operator
(:mod:`ringmix.kernel`), exact mixing-time profiles (:mod:`ringmix.mixing`),
trajectory statistics (:mod:`ringmix.walker`), the modular spread of
reachable endpoints (:mod:`ringmix.spread`) and experiment campaigns
(:mod:`ringmix.harness`).
"""

import logging

from .errors import (ArityError, CampaignError, DimensionError, DomainError, InvalidInstanceError,
                     NotMixedError, NumericalDriftError, ParameterError, RingmixError, RunawayError,
                     SchemaError, SizeGuardError)
from .graph import (PRNG_ID, InstanceSpec, PerturbedCycle, check_B1, from_spec, sample_instance,
                    serialize)
from .kernel import WalkParams, step_distribution, transition_matrix, transition_row
from .mixing import MixingProfile, distance_profile, exponent_fit, mixing_time, tv_distance
from .walker import (TrackStats, absorption_oracle, conditional_endpoint_spread, estimate_decisions,
                     gambler_facts, pg_closed_form, reconstruct_usage, run_track)
from .spread import (both_sides_check, expected_window_hits, f_l, gap_stats, min_nonzero_distance,
                     xi_set)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
