"""Exact PIR capacity, message-size bounds and scheme verification for arbitrary collusion patterns."""

from .construct import (
    SubsetSelection,
    direct_download,
    lift_scheme,
    prior_message_size,
    search_scheme,
    select_noncolluding,
    sigma_2x2,
)
from .errors import *  # noqa: F401,F403
from .family import (
    SetFamily,
    build_minimal_family,
    closed_form_bound,
    cyclic_family_characterization,
    family_membership,
    hitting_number,
    message_size_lower_bound,
)
from .lp import capacity, reduce_by_support, s_star, solve_covering, solve_lp, solve_packing
from .pattern import (
    CollusionPattern,
    gen_cyclic_contiguous,
    gen_disjoint,
    gen_t_collusion,
    incidence_matrix,
    make_pattern,
    normalize,
)
from .scheme import PirScheme, rate, scheme_from_json, scheme_to_json
from .verify import signal_support_count, verify_capacity_achieving
