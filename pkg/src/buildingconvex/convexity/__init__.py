"""Convexity checkers for subsets of apartments and buildings."""
from .conditions import (MODES, check_normal_condition, check_weak_normal_condition,
                         check_weak_normal_thickened, key_halfspace_inclusion, modes_agree,
                         selected_walls, thicken)
from .paths import (Segment, building_angle, check_angle_pi_concatenation, is_ascending_at,
                    length_metric_distance, link_length_distance, retract_path,
                    verify_ascending_propagation, verify_global_convexity)
from .sets import (BuildingSubset, NormalVector, as_subset, is_cone_point, is_locally_convex_at,
                   link_of_set, preimage, thin_building)

__all__ = [
    "MODES", "BuildingSubset", "NormalVector", "Segment", "as_subset", "building_angle",
    "check_angle_pi_concatenation", "check_normal_condition", "check_weak_normal_condition",
    "check_weak_normal_thickened", "is_ascending_at", "is_cone_point", "is_locally_convex_at",
    "key_halfspace_inclusion", "length_metric_distance", "link_length_distance", "link_of_set",
    "modes_agree", "preimage", "retract_path", "selected_walls", "thicken", "thin_building",
    "verify_ascending_propagation", "verify_global_convexity",
]
