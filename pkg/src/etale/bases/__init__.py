from .core import (
    Base, LocalAtlas, GlueResult, PullbackSquare, glue, check_glue, validate_atlas,
    atlas_of_lh, as_glue, induced_map, induced_map_to, basis_check, is_local_homeomorphism,
    lh_decomposition, lh_glue, singleton_families, SingletonFamilies, pullback_lh,
    check_pullback, pullback_section, compose_lh, iso_over, total_isos, canonical_iso,
    random_atlas, validate_base, sheq_in,
)
from .points import FinSetP, FinPosP, PointBase, Poset, PMap, FiberProduct, finset, set_of_size
from .finloc import FinLocP, Lattice, LocMap
from .bundle import Bun, BunObj, BunMor
from .sheaves import Presheaf, validate_presheaf, is_sheaf, sheaf_witness, gamma, delta, counit, sheafify, sheafification_matches_glueing, subpresheaf, doubled_globals, two_point_nonsheaf, presheaf_iso, check_unit_is_presheaf_map
