"""Local entropy theory of covers for Z^d shifts of finite type.

Finite, certified computations: Følner sets and quasi-tilings, window
languages, topological and measure-theoretic entropy of covers with the
bounds they support, Katok's statistic, and entropy tuples.
"""

from __future__ import annotations

from .entropy import (
    EntropyEstimate,
    conditional,
    empirical_vp_measure,
    h_mu_cover,
    h_mu_minus_cover,
    h_mu_partition,
    h_top,
    katok_b,
    katok_entropy,
    language,
    min_subcover,
    separated_set,
    shannon,
    static_cover_entropy,
    vp_check,
)
from .group import (
    FiniteSubset,
    FolnerSequence,
    boundary,
    bracket_invariant,
    folner,
    inverse_set,
    invariance_ratio,
    multiply,
    set_product,
)
from .measures import (
    Bernoulli,
    Convex,
    Empirical,
    EmpiricalSpec,
    Markov,
    Periodic,
    convex_combine,
    cylinder_mass,
    empirical_measure,
    invariance_defect,
    set_mass,
)
from .setcover import min_partial_cover, min_set_cover
from .subshift import (
    SFT,
    Alphabet,
    Cover,
    Language,
    Partition,
    Pattern,
    SymbolicSet,
    atoms,
    cover_pullback,
    join,
    product_sft,
    return_set,
    symbol_partition,
    translate,
)
from .tiling import (
    QuasiTiling,
    choose_tiling_parameters,
    epsilon_disjoint_check,
    even_cover_translates,
    quasi_tile,
    select_disjoint_subcover,
    verify_quasi_tiling,
)
from .tuples import (
    TupleCandidate,
    admissible_cover,
    is_entropy_tuple,
    lambda_n,
    measure_tuple_check,
    pair_cover_separation,
    product_tuple_check,
    upe_check,
)

__version__ = "0.1.0"
