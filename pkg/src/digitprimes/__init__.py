"""Desk-scale verification toolkit for the circle-method analysis of primes
with prescribed binary digits: exact sieve counts, smoothed digit windows,
Dirichlet character algebra, arc decompositions with exact grid Parseval, and
measured equidistribution inputs."""

from digitprimes.arcs import (
    ArcDecomposition,
    ParameterPlan,
    decompose_arcs,
    grid_transform,
    major_arc_integral,
    minor_arc_sup,
    parseval_integral,
    plan_parameters,
    s_at,
    s_f_at,
    sf_l1,
)
from digitprimes.charsums import (
    DirichletCharacter,
    characters_mod,
    conductor,
    gauss_sum,
    primitive_characters,
    psi_chi,
    psi_chi_max,
    ramanujan_sum,
    twisted_lambda_sum,
    verify_additive_expansion,
    verify_character_expansion,
    verify_tau_induced,
)
from digitprimes.digits import (
    DigitConstraint,
    FourierRep,
    SmoothWindow,
    Windows,
    build_window,
    build_windows,
    eval_f,
    exact_indicator,
    fourier_rep,
    make_constraint,
    mean_f,
)
from digitprimes.empirics import (
    DiophantineInstance,
    diophantine_count,
    kappa_formula,
    kappa_weighted_sum,
    measure_alpha,
    measure_kappa,
    measure_kappa_refined,
    sample_instance,
)
from digitprimes.sieve import (
    MangoldtTable,
    PrimeTable,
    build_mangoldt_table,
    build_prime_table,
    chebyshev_psi,
    count_exact,
)

__version__ = "0.1.0"
