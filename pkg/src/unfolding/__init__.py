"""Invariants, stratified unfoldings, and numerical Deligne-Simpson
solving for unramified irregular singularities of GL_n connections on
the projective line.

Submodules:
  exact     -- Gaussian-rational scalars and exact linear algebra
  rootdata  -- GL_n root-system bookkeeping (Levi subsets, labels)
  spectral  -- spectral types, Irr/delta/rigidity/moduli dimension
  canonical -- canonical forms of unramified singularities
  strata    -- deformation strata, partial fractions, spectral splitting
  diagram   -- unfolding diagrams and their reductions, DOT output
  laurent   -- deformed truncated Laurent rings/modules, CRT
  orbit     -- triangular chart on (deformed) truncated orbits, moment
  dsp       -- additive Deligne-Simpson solver and continuation
  cli       -- `unfolding` command-line front end, nesting notation
"""

from .exact import QI, as_qi, parse_scalar, format_scalar
from .rootdata import (RootSystemData, gl_root_data, levi_dim,
                       centralizer_dim, subset_to_composition,
                       composition_to_subset, zero_nilpotent_label,
                       validate_nilpotent_label)
from .spectral import (AbstractSpectralType, SpectralCollection,
                       irregularity, delta, rigidity, moduli_dim,
                       unfold_spectral, canonicalize, weyl_key)
from .canonical import (CanonicalForm, zero_j0, diagonal_form,
                        sort_to_fundamental_domain,
                        spectral_type_of, is_nonresonant, residue,
                        form_to_json, form_from_json)
from .strata import (SetPartition, MismatchReport, SamplingExhausted,
                     partitions, refines, stratum_of, in_BH,
                     partial_fractions, verify_spectral_decomposition,
                     delta_sum_check, sample_stratum)
from .diagram import (UnfoldingDiagram, ReducedDiagram, unfolding_diagram,
                      reduced_diagram, to_dot, DiagramTooLarge)
from .laurent import (TruncPoly, PrincipalPart, mul_gamma, act,
                      total_residue, pairing, crt_split, crt_join)
from .orbit import (NilpotentElem, UPart, TriangularCoords,
                    eval_orbit_point, moment, dim_check, decompose_fiber,
                    FiberReport, principal_invariants)
from .dsp import (ConnectionOnP1, DSPInstance, DSPSolution,
                  ContinuationFamily, FuchsViolation, NoConvergence,
                  ReducibleSolution, PathLeftBH, fuchs_check,
                  is_irreducible, solve_dsp, continue_family,
                  verify_solution)
from .cli import parse_kns, pretty_collection, pretty_kns

__version__ = "0.1.0"

__all__ = [
    "QI", "as_qi", "parse_scalar", "format_scalar",
    "RootSystemData", "gl_root_data", "levi_dim", "centralizer_dim",
    "subset_to_composition", "composition_to_subset",
    "zero_nilpotent_label", "validate_nilpotent_label",
    "AbstractSpectralType", "SpectralCollection", "irregularity", "delta",
    "rigidity", "moduli_dim", "unfold_spectral", "canonicalize", "weyl_key",
    "CanonicalForm", "zero_j0", "diagonal_form",
    "sort_to_fundamental_domain", "spectral_type_of",
    "is_nonresonant", "residue", "form_to_json", "form_from_json",
    "SetPartition", "MismatchReport", "SamplingExhausted", "partitions",
    "refines", "stratum_of", "in_BH", "partial_fractions",
    "verify_spectral_decomposition", "delta_sum_check", "sample_stratum",
    "UnfoldingDiagram", "ReducedDiagram", "unfolding_diagram",
    "reduced_diagram", "to_dot", "DiagramTooLarge",
    "TruncPoly", "PrincipalPart", "mul_gamma", "act", "total_residue",
    "pairing", "crt_split", "crt_join",
    "NilpotentElem", "UPart", "TriangularCoords", "eval_orbit_point",
    "moment", "dim_check", "decompose_fiber", "FiberReport",
    "principal_invariants",
    "ConnectionOnP1", "DSPInstance", "DSPSolution", "ContinuationFamily",
    "FuchsViolation", "NoConvergence", "ReducibleSolution", "PathLeftBH",
    "fuchs_check", "is_irreducible", "solve_dsp", "continue_family",
    "verify_solution",
    "parse_kns", "pretty_collection", "pretty_kns",
    "__version__",
]
