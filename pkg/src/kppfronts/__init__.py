"""kppfronts: structural checks, equilibria, and traveling-front experiments
for multi-component KPP reaction-diffusion systems

    du/dt - D u_xx = M u + u - u o (C u).

Subpackage map:

* spectral_core -- matrix families, assumption checks A1-A3, spectra
* inequalities  -- pairing inequalities as runtime-checkable certificates
* equilibria    -- damped-Newton root finding, multistart, bifurcation scans
* frontlab      -- time stepping, front experiments, wave profiles, energy
* continuum     -- trait-structured (continuum) models via discretization
* stepping      -- compiled/numpy kernel backends and step-size rules
* exchange      -- JSON system files
* cli           -- the ``kppfronts`` command-line interface
"""

__version__ = "0.1.0"

from .continuum import (ContinuumSpec, DiscretizedSystem, TraitMesh,
                        cane_toads_preset, continuum_front_experiment,
                        discretize, kernel_from_table)
from .equilibria import (BifurcationDiagram, Equilibrium, NewtonResult,
                         bifurcation_scan_n2, find_all_equilibria,
                         newton_equilibrium, reaction, reaction_jacobian)
from .errors import (AssumptionError, DomainTooShortError, EigenvalueError,
                     IntegrationError, KppfrontsError, NoProfileError)
from .exchange import dump_system, load_system, system_from_dict, system_to_dict
from .frontlab import (EnergyLedger, FieldState, FrontResult, SpatialGrid,
                       WakeReport, WaveProfile, energy_estimate,
                       front_experiment, front_position, minimal_speed,
                       simulate, solve_wave_profile)
from .inequalities import (InequalityCertificate, competition_pairing,
                           eaves_gap, eaves_violation_witness,
                           lyapunov_pairing_split, mutation_pairing,
                           parabolic_lyapunov)
from .spectral_core import (AssumptionReport, ComplexSpectrum, SystemSpec,
                            Verdict, check_assumptions, check_competition_matrix,
                            check_mutation_matrix, circulant_spectrum_via_dft,
                            dft_matrix, family_n2, family_n2_linearization,
                            is_irreducible, line_sum_mismatch, make_circulant,
                            make_discrete_laplacian, perron_eigenpair, spectrum)
from .stepping import (Stepper, available_backends, backend_name,
                       reaction_rate_dense, stable_dt)

__all__ = [
    "__version__",
    "AssumptionReport", "ComplexSpectrum", "SystemSpec", "Verdict",
    "check_assumptions", "check_competition_matrix", "check_mutation_matrix",
    "circulant_spectrum_via_dft", "dft_matrix", "family_n2",
    "family_n2_linearization", "is_irreducible", "line_sum_mismatch",
    "make_circulant", "make_discrete_laplacian", "perron_eigenpair", "spectrum",
    "InequalityCertificate", "competition_pairing", "eaves_gap",
    "eaves_violation_witness", "lyapunov_pairing_split", "mutation_pairing",
    "parabolic_lyapunov",
    "BifurcationDiagram", "Equilibrium", "NewtonResult", "bifurcation_scan_n2",
    "find_all_equilibria", "newton_equilibrium", "reaction", "reaction_jacobian",
    "EnergyLedger", "FieldState", "FrontResult", "SpatialGrid", "WakeReport",
    "WaveProfile", "energy_estimate", "front_experiment", "front_position",
    "minimal_speed",
    "simulate", "solve_wave_profile",
    "ContinuumSpec", "DiscretizedSystem", "TraitMesh", "cane_toads_preset",
    "continuum_front_experiment", "discretize", "kernel_from_table",
    "Stepper", "available_backends", "backend_name", "reaction_rate_dense",
    "stable_dt",
    "dump_system", "load_system", "system_from_dict", "system_to_dict",
    "KppfrontsError", "AssumptionError", "EigenvalueError", "IntegrationError",
    "DomainTooShortError", "NoProfileError",
]
