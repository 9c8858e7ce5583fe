"""Hamiltonian Lie superalgebras over GF(p) and their automorphism groups."""

from __future__ import annotations

from .autgroups import (GAutomorphism, OAutomorphism, commutator, compose, conjugate, depth_O,
                        depth_g, extend_from_minus_one, identity, invert, is_admissible,
                        is_homogeneous_O, is_homogeneous_g, make_automorphism, phi,
                        reconstruct_sigma, sample_automorphism)
from .cartan import build, omega_element, t_h, transitivity_check, verify_lemma11
from .errors import (ConfigurationError, DomainError, ImportRejected, NotSpecialError,
                     ParityError, ReconstructionError, SamplingError, SingularityError,
                     VerificationFailure)
from .restricted import ad_power, is_restricted, p_power
from .structure import export_structure, import_structure
from .superalgebra import Parameters, SuperElement, derive, multiply, obasis
from .witt import Derivation, bracket, divergence, evaluate, wbasis

__version__ = "0.1.0"
