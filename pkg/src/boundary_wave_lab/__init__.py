"""
A numerical lab for the wave equation with a dynamic Laplace-Beltrami boundary condition
on Γ0 and Robin velocity feedback on Γ1.
"""

__version__ = '0.1.0'

from .argument_parse_error import ArgumentParseError
from .assembly import AssembledSystem, build_system
from .errors import (
    ArtifactError, AssemblyError, AtEigenvalueError, ConvergenceError, EvaluationError, InvalidArgumentError,
    LinearSolverError, MeshError)
from .evolve import DecayFit, EnergyTrace, fit_decay, simulate, smooth_data, step_midpoint
from .geometry import BoundaryTag, LevelSetDomain, Mesh, build_annulus_mesh, build_levelset_mesh, outward_normal
from .multiplier import MultiplierReport, VectorField, check_hypotheses, levelset_field
from .operator import State, apply_generator, energy_inner, resolve
from .spectral import ResolventSample, SpectrumResult, quadratic_eigs, resolvent_norm, resolvent_sweep
from ._exceptions import LabError
