"""Nonlocal mean curvature flow of periodic graphs on T^n (n = 1, 2)."""
from .torus import GridSpec, PeriodicField, SpectralField
from .quadrature import QuadratureScheme
from .kernel import CurvatureResult, FlowParams, h_alpha, phi_apply
from .flow import FlowTrace, StepperConfig, simulate, step
from .verify import CheckReport, VerifyConfig, run_all

__all__ = [
    "GridSpec",
    "PeriodicField",
    "SpectralField",
    "QuadratureScheme",
    "FlowParams",
    "CurvatureResult",
    "h_alpha",
    "phi_apply",
    "FlowTrace",
    "StepperConfig",
    "simulate",
    "step",
    "CheckReport",
    "VerifyConfig",
    "run_all",
]
