"""Conditionally negative definite kernels, Mazur maps and affine isometric
actions on finite L_p spaces, with a finite-window construction of proper
actions of Z^d."""

from .errors import InputError, LabError, PropertyViolation, ResourceError
from .groups import GroupElement, GroupSpec, ball
from .kernels import CndFunction, Kernel, cnd_test, power_transform
from .measure import FiniteMeasureSpace, LpVector, mazur_map

__version__ = "0.1.0"

__all__ = [
    "CndFunction",
    "FiniteMeasureSpace",
    "GroupElement",
    "GroupSpec",
    "InputError",
    "Kernel",
    "LabError",
    "LpVector",
    "PropertyViolation",
    "ResourceError",
    "ball",
    "cnd_test",
    "mazur_map",
    "power_transform",
]
