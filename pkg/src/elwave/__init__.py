"""Numerical laboratory for shock formation in planar elastic waves."""

from .eigen import (
    MaterialConstants,
    PhysParams,
    material_to_phys,
    matrix_a,
    eigenvalues,
    eigensystem,
    coupling_coeffs,
    min_gap_sigma,
)

__all__ = [
    "MaterialConstants",
    "PhysParams",
    "material_to_phys",
    "matrix_a",
    "eigenvalues",
    "eigensystem",
    "coupling_coeffs",
    "min_gap_sigma",
]

__version__ = "0.1.0"
