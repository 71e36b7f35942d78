"""Shared fixtures for the LSBuck test suite"""

import numpy as np
import pytest

from geometry_nurbs import h_refine, rectangle_patch
from laminate import LaminateStack, Ply, constitutive_set
from levelset import Circle


@pytest.fixture
def unit_patch():
    """Quadratic unit square refined to 4x4 elements"""
    return h_refine(rectangle_patch(1.0, 1.0, 2), 2)


def make_patch(refinement: int, degree: int = 2, length: float = 1.0, width: float = 1.0):
    return h_refine(rectangle_patch(length, width, degree), refinement)


def isotropic_constitutive(E=1.0, nu=0.3, alpha=1.0, thickness=0.02):
    return constitutive_set(LaminateStack((Ply.isotropic(E, nu, alpha, thickness),)))


@pytest.fixture
def iso_constitutive():
    return isotropic_constitutive()


@pytest.fixture
def central_circle():
    return Circle((0.5, 0.5), 0.15)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def minimal_model_dict():
    """Unit plate, no cutout, clamped"""
    return {
        'version': 1,
        'name': 'minimal',
        'plate': {
            'a_over_h': 50,
            'refinement': 2,
            'material': {'E': 1.0, 'nu': 0.3, 'alpha': 1.0},
        },
        'boundary': 'CCCC',
        'analysis': {'n_modes': 3},
    }
