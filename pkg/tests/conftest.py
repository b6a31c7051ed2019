import numpy as np
import pytest

from loewner_kit import (
    Affine,
    DiskAutomorphism,
    Domain,
    MeasureSpec,
    Moebius,
    SlitStep,
    build_from_measure,
    compose,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_measure(rng, max_atoms=4, spread=2.0, mass_scale=1.0):
    n = int(rng.integers(1, max_atoms + 1))
    atoms = [
        (float(rng.uniform(-spread, spread)), float(rng.uniform(0.05, mass_scale)))
        for _ in range(n)
    ]
    return MeasureSpec.from_atoms(*atoms)


def random_hydrodynamic_map(rng):
    """Random member of the hydrodynamic class: measure map or slit step."""
    if rng.uniform() < 0.5:
        return build_from_measure(random_measure(rng))
    return SlitStep(float(rng.uniform(-1.5, 1.5)), float(rng.uniform(0.05, 1.0)), "erase")


def random_disk_selfmap_fixing_zero(rng):
    """Univalent disk self-map with phi(0) = 0 built from automorphisms.

    phi = l_b o (c e^{i theta} z) o l_a with b chosen so the origin is fixed.
    """
    a = complex(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6))
    c = float(rng.uniform(0.3, 1.0))
    theta = float(rng.uniform(0, 2 * np.pi))
    rot = c * np.exp(1j * theta)
    b = complex(-rot * a)
    phi = compose(
        DiskAutomorphism(b),
        Affine(rot, 0.0, Domain.DISK, Domain.DISK),
        DiskAutomorphism(a),
    )
    return phi


def rotate_to_positive_derivative(phi):
    """e^{i alpha} phi with derivative at 0 rotated onto the positive axis."""
    d0 = complex(phi.derivative(0.0 + 0.0j))
    alpha = -np.angle(d0)
    return compose(Affine(np.exp(1j * alpha), 0.0, Domain.DISK, Domain.DISK), phi)


def random_halfplane_mobius(rng):
    """Random Moebius self-map of the half-plane (real coefficients, det > 0)."""
    while True:
        a, b, c, d = rng.uniform(-2, 2, 4)
        det = a * d - b * c
        if abs(det) > 0.1:
            break
    if det < 0:
        a, b = -a, -b
    return Moebius(
        float(a), float(b), float(c), float(d),
        Domain.HALF_PLANE, Domain.HALF_PLANE, self_map_of=Domain.HALF_PLANE,
    )


def sample_disk(rng, n, r_max=0.95):
    r = np.sqrt(rng.uniform(0.0, r_max**2, n))
    th = rng.uniform(0.0, 2 * np.pi, n)
    return r * np.exp(1j * th)


def sample_half_plane(rng, n, y_min=0.05, y_max=4.0, x_max=4.0):
    return rng.uniform(-x_max, x_max, n) + 1j * rng.uniform(y_min, y_max, n)
