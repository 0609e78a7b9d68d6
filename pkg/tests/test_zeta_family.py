import math

import numpy as np
import pytest

from cocycle_trace.cocycle_core import ExpPolynomial, verify_cocycle
from cocycle_trace.errors import InvalidInputError, PoleLocusError
from cocycle_trace.symbol_model import ConstantAngular, CutoffProfile, HomogeneousLayer
from cocycle_trace.trace_extraction import kv_density
from cocycle_trace.zeta_family import (
    Domain,
    SymbolFamily,
    SyntheticFamily,
    c_of_family,
    circle_mean,
    psi_of_z,
    residue_at,
    scan,
    top_level_value,
)

UNIT = HomogeneousLayer(0)
THREE = (UNIT, HomogeneousLayer(1, ConstantAngular(0.5)), HomogeneousLayer(2, ConstantAngular(-0.25)))


def exp_family(planted=None):
    return SyntheticFamily(lambda z: ExpPolynomial(np.zeros((1, 1)), np.ones((1, 1)), [z]), planted)


def zero_family():
    return SyntheticFamily(lambda z: ExpPolynomial(np.zeros((1, 1))))


# --- domain and providers ---------------------------------------------------------


def test_domain_membership_and_integers():
    d = Domain(-1.5, 2.5, -0.5, 0.5)
    assert 0 in d and 2.4 in d and 3 not in d and 1j not in d
    assert d.integers() == [0, 1, 2]


def test_provider_outside_domain():
    with pytest.raises(InvalidInputError):
        SymbolFamily(1, [UNIT]).provider_at(5.0)


@pytest.mark.parametrize("z", [-1.3, 0.5 + 0.4j, 0, 1, 2.2])
def test_family_members_are_cocycles(z):
    assert verify_cocycle(SymbolFamily(1, THREE).provider_at(z)).max <= 1e-8
    synthetic = exp_family({1: 2.0}).provider_at(z)
    # e^{-z t} grows like e^{1.3 * 13.5} on the grid, so the bound is relative
    scale = max(1.0, abs(np.exp(-z * 9 * 1.5)))
    assert verify_cocycle(synthetic).max <= 1e-11 * scale


# --- psi(z, t) -----------------------------------------------------------------------


@pytest.mark.parametrize("z", [-0.5, -1.2 + 0.3j, -2.0])
def test_synthetic_exp_recovery(z):
    fam = exp_family()
    for t in (0.0, 0.6, 1.7):
        assert abs(psi_of_z(fam, z, t)[0] - np.exp(-z * t)) <= 1e-8


def test_symbol_family_specializes_to_kv_example():
    assert abs(psi_of_z(SymbolFamily(1, [UNIT]), -1.0)[0] - math.log(2) / math.pi) <= 1e-9


def test_zero_family():
    assert psi_of_z(zero_family(), 0.4 + 0.2j)[0] == 0


def test_psi_refuses_poles():
    with pytest.raises(PoleLocusError):
        psi_of_z(SymbolFamily(1, [UNIT]), 1.0)


@pytest.mark.parametrize("k", [-0.5, -1.7, 0.3 + 0.2j])
def test_branch_consistency_with_kv_density(k):
    fam = SymbolFamily(1, THREE, x_grid=[0.0, 1.0])
    fixed = fam.symbol_at(k + 1)
    assert abs(fixed.k - k) <= 1e-15
    assert np.max(np.abs(psi_of_z(fam, k + 1) - kv_density(fixed, [0.0, 1.0]).per_point)) <= 1e-9


# --- c(m) ----------------------------------------------------------------------------------


def test_c_of_symbol_family_at_zero():
    assert abs(c_of_family(SymbolFamily(1, [UNIT]), 0)[0] - 1 / math.pi) <= 1e-10


def test_c_of_planted_family():
    # planted c(z) = z + 1 evaluated at m = 1
    assert abs(c_of_family(exp_family({1: 2.0}), 1)[0] - 2) <= 1e-10


def test_c_without_critical_behaviour():
    assert abs(c_of_family(exp_family(), 1)[0]) <= 1e-10


def test_c_of_family_validates_m():
    with pytest.raises(InvalidInputError):
        c_of_family(exp_family(), -1)
    with pytest.raises(InvalidInputError):
        c_of_family(exp_family(), 7)


# --- residues ---------------------------------------------------------------------------------


def test_symbol_residue_at_zero():
    rep = residue_at(SymbolFamily(1, [UNIT]), 0)
    assert abs(rep.residue_estimate[0] + 1 / math.pi) <= 1e-6
    assert rep.gap <= 1e-6
    assert np.max(np.abs(rep.second_moment)) <= 1e-6
    assert rep.contour == {"radius": 0.1, "nodes": 16}


def test_planted_residue_recovered():
    v = 0.75 - 0.5j
    # psi = v / (z - 1) + hol  <=>  planted weight -v at m = 1
    fam = exp_family({1: -v})
    rep = residue_at(fam, 1)
    assert abs(rep.residue_estimate[0] - v) <= 1e-8
    assert rep.gap <= 1e-8


def test_holomorphic_point_has_no_residue():
    rep = residue_at(exp_family(), 1)
    assert np.max(np.abs(rep.residue_estimate)) <= 1e-8
    assert np.max(np.abs(rep.c_value)) <= 1e-10


@pytest.mark.parametrize("m", [0, 1, 2])
def test_residue_constant_identity(m):
    fam = SymbolFamily(1, THREE, x_grid=[0.0, 2.0])
    assert residue_at(fam, m).gap <= 1e-6


@pytest.mark.parametrize("m", [0, 1])
def test_pole_simplicity_under_radius_halving(m):
    fam = SymbolFamily(1, THREE)
    a = residue_at(fam, m, radius=0.1).residue_estimate[0]
    b = residue_at(fam, m, radius=0.05).residue_estimate[0]
    assert abs(a - b) <= 0.01 * abs(a)


def test_planted_pole_second_moment_vanishes():
    rep = residue_at(exp_family({2: 1.5}), 2)
    assert np.max(np.abs(rep.second_moment)) <= 1e-6


def test_residue_contour_validation():
    fam = SymbolFamily(1, [UNIT])
    with pytest.raises(InvalidInputError):
        residue_at(fam, 0, radius=1.0)
    with pytest.raises(InvalidInputError):
        residue_at(SymbolFamily(1, [UNIT], domain=Domain(-0.05, 1.5)), 0)


# --- holomorphy and v(z) ------------------------------------------------------------------------


@pytest.mark.parametrize("z0", [-0.5, 0.5 + 0.2j, 1.5, -1.3 - 0.4j])
def test_circle_mean_equals_center(z0):
    fam = SymbolFamily(1, THREE)
    assert np.max(np.abs(circle_mean(fam, z0) - psi_of_z(fam, z0))) <= 1e-7


def test_top_level_value_has_simple_pole_at_zero():
    fam = SymbolFamily(1, [UNIT, HomogeneousLayer(1)])
    radius, nodes = 0.2, 16
    zs = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    zs = [complex(z.real, 0.0) if abs(z.imag) < 1e-14 else z for z in zs]
    residue = np.mean([z * top_level_value(fam, z)[0] for z in zs])
    assert abs(residue + c_of_family(fam, 0)[0]) <= 1e-6


# --- scan ---------------------------------------------------------------------------------------


def test_scan_skips_lattice_and_matches_psi():
    fam = SymbolFamily(1, [UNIT])
    rows, skipped = scan(fam, [-0.5, 0.0, 1.0], [0.0, 0.3])
    assert skipped == [0j, 1 + 0j]
    assert len(rows) == 4
    z, val = rows[0]
    assert np.array_equal(val, psi_of_z(fam, z))


def test_smoothstep_family_residue_is_cutoff_independent():
    fam = SymbolFamily(1, [UNIT], CutoffProfile(0.5, 3.0, "smoothstep"))
    assert abs(residue_at(fam, 0).residue_estimate[0] + 1 / math.pi) <= 1e-6
