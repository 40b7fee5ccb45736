import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from fermi_trap.exceptions import DomainError, InstabilityError
from fermi_trap.theory.couplings import (
    MODE_CUTOFF,
    EffectiveCouplings,
    InteractionModel,
    TrapSpec,
    bogoliubov_angle,
    default_decay,
    effective_alpha_from_V,
    excitation_energy,
    free_couplings,
    generic_couplings,
    im1_couplings,
    im2_couplings,
    invert_alpha_bar,
    mode_couplings,
    simplified_excitation_energy,
)

stable_V = st.floats(min_value=-0.49, max_value=0.49)
weak_V = st.floats(min_value=-0.2, max_value=0.2)


def test_trap_scales():
    trap = TrapSpec(N=14)
    assert trap.fermi_index == 13
    assert trap.half_width == pytest.approx(math.sqrt(27))
    assert trap.fermi_wavenumber == pytest.approx(math.sqrt(27))


def test_trap_needs_two_particles():
    with pytest.raises(ValidationError):
        TrapSpec(N=1)


def test_weak_coupling_values(im1_weak):
    assert im1_weak.V1 == pytest.approx(0.4936, abs=5e-4)
    assert im1_weak.alpha_bar_1 == pytest.approx(-1.0, rel=1e-10)
    assert im1_weak.gamma_bar_1 == pytest.approx(0.88, abs=0.015)

    mode = im1_weak.mode_1
    assert mode.plus.alpha == pytest.approx(0.1751, abs=1e-3)
    assert mode.minus.alpha == pytest.approx(-2.175, abs=2e-3)
    assert mode.plus.gamma == pytest.approx(0.0298, abs=1e-3)
    assert mode.minus.gamma == pytest.approx(1.73, abs=0.03)


@given(st.floats(min_value=-20.0, max_value=-1e-6))
def test_inversion_round_trip(target):
    V = invert_alpha_bar(target)
    assert 0.0 <= V < 0.5
    assert effective_alpha_from_V(V) == pytest.approx(target, rel=1e-10)


def test_inversion_limits():
    assert invert_alpha_bar(0.0) == 0.0
    with pytest.raises(DomainError):
        invert_alpha_bar(0.1)
    with pytest.raises(InstabilityError):
        invert_alpha_bar(-1e9)


@given(stable_V)
def test_effective_alpha_is_even_and_attractive(V):
    assert effective_alpha_from_V(V) <= 0.0
    assert effective_alpha_from_V(V) == pytest.approx(effective_alpha_from_V(-V), abs=1e-15)


@pytest.mark.parametrize("V", [0.5, -0.5, 0.7])
def test_unstable_strengths(V):
    with pytest.raises(InstabilityError):
        effective_alpha_from_V(V)
    with pytest.raises(InstabilityError):
        simplified_excitation_energy(V)
    with pytest.raises(InstabilityError):
        mode_couplings(V)


def test_bogoliubov_angle_needs_diagonalizable_branches():
    with pytest.raises(InstabilityError):
        bogoliubov_angle(0.0, 0.1, 1.2, 0.0)
    with pytest.raises(InstabilityError):
        bogoliubov_angle(-1.5, 0.0, 0.1, 0.0)


@given(stable_V)
def test_mode_couplings_identities(V):
    mode = mode_couplings(V, m=3)
    assert mode.m == 3
    energies = simplified_excitation_energy(V)
    for nu in (1, -1):
        branch = mode.branch(nu)
        assert branch.nu == nu
        assert branch.alpha == pytest.approx(0.5 * math.sinh(2.0 * branch.zeta), abs=1e-14)
        assert branch.gamma == pytest.approx(math.sinh(branch.zeta) ** 2, rel=1e-9, abs=1e-15)
        assert branch.epsilon == pytest.approx(energies.of(nu), rel=1e-12)
    assert mode.alpha_bar == pytest.approx(effective_alpha_from_V(V), rel=1e-9, abs=1e-15)


@given(weak_V, weak_V)
def test_excitation_energy_is_sqrt_of_branch_determinant(V, V_par):
    # V_a = V_b gives epsilon_nu^2 = (1 + x)^2 - x^2 with x = V_par + nu V
    zeta = bogoliubov_angle(V_par, V, V_par, V)
    energies = excitation_energy(V_par, V, zeta)
    for nu in (1, -1):
        expected = math.sqrt(1.0 + 2.0 * (V_par + nu * V))
        assert energies.of(nu) == pytest.approx(expected, rel=1e-10)


def test_branch_identity_is_validated(im1_weak):
    branch = im1_weak.mode_1.plus
    with pytest.raises(ValidationError):
        branch.model_validate({**branch.model_dump(), "gamma": branch.gamma + 0.1})


def test_free_couplings():
    free = free_couplings()
    assert free.model == InteractionModel.FREE
    assert free.is_free
    assert free.num_modes == 0
    assert free.alpha_bar_at(1) == 0.0


def test_zero_coupling_is_free():
    couplings = im1_couplings(0.0)
    assert couplings.V1 == 0.0
    assert couplings.alpha_bar == (0.0,)
    assert couplings.gamma_bar == (0.0,)
    assert couplings.is_free


def test_exponential_decay_parameters(im2_weak):
    assert im2_weak.alpha_bar_0 == pytest.approx(-1.16, abs=0.005)
    assert im2_weak.gamma_bar_0 == pytest.approx(1.19, abs=0.02)
    assert im2_weak.alpha_bar_1 == pytest.approx(-1.0, rel=1e-10)
    assert im2_weak.Z_gamma == pytest.approx(math.cosh(0.3) - 1.0, rel=1e-12)
    assert im2_weak.Z_alpha == pytest.approx(math.cosh(0.15) - 1.0, rel=1e-12)


def test_exponential_decay_ratios(im2_weak):
    for m in range(1, 20):
        assert im2_weak.alpha_bar_at(m + 1) / im2_weak.alpha_bar_at(m) == pytest.approx(
            math.exp(-0.15), rel=1e-12
        )
        assert im2_weak.gamma_bar_at(m + 1) / im2_weak.gamma_bar_at(m) == pytest.approx(
            math.exp(-0.3), rel=1e-12
        )


def test_exponential_decay_truncation(im2_weak):
    last = im2_weak.num_modes
    assert abs(im2_weak.alpha_bar_at(last)) < MODE_CUTOFF
    assert abs(im2_weak.alpha_bar_at(last - 1)) >= MODE_CUTOFF
    assert im2_weak.alpha_bar_at(last + 1) == 0.0
    assert all(gamma >= 0.0 for gamma in im2_weak.gamma_bar)


def test_separate_gamma_decay():
    couplings = im2_couplings(-1.0, 0.3, r_gamma=0.6)
    assert couplings.r_gamma == 0.6
    assert couplings.gamma_bar_at(2) / couplings.gamma_bar_at(1) == pytest.approx(math.exp(-0.6))


@pytest.mark.parametrize("r, r_gamma", [(0.0, None), (-0.1, None), (0.3, 0.0)])
def test_decay_constants_must_be_positive(r, r_gamma):
    with pytest.raises(DomainError):
        im2_couplings(-1.0, r, r_gamma)


def test_im2_validation_needs_decay_constants():
    with pytest.raises(ValidationError):
        EffectiveCouplings(model=InteractionModel.IM2, alpha_bar=(-1.0,), gamma_bar=(0.9,))


@pytest.mark.parametrize("alpha, gamma", [((0.1,), (0.2,)), ((-0.1,), (-0.2,)), ((-0.1,), ())])
def test_effective_couplings_validation(alpha, gamma):
    with pytest.raises(ValidationError):
        EffectiveCouplings(model=InteractionModel.GENERIC, alpha_bar=alpha, gamma_bar=gamma)


def test_decay_constants_are_missing_outside_im2(im1_weak):
    with pytest.raises(DomainError):
        _ = im1_weak.Z_alpha


def test_generic_table_reproduces_im1(im1_weak):
    generic = generic_couplings([im1_weak.V1])
    assert generic.model == InteractionModel.GENERIC
    assert generic.alpha_bar_1 == pytest.approx(im1_weak.alpha_bar_1, rel=1e-14)
    assert generic.gamma_bar_1 == pytest.approx(im1_weak.gamma_bar_1, rel=1e-14)


def test_generic_table_keeps_every_mode():
    generic = generic_couplings([0.3, 0.2, 0.0, 0.1])
    assert generic.num_modes == 4
    assert generic.alpha_bar_at(3) == 0.0
    assert generic.alpha_bar_at(2) == pytest.approx(effective_alpha_from_V(0.2))


def test_default_decay():
    assert default_decay(14) == pytest.approx(1.0 / math.sqrt(14))
    assert default_decay(14, rounded=True) == 0.3
    assert default_decay(200, rounded=True) == pytest.approx(1.0 / math.sqrt(200))
    with pytest.raises(DomainError):
        default_decay(1)
