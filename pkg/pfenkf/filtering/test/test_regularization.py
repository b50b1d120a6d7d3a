from dataclasses import replace

from django.test import SimpleTestCase
import mock
import numpy as np
import pytest

from pfenkf.ensemble.services.prior import Nucleus
from pfenkf.exceptions import RegularizationError
from pfenkf.fem.services.elasticity import MaterialParams
from pfenkf.fracture.services.boundary import boundary_conditions
from pfenkf.fracture.services.solver import advance
from pfenkf.fracture.services.state import FieldState
from pfenkf.fracture.test.factories import NewtonSettingsFactory, RodDiscretizationFactory
from ..services.crack import crack_position_1d
from ..services.regularization import (RegularizationSettings, micromorphic_mass, regularize_member,
                                       regularize_member_traced)
from .factories import RegularizationSettingsFactory


class RegularizationCase(SimpleTestCase):

    def setUp(self):
        self.disc = RodDiscretizationFactory(mesh__n_elements=50)
        self.params = MaterialParams(E=1.0, nu=0.0, Gc=1.0, ell=0.05)
        self.newton = NewtonSettingsFactory()
        self.bcs = boundary_conditions(self.disc.mesh)
        self.settings = RegularizationSettingsFactory()
        state = FieldState.initial(self.disc)
        for _ in range(3):
            state = advance(state, self.disc, self.params, self.newton, self.bcs, 1e-3)
        self.elastic = state


class TestRegularizeMember(RegularizationCase):

    def test_physical_uncracked_member_is_a_fixed_point(self):
        regularized = regularize_member(self.elastic, self.disc, self.params, self.newton, self.bcs,
                                        self.settings)
        assert np.allclose(regularized.a_u, self.elastic.a_u, atol=1e-8)
        assert np.allclose(regularized.a_d, self.elastic.a_d, atol=1e-6)
        assert np.all(regularized.phi_q >= self.elastic.phi_q_prev)

    def test_noisy_analysis_is_projected_onto_the_model(self):
        x = self.disc.mesh.nodes[:, 0]
        noisy = replace(self.elastic,
                        a_u=self.elastic.a_u + 2e-4 * np.sin(40.0 * x),
                        a_d=-0.05 * np.abs(np.sin(7.0 * x)))
        regularized, trace = regularize_member_traced(noisy, self.disc, self.params, self.newton, self.bcs,
                                                      self.settings)
        assert np.all(regularized.phi_q >= 0.0) and np.all(regularized.phi_q <= 1.0)
        assert np.all(np.diff(regularized.a_u) > 0.0)
        assert trace.max_residual <= 1e-8
        assert not trace.retried
        assert [label for label, _, _ in trace.stages][:3] == ['d-L', 'u-L', 'd-ell']
        assert len(trace.stages) == 3 + 2 * self.settings.n_stagger

    def test_history_is_kept_and_extrapolation_reset(self):
        regularized = regularize_member(self.elastic, self.disc, self.params, self.newton, self.bcs,
                                        self.settings)
        assert np.array_equal(regularized.phi_q_prev, self.elastic.phi_q_prev)
        assert np.array_equal(regularized.a_d_prev, regularized.a_d)
        assert np.array_equal(regularized.a_d_prev2, regularized.a_d)
        assert regularized.step == self.elastic.step and regularized.u_D == self.elastic.u_D

    def test_cracked_member_keeps_its_crack(self):
        floor = Nucleus(center=(0.3,), magnitude=1.0, width=0.05).floor(self.disc)
        x = self.disc.mesh.nodes[:, 0]
        cracked = replace(self.elastic,
                          a_u=np.where(x > 0.3, self.elastic.u_D, 0.0),
                          a_d=np.exp(-0.5 * (x - 0.3) ** 2 / 0.05 ** 2),
                          phi_q=floor, phi_q_prev=floor)
        settings = RegularizationSettingsFactory(n_stagger=1)
        regularized = regularize_member(cracked, self.disc, self.params, self.newton, self.bcs, settings)
        h = 2.0 / 50
        assert abs(crack_position_1d(regularized.phi_q, self.disc) - 0.3) <= 2 * h
        assert regularized.phi_q.max() >= 0.95

    def test_proximal_weight_pulls_towards_the_analysis(self):
        x = self.disc.mesh.nodes[:, 0]
        analysed = replace(self.elastic, a_d=0.2 * np.exp(-0.5 * x ** 2 / 0.01))
        plain = regularize_member_traced(analysed, self.disc, self.params, self.newton, self.bcs,
                                         replace(self.settings, n_stagger=1))[0]
        anchoring = RegularizationSettingsFactory(n_stagger=1, proximal_weight=1e6)
        anchored = regularize_member_traced(analysed, self.disc, self.params, self.newton, self.bcs,
                                            anchoring)[0]
        assert anchored.a_d.max() >= plain.a_d.max()

    def test_length_must_exceed_ell(self):
        with pytest.raises(ValueError):
            regularize_member(self.elastic, self.disc, self.params, self.newton, self.bcs,
                              RegularizationSettings(length=0.05))


class TestRegularizationRetry(RegularizationCase):

    @mock.patch('pfenkf.filtering.services.regularization._staggered')
    def test_failure_is_retried_with_twice_the_passes(self, staggered):
        staggered.side_effect = [RegularizationError('u-L', 'diverged'), self.elastic]
        state, trace = regularize_member_traced(self.elastic, self.disc, self.params, self.newton, self.bcs,
                                                self.settings)
        assert state is self.elastic
        assert trace.retried
        assert staggered.call_args_list[1][0][6] == 2 * self.settings.n_stagger

    @mock.patch('pfenkf.filtering.services.regularization._staggered')
    def test_second_failure_is_raised(self, staggered):
        staggered.side_effect = RegularizationError('d-ell', 'diverged')
        with pytest.raises(RegularizationError) as error:
            regularize_member(self.elastic, self.disc, self.params, self.newton, self.bcs, self.settings)
        assert error.value.stage == 'd-ell'
        assert staggered.call_count == 2


class TestRegularizationSettings(SimpleTestCase):

    def test_validation(self):
        with pytest.raises(ValueError):
            RegularizationSettings(length=0.2, n_stagger=0)
        with pytest.raises(ValueError):
            RegularizationSettings(length=0.2, proximal_weight=-1.0)

    def test_mass_matrix_lives_in_the_micromorphic_block(self):
        disc = RodDiscretizationFactory(mesh__n_elements=4)
        mass = micromorphic_mass(disc).toarray()
        assert not mass[:disc.n_u].any() and not mass[:, :disc.n_u].any()
        assert mass.sum() == pytest.approx(2.0)
