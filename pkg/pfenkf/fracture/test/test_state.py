from django.test import SimpleTestCase
import numpy as np
import pytest

from ..services.state import FieldState
from .factories import RodDiscretizationFactory


class TestFieldState(SimpleTestCase):

    def setUp(self):
        self.disc = RodDiscretizationFactory()

    def test_initial_state_is_undeformed(self):
        state = FieldState.initial(self.disc)
        assert state.step == 0 and state.u_D == 0.0
        assert state.phi_q.shape == (self.disc.n_elements, self.disc.n_qp)
        assert not state.a_u.any() and not state.a_d.any()

    def test_arrays_are_immutable(self):
        state = FieldState.initial(self.disc)
        with pytest.raises(ValueError):
            state.a_d[0] = 1.0

    def test_trial_shifts_history(self):
        state = FieldState.initial(self.disc)
        first = state.with_stacked(np.full(self.disc.n_dofs, 0.1)).trial(1e-3)
        assert first.step == 1 and first.du_prev == 0.0
        assert np.array_equal(first.a_d_prev, np.full(self.disc.n_d, 0.1))
        # no extrapolation without two converged steps
        assert np.array_equal(first.extrapolated_micromorphic(), first.a_d_prev)

        second = first.with_stacked(np.full(self.disc.n_dofs, 0.2)).trial(1e-3)
        assert second.step == 2
        assert np.allclose(second.extrapolated_micromorphic(), 0.3)

    def test_reset_history_stops_extrapolation(self):
        state = FieldState.initial(self.disc).trial(1e-3).trial(1e-3)
        state = state.with_stacked(np.full(self.disc.n_dofs, 0.5)).reset_history()
        assert np.allclose(state.trial(1e-3).extrapolated_micromorphic(), 0.5)
