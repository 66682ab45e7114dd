"""Linearization, slow/fast reduction, spectra, sweeps, critical search."""

import numpy as np
import pytest

from droopsim import Mode, NumericalError, UsageError, solve_equilibrium
from droopsim.core import state_index
from droopsim.smallsignal import (
    EQUILIBRIUM_GATE,
    LinearModel,
    SlowFastPartition,
    apply_parameter,
    eigen_spectrum,
    find_critical,
    linearize,
    match_slow_eigenvalues,
    parameter_sweep,
    reduce,
)
from droopsim.solver import NewtonSettings


@pytest.fixture(scope="module")
def lin_on(model_on, x_on_eq):
    return linearize(model_on, x_on_eq)


@pytest.fixture(scope="module")
def lin_off(model_off, x_off_eq):
    return linearize(model_off, x_off_eq)


class TestPartition:
    def test_ongrid_partition(self):
        part = SlowFastPartition.for_mode(Mode.ON_GRID)
        labels = Mode.ON_GRID.labels
        slow = {labels[i] for i in part.slow_idx}
        fast = {labels[i] for i in part.fast_idx}
        assert slow == {"theta1", "theta2", "theta_g", "omega1", "omega2",
                        "v1", "v2", "psi1", "psi2"}
        assert fast == {"id1", "id2", "id_g", "iq1", "iq2", "iq_g"}

    def test_offgrid_partition(self):
        part = SlowFastPartition.for_mode(Mode.OFF_GRID)
        assert len(part.slow_idx) == 6
        assert len(part.fast_idx) == 4

    def test_overlap_rejected(self):
        with pytest.raises(UsageError):
            SlowFastPartition(slow_idx=(0, 1), fast_idx=(1, 2))


class TestLinearize:
    def test_sizes_and_labels(self, lin_on, lin_off):
        assert lin_on.a.shape == (15, 15)
        assert lin_on.labels == Mode.ON_GRID.labels
        assert lin_off.a.shape == (10, 10)

    def test_grid_angle_row_identically_zero(self, lin_on):
        row = lin_on.a[state_index(Mode.ON_GRID, "theta_g")]
        assert np.all(row == 0.0)

    def test_anchored_angle_row_identically_zero(self, lin_off):
        row = lin_off.a[state_index(Mode.OFF_GRID, "theta1")]
        assert np.all(row == 0.0)

    def test_rejects_non_equilibrium(self, model_on, x_on_eq):
        bad = x_on_eq.replace(v1=x_on_eq.get("v1") + 5.0)
        with pytest.raises(UsageError, match="not an equilibrium"):
            linearize(model_on, bad)

    def test_permutation_symmetry(self, lin_on):
        # Homogeneous inverters in the fixed frame: swapping the two inverter
        # index blocks leaves the matrix invariant.  (The anchored off-grid
        # frame distinguishes the reference inverter, so only the spectrum,
        # not the matrix, is label-independent there.)
        labels = Mode.ON_GRID.labels
        perm = []
        for name in labels:
            if name.endswith("1") and name != "theta_g":
                perm.append(labels.index(name[:-1] + "2"))
            elif name.endswith("2"):
                perm.append(labels.index(name[:-1] + "1"))
            else:
                perm.append(labels.index(name))
        p = np.asarray(perm)
        np.testing.assert_allclose(lin_on.a[np.ix_(p, p)], lin_on.a,
                                   rtol=1e-9, atol=1e-6)

    def test_continuity_under_equilibrium_perturbation(self, model_off, x_off_eq):
        # Relinearizing at slightly perturbed (still near-stationary) points
        # changes the matrix proportionally to the perturbation.
        base = linearize(model_off, x_off_eq).a
        norms = []
        for delta in (1e-8, 1e-7):
            x = x_off_eq.replace(v1=x_off_eq.get("v1") + delta,
                                 v2=x_off_eq.get("v2") + delta)
            a = linearize(model_off, x).a
            norms.append(np.linalg.norm(a - base))
        assert norms[0] < norms[1]
        assert norms[1] < 1e-3 * np.linalg.norm(base)


class TestReduce:
    def test_decoupled_blocks(self, x_off_eq):
        a = np.diag([-1.0, -2.0, -100.0, -200.0])
        lin = LinearModel(a=a, labels=("a", "b", "c", "d"), x_eq=x_off_eq,
                          mode=Mode.OFF_GRID)
        part = SlowFastPartition(slow_idx=(0, 1), fast_idx=(2, 3))
        red = reduce(lin, part)
        np.testing.assert_allclose(red.a, np.diag([-1.0, -2.0]))

    def test_hand_schur_complement(self, x_off_eq):
        a = np.array([[-1.0, 1.0], [1.0, -10.0]])
        lin = LinearModel(a=a, labels=("x", "z"), x_eq=x_off_eq,
                          mode=Mode.OFF_GRID)
        red = reduce(lin, SlowFastPartition(slow_idx=(0,), fast_idx=(1,)))
        assert red.a[0, 0] == pytest.approx(-0.9)

    def test_singular_fast_block_rejected(self, x_off_eq):
        a = np.zeros((2, 2))
        a[0, 0] = -1.0
        lin = LinearModel(a=a, labels=("x", "z"), x_eq=x_off_eq,
                          mode=Mode.OFF_GRID)
        with pytest.raises(NumericalError, match="condition"):
            reduce(lin, SlowFastPartition(slow_idx=(0,), fast_idx=(1,)))

    @pytest.mark.parametrize("mode", ["on", "off"])
    def test_slow_eigenvalues_match_full_model(self, mode, lin_on, lin_off):
        lin = lin_on if mode == "on" else lin_off
        red = reduce(lin)
        assert red.order == (9 if mode == "on" else 6)
        pairs = match_slow_eigenvalues(eigen_spectrum(lin).eigenvalues,
                                       eigen_spectrum(red).eigenvalues)
        assert max(rel for _, _, rel in pairs) <= 0.10


class TestEigenSpectrum:
    def test_diagonal(self, x_off_eq):
        spec = eigen_spectrum(np.diag([-1.0, -2.0, -3.0]))
        np.testing.assert_allclose(sorted(spec.eigenvalues.real), [-3, -2, -1])
        assert spec.abscissa == pytest.approx(-1.0)

    def test_rotation_generator(self):
        w = 42.0
        spec = eigen_spectrum(np.array([[0.0, w], [-w, 0.0]]), zero_tol=1e-12)
        np.testing.assert_allclose(sorted(spec.eigenvalues.imag), [-w, w])
        np.testing.assert_allclose(spec.eigenvalues.real, 0.0, atol=1e-12)

    def test_conjugate_pairing_of_real_matrix(self, lin_off):
        spec = eigen_spectrum(lin_off)
        lam = spec.eigenvalues
        complex_ones = lam[np.abs(lam.imag) > 1e-12]
        for z in complex_ones:
            assert np.min(np.abs(complex_ones - z.conjugate())) < 1e-6 * max(1, abs(z))

    @pytest.mark.parametrize("which", ["on", "off"])
    def test_reduced_models_stable_at_selected_gains(self, which, lin_on, lin_off):
        red = reduce(lin_on if which == "on" else lin_off)
        spec = eigen_spectrum(red)
        assert len(spec.structural_zero_idx) == 1
        assert spec.abscissa < 0.0

    def test_pinned_submatrix_loses_zero_mode(self, lin_off):
        # Deleting the anchored angle row/column (pinning the gauge) leaves
        # no near-zero eigenvalue.
        red = reduce(lin_off)
        k = red.labels.index("theta1")
        a = np.delete(np.delete(red.a, k, axis=0), k, axis=1)
        assert min(abs(z) for z in np.linalg.eigvals(a)) > 1.0


class TestTwoTimescaleConsistency:
    def test_synthetic_separation_within_two_percent(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            n_s, n_f = 4, 3
            a_xx = 0.5 * rng.normal(size=(n_s, n_s)) - 1.5 * np.eye(n_s)
            a_zz = -np.diag(rng.uniform(600.0, 900.0, size=n_f)) \
                + rng.normal(scale=5.0, size=(n_f, n_f))
            a_xz = rng.normal(scale=1.0, size=(n_s, n_f))
            a_zx = rng.normal(scale=1.0, size=(n_f, n_s))
            a = np.block([[a_xx, a_xz], [a_zx, a_zz]])
            slow_eig = np.linalg.eigvals(
                a_xx - a_xz @ np.linalg.solve(a_zz, a_zx))
            full_eig = np.linalg.eigvals(a)
            # Separation ratio of at least 100 between the groups.
            assert min(abs(z) for z in np.linalg.eigvals(a_zz)) \
                >= 100 * max(abs(z) for z in slow_eig)
            pairs = match_slow_eigenvalues(full_eig, slow_eig, zero_tol=0.0)
            assert max(rel for _, _, rel in pairs) <= 0.02


class TestParameterSweep:
    def test_grid_must_increase(self, model_on):
        with pytest.raises(UsageError, match="strictly increasing"):
            parameter_sweep(model_on, "n", [1e-5, 1e-5, 2e-5])

    def test_unknown_parameter(self, model_on):
        with pytest.raises(UsageError, match="unknown sweep parameter"):
            parameter_sweep(model_on, "bogus", [1.0, 2.0])

    def test_m_int_flat_offgrid(self, model_off):
        # The integral gain never enters the islanded dynamics.
        sweep = parameter_sweep(model_off, "m_int",
                                np.linspace(0.6e-3, 0.84e-3, 4))
        assert np.all(np.isfinite(sweep.abscissa))
        assert np.ptp(sweep.abscissa) == 0.0
        for spectrum in sweep.spectra[1:]:
            np.testing.assert_allclose(spectrum, sweep.spectra[0])

    def test_failed_points_marked_and_skipped(self, model_off):
        # Starving Newton of iterations fails every point; the sweep must
        # still return, with NaN abscissae and missing spectra.
        sweep = parameter_sweep(model_off, "n", [1e-5, 2e-5],
                                settings=NewtonSettings(max_iter=1))
        assert all(s is None for s in sweep.spectra)
        assert np.all(np.isnan(sweep.abscissa))

    def test_x_over_r_preserves_impedance_magnitude(self, model_on):
        import math

        omega = model_on.nominals.omega_nom
        base = math.hypot(model_on.vsis[0].r_l, omega * model_on.vsis[0].l_l)
        for ratio in (0.33, 1.0, 3.0):
            m = apply_parameter(model_on, "x_over_r", ratio)
            z = math.hypot(m.vsis[0].r_l, omega * m.vsis[0].l_l)
            assert z == pytest.approx(base, rel=1e-12)
            assert omega * m.vsis[0].l_l / m.vsis[0].r_l == pytest.approx(ratio)


class TestFindCritical:
    def test_no_sign_change_reports_both(self, model_off):
        with pytest.raises(NumericalError, match="no abscissa sign change"):
            find_critical(model_off, "m_int", 0.6e-3, 0.84e-3)

    def test_bad_bracket(self, model_off):
        with pytest.raises(UsageError):
            find_critical(model_off, "n", 2e-5, 1e-5)
