import numpy as np
import pytest

from kvge.errors import HypothesisError, ValidationError
from kvge.green import COERCIVE_INF, PAPER_SUP, BoundaryModel


def dirichlet_formula(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return np.where(t <= s, t * (1 - s), s * (1 - t))


def make_table(n=129):
    t = np.linspace(0, 1, n)
    s = np.linspace(0, 1, n)
    return t, s, dirichlet_formula(t[:, None], s[None, :])


class TestPointwise:
    def test_dirichlet_values(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        assert bm.green_eval(0.25, 0.5) == 0.125
        assert bm.green_eval(0.5, 0.5) == 0.25
        assert bm.green_eval(0.0, 0.3) == 0.0
        assert bm.green_eval(1.0, 0.3) == 0.0

    def test_right_focal_values(self):
        bm = BoundaryModel.right_focal(0.25, 0.75)
        assert bm.green_eval(0.3, 0.7) == 0.3
        assert bm.green_eval(0.7, 0.3) == 0.3

    def test_out_of_range_rejected(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        with pytest.raises(ValidationError):
            bm.green_eval(1.5, 0.5)
        with pytest.raises(ValidationError):
            bm.script_g(-0.1)


class TestEnvelope:
    def test_dirichlet_envelope(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        assert bm.script_g(0.5) == 0.25  # peak of the tent at t = s
        assert bm.script_g(0.0) == 0.0

    def test_right_focal_envelope(self):
        bm = BoundaryModel.right_focal(0.25, 0.75)
        assert bm.script_g(0.8) == 0.8
        assert bm.script_g(0.0) == 0.0


class TestHarnackConstant:
    def test_reference_window(self):
        assert BoundaryModel.dirichlet(0.25, 0.75).eta0 == pytest.approx(0.25, abs=1e-12)

    def test_dirichlet_narrow_window_with_grid_oracle(self):
        bm = BoundaryModel.dirichlet(1 / 3, 0.5)
        assert bm.eta0 == pytest.approx(1 / 3, abs=1e-12)
        # oracle: 10^4-point grid for inf over s of min ratio
        s = np.linspace(1e-9, 1 - 1e-9, 10_000)
        tt = np.linspace(1 / 3, 0.5, 401)
        ratio = dirichlet_formula(tt[:, None], s[None, :]).min(axis=0) / (s * (1 - s))
        assert bm.eta0 <= ratio.min() + 1e-9

    def test_right_focal_grid_oracle(self):
        bm = BoundaryModel.right_focal(0.25, 0.75)
        assert bm.eta0 == pytest.approx(0.25, abs=1e-12)
        s = np.linspace(1e-9, 1 - 1e-9, 10_000)
        ratio = np.minimum(0.25, s) / s  # min over [alpha, beta] of min(t, s)
        assert bm.eta0 <= ratio.min() + 1e-9

    def test_vanishing_harnack_is_hypothesis_failure(self):
        with pytest.raises(HypothesisError):
            BoundaryModel.dirichlet(0.0, 0.75)
        with pytest.raises(HypothesisError):
            BoundaryModel.dirichlet(0.25, 1.0)


class TestAveragingConstant:
    def test_dirichlet_both_modes(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        assert bm.compute_C0(COERCIVE_INF) == pytest.approx(0.5, abs=1e-12)
        assert bm.compute_C0(PAPER_SUP) == pytest.approx(0.5, abs=1e-12)

    def test_right_focal_modes_differ(self):
        bm = BoundaryModel.right_focal(0.25, 0.75)
        assert bm.compute_C0(COERCIVE_INF) == pytest.approx(0.5, abs=1e-12)
        assert bm.compute_C0(PAPER_SUP) == pytest.approx(1.0, abs=1e-12)

    def test_default_mode_is_coercive(self):
        assert BoundaryModel.right_focal(0.25, 0.75).C0 == pytest.approx(0.5)


class TestIntegralMaxima:
    def test_dirichlet_full(self):
        assert BoundaryModel.dirichlet(0.25, 0.75).GM() == pytest.approx(0.125, abs=1e-9)

    def test_dirichlet_partial_reference_window(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        assert bm.partial_GM() == pytest.approx(3 / 32, abs=1e-9)

    def test_right_focal_full(self):
        # integral of min(tau, s) ds = tau - tau^2/2, maximal at tau = 1
        assert BoundaryModel.right_focal(0.25, 0.75).GM() == pytest.approx(0.5, abs=1e-9)

    def test_partial_integral_formula(self):
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        # oracle: dense midpoint quadrature of the exact kernel
        for tau in (0.2, 0.5, 0.9):
            s = np.linspace(0.25, 0.75, 200_001)
            mid = 0.5 * (s[1:] + s[:-1])
            oracle = float(np.sum(dirichlet_formula(tau, mid)) * (s[1] - s[0]))
            assert bm.s_partial_integral(tau, 0.25, 0.75) == pytest.approx(oracle, abs=1e-9)


class TestStructuralInvariants:
    @pytest.mark.parametrize("factory", [BoundaryModel.dirichlet, BoundaryModel.right_focal])
    def test_harnack_on_dense_grid(self, factory):
        bm = factory(0.25, 0.75)
        s = np.linspace(0, 1, 201)
        tt = np.linspace(bm.alpha, bm.beta, 201)
        g = np.asarray(bm.green_eval(tt[:, None], s[None, :]), dtype=float)
        assert np.all(g.min(axis=0) >= bm.eta0 * bm.script_g(s) - 1e-12)

    @pytest.mark.parametrize("factory", [BoundaryModel.dirichlet, BoundaryModel.right_focal])
    def test_coercivity_on_dense_grid(self, factory):
        bm = factory(0.25, 0.75)
        s = np.linspace(0, 1, 201)
        assert np.all(bm.t_integral(s) >= bm.C0 * bm.script_g(s) - 1e-12)

    def test_dirichlet_kernel_inverts_second_derivative(self):
        # u(t) = int G(t,s) g(s) ds solves -u'' = g with u(0) = u(1) = 0
        bm = BoundaryModel.dirichlet(0.25, 0.75)
        n = 201
        t = np.linspace(0, 1, n)
        h = t[1] - t[0]
        g = np.sin(np.pi * t)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
        gm = np.asarray(bm.green_eval(t[:, None], t[None, :]), dtype=float)
        u = gm @ (w * g)
        assert u[0] == 0.0 and u[-1] == 0.0
        d2 = (u[:-2] - 2 * u[1:-1] + u[2:]) / h**2
        assert np.max(np.abs(d2 + g[1:-1])) < 5e-4  # O(h^2)


class TestTabulated:
    def test_constants_close_to_closed_form(self):
        t, s, g = make_table(129)
        bm = BoundaryModel.tabulated(t, s, g, 0.25, 0.75)
        assert bm.eta0 == pytest.approx(0.25, abs=5e-3)
        assert bm.C0 == pytest.approx(0.5, abs=1e-3)
        assert bm.GM() == pytest.approx(0.125, abs=1e-4)
        assert bm.partial_GM() == pytest.approx(3 / 32, abs=1e-4)

    def test_green_eval_interpolates(self):
        t, s, g = make_table(129)
        bm = BoundaryModel.tabulated(t, s, g, 0.25, 0.75)
        assert bm.green_eval(0.25, 0.5) == pytest.approx(0.125, abs=1e-4)

    def test_minimum_grid_size(self):
        t, s, g = make_table(17)
        with pytest.raises(ValidationError):
            BoundaryModel.tabulated(t, s, g, 0.25, 0.75)

    def test_nonuniform_grid_rejected(self):
        t, s, g = make_table(65)
        t2 = t.copy()
        t2[1] += 1e-3
        with pytest.raises(ValidationError):
            BoundaryModel.tabulated(t2, s, g, 0.25, 0.75)

    def test_csv_round_trip(self, tmp_path):
        t, s, g = make_table(33)
        path = tmp_path / "table.csv"
        rows = ["t\\s," + ",".join(f"{x:.17g}" for x in s)]
        for i, tv in enumerate(t):
            rows.append(f"{tv:.17g}," + ",".join(f"{x:.17g}" for x in g[i]))
        path.write_text("\n".join(rows) + "\n")
        bm = BoundaryModel.from_csv(path, 0.25, 0.75)
        assert bm.eta0 == pytest.approx(0.25, abs=2e-2)
        assert np.allclose(bm.table_g, g)

    def test_csv_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("s,0.0,1.0\n0.0,0,0\n")
        with pytest.raises(ValidationError):
            BoundaryModel.from_csv(path, 0.25, 0.75)


class TestWindowValidation:
    def test_alpha_beta_ordering(self):
        with pytest.raises(ValidationError):
            BoundaryModel.dirichlet(0.75, 0.25)
        with pytest.raises(ValidationError):
            BoundaryModel.dirichlet(0.5, 0.5)
