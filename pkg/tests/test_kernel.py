import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from kvge.errors import HypothesisError, QuadratureError, ValidationError
from kvge.expr import parse
from kvge.grid import GridFunction
from kvge.kernel import Kernel
from kvge import quadrature as kq

P2 = parse("2", {"t"})
P_REF = parse("7/2 + 3/2*cos(t)", {"t"})


class TestMass:
    def test_constant_one(self):
        assert Kernel.constant_one().mass() == 1.0

    def test_fractional_half_closed_form(self):
        # integral of t^(-1/2)/Gamma(1/2) over (0,1] is 2/sqrt(pi)
        k = Kernel.riemann_liouville(0.5)
        assert k.mass() == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-15)

    def test_fractional_mass_matches_graded_quadrature(self):
        k = Kernel.riemann_liouville(0.3)
        closed = 1.0 / math.gamma(1.3)
        numeric, _ = kq.adaptive_gl(
            k.values, lambda n: kq.graded_mesh(0.0, 1.0, n, 2.0 / 0.3, "left"),
            n0=64)
        assert k.mass() == pytest.approx(closed, rel=1e-15)
        assert numeric == pytest.approx(closed, rel=1e-8)

    def test_expression_one_agrees_with_constant(self):
        assert Kernel.from_expression("1").mass() == pytest.approx(1.0, abs=1e-12)

    def test_expression_mass_vs_scipy(self):
        k = Kernel.from_expression("1 + sin(pi*t)/2")
        oracle, _ = scipy_quad(lambda t: 1 + math.sin(math.pi * t) / 2, 0, 1)
        assert k.mass() == pytest.approx(oracle, rel=1e-10)

    def test_partial_conv_mass(self):
        k1 = Kernel.constant_one()
        assert k1.partial_conv_mass(0.25, 0.75) == pytest.approx(0.5, abs=1e-15)
        krl = Kernel.riemann_liouville(0.5)
        # integral of (1-t)^(-1/2)/Gamma(1/2) over [a, b]
        a, b = 0.25, 0.75
        closed = (math.sqrt(1 - a) - math.sqrt(1 - b)) / math.gamma(1.5)
        assert krl.partial_conv_mass(a, b) == pytest.approx(closed, rel=1e-14)
        # full range reproduces the mass
        assert krl.partial_conv_mass(0.0, 1.0) == pytest.approx(krl.mass(), rel=1e-14)


class TestReverseHolder:
    def test_constant_one_any_q(self):
        k = Kernel.constant_one()
        for q in (1.5, 2.0, 7.0):
            assert k.reverse_holder_norm(q) == 1.0

    def test_fractional_q2(self):
        k = Kernel.riemann_liouville(0.5)
        assert k.reverse_holder_norm(2.0) == pytest.approx(
            (2.0 / 3.0) * math.sqrt(math.pi), rel=1e-15)

    def test_fractional_q4(self):
        # exponent 1/(1-4) turns t^(-1/2)/Gamma(1/2) into Gamma(1/2)^(1/3) t^(1/6)
        k = Kernel.riemann_liouville(0.5)
        exact = (6.0 / 7.0) * math.gamma(0.5) ** (1.0 / 3.0)
        assert k.reverse_holder_norm(4.0) == pytest.approx(exact, rel=1e-15)
        assert exact == pytest.approx(1.0373170647889407, rel=1e-12)

    def test_numeric_matches_closed_form(self):
        inv_gamma_half = 1.0 / math.gamma(0.5)
        k = Kernel.from_expression(f"t^(-1/2) * {inv_gamma_half!r}")
        closed = Kernel.riemann_liouville(0.5).reverse_holder_norm(2.0)
        assert k.reverse_holder_norm(2.0) == pytest.approx(closed, rel=1e-8)

    def test_q_must_exceed_one(self):
        with pytest.raises(ValidationError):
            Kernel.constant_one().reverse_holder_norm(1.0)

    def test_divergence_detected(self):
        # b(t) = t at q = 1.2 gives integrand t^(-5), not integrable
        k = Kernel.from_expression("t")
        assert math.isinf(k.reverse_holder_norm(1.2))

    def test_integrable_inverse_power(self):
        # b(t) = t at q = 3 gives integrand t^(-1/2) with integral 2
        k = Kernel.from_expression("t")
        assert k.reverse_holder_norm(3.0) == pytest.approx(2.0, rel=1e-8)


class TestNonlocalValue:
    def test_zero_function(self):
        u = GridFunction.constant(65, 0.0)
        assert Kernel.constant_one().nonlocal_value(u, P_REF) == 0.0

    def test_one_function_gives_mass(self):
        u = GridFunction.constant(65, 1.0)
        assert Kernel.constant_one().nonlocal_value(u, P_REF) == pytest.approx(1.0, abs=1e-12)
        krl = Kernel.riemann_liouville(0.5)
        assert krl.nonlocal_value(u, P_REF) == pytest.approx(krl.mass(), rel=1e-9)

    def test_linear_squared(self):
        u = GridFunction.from_callable(257, lambda t: t)
        val = Kernel.constant_one().nonlocal_value(u, P2)
        assert val == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_monotone_in_u(self):
        rng = np.random.default_rng(7)
        k = Kernel.constant_one()
        for _ in range(20):
            base = rng.uniform(0.0, 2.0, 65)
            bump = rng.uniform(0.0, 0.5, 65)
            u = GridFunction(np.linspace(0, 1, 65), base)
            v = GridFunction(np.linspace(0, 1, 65), base + bump)
            assert k.nonlocal_value(u, P_REF) <= k.nonlocal_value(v, P_REF) + 1e-9

    def test_scaling_sandwich_for_constants(self):
        rng = np.random.default_rng(11)
        k = Kernel.riemann_liouville(0.5)
        mass = k.mass()
        pm, pp = 2.0, 5.0
        for _ in range(10):
            c = float(rng.uniform(1.0, 4.0))
            u = GridFunction.constant(65, c)
            val = k.nonlocal_value(u, P_REF)
            assert mass * min(c**pm, c**pp) - 1e-9 <= val <= mass * max(c**pm, c**pp) + 1e-9

    def test_negative_u_rejected(self):
        with pytest.raises(ValidationError):
            GridFunction(np.linspace(0, 1, 5), np.array([0, 1, -1, 1, 0.0]))

    def test_nonpositive_exponent_rejected(self):
        u = GridFunction.constant(65, 1.0)
        with pytest.raises(HypothesisError):
            Kernel.constant_one().nonlocal_value(u, parse("t - 2", {"t"}))


class TestQuadratureRefinement:
    def test_doubling_changes_less_than_error_estimate(self):
        smooth = [
            (lambda x: np.sin(np.pi * x) + 1.0),
            (lambda x: np.exp(x)),
            (lambda x: 1.0 / (1.0 + x * x)),
        ]
        for f in smooth:
            v1, e1 = kq.adaptive_gl(f, lambda n: kq.uniform_mesh(0, 1, n), n0=64)
            v2, _ = kq.adaptive_gl(f, lambda n: kq.uniform_mesh(0, 1, n), n0=128)
            assert abs(v1 - v2) <= e1 + 1e-12

    def test_nonconvergent_reported(self):
        # noise integrand never stabilizes at tolerance 1e-10
        rng = np.random.default_rng(3)
        with pytest.raises(QuadratureError):
            kq.adaptive_gl(lambda x: rng.random(x.shape),
                           lambda n: kq.uniform_mesh(0, 1, n), n0=8)


class TestValidation:
    def test_fractional_order_range(self):
        with pytest.raises(ValidationError):
            Kernel.riemann_liouville(1.5)
        with pytest.raises(ValidationError):
            Kernel.riemann_liouville(0.0)

    def test_negative_kernel_rejected_on_load(self):
        with pytest.raises(HypothesisError):
            Kernel.from_expression("t - 1/2")

    def test_kernel_positive_mass(self):
        k = Kernel.from_expression("t^2")
        assert k.mass() == pytest.approx(1.0 / 3.0, rel=1e-10)
