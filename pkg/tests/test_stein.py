import math
from fractions import Fraction

import numpy as np
import pytest

from free_stein import stein
from free_stein.closedform import fd_sigma, finite_group_sigma, one_var_sigma, subadditivity_check
from free_stein.codec import polys_from_json
from free_stein.errors import ModelSpecError, NumericalDiagnostic, StructuralError
from free_stein.ncalg import KernelMatrix, NCPoly, TensorPoly, mai_kernel
from free_stein.schemas import DegreeScheme, SigmaMode
from free_stein.trace import MatrixModel, SemicircularModel


def random_xi(model, rng, max_degree=2):
    system = model.system
    words = system.monomials(max_degree, min_degree=1)
    Xi = []
    for _ in range(model.n):
        coeffs = rng.integers(-3, 4, size=len(words))
        Xi.append(NCPoly(system, {w: int(c) for w, c in zip(words, coeffs)}))
    return model.center(Xi)


@pytest.fixture
def projection_c2():
    one = [np.eye(1), np.eye(1)]
    e = [np.eye(1), np.zeros((1, 1))]
    return MatrixModel([(1, 0.5), (1, 0.5)], [[[[1]], [[-1]]]], b_elements=[one, e])


def test_jacobian_basis_contains_identity(semicircular1, semicircular2):
    (J,) = stein.jacobian_basis(semicircular1, DegreeScheme(d_xi=0, d_proj=1))
    assert J == KernelMatrix.identity(semicircular1.system)
    assert len(stein.jacobian_basis(semicircular2, DegreeScheme(d_xi=0, d_proj=1))) == 4
    assert len(stein.jacobian_basis(semicircular2, DegreeScheme(d_xi=0, d_proj=2))) == 12


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("d_proj", [1, 2, 3, 4])
def test_semicircular_discrepancy_vanishes_at_conjugate_variables(n, d_proj):
    model = SemicircularModel(n)
    report = stein.discrepancy(model, model.generators(), DegreeScheme(d_xi=1, d_proj=d_proj))
    assert report.value <= 1e-8
    # 3/2 per diagonal entry, 1 per off-diagonal entry
    assert report.kernel_distance ** 2 == pytest.approx({1: 1.5, 2: 5.0}[n])


def test_discrepancy_of_zero_xi_is_one(twopoint):
    zero = NCPoly.zero(twopoint.system)
    report = stein.discrepancy(twopoint, (zero,), DegreeScheme(d_xi=1, d_proj=2))
    assert report.value == pytest.approx(1.0, abs=1e-10)
    assert report.kernel_distance == pytest.approx(1.0, abs=1e-10)


def test_discrepancy_is_nondecreasing_in_projection_degree(threepoint):
    Xi = threepoint.generators()
    values = [stein.discrepancy(threepoint, Xi, DegreeScheme(d_xi=1, d_proj=d)).value for d in range(1, 6)]
    assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))


def test_discrepancy_rejects_wrong_length(semicircular2):
    with pytest.raises(StructuralError):
        stein.discrepancy(semicircular2, semicircular2.generators()[:1], DegreeScheme())


def test_discrepancy_needs_scalar_coefficients(projection_c2):
    with pytest.raises(StructuralError):
        stein.discrepancy(projection_c2, projection_c2.generators(), DegreeScheme())


def test_discrepancy_is_identical_across_thread_counts(semicircular2):
    Xi = random_xi(semicircular2, np.random.default_rng(3), max_degree=1)
    scheme = DegreeScheme(d_xi=1, d_proj=3)
    serial = stein.discrepancy(semicircular2, Xi, scheme, threads=1)
    pooled = stein.discrepancy(semicircular2, Xi, scheme, threads=3)
    assert serial.value == pooled.value


@pytest.mark.parametrize("n", [1, 2])
def test_semicircular_irregularity_is_zero(n):
    report = stein.irregularity_estimate(SemicircularModel(n), DegreeScheme(d_xi=1))
    assert report.irregularity <= 1e-8
    assert report.sigma == pytest.approx(n, abs=1e-6)
    assert report.mode is SigmaMode.ESTIMATE


def test_two_point_irregularity(twopoint):
    report = stein.irregularity_estimate(twopoint, DegreeScheme(d_xi=2))
    assert report.irregularity ** 2 == pytest.approx(0.5, abs=1e-6)
    assert report.trail[0] == (0, pytest.approx(1.0))


def test_three_point_irregularity(threepoint):
    exact = stein.irregularity_estimate(threepoint, DegreeScheme(d_xi=2, d_proj=5))
    assert exact.irregularity ** 2 == pytest.approx(1 / 3, abs=1e-6)
    truncated = stein.irregularity_estimate(threepoint, DegreeScheme(d_xi=2, d_proj=4))
    assert truncated.irregularity ** 2 <= 1 / 3 + 1e-9


def test_irregularity_trail_is_nonincreasing(threepoint):
    report = stein.irregularity_estimate(threepoint, DegreeScheme(d_xi=3, d_proj=5))
    values = [v for _, v in report.trail]
    assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))


def test_irregularity_bounded_by_any_discrepancy(threepoint):
    scheme = DegreeScheme(d_xi=2, d_proj=4)
    best = stein.irregularity_estimate(threepoint, scheme).irregularity
    x = threepoint.generators()[0]
    for Xi in [(x,), (x * x * x,), (x * Fraction(1, 2) - x * x * x,)]:
        assert best <= stein.discrepancy(threepoint, Xi, scheme).value + 1e-10


def test_reported_xi_attains_the_irregularity(c2):
    scheme = DegreeScheme(d_xi=1, d_proj=3)
    report = stein.irregularity_estimate(c2, scheme)
    assert report.irregularity == pytest.approx(math.sqrt(0.5), abs=1e-6)
    Xi = polys_from_json(report.xi, c2.system)
    assert stein.discrepancy(c2, Xi, scheme).value == pytest.approx(report.irregularity, abs=1e-6)


@pytest.mark.parametrize("fixture", ["twopoint", "threepoint"])
def test_estimate_respects_one_variable_bound(fixture, request):
    model = request.getfixturevalue(fixture)
    report = stein.irregularity_estimate(model, DegreeScheme(d_xi=2, d_proj=5))
    assert report.sigma <= one_var_sigma(model).sigma + 1e-6


def test_free_pair_of_two_point_variables(free_twopoint):
    report = stein.irregularity_estimate(free_twopoint, DegreeScheme(d_xi=2, d_proj=4))
    assert report.irregularity ** 2 == pytest.approx(1.0, abs=2e-3)


@pytest.mark.parametrize("R", [1.0, 1.5, 2.0])
def test_bounded_irregularity_vanishes_past_fisher_information(semicircular1, R):
    report = stein.irregularity_bounded(semicircular1, DegreeScheme(d_xi=3), R)
    assert report.value <= 1e-8
    assert report.radius == R


def test_bounded_irregularity_below_fisher_information(semicircular1):
    report = stein.irregularity_bounded(semicircular1, DegreeScheme(d_xi=3), 0.5)
    assert report.value > 0.05
    assert report.value == pytest.approx(0.5, abs=1e-6)


def test_bounded_irregularity_flags_a_missed_radius(mocker, semicircular1):
    mocker.patch("free_stein.stein.optimize.brentq", return_value=0.0)
    with pytest.raises(NumericalDiagnostic) as exc:
        stein.irregularity_bounded(semicircular1, DegreeScheme(d_xi=3), 0.5)
    assert exc.value.partial["radius"] == 0.5
    assert exc.value.partial["norm_miss"] == pytest.approx(0.5, abs=1e-6)


def test_bounded_irregularity_at_zero_radius(semicircular1):
    scheme = DegreeScheme(d_xi=1)
    bounded = stein.irregularity_bounded(semicircular1, scheme, 0.0)
    zero = stein.discrepancy(semicircular1, (NCPoly.zero(semicircular1.system),), scheme)
    assert bounded.value == pytest.approx(zero.value, abs=1e-10)
    with pytest.raises(ModelSpecError):
        stein.irregularity_bounded(semicircular1, scheme, -1.0)


def test_radius_sweep_is_convex(semicircular1):
    radii = [0.25 * k for k in range(9)]
    report = stein.radius_sweep(semicircular1, DegreeScheme(d_xi=1), radii)
    assert report.convex
    assert report.points[0].value == pytest.approx(1.0, abs=1e-8)
    assert all(p.value <= 1e-8 for p in report.points if p.parameter >= 1)


def test_convexity_violations():
    assert stein.convexity_violations([(0, 1.0), (1, 0.5), (2, 0.0)]) == []
    assert stein.convexity_violations([(0, 1.0), (1, 0.9), (2, 0.0)]) == [1]


def test_alpha_estimate():
    flat = stein.alpha_estimate([(r, 0.3) for r in (1, 2, 4, 8)])
    assert flat.alpha == pytest.approx(0.0, abs=1e-12)
    power = stein.alpha_estimate([(r, r ** -0.5) for r in (1, 2, 4, 8, 16, 32)])
    assert power.alpha == pytest.approx(-0.5)
    assert len(power.window) == 3


def test_alpha_estimate_flags_divergence(semicircular1):
    report = stein.radius_sweep(semicircular1, DegreeScheme(d_xi=1), [0.5, 1.5, 2.0, 3.0])
    alpha = stein.alpha_estimate([(p.parameter, p.value) for p in report.points], floor=1e-8)
    assert alpha.diverges
    assert alpha.alpha == -math.inf


def test_alpha_estimate_needs_three_radii():
    with pytest.raises(ModelSpecError):
        stein.alpha_estimate([(0, 1.0), (1, 0.5), (2, 0.2)])


def test_exact_sigma_of_two_point_algebra(c2):
    report = stein.sigma_exact_fd(c2, 2)
    assert report.sigma == pytest.approx(0.5, abs=1e-10)
    assert report.mode is SigmaMode.EXACT_FD
    assert float(fd_sigma([(1, Fraction(1, 2)), (1, Fraction(1, 2))])) == pytest.approx(report.sigma)


@pytest.mark.parametrize("fixture, expected", [
    ("m2", Fraction(3, 4)),
    ("m2c", Fraction(7, 9)),
])
def test_exact_sigma_matches_block_formula(fixture, expected, request):
    report = stein.sigma_exact_fd(request.getfixturevalue(fixture), 3)
    assert report.sigma == pytest.approx(float(expected), abs=1e-9)
    values = [v for _, v in report.trail]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_exact_sigma_needs_matrix_model(semicircular1):
    with pytest.raises(StructuralError):
        stein.sigma_exact_fd(semicircular1, 2)


def test_exact_sigma_over_subalgebra_containing_x(projection_c2):
    report = stein.sigma_exact_fd(projection_c2, 1)
    assert report.irregularity ** 2 == pytest.approx(1.0, abs=1e-10)
    assert report.sigma == pytest.approx(0.0, abs=1e-10)


def test_generator_invariance():
    x = [np.array([[v]]) for v in (1.0, 2.0, 3.0)]
    single = MatrixModel([(1, 1 / 3)] * 3, [x])
    pair = MatrixModel([(1, 1 / 3)] * 3, [x, [m @ m for m in x]])
    assert stein.sigma_exact_fd(single, 3).sigma == pytest.approx(2 / 3, abs=1e-10)
    assert stein.sigma_exact_fd(pair, 3).sigma == pytest.approx(2 / 3, abs=1e-10)


def test_cyclic_group_with_star_pairing():
    omega = np.exp(2j * np.pi / 3)
    g = [np.array([[omega ** k]]) for k in range(3)]
    model = MatrixModel([(1, 1 / 3)] * 3, [g, [m.conj() for m in g]], star=[1, 0])
    report = stein.sigma_exact_fd(model, 2)
    assert report.sigma == pytest.approx(float(finite_group_sigma(3)), abs=1e-10)


def test_free_factors_add(c2):
    report = stein.sigma_exact_fd_free([c2, MatrixModel.diagonal([1.0, -1.0], [0.5, 0.5])], 2)
    assert report.sigma == pytest.approx(1.0, abs=1e-10)
    assert report.irregularity ** 2 == pytest.approx(1.0, abs=1e-10)
    assert report.mode is SigmaMode.EXACT_FD_FREE
    assert len(report.factors) == 2


def test_subadditivity_of_commuting_pair():
    blocks = [(1, 0.25)] * 4
    x = [np.array([[v]]) for v in (1.0, 1.0, -1.0, -1.0)]
    y = [np.array([[v]]) for v in (1.0, -1.0, 1.0, -1.0)]
    both = stein.sigma_exact_fd(MatrixModel(blocks, [x, y]), 2).sigma
    alone_x = stein.sigma_exact_fd(MatrixModel(blocks, [x]), 2).sigma
    alone_y = stein.sigma_exact_fd(MatrixModel(blocks, [y]), 2).sigma
    assert both == pytest.approx(0.75, abs=1e-10)
    assert alone_x == pytest.approx(0.5, abs=1e-10)
    assert subadditivity_check(both, alone_x, alone_y)


def test_mai_kernel_is_a_stein_kernel(semicircular2):
    rng = np.random.default_rng(11)
    for _ in range(20):
        Xi = random_xi(semicircular2, rng)
        A = mai_kernel(Xi, semicircular2.generators())
        worst, _, tested = stein.kernel_residual(semicircular2, A, Xi, 4)
        assert worst <= 1e-8
        assert tested == 62


def test_stein_kernels_differ_by_range_complement(semicircular1):
    gap = stein.mai_gap(semicircular1, semicircular1.generators(), DegreeScheme(d_xi=1, d_proj=4))
    assert gap.kernel_distance_sq == pytest.approx(1.5, abs=1e-10)
    assert gap.discrepancy_sq <= 1e-12
    assert gap.gap == pytest.approx(1.5, abs=1e-10)


def test_conjugate_variables_of_semicirculars(semicircular2):
    report = stein.conjugate_variable_check(semicircular2, semicircular2.generators(), 4)
    assert report.residual <= 1e-10
    assert report.fisher_info == pytest.approx(2.0)
    assert report.tested == 62


def test_conjugate_variable_failures(semicircular1, twopoint):
    x = semicircular1.generators()[0]
    doubled = stein.conjugate_variable_check(semicircular1, (x * 2,), 1)
    assert doubled.residual == pytest.approx(1.0)
    assert "t1" in doubled.worst
    zero = stein.conjugate_variable_check(twopoint, (NCPoly.zero(twopoint.system),), 1)
    assert zero.residual == pytest.approx(1.0)


def test_adjoint_action_single_variable(semicircular1):
    x = semicircular1.generators()[0]
    eta = (TensorPoly.one(semicircular1.system),)
    assert stein.adjoint_action(semicircular1, eta, x, x, x) == x * x * x - x * 2
    one = NCPoly.one(semicircular1.system)
    assert stein.adjoint_action(semicircular1, eta, one, one, x) == x


def test_adjoint_action_is_verified_against_pairings(semicircular2):
    system = semicircular2.system
    s1, s2 = semicircular2.generators()
    eta = (TensorPoly.one(system), TensorPoly.zero(system))
    for p, q in [(s1 * s2, s2), (s2 + 1, s1 * s2), (s1 * Fraction(1, 2), s2 * s2 - s1)]:
        value = stein.adjoint_action(semicircular2, eta, p, q, s1)
        acted = tuple(TensorPoly.elementary(p, q).sharp(e) for e in eta)
        assert stein.adjoint_residual(semicircular2, acted, value, 4) <= 1e-8


def test_adjoint_action_non_palindromic_word(semicircular2):
    system = semicircular2.system
    s1, s2 = semicircular2.generators()
    eta = (TensorPoly.one(system), TensorPoly.zero(system))
    one = NCPoly.one(system)
    assert stein.adjoint_action(semicircular2, eta, one, s1 * s2, s1) == s1 * s1 * s2 - s2


def test_continuity(threepoint):
    x = threepoint.generators()[0]
    report = stein.continuity_check(threepoint, (x,), (x + x * x * Fraction(1, 2),), DegreeScheme(d_xi=2))
    assert report.holds
    assert report.discrepancy_gap <= report.projection_gap + 1e-9 <= report.kernel_gap + 2e-9


def test_degree_sweeps(threepoint, c2):
    x = threepoint.generators()[0]
    points = stein.degree_sweep(threepoint, "discrepancy", [1, 2, 3], Xi=(x,))
    assert [p.parameter for p in points] == [1, 2, 3]
    irregular = stein.degree_sweep(threepoint, stein.SweepQuantity.IRREGULARITY, [1, 2], d_proj=5)
    assert irregular[-1].value ** 2 == pytest.approx(1 / 3, abs=1e-6)
    exact = stein.degree_sweep(c2, "sigma-exact", [1, 2])
    assert exact[-1].value == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(ModelSpecError):
        stein.degree_sweep(threepoint, "discrepancy", [1])
