import logging
import math
from fractions import Fraction

import pytest

from free_stein import closedform
from free_stein.errors import ModelSpecError
from free_stein.quadrature import SemicircleDensity, StaircaseDensity, UniformDensity
from free_stein.schemas import DegreeScheme, GraphSpec, RadulescuSpec
from free_stein.trace import MeasureModel


@pytest.fixture
def plateau():
    return MeasureModel(atoms=[(3.0, 0.5)], density=SemicircleDensity(mass=0.5))


def test_one_variable_formula(semicircle_measure, twopoint, threepoint):
    assert closedform.one_var_sigma(semicircle_measure).irregularity_sq == 0
    assert closedform.one_var_sigma(twopoint).sigma == pytest.approx(0.5)
    assert closedform.one_var_sigma(threepoint).sigma == pytest.approx(2 / 3)


def test_eigenvalue_multiplicities():
    values = closedform.eigenvalue_sigma([1.0, 1.0, 2.0, 3.0])
    assert values.irregularity_sq == Fraction(3, 8)
    assert values.sigma == Fraction(5, 8)
    assert closedform.eigenvalue_sigma([0.0, 1e-12]).sigma == 0
    with pytest.raises(ModelSpecError):
        closedform.eigenvalue_sigma([])


def test_block_formula():
    assert closedform.fd_sigma([(2, 1)]) == Fraction(3, 4)
    assert closedform.fd_sigma([(2, Fraction(2, 3)), (1, Fraction(1, 3))]) == Fraction(7, 9)
    assert closedform.fd_sigma([(1, 0.5), (1, 0.5)]) == Fraction(1, 2)
    with pytest.raises(ModelSpecError):
        closedform.fd_sigma([(1, Fraction(1, 2))])
    with pytest.raises(ModelSpecError):
        closedform.fd_sigma([(0, 1)])


def test_group_values():
    assert closedform.group_sigma(0, 0) == 1
    assert closedform.group_sigma(0, 1) == 2
    assert closedform.finite_group_sigma(2) == Fraction(1, 2)
    assert closedform.finite_group_sigma(3) == closedform.fd_sigma([(1, Fraction(1, 3))] * 3)
    with pytest.raises(ModelSpecError):
        closedform.finite_group_sigma(0)


def test_radulescu_equal_pair():
    spec = RadulescuSpec(pairs=[{"tau_e": "1/2", "tau_f": "1/2", "equal": True}])
    values = closedform.radulescu(spec)
    assert values.t == Fraction(5, 4)
    assert values.irregularity_sq == Fraction(3, 4)
    assert values.sigma == Fraction(1, 4)
    assert values.identity_holds


def test_radulescu_orthogonal_pair_and_empty():
    values = closedform.radulescu(RadulescuSpec(pairs=[{"tau_e": "1/3", "tau_f": "1/3"}]))
    assert values.t == Fraction(11, 9)
    assert values.sigma == Fraction(2, 9)
    assert values.identity_holds
    empty = closedform.radulescu(RadulescuSpec())
    assert (empty.t, empty.irregularity_sq, empty.sigma) == (1, 0, 0)


def test_graph_with_one_edge():
    spec = GraphSpec(weights=["1/2", "1/2"], edges=[{"u": 1, "v": 2}])
    values = closedform.graph_sigma(spec)
    assert values.t == 1
    assert values.irregularity_sq == Fraction(3, 2)
    assert values.sigma_xb == Fraction(1, 2)
    assert values.sigma_y == Fraction(1, 2)
    assert values.directed_edges == 2
    assert values.identity_holds


def test_graph_loop_counts_once(caplog):
    spec = GraphSpec(weights=[1], edges=[{"u": 1, "v": 1}])
    with caplog.at_level(logging.WARNING):
        values = closedform.graph_sigma(spec)
    assert values.loops
    assert values.directed_edges == 1
    assert values.identity_holds
    assert "loops" in caplog.text


def test_graph_rejects_degenerate_inputs():
    with pytest.raises(ModelSpecError):
        closedform.graph_sigma(GraphSpec(weights=[1]))
    with pytest.raises(ModelSpecError):
        closedform.graph_sigma(GraphSpec(weights=["1/3", "1/3", "1/3"], edges=[{"u": 1, "v": 2}]))


def test_subadditivity_check():
    assert closedform.subadditivity_check(0.75, 0.5, 0.5)
    assert not closedform.subadditivity_check(1.5, 0.5, 0.5)


def test_eps_kernel_of_point_mass():
    delta = MeasureModel(atoms=[(0.0, 1.0)])
    assert closedform.eps_kernel(delta, 0.1).bound == pytest.approx(1.0)
    with pytest.raises(ModelSpecError):
        closedform.eps_kernel(delta, 0.0)


def test_eps_kernel_of_two_points(twopoint):
    bounds = [closedform.eps_kernel(twopoint, eps).bound for eps in (1e-1, 1e-2, 1e-3)]
    assert bounds[-1] == pytest.approx(0.5, abs=1e-3)
    assert all(b <= a + 1e-15 for a, b in zip(bounds, bounds[1:]))


def test_eps_kernel_plateau(plateau):
    coarse = closedform.eps_kernel(plateau, 1e-2)
    fine = closedform.eps_kernel(plateau, 1e-3)
    assert fine.bound == pytest.approx(0.25, abs=1e-3)
    assert abs(fine.g_norm - coarse.g_norm) < 0.01 * fine.g_norm


def test_eps_plateau_fit(plateau):
    result = closedform.eps_plateau(plateau, 1e-2, 3, DegreeScheme(d_xi=3))
    assert len(result.fit) == 1
    assert result.fit[0].degree <= 3
    assert result.report.value >= 0
    assert result.g_norm > 0


def test_log_energy(twopoint):
    assert closedform.log_energy(twopoint).diverges
    assert closedform.log_energy(twopoint).value == -math.inf
    uniform = MeasureModel(density=UniformDensity())
    assert closedform.log_energy(uniform).value == pytest.approx(-1.5)
    semicircle = MeasureModel(density=SemicircleDensity())
    assert closedform.log_energy(semicircle).value == pytest.approx(-0.25, abs=1e-6)


def test_log_energy_of_staircase_diverges_slowly():
    staircase = MeasureModel(density=StaircaseDensity(levels=13))
    energy = closedform.log_energy(staircase)
    assert not energy.diverges
    assert len(energy.partial_sums) == 13
    assert energy.partial_sums[10] > -1e6
    assert energy.value < -1e6
    assert all(b < a for a, b in zip(energy.partial_sums, energy.partial_sums[1:]))


def test_quadrature_energy_matches_uniform_formula():
    density = UniformDensity(-1.0, 1.0)
    exact = closedform.log_energy(MeasureModel(density=density)).value
    assert exact == pytest.approx(math.log(2) - 1.5)
    assert closedform.quadrature_log_energy(density) == pytest.approx(exact, abs=1e-3)


def test_inaccurate_quadrature_is_logged(mocker, caplog):
    mocker.patch("free_stein.quadrature.integrate.quad", return_value=(0.25, 1e-3))
    with caplog.at_level(logging.DEBUG, logger="free_stein.quadrature"):
        value = SemicircleDensity().integrate_against(lambda s: math.log(abs(s)), around=0.0)
    assert value == 0.25
    assert "quad error estimate" in caplog.text
