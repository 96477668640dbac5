import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from free_stein.schemas import (
    AlphaReport, DegreeScheme, GraphSpec, RadulescuPair, RunConfig, SigmaMode, SigmaReport, build_model,
    load_model_spec,
)
from free_stein.trace import FreeProductModel, MatrixModel, MeasureModel, SemicircularModel

MODEL_SPECS = {
    "c2.json": MatrixModel,
    "diag123.json": MatrixModel,
    "m2.json": MatrixModel,
    "m2c.json": MatrixModel,
    "free_c2.json": FreeProductModel,
    "free_twopoint.json": FreeProductModel,
    "semicircular1.json": SemicircularModel,
    "semicircular2.json": SemicircularModel,
    "twopoint.json": MeasureModel,
    "threepoint.json": MeasureModel,
    "plateau.json": MeasureModel,
    "uniform.json": MeasureModel,
    "staircase.json": MeasureModel,
}


@pytest.mark.parametrize("name, kind", sorted(MODEL_SPECS.items()))
def test_bundled_model_specs_build(specs_dir, name, kind):
    assert isinstance(build_model(specs_dir / name), kind)


def test_free_product_spec_counts_generators(specs_dir):
    assert build_model(specs_dir / "free_c2.json").n == 2


def test_density_mass_is_inferred_from_atoms(specs_dir):
    model = build_model(specs_dir / "plateau.json")
    assert model.density.mass == pytest.approx(0.5)


def test_weights_accept_fraction_strings():
    spec = load_model_spec({"type": "matrix", "blocks": [{"size": 1, "weight": "2/3"}, {"size": 1, "weight": 1 / 3}],
                            "generators": [[[[1]], [[0]]]]})
    assert spec.blocks[0].weight == pytest.approx(2 / 3)


def test_unknown_model_type_is_rejected():
    with pytest.raises(ValidationError):
        load_model_spec('{"type": "banach", "count": 1}')


def test_matrix_spec_errors_name_the_field():
    with pytest.raises(ValidationError) as exc:
        load_model_spec({"type": "matrix", "blocks": [{"size": 0, "weight": 1}], "generators": [[[[1]]]]})
    assert "size" in str(exc.value)
    with pytest.raises(ValidationError) as exc:
        load_model_spec({"type": "matrix", "blocks": [{"size": 1, "weight": 1}], "generators": [[[[1]]]],
                         "star": [0]})
    assert "star" in str(exc.value)


def test_complex_entries_and_star_pairing():
    spec = load_model_spec({
        "type": "matrix",
        "blocks": [{"size": 1, "weight": 1}],
        "generators": [[[[[0, 1]]]], [[[[0, -1]]]]],
        "star": [2, 1],
    })
    model = spec.build()
    assert model.system.star == (1, 0)


def test_measure_needs_mass():
    with pytest.raises(ValidationError):
        load_model_spec({"type": "measure"})


def test_degree_scheme_defaults():
    assert DegreeScheme(d_xi=2).d_proj == 4
    assert DegreeScheme().d_proj == 3
    with pytest.raises(ValidationError):
        DegreeScheme(d_xi=0, d_proj=0)


def test_graph_spec_validation():
    spec = GraphSpec.model_validate_json('{"weights": ["1/4", "3/4"], "edges": [{"u": 1, "v": 2, "multiplicity": 2}]}')
    assert spec.weights == [Fraction(1, 4), Fraction(3, 4)]
    assert spec.multiplicities() == {(0, 1): 2, (1, 0): 2}
    with pytest.raises(ValidationError):
        GraphSpec(weights=["1/2", "1/3"])
    with pytest.raises(ValidationError):
        GraphSpec(weights=["1/2", "1/2"], edges=[{"u": 1, "v": 3}])
    assert json.loads(spec.model_dump_json())["weights"] == ["1/4", "3/4"]


def test_radulescu_pair_validation():
    assert RadulescuPair(tau_e="1/4", tau_f="1/2").tau_e == Fraction(1, 4)
    with pytest.raises(ValidationError):
        RadulescuPair(tau_e="1/4", tau_f="1/2", equal=True)
    with pytest.raises(ValidationError):
        RadulescuPair(tau_e="2/3", tau_f="1/2")
    with pytest.raises(ValidationError):
        RadulescuPair(tau_e=0, tau_f="1/2")


def test_sigma_report_consistency():
    SigmaReport(n=1, sigma=0.5, irregularity=0.5 ** 0.5, mode=SigmaMode.EXACT_FD)
    with pytest.raises(ValidationError):
        SigmaReport(n=1, sigma=0.4, irregularity=0.5 ** 0.5, mode=SigmaMode.ESTIMATE)
    with pytest.raises(ValidationError):
        SigmaReport(n=1, sigma=-1.0, irregularity=2 ** 0.5, mode=SigmaMode.EXACT_FD)


def test_alpha_is_never_positive():
    assert AlphaReport(alpha=float("-inf"), diverges=True).diverges
    with pytest.raises(ValidationError):
        AlphaReport(alpha=0.5)


def test_run_config_validation():
    config = RunConfig(command="sweep-radius", radii=[0, 0.5, 1], d_xi=2)
    assert config.scheme().d_proj == 4
    with pytest.raises(ValidationError):
        RunConfig(command="sweep-radius", radii=[1, 0.5])
    with pytest.raises(ValidationError):
        RunConfig(command="sweep-radius", radii=[-1, 0.5])
    with pytest.raises(ValidationError):
        RunConfig(command="irregularity", d_xi=12, cap=12)
    with pytest.raises(ValidationError):
        RunConfig(command="integrate")


def test_run_config_reads_environment(monkeypatch):
    monkeypatch.setenv("FREE_STEIN_THREADS", "4")
    monkeypatch.setenv("FREE_STEIN_CAP", "8")
    config = RunConfig(command="discrepancy")
    assert config.threads == 4
    assert config.cap == 8
