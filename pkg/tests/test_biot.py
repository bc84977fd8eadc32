import numpy as np
import pytest

from porosplit.biot import (
    BENCHMARK_TRACTION,
    MaterialParams,
    ScenarioConfig,
    TimePolynomial,
    benchmark_material,
    benchmark_scenario,
    contraction_factor,
    lame_from_engineering,
    optimal_tuning,
    parse_scenario,
    scenario_to_text,
)
from porosplit.errors import ConfigError, InvalidMaterial


def material(b=1.0, lam=0.5, M=1.0):
    return MaterialParams(
        biot_modulus=M,
        biot_coefficient=b,
        shear_modulus=1.0,
        lame_lambda=lam,
        permeability=np.eye(2),
    )


def test_optimal_tuning_simple():
    assert abs(optimal_tuning(material(b=1.0, lam=0.5)) - 1.0) < 1e-15


def test_optimal_tuning_benchmark_values():
    assert abs(optimal_tuning(material(b=100.0, lam=86.42)) - 57.8569) < 1e-3


def test_optimal_tuning_quadratic_in_b():
    assert abs(optimal_tuning(material(b=2.0)) - 4.0 * optimal_tuning(material(b=1.0))) < 1e-14


def test_contraction_factor_half():
    assert abs(contraction_factor(material(M=1.0), 1.0) - 0.5) < 1e-15


def test_contraction_factor_benchmark():
    mat = material(b=100.0, lam=86.42, M=100.0)
    delta = contraction_factor(mat, optimal_tuning(mat))
    assert abs(delta - 0.999827) < 1e-6


def test_contraction_factor_increasing_in_tuning():
    mat = material(M=3.0)
    values = [contraction_factor(mat, L) for L in (0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_lame_benchmark_values():
    mu, lam = lame_from_engineering(100.0, 0.35)
    assert abs(mu - 37.037) < 5e-4
    assert abs(lam - 86.42) < 5e-3


def test_lame_formula_values():
    mu, lam = lame_from_engineering(1.0, 0.0)
    assert abs(mu - 0.5) < 1e-15 and abs(lam) < 1e-15
    mu, lam = lame_from_engineering(2.0, 0.25)
    assert abs(mu - 0.8) < 1e-15 and abs(lam - 0.8) < 1e-15


def test_lame_rejects_incompressible():
    with pytest.raises(InvalidMaterial):
        lame_from_engineering(100.0, 0.5)


def test_material_validation():
    with pytest.raises(InvalidMaterial):
        material(lam=-1.0)
    with pytest.raises(InvalidMaterial):
        MaterialParams(1.0, 1.0, 1.0, 1.0, np.array([[1.0, 0.0], [0.0, -2.0]]))
    # zero coupling is allowed for decoupled structural tests
    assert material(b=0.0).biot_coefficient == 0.0


def test_benchmark_traction_values():
    assert abs(BENCHMARK_TRACTION(0.25) - (-10.0)) < 1e-12
    assert BENCHMARK_TRACTION(0.0) == 0.0
    assert abs(BENCHMARK_TRACTION(0.5)) < 1e-12


def test_time_polynomial_eval():
    p = TimePolynomial((1.0, -2.0, 3.0))
    assert abs(p(2.0) - (1 - 4 + 12)) < 1e-14


def test_benchmark_scenario_parameters():
    cfg = benchmark_scenario(level=1, tau=0.01, scheme="dg", time_degree=0, space_degree=0)
    assert cfg.t_end == 0.5
    assert cfg.n_slabs == 50
    mat = cfg.material
    assert mat.biot_modulus == 100.0 and mat.biot_coefficient == 100.0
    assert np.allclose(mat.permeability, 0.1 * np.eye(2))
    assert cfg.tol_fixed == 1e-8
    assert cfg.tol_flow == 1e-14 and cfg.tol_mechanics == 1e-12
    high = benchmark_scenario(scheme="cgp", time_degree=2, space_degree=1)
    assert high.tol_flow == 1e-12
    assert abs(cfg.tuning_value() - optimal_tuning(mat)) < 1e-12


def test_benchmark_boundary_layout():
    cfg = benchmark_scenario()
    assert cfg.boundaries["top"].flow == "open"
    assert cfg.boundaries["top"].traction is not None
    assert cfg.boundaries["bottom"].fix == "y"
    assert cfg.boundaries["left"].fix == "x"
    assert cfg.boundaries["reentrant"].fix == ""
    assert all(bc.flow == "noflow" for tag, bc in cfg.boundaries.items() if tag != "top")


def test_scenario_roundtrip():
    cfg = benchmark_scenario(level=2, tau=0.05, scheme="cgp", time_degree=1, space_degree=1, omega=1.25)
    text = scenario_to_text(cfg)
    back = parse_scenario(text)
    assert scenario_to_text(back) == text
    assert back.material.shear_modulus == cfg.material.shear_modulus
    assert back.n_slabs == cfg.n_slabs
    assert back.boundaries["top"].traction.coefficients == BENCHMARK_TRACTION.coefficients


def test_scenario_dump_contains_parameter_set():
    text = scenario_to_text(benchmark_scenario())
    for needle in (
        "biot_modulus = 100.0",
        "biot_coefficient = 100.0",
        "permeability = 0.1 0.0 0.1",
        "t_end = 0.5",
        "fixed_stress = 1e-08",
    ):
        assert needle in text, needle


def test_parse_rejects_unknown_keys():
    text = scenario_to_text(benchmark_scenario())
    with pytest.raises(ConfigError):
        parse_scenario(text + "\n[material]\nbogus_key = 1\n")
    with pytest.raises(ConfigError):
        parse_scenario(text.replace("[tuning]", "[turning]"))


def test_parse_rejects_malformed():
    with pytest.raises(ConfigError):
        parse_scenario("not an ini file [whatsoever")


def test_config_validation():
    mat = benchmark_material()
    with pytest.raises(ConfigError):
        ScenarioConfig("lshape", mat, t_end=0.5, tau=0.3, scheme="dg", time_degree=0, space_degree=0)
    with pytest.raises(ConfigError):
        ScenarioConfig("lshape", mat, t_end=0.5, tau=0.1, scheme="cgp", time_degree=0, space_degree=0)
    with pytest.raises(ConfigError):
        ScenarioConfig("lshape", mat, t_end=0.5, tau=0.1, scheme="dg", time_degree=0,
                       space_degree=0, omega=-1.0)
    cfg = ScenarioConfig("lshape", mat, t_end=0.5, tau=0.1, scheme="dg", time_degree=0,
                         space_degree=0, omega=None, tuning=57.0)
    assert cfg.tuning_value() == 57.0


def test_with_omega_switches_tuning():
    cfg = benchmark_scenario().with_omega(2.0)
    assert abs(cfg.tuning_value() - 2.0 * optimal_tuning(cfg.material)) < 1e-12
