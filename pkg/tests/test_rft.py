import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

import geometry
import medium as medium_module
import rft
from errors import DomainError

L, W, SAGITTA = 0.11, 0.07, 0.015
STATIC = rft.RFTOptions(correction=False, inertial=False)


def _flat_plate():
    return geometry.builtin_foot("flat", L, W, None, 1, 1)


def _vertical_state(depth, speed=0.02):
    # sola plana 5 cm abaixo do tornozelo
    return rft.IntrusionState(
        ankle_position=[0.0, 0.0, 0.05 - depth],
        ankle_velocity=[0.0, 0.0, -speed],
    )


def _random_state(rng):
    return rft.IntrusionState(
        ankle_position=[rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0.02, 0.035)],
        orientation=Rotation.from_rotvec(rng.normal(scale=0.3, size=3)),
        ankle_velocity=rng.normal(scale=0.03, size=3) + np.array([0.03, 0.0, -0.05]),
        angular_velocity=rng.normal(scale=0.5, size=3),
    )


@pytest.fixture
def elliptical_foot():
    return geometry.builtin_foot("elliptical", L, W, SAGITTA, 20, 10)


def test_plate_above_surface_has_no_force(sand):
    plate = geometry.Plate(np.zeros(3), np.array([0.0, 0.0, -1.0]), 1e-3)
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, 0.01], ankle_velocity=[0.0, 0.0, -0.1])

    force = rft.plate_force(plate, state, sand)

    np.testing.assert_array_equal(force.total, np.zeros(3))


def test_plate_moving_away_from_face_has_no_force(sand):
    plate = geometry.Plate(np.zeros(3), np.array([0.0, 0.0, -1.0]), 1e-3)
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, -0.02], ankle_velocity=[0.03, 0.0, 0.05])

    force = rft.plate_force(plate, state, sand)

    np.testing.assert_array_equal(force.total, np.zeros(3))
    assert force.depth == pytest.approx(-0.02)


def test_stationary_foot_has_no_force(sand, elliptical_foot):
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, 0.02])

    result = rft.total_force(elliptical_foot, state, sand)

    np.testing.assert_array_equal(result.F_total, np.zeros(3))
    assert not result.cop_defined
    assert np.all(np.isnan(result.cop))


def test_effective_depth_worked_value(sand):
    value = rft.effective_depth(0.01, 0.02, math.pi / 2, sand)

    assert value == pytest.approx(0.03284, abs=1e-6)


def test_effective_depth_grows_with_square_root_of_speed(sand):
    slow = rft.effective_depth(0.01, 0.02, 0.7, sand) - 0.01
    fast = rft.effective_depth(0.01, 0.04, 0.7, sand) - 0.01

    assert fast / slow == pytest.approx(math.sqrt(2.0), abs=1e-9)


def test_effective_depth_without_cone(sand):
    assert rft.effective_depth(0.01, 0.5, 0.0, sand) == 0.01
    assert rft.effective_depth(0.01, 0.5, -0.4, sand) == 0.01
    assert rft.effective_depth(0.0, 0.5, 1.0, sand) == 0.0


def test_effective_depth_rejects_negative_inputs(sand):
    with pytest.raises(DomainError):
        rft.effective_depth(-0.01, 0.02, 1.0, sand)

    with pytest.raises(DomainError):
        rft.effective_depth(0.01, -0.02, 1.0, sand)


def test_cone_factor_at_vertical_plate():
    assert float(rft.cone_factor(math.pi / 2, math.radians(35.0))) == pytest.approx(math.tan(math.radians(35.0)))


def test_vertical_plate_face_on_matches_scalar_evaluation(sand):
    area = 0.07 * 0.02
    plate = geometry.Plate(np.zeros(3), np.array([1.0, 0.0, 0.0]), area)
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, -0.01], ankle_velocity=[0.02, 0.0, 0.0])

    alpha_x0, alpha_z0 = medium_module.alpha_generic(math.pi / 2, 0.0)
    _, f23 = medium_module.scaling_factors(math.pi / 2, sand)
    z_eff = 0.01 + 1.93 * math.sqrt(0.02 * 0.01 * math.tan(math.radians(35.0)))
    static = f23 * sand.zeta * z_eff * area * np.array([-alpha_x0, 0.0, alpha_z0])
    inertial = np.array([-1.1 * 1500.0 * 0.02 ** 2 * area, 0.0, 0.0])

    force = rft.plate_force(plate, state, sand)

    np.testing.assert_array_equal(force.f_static_1, np.zeros(3))
    np.testing.assert_allclose(force.f_static_23, static, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(force.f_inertial, inertial, rtol=1e-12, atol=1e-15)
    assert force.effective_depth == pytest.approx(z_eff, rel=1e-12)


def test_correction_increases_drag_on_vertical_plate(sand):
    plate = geometry.Plate(np.zeros(3), np.array([1.0, 0.0, 0.0]), 1.4e-3)
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, -0.01], ankle_velocity=[0.05, 0.0, 0.0])

    corrected = rft.plate_force(plate, state, sand, rft.RFTOptions(correction=True, inertial=False))
    plain = rft.plate_force(plate, state, sand, STATIC)

    assert np.linalg.norm(corrected.total) > np.linalg.norm(plain.total)


def test_plate_velocity_is_rigid_body_motion():
    rotation = Rotation.from_euler("xyz", [0.2, -0.4, 0.9])
    state = rft.IntrusionState(
        ankle_position=[0.0, 0.0, 0.0],
        orientation=rotation,
        ankle_velocity=[0.1, -0.2, 0.05],
        angular_velocity=[0.3, 1.2, -0.7],
    )
    plate = geometry.Plate(np.array([0.04, -0.01, -0.05]), np.array([0.0, 0.0, -1.0]), 1e-4)

    arm = rotation.as_matrix() @ plate.centroid
    expected = np.array([0.1, -0.2, 0.05]) + np.cross([0.3, 1.2, -0.7], arm)

    np.testing.assert_allclose(rft.plate_velocity(state, plate), expected, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_total_force_equals_plate_by_plate_sum(sand, elliptical_foot, seed):
    state = _random_state(np.random.default_rng(seed))

    result = rft.total_force(elliptical_foot, state, sand)
    expected = np.zeros(3)
    for plate in elliptical_foot.plates:
        expected = expected + rft.plate_force(plate, state, sand).total

    np.testing.assert_allclose(result.F_total, expected, rtol=1e-12, atol=1e-9)


def test_per_plate_view_matches_plate_force(sand, elliptical_foot):
    state = _random_state(np.random.default_rng(42))

    result = rft.total_force(elliptical_foot, state, sand)

    for plate, contribution in zip(elliptical_foot.plates, result.per_plate):
        single = rft.plate_force(plate, state, sand)
        np.testing.assert_allclose(contribution.total, single.total, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(
            contribution.total,
            contribution.f_static_1 + contribution.f_static_23 + contribution.f_inertial,
        )


def test_static_forces_are_linear_in_zeta(sand, elliptical_foot):
    state = _random_state(np.random.default_rng(8))
    doubled = sand.with_values(zeta=2.0 * sand.zeta)

    base = rft.total_force(elliptical_foot, state, sand, rft.RFTOptions(inertial=False))
    scaled = rft.total_force(elliptical_foot, state, doubled, rft.RFTOptions(inertial=False))

    np.testing.assert_allclose(scaled.F_total, 2.0 * base.F_total, rtol=1e-12)


def test_inertial_term_opposes_plate_velocity(sand, elliptical_foot):
    state = _random_state(np.random.default_rng(21))

    result = rft.total_force(elliptical_foot, state, sand)

    for plate, inertial in zip(elliptical_foot.plates, result.f_inertial):
        assert np.dot(inertial, rft.plate_velocity(state, plate)) <= 0.0


def test_force_is_equivariant_under_vertical_rotation(sand, elliptical_foot):
    state = _random_state(np.random.default_rng(4))
    turn = Rotation.from_euler("z", 0.8)
    turned = rft.IntrusionState(
        ankle_position=turn.apply(state.ankle_position),
        orientation=turn * state.orientation,
        ankle_velocity=turn.apply(state.ankle_velocity),
        angular_velocity=turn.apply(state.angular_velocity),
    )

    base = rft.total_force(elliptical_foot, state, sand)
    rotated = rft.total_force(elliptical_foot, turned, sand)

    assert base.cop_defined and rotated.cop_defined
    np.testing.assert_allclose(rotated.F_total, turn.apply(base.F_total), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(rotated.cop, turn.apply(base.cop), rtol=1e-9, atol=1e-9)


def test_free_surface_height_shifts_contact(sand, elliptical_foot):
    state = _random_state(np.random.default_rng(13))
    lifted = rft.IntrusionState(
        ankle_position=state.ankle_position + np.array([0.0, 0.0, 0.1]),
        orientation=state.orientation,
        ankle_velocity=state.ankle_velocity,
        angular_velocity=state.angular_velocity,
        free_surface_height=0.1,
    )

    base = rft.total_force(elliptical_foot, state, sand)
    shifted = rft.total_force(elliptical_foot, lifted, sand)

    np.testing.assert_allclose(shifted.F_total, base.F_total, rtol=1e-9, atol=1e-9)


def test_minimal_static_vertical_penetration(sand):
    result = rft.total_force(_flat_plate(), _vertical_state(0.02), sand, STATIC)

    _, f23 = medium_module.scaling_factors(math.pi / 2, sand)
    expected = f23 * sand.zeta * 1.25 * 0.02 * L * W

    assert result.F_total[2] == pytest.approx(expected, rel=1e-12)
    assert abs(result.F_total[0]) < 1e-9 * expected


@pytest.mark.parametrize("speed", [0.02, 0.08])
def test_vertical_penetration_is_linear_in_depth(sand, speed):
    depths = np.linspace(0.005, 0.05, 10)
    fz = np.array([rft.total_force(_flat_plate(), _vertical_state(d, speed), sand).F_total[2] for d in depths])

    slope, intercept = np.polyfit(depths, fz, 1)
    fitted = slope * depths + intercept
    r_squared = 1.0 - np.sum((fz - fitted) ** 2) / np.sum((fz - fz.mean()) ** 2)

    assert slope == pytest.approx(sand.zeta * 1.25 * L * W, rel=1e-2)
    assert r_squared > 0.999
    assert abs(intercept) < 1e-3 * fz.max()


def test_vertical_penetration_slope_is_speed_insensitive(sand):
    depths = np.linspace(0.005, 0.05, 10)
    slopes = []
    for speed in (0.02, 0.08):
        fz = [rft.total_force(_flat_plate(), _vertical_state(d, speed), sand).F_total[2] for d in depths]
        slopes.append(np.polyfit(depths, fz, 1)[0])

    assert abs(slopes[1] - slopes[0]) / slopes[0] < 0.05


@pytest.mark.parametrize("shape", ["flat", "circular", "elliptical"])
def test_force_converges_under_mesh_refinement(sand, shape):
    # ponto mais baixo da sola 3 cm abaixo da superfície
    state = rft.IntrusionState(ankle_position=[0.0, 0.0, 0.02], ankle_velocity=[0.0, 0.0, -0.05])
    coarse = geometry.builtin_foot(shape, L, W, SAGITTA, 20, 10)
    fine = geometry.builtin_foot(shape, L, W, SAGITTA, 40, 20)

    f_coarse = rft.total_force(coarse, state, sand).F_total
    f_fine = rft.total_force(fine, state, sand).F_total

    assert np.linalg.norm(f_fine - f_coarse) / np.linalg.norm(f_fine) < 0.01


def test_cop_of_uniform_flat_penetration(sand):
    mesh = geometry.builtin_foot("flat", L, W, None, 20, 10)
    state = rft.IntrusionState(ankle_position=[0.01, 0.02, 0.03], ankle_velocity=[0.0, 0.0, -0.02])

    result = rft.total_force(mesh, state, sand)

    assert result.cop_defined
    np.testing.assert_allclose(result.cop, [0.01, 0.02, -0.02], atol=1e-12)


def test_cop_from_plate_list_matches_result(sand, elliptical_foot):
    result = rft.total_force(elliptical_foot, _random_state(np.random.default_rng(2)), sand)

    np.testing.assert_allclose(rft.cop(result.per_plate), result.cop, rtol=1e-12)
    np.testing.assert_allclose(rft.cop(result), result.cop, rtol=1e-12)


def test_cop_of_empty_plate_list_is_undefined():
    assert np.all(np.isnan(rft.cop([])))


def test_plate_distribution_reports_loaded_plates(sand):
    mesh = geometry.builtin_foot("flat", L, W, None, 4, 2)

    result = rft.total_force(mesh, _vertical_state(0.01), sand)
    table = rft.plate_distribution(result)

    assert len(table["x"]) == 8
    np.testing.assert_allclose(table["pressure"] * result.areas, np.linalg.norm(result.plate_totals, axis=1))
    assert np.sum(table["Fz"]) == pytest.approx(result.F_total[2])


def test_intrusion_state_accepts_rotation_matrix():
    matrix = Rotation.from_euler("y", 0.3).as_matrix()

    state = rft.IntrusionState(ankle_position=[0.0, 0.0, 0.0], orientation=matrix)

    np.testing.assert_allclose(state.rotation_matrix, matrix, atol=1e-12)


def test_intrusion_state_rejects_improper_rotation():
    with pytest.raises(DomainError):
        rft.IntrusionState(ankle_position=[0.0, 0.0, 0.0], orientation=np.diag([1.0, 1.0, -1.0]))

    with pytest.raises(DomainError):
        rft.IntrusionState(ankle_position=[0.0, 0.0])
