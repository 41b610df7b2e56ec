"""
Teoria de força resistiva (RFT) dinâmica para intrusão em meio granular.

Força elementar de cada placa:
    dF = f1·α_y·z0·(-sign(v·e1))·e1·dS                (deslizamento em e1)
       + f23·(-α_x·h + α_z·e3)·z̃·dS                   (plano e2e3)
       - λ_v·ρ·(v·n)²·v̂·dS                            (inércia)

com h = ±e2 no sentido de avanço da intrusão no plano e z̃ a profundidade
efetiva (correção pelo cone de material acumulado à frente da placa).

Somente placas abaixo da superfície livre e com a face voltada para o
movimento (v·n > 0) contribuem.

Exemplo de uso:
    ```python
    from rft import IntrusionState, total_force

    state = IntrusionState(ankle_position=p, orientation=R, ankle_velocity=v)
    result = total_force(mesh, state, medium)
    print(result.F_total, result.cop)
    ```
"""

import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.spatial.transform import Rotation

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import DomainError
from geometry import FootMesh, Plate, angles_batch, local_frames
from medium import MediumParams, alpha_scaled, scaling_factors

COP_MIN_VERTICAL = 1e-12
COP_HORIZONTAL_RATIO = 1e-9


@dataclass(frozen=True)
class RFTOptions:
    """
    Termos opcionais do modelo.

    correction=False e inertial=False reproduzem a RFT 3D estática clássica.
    """

    correction: bool = True
    inertial: bool = True


DEFAULT_OPTIONS = RFTOptions()


@dataclass(frozen=True, eq=False)
class IntrusionState:
    """
    Pose e velocidade do pé (mundo) em um instante.

    orientation aceita scipy Rotation ou matriz 3×3 própria (det = +1).
    """

    ankle_position: np.ndarray
    orientation: Rotation = field(default_factory=Rotation.identity)
    ankle_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    free_surface_height: float = 0.0

    def __post_init__(self):
        for name in ("ankle_position", "ankle_velocity", "angular_velocity"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (3,) or not np.all(np.isfinite(value)):
                raise DomainError(f"{name} deve ser um vetor 3D finito: {value}")
            object.__setattr__(self, name, value)

        orientation = self.orientation
        if not isinstance(orientation, Rotation):
            matrix = np.asarray(orientation, dtype=float)
            if matrix.shape != (3, 3):
                raise DomainError(f"orientation deve ser 3×3, recebeu {matrix.shape}")
            if abs(np.linalg.det(matrix) - 1.0) > 1e-12 or not np.allclose(
                matrix @ matrix.T, np.eye(3), atol=1e-12
            ):
                raise DomainError("orientation não é uma rotação própria")
            orientation = Rotation.from_matrix(matrix)
        object.__setattr__(self, "orientation", orientation)

    @property
    def rotation_matrix(self) -> np.ndarray:
        return self.orientation.as_matrix()


class PlateForce(NamedTuple):
    """Contribuição de uma placa (N, mundo); total = soma dos três termos."""

    f_static_1: np.ndarray
    f_static_23: np.ndarray
    f_inertial: np.ndarray
    total: np.ndarray
    application_point: np.ndarray
    depth: float
    effective_depth: float


@dataclass(frozen=True, eq=False)
class ForceResult:
    """
    Resultado da integração sobre a malha.

    Arrays por placa (N, 3) ou (N,) na ordem da malha; cop contém NaN quando
    não há sustentação vertical (cop_defined=False).
    """

    F_total: np.ndarray
    cop: np.ndarray
    cop_defined: bool
    points: np.ndarray
    f_static_1: np.ndarray
    f_static_23: np.ndarray
    f_inertial: np.ndarray
    depth: np.ndarray
    effective_depth: np.ndarray
    areas: np.ndarray

    @property
    def plate_totals(self) -> np.ndarray:
        return self.f_static_1 + self.f_static_23 + self.f_inertial

    @property
    def loaded(self) -> np.ndarray:
        return np.any(self.plate_totals != 0.0, axis=1)

    @property
    def per_plate(self) -> tuple:
        totals = self.plate_totals
        return tuple(
            PlateForce(
                self.f_static_1[i],
                self.f_static_23[i],
                self.f_inertial[i],
                totals[i],
                self.points[i],
                float(self.depth[i]),
                float(self.effective_depth[i]),
            )
            for i in range(len(self.areas))
        )


# ========== Cinemática da placa ==========


def plate_velocity(state: IntrusionState, plate: Plate) -> np.ndarray:
    """v_i = v_tornozelo + ω × (R·c_i)."""
    arm = state.orientation.apply(np.asarray(plate.centroid, dtype=float))
    return state.ankle_velocity + np.cross(state.angular_velocity, arm)


def _world_geometry(centroids: np.ndarray, normals: np.ndarray, state: IntrusionState):
    arms = state.orientation.apply(centroids)
    points = state.ankle_position + arms
    world_normals = state.orientation.apply(normals)
    velocities = state.ankle_velocity + np.cross(state.angular_velocity, arms)
    return np.atleast_2d(points), np.atleast_2d(world_normals), np.atleast_2d(velocities)


# ========== Profundidade efetiva ==========


def cone_factor(beta, phi_s: float):
    """g(β, φ_s) = (1/tanβ + 1/tanφ_s)⁻¹ para β > 0; 0 caso contrário."""
    beta = np.asarray(beta, dtype=float)
    positive = beta > 0.0
    sin_b = np.sin(np.where(positive, beta, 1.0))
    cos_b = np.cos(np.where(positive, beta, 1.0))
    g = sin_b / (cos_b + sin_b / math.tan(phi_s))
    return np.where(positive, g, 0.0)


def _effective_depth(z0, speed, beta, medium: MediumParams):
    return z0 + medium.lambda_h * np.sqrt(speed * z0 * cone_factor(beta, medium.phi_s))


def effective_depth(z0: float, speed: float, beta: float, medium: MediumParams) -> float:
    """
    Profundidade efetiva z̃ = z0 + λ_h·sqrt(|v|·z0·g(β, φ_s)).

    Args:
        z0: Profundidade abaixo da superfície livre (m, >= 0)
        speed: Velocidade da placa |v| (m/s, >= 0)
        beta: Ângulo de orientação da placa (rad)
        medium: Parâmetros do meio

    Raises:
        DomainError: z0 ou speed negativos
    """
    if z0 < 0:
        raise DomainError(f"Profundidade negativa: z0={z0}")
    if speed < 0:
        raise DomainError(f"Velocidade negativa: {speed}")
    return float(_effective_depth(z0, speed, beta, medium))


# ========== Força por placa ==========


def _evaluate(
    points: np.ndarray,
    normals: np.ndarray,
    velocities: np.ndarray,
    areas: np.ndarray,
    surface: float,
    medium: MediumParams,
    options: RFTOptions,
) -> Dict[str, np.ndarray]:
    n_plates = len(areas)
    depth = points[:, 2] - surface
    z0 = np.where(depth < 0.0, -depth, 0.0)
    normal_speed = np.einsum("ij,ij->i", velocities, normals)
    loaded = (depth < 0.0) & (normal_speed > 0.0)

    out = {
        "f_static_1": np.zeros((n_plates, 3)),
        "f_static_23": np.zeros((n_plates, 3)),
        "f_inertial": np.zeros((n_plates, 3)),
        "depth": depth,
        "effective_depth": z0.copy(),
    }
    if not np.any(loaded):
        return out

    n = normals[loaded]
    v = velocities[loaded]
    dS = areas[loaded]
    z = z0[loaded]
    speed = np.linalg.norm(v, axis=1)

    frame = local_frames(n, v)
    beta, gamma, psi, sliding, heading = angles_batch(n, v, frame)
    f1, f23 = scaling_factors(psi, medium)
    f23 = np.where(sliding, 0.0, f23)
    alpha_x, alpha_z, alpha_y = alpha_scaled(beta, gamma, medium)

    z_eff = _effective_depth(z, speed, beta, medium) if options.correction else z
    out["effective_depth"][loaded] = z_eff

    slide_sign = -np.sign(np.einsum("ij,ij->i", v, frame.e1))
    out["f_static_1"][loaded] = (f1 * alpha_y * z * slide_sign * dS)[:, None] * frame.e1

    in_plane = -alpha_x[:, None] * (heading[:, None] * frame.e2) + alpha_z[:, None] * frame.e3
    out["f_static_23"][loaded] = (f23 * z_eff * dS)[:, None] * in_plane

    if options.inertial:
        v_hat = v / speed[:, None]
        magnitude = medium.lambda_v * medium.rho * normal_speed[loaded] ** 2 * dS
        out["f_inertial"][loaded] = -magnitude[:, None] * v_hat

    return out


def plate_force(
    plate: Plate,
    state: IntrusionState,
    medium: MediumParams,
    options: RFTOptions = DEFAULT_OPTIONS,
) -> PlateForce:
    """
    Força de uma placa.

    Zero se a placa está na superfície ou acima dela, ou se a face não está
    voltada para o movimento (v·n <= 0).
    """
    centroid = np.asarray(plate.centroid, dtype=float)[None, :]
    normal = np.asarray(plate.normal, dtype=float)[None, :]
    points, normals, velocities = _world_geometry(centroid, normal, state)
    terms = _evaluate(
        points, normals, velocities, np.array([float(plate.area)]),
        state.free_surface_height, medium, options,
    )
    f_s1 = terms["f_static_1"][0]
    f_s23 = terms["f_static_23"][0]
    f_in = terms["f_inertial"][0]
    return PlateForce(
        f_s1, f_s23, f_in, f_s1 + f_s23 + f_in, points[0],
        float(terms["depth"][0]), float(terms["effective_depth"][0]),
    )


def total_force(
    mesh: FootMesh,
    state: IntrusionState,
    medium: MediumParams,
    options: RFTOptions = DEFAULT_OPTIONS,
) -> ForceResult:
    """
    Integra a força de todas as placas da malha e calcula o COP.

    Returns:
        ForceResult com força total (N), COP e contribuições por placa
    """
    points, normals, velocities = _world_geometry(mesh.centroids, mesh.normals, state)
    terms = _evaluate(
        points, normals, velocities, mesh.areas,
        state.free_surface_height, medium, options,
    )
    totals = terms["f_static_1"] + terms["f_static_23"] + terms["f_inertial"]
    center, defined = _cop(points, totals)
    return ForceResult(
        F_total=np.sum(totals, axis=0),
        cop=center,
        cop_defined=defined,
        points=points,
        areas=mesh.areas,
        **terms,
    )


# ========== Centro de pressão ==========


def _cop(points: np.ndarray, forces: np.ndarray):
    undefined = np.full(3, np.nan)
    if len(forces) == 0:
        return undefined, False
    sum_fz = float(np.sum(forces[:, 2]))
    if abs(sum_fz) < COP_MIN_VERTICAL:
        return undefined, False

    center = np.empty(3)
    center[0] = np.sum(points[:, 0] * forces[:, 2]) / sum_fz
    center[1] = np.sum(points[:, 1] * forces[:, 2]) / sum_fz

    # altura ponderada pela componente horizontal na direção da força horizontal resultante
    horizontal = np.sum(forces[:, :2], axis=0)
    norm_h = float(np.linalg.norm(horizontal))
    if norm_h > COP_HORIZONTAL_RATIO * abs(sum_fz):
        weights = forces[:, :2] @ (horizontal / norm_h)
        center[2] = np.sum(points[:, 2] * weights) / np.sum(weights)
    else:
        center[2] = np.sum(points[:, 2] * forces[:, 2]) / sum_fz
    return center, True


def cop(per_plate: Union[ForceResult, Sequence[PlateForce]]) -> np.ndarray:
    """
    Centro de pressão (mundo).

    x e y ponderados pela força vertical de cada placa; z ponderado pela
    componente horizontal (plano sagital) das forças, ou pela vertical quando
    a resultante horizontal é desprezível.

    Returns:
        Ponto 3D; NaN em todas as coordenadas quando Σ dF_z = 0
    """
    if isinstance(per_plate, ForceResult):
        return _cop(per_plate.points, per_plate.plate_totals)[0]
    if len(per_plate) == 0:
        return np.full(3, np.nan)
    points = np.array([p.application_point for p in per_plate], dtype=float)
    forces = np.array([p.total for p in per_plate], dtype=float)
    return _cop(points, forces)[0]


def plate_distribution(result: ForceResult) -> Dict[str, np.ndarray]:
    """
    Distribuição de força no contorno do pé (placas carregadas).

    Returns:
        Colunas x, y, z (m), pressure (Pa), Fx, Fy, Fz (N)
    """
    totals = result.plate_totals
    mask = result.loaded
    pressure = np.linalg.norm(totals[mask], axis=1) / result.areas[mask]
    return {
        "x": result.points[mask, 0],
        "y": result.points[mask, 1],
        "z": result.points[mask, 2],
        "pressure": pressure,
        "Fx": totals[mask, 0],
        "Fy": totals[mask, 1],
        "Fz": totals[mask, 2],
    }
