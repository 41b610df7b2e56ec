"""
Marcha: séries de ângulos articulares, reescala temporal e cinemática do
modelo de dois elos com quadril fixo.

Convenções (plano sagital x-z):
    - theta1: ângulo do quadril em relação à vertical (positivo à frente)
    - theta2: flexão do joelho; ângulo absoluto da canela
      phi = theta1 - knee_sign·theta2
    - o pé é rigidamente preso à canela (foot_pitch fixo)
"""

import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import DomainError, NoContactError, TrajectoryError
from rft import IntrusionState
from utils.logger import setup_logger
from utils.tables import read_columns

logger = setup_logger(__name__)

# Marcha humana nominal usada como referência de velocidade equivalente
NOMINAL_SPEED = 1.2
NOMINAL_PERIOD = 1.1
HUMAN_LEG_LENGTH = 0.90


@dataclass(frozen=True, eq=False)
class JointTrajectory:
    """Série temporal (t em s, ângulos em rad) de um ciclo de marcha."""

    t: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float).reshape(-1) for a in (self.t, self.theta1, self.theta2)]
        if not (len(arrays[0]) == len(arrays[1]) == len(arrays[2])):
            raise TrajectoryError("t, theta1 e theta2 com tamanhos diferentes")
        if len(arrays[0]) < 2:
            raise TrajectoryError(f"Trajetória exige ao menos 2 amostras, recebeu {len(arrays[0])}")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise TrajectoryError("Trajetória com valores não finitos")
        steps = np.diff(arrays[0])
        if np.any(steps <= 0):
            first = int(np.argmax(steps <= 0)) + 2
            raise TrajectoryError(f"Tempo não estritamente crescente a partir da amostra {first}")
        for name, value in zip(("t", "theta1", "theta2"), arrays):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def period(self) -> float:
        return float(self.t[-1] - self.t[0])

    def rates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Velocidades angulares (rad/s) por diferenças finitas de 2ª ordem."""
        return _derivative(self.theta1, self.t), _derivative(self.theta2, self.t)


@dataclass(frozen=True)
class LegModel:
    """Perna de dois elos com quadril fixo no mundo."""

    l1: float = 0.23
    l2: float = 0.23
    hip_position: Tuple[float, float, float] = (0.0, 0.0, 0.505)
    knee_sign: int = 1
    foot_pitch: float = 0.0

    def __post_init__(self):
        if not (self.l1 > 0 and self.l2 > 0):
            raise DomainError(f"Comprimentos dos elos devem ser positivos: l1={self.l1}, l2={self.l2}")
        if self.knee_sign not in (1, -1):
            raise DomainError(f"knee_sign deve ser 1 ou -1: {self.knee_sign}")
        object.__setattr__(self, "hip_position", tuple(float(v) for v in self.hip_position))

    @property
    def hip(self) -> np.ndarray:
        return np.asarray(self.hip_position, dtype=float)

    def shank_angle(self, theta1, theta2):
        return np.asarray(theta1) - self.knee_sign * np.asarray(theta2)


@dataclass(frozen=True, eq=False)
class FootTrajectory:
    """
    Série de estados do pé (mundo), um por amostra da marcha.

    Mantém também os ângulos e velocidades articulares usados pela cinética.
    """

    t: np.ndarray
    ankle_position: np.ndarray
    orientation: Rotation
    ankle_velocity: np.ndarray
    angular_velocity: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    dtheta1: np.ndarray
    dtheta2: np.ndarray
    free_surface_height: float = 0.0

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> IntrusionState:
        return IntrusionState(
            ankle_position=self.ankle_position[i],
            orientation=self.orientation[i],
            ankle_velocity=self.ankle_velocity[i],
            angular_velocity=self.angular_velocity[i],
            free_surface_height=self.free_surface_height,
        )

    def __iter__(self) -> Iterator[IntrusionState]:
        return (self.state(i) for i in range(len(self)))


class AveragedGait(NamedTuple):
    """Média de vários ensaios e desvio padrão por articulação (rad)."""

    mean: JointTrajectory
    std_theta1: np.ndarray
    std_theta2: np.ndarray


def _derivative(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    edge = 2 if len(t) >= 3 else 1
    return np.gradient(values, t, axis=0, edge_order=edge)


# ========== Ingestão e reamostragem ==========


def load_trajectory(path: str | Path) -> JointTrajectory:
    """
    Carrega uma marcha de arquivo CSV (t, theta1_deg, theta2_deg).

    Args:
        path: Arquivo CSV com cabeçalho; linhas '#' são comentários

    Returns:
        JointTrajectory em radianos

    Raises:
        FileNotFoundError: Arquivo inexistente
        TableError: Linha malformada
        TrajectoryError: Tempo não crescente ou menos de 2 amostras
    """
    columns = read_columns(path, ["t", "theta1_deg", "theta2_deg"], min_rows=0)
    t = columns["t"]
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 2
        logger.error(f"❌ {Path(path).name}: tempo não crescente na linha de dados {row}")
        raise TrajectoryError(
            f"{Path(path).name}: tempo não estritamente crescente na linha de dados {row} "
            f"(t={t[row - 1]:g} após t={t[row - 2]:g})"
        )

    traj = JointTrajectory(t, np.radians(columns["theta1_deg"]), np.radians(columns["theta2_deg"]))
    logger.info(f"✅ Marcha carregada: {len(traj)} amostras, T_g = {traj.period:.4g} s")
    return traj


def resample(traj: JointTrajectory, n: int) -> JointTrajectory:
    """Interpolação linear em grade uniforme de n amostras sobre o mesmo intervalo."""
    if n < 2:
        raise TrajectoryError(f"Reamostragem exige n >= 2, recebeu {n}")
    t = np.linspace(traj.t[0], traj.t[-1], n)
    return JointTrajectory(t, np.interp(t, traj.t, traj.theta1), np.interp(t, traj.t, traj.theta2))


def time_scale(traj: JointTrajectory, period: float) -> JointTrajectory:
    """
    Dilatação temporal uniforme para o período period (s).

    Ângulos inalterados; velocidades angulares escalam por T_antigo/T_novo.
    """
    if not period > 0:
        raise TrajectoryError(f"Período deve ser positivo: {period}")
    factor = period / traj.period
    return JointTrajectory(traj.t * factor, traj.theta1, traj.theta2)


def average_trajectories(trajs: Sequence[JointTrajectory], n: int = 500) -> AveragedGait:
    """
    Média de vários ensaios normalizados pela fase da marcha.

    Cada ensaio é levado a [0, 1], reamostrado em n pontos e a média por
    articulação é devolvida no período médio dos ensaios.
    """
    if not trajs:
        raise TrajectoryError("Nenhuma trajetória para calcular a média")
    phase = np.linspace(0.0, 1.0, n)
    theta1 = []
    theta2 = []
    for traj in trajs:
        u = (traj.t - traj.t[0]) / traj.period
        theta1.append(np.interp(phase, u, traj.theta1))
        theta2.append(np.interp(phase, u, traj.theta2))
    theta1 = np.vstack(theta1)
    theta2 = np.vstack(theta2)
    period = float(np.mean([traj.period for traj in trajs]))
    mean = JointTrajectory(phase * period, theta1.mean(axis=0), theta2.mean(axis=0))
    logger.debug(f"Média de {len(trajs)} ensaios, T_g médio = {period:.4g} s")
    return AveragedGait(mean, theta1.std(axis=0), theta2.std(axis=0))


def equivalent_forward_velocity(
    period: float,
    leg_length: float = 0.46,
    nominal_speed: float = NOMINAL_SPEED,
    nominal_period: float = NOMINAL_PERIOD,
    human_leg_length: float = HUMAN_LEG_LENGTH,
) -> float:
    """Velocidade de avanço equivalente (m/s) de uma marcha reescalada para period."""
    if not period > 0:
        raise TrajectoryError(f"Período deve ser positivo: {period}")
    return nominal_speed * (nominal_period / period) * (leg_length / human_leg_length)


# ========== Cinemática ==========


def forward_kinematics(leg: LegModel, theta1, theta2) -> Tuple[np.ndarray, Rotation]:
    """
    Posição do tornozelo e orientação do pé.

    knee  = hip + l1·(sin θ1, 0, -cos θ1)
    ankle = knee + l2·(sin φ, 0, -cos φ),  φ = θ1 - knee_sign·θ2

    Aceita escalares ou arrays; com arrays devolve (N, 3) e Rotation de N.
    """
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    phi = leg.shank_angle(theta1, theta2)
    offset = np.stack(
        [
            leg.l1 * np.sin(theta1) + leg.l2 * np.sin(phi),
            np.zeros_like(phi),
            -leg.l1 * np.cos(theta1) - leg.l2 * np.cos(phi),
        ],
        axis=-1,
    )
    orientation = Rotation.from_euler("y", -(phi + leg.foot_pitch))
    return leg.hip + offset, orientation


def foot_trajectory(leg: LegModel, traj: JointTrajectory, free_surface_height: float = 0.0) -> FootTrajectory:
    """
    Estados do pé ao longo da marcha.

    Velocidades por diferenças finitas centrais (de 2ª ordem nas bordas);
    velocidade angular em torno do eixo lateral igual a -dφ/dt.
    """
    ankle, orientation = forward_kinematics(leg, traj.theta1, traj.theta2)
    ankle_velocity = _derivative(ankle, traj.t)
    phi_rate = _derivative(leg.shank_angle(traj.theta1, traj.theta2), traj.t)
    angular_velocity = np.zeros_like(ankle)
    angular_velocity[:, 1] = -phi_rate
    dtheta1, dtheta2 = traj.rates()
    return FootTrajectory(
        t=traj.t,
        ankle_position=ankle,
        orientation=orientation,
        ankle_velocity=ankle_velocity,
        angular_velocity=angular_velocity,
        theta1=traj.theta1,
        theta2=traj.theta2,
        dtheta1=dtheta1,
        dtheta2=dtheta2,
        free_surface_height=free_surface_height,
    )


# ========== Fase de intrusão ==========


def intrusion_phase(t: Sequence[float], fz: Sequence[float], threshold: float = 1e-6) -> Tuple[float, float]:
    """
    Intervalo de intrusão: do primeiro F_z > threshold até a amostra seguinte
    em que F_z volta a ser <= threshold (ou a última amostra).

    Raises:
        NoContactError: F_z nunca ultrapassa threshold
    """
    t = np.asarray(t, dtype=float)
    fz = np.asarray(fz, dtype=float)
    if len(t) == 0 or len(t) != len(fz):
        raise TrajectoryError("Traço de força vazio ou com tamanhos diferentes")
    above = fz > threshold
    if not np.any(above):
        raise NoContactError(f"Nenhuma força vertical acima de {threshold:g} N: sem fase de intrusão")
    start = int(np.argmax(above))
    released = np.flatnonzero(~above[start:])
    end = start + int(released[0]) if len(released) else len(t) - 1
    return float(t[start]), float(t[end])


def phase_coordinate(t, t_start: float, t_end: float) -> np.ndarray:
    """(t - t_start)/(t_end - t_start) no intervalo de intrusão; NaN fora dele."""
    t = np.asarray(t, dtype=float)
    span = t_end - t_start
    inside = (t >= t_start) & (t <= t_end)
    if span <= 0:
        return np.where(inside, 0.0, np.nan)
    return np.where(inside, (t - t_start) / span, np.nan)
