"""
Cinética quase-estática: carga no tornozelo, torques articulares,
potência e trabalho dos atuadores do quadril e do joelho.

O pé é tratado como sem massa: a força do terreno é equilibrada pela
carga do tornozelo (F_a + F_RFT = 0) e mapeada para as juntas por Jᵀ.
"""

import os
import sys
from dataclasses import dataclass, replace
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import CalibrationError, DomainError, NoContactError
from gait import (
    FootTrajectory,
    JointTrajectory,
    LegModel,
    foot_trajectory,
    intrusion_phase,
    phase_coordinate,
)
from geometry import FootMesh
from medium import MediumParams
from rft import DEFAULT_OPTIONS, ForceResult, RFTOptions, total_force
from utils.logger import setup_logger

logger = setup_logger(__name__)


class AnkleLoad(NamedTuple):
    """Força (N) e momento (N·m) no tornozelo, mundo."""

    F_a: np.ndarray
    tau_a: np.ndarray


def ankle_load(result: ForceResult, ankle_position, ankle_moment: bool = True) -> AnkleLoad:
    """
    Carga no tornozelo a partir da reação do terreno.

    F_a = -F_RFT; τ_a = (r_COP - r_tornozelo) × F_RFT. Sem COP definido,
    τ_a é a soma dos momentos por placa. ankle_moment=False zera τ_a.
    """
    ankle = np.asarray(ankle_position, dtype=float)
    F_a = -np.asarray(result.F_total, dtype=float)
    if not ankle_moment:
        return AnkleLoad(F_a, np.zeros(3))
    if result.cop_defined:
        tau_a = np.cross(result.cop - ankle, result.F_total)
    else:
        tau_a = np.sum(np.cross(result.points - ankle, result.plate_totals), axis=0)
    return AnkleLoad(F_a, tau_a)


def leg_jacobian(leg: LegModel, theta1, theta2) -> np.ndarray:
    """
    Jacobiano posicional do tornozelo (linhas x, z) em relação a (θ1, θ2).

    Returns:
        Array (..., 2, 2)
    """
    theta1 = np.asarray(theta1, dtype=float)
    phi = leg.shank_angle(theta1, theta2)
    s = leg.knee_sign
    return np.stack(
        [
            np.stack([leg.l1 * np.cos(theta1) + leg.l2 * np.cos(phi), -s * leg.l2 * np.cos(phi)], axis=-1),
            np.stack([leg.l1 * np.sin(theta1) + leg.l2 * np.sin(phi), -s * leg.l2 * np.sin(phi)], axis=-1),
        ],
        axis=-2,
    )


def joint_torques(leg: LegModel, theta1, theta2, load: AnkleLoad) -> Tuple[np.ndarray, np.ndarray]:
    """
    Torques de quadril e joelho por trabalho virtual no plano sagital.

    τ = Jᵀ·(F_a,x, F_a,z) + [1, -knee_sign]·τ_a,y

    Aceita escalares ou arrays (F_a e τ_a com shape (N, 3)).
    """
    J = leg_jacobian(leg, theta1, theta2)
    F_a = np.asarray(load.F_a, dtype=float)
    tau_y = np.asarray(load.tau_a, dtype=float)[..., 1]
    planar = np.stack([F_a[..., 0], F_a[..., 2]], axis=-1)
    tau = np.einsum("...ij,...i->...j", J, planar)
    tau1 = tau[..., 0] + tau_y
    tau2 = tau[..., 1] - leg.knee_sign * tau_y
    if np.ndim(tau1) == 0:
        return float(tau1), float(tau2)
    return tau1, tau2


def power(tau1, tau2, dtheta1, dtheta2):
    """P = τ1·θ̇1 + τ2·θ̇2 (W)."""
    return np.asarray(tau1) * np.asarray(dtheta1) + np.asarray(tau2) * np.asarray(dtheta2)


def work(t, P) -> Tuple[float, np.ndarray]:
    """
    Trabalho por integração trapezoidal.

    Returns:
        Tupla (W_total em J, série cumulativa W_cum com W_cum[0] = 0)

    Raises:
        DomainError: Menos de 2 amostras ou tempo não crescente
    """
    t = np.asarray(t, dtype=float)
    P = np.asarray(P, dtype=float)
    if len(t) < 2 or len(t) != len(P):
        raise DomainError(f"Integração exige ao menos 2 amostras alinhadas (t={len(t)}, P={len(P)})")
    if np.any(np.diff(t) <= 0):
        raise DomainError("Tempo não estritamente crescente na série de potência")
    cumulative = cumulative_trapezoid(P, t, initial=0.0)
    return float(cumulative[-1]), cumulative


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """
    Séries por amostra de uma simulação de marcha e totais de energia.

    P1/P2 e W1_cum/W2_cum são quadril e joelho; P e W_cum, o total.
    W_abs1/W_abs2 são ∫|P_j|dt.
    """

    t: np.ndarray
    phase: np.ndarray
    force: np.ndarray
    cop: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    W1_cum: np.ndarray
    W2_cum: np.ndarray
    W_abs1: float
    W_abs2: float
    shape_tag: str
    period: float
    intrusion: Optional[Tuple[float, float]] = None
    peak_result: Optional[ForceResult] = None
    free_surface_height: float = 0.0

    @property
    def P(self) -> np.ndarray:
        return self.P1 + self.P2

    @property
    def W_cum(self) -> np.ndarray:
        return self.W1_cum + self.W2_cum

    @property
    def hip_work(self) -> float:
        return float(self.W1_cum[-1])

    @property
    def knee_work(self) -> float:
        return float(self.W2_cum[-1])

    @property
    def total_work(self) -> float:
        return float(self.W_cum[-1])

    @property
    def peak_drag(self) -> float:
        return float(np.max(np.abs(self.force[:, 0])))

    @property
    def peak_lift(self) -> float:
        return float(np.max(self.force[:, 2]))

    @property
    def peak_lateral(self) -> float:
        return float(np.max(np.abs(self.force[:, 1])))

    def trace_columns(self) -> Dict[str, np.ndarray]:
        """Colunas do traço por amostra (ordem de utils.tables.TRACE_COLUMNS)."""
        return {
            "t": self.t,
            "phase": self.phase,
            "Fx": self.force[:, 0],
            "Fy": self.force[:, 1],
            "Fz": self.force[:, 2],
            "COPx": self.cop[:, 0],
            "COPy": self.cop[:, 1],
            "COPz": self.cop[:, 2],
            "tau1": self.tau1,
            "tau2": self.tau2,
            "P": self.P,
            "W_cum": self.W_cum,
        }

    def summary(self) -> Dict[str, object]:
        return {
            "shape": self.shape_tag,
            "period_s": self.period,
            "samples": int(len(self.t)),
            "intrusion_s": list(self.intrusion) if self.intrusion else None,
            "peak_drag_N": self.peak_drag,
            "peak_lift_N": self.peak_lift,
            "peak_lateral_N": self.peak_lateral,
            "hip_work_J": self.hip_work,
            "knee_work_J": self.knee_work,
            "total_work_J": self.total_work,
            "hip_abs_work_J": self.W_abs1,
            "knee_abs_work_J": self.W_abs2,
            "free_surface_height_m": self.free_surface_height,
        }


def energy_report(
    mesh: FootMesh,
    leg: LegModel,
    traj: JointTrajectory,
    medium: MediumParams,
    options: RFTOptions = DEFAULT_OPTIONS,
    ankle_moment: bool = True,
    contact_threshold: float = 1e-6,
    free_surface_height: float = 0.0,
) -> EnergyReport:
    """
    Pipeline completo de uma marcha.

    foot_trajectory → total_force por amostra → ankle_load → joint_torques
    → power → work. Pé sem contato produz relatório com séries nulas.

    Args:
        mesh: Malha do pé
        leg: Modelo da perna
        traj: Trajetória articular (já no período desejado)
        medium: Parâmetros do meio
        options: Termos de correção/inércia
        ankle_moment: Propagar τ_a aos torques
        contact_threshold: Limiar de F_z para a fase de intrusão (N)
        free_surface_height: Altura da superfície livre (m)
    """
    feet = foot_trajectory(leg, traj, free_surface_height)
    n = len(feet)
    force = np.zeros((n, 3))
    cop = np.full((n, 3), np.nan)
    F_a = np.zeros((n, 3))
    tau_a = np.zeros((n, 3))
    peak_result = None

    for i, state in enumerate(feet):
        result = total_force(mesh, state, medium, options)
        force[i] = result.F_total
        if result.cop_defined:
            cop[i] = result.cop
        load = ankle_load(result, state.ankle_position, ankle_moment)
        F_a[i] = load.F_a
        tau_a[i] = load.tau_a
        if peak_result is None or result.F_total[2] > peak_result.F_total[2]:
            peak_result = result

    tau1, tau2 = joint_torques(leg, feet.theta1, feet.theta2, AnkleLoad(F_a, tau_a))
    P1 = tau1 * feet.dtheta1
    P2 = tau2 * feet.dtheta2
    _, W1_cum = work(feet.t, P1)
    _, W2_cum = work(feet.t, P2)
    W_abs1, _ = work(feet.t, np.abs(P1))
    W_abs2, _ = work(feet.t, np.abs(P2))

    try:
        intrusion = intrusion_phase(feet.t, force[:, 2], contact_threshold)
        phase = phase_coordinate(feet.t, *intrusion)
    except NoContactError:
        intrusion = None
        phase = np.full(n, np.nan)
        peak_result = None
        logger.warning(f"⚠️  Pé '{mesh.shape_tag}' sem contato em T_g = {traj.period:.4g} s")

    report = EnergyReport(
        t=feet.t,
        phase=phase,
        force=force,
        cop=cop,
        tau1=tau1,
        tau2=tau2,
        P1=P1,
        P2=P2,
        W1_cum=W1_cum,
        W2_cum=W2_cum,
        W_abs1=W_abs1,
        W_abs2=W_abs2,
        shape_tag=mesh.shape_tag,
        period=traj.period,
        intrusion=intrusion,
        peak_result=peak_result,
        free_surface_height=free_surface_height,
    )
    logger.debug(
        f"Marcha '{mesh.shape_tag}' T_g={traj.period:.4g} s: "
        f"W_quadril={report.hip_work:.4g} J, W_joelho={report.knee_work:.4g} J"
    )
    return report


# ========== Calibração da superfície livre ==========


def peak_lift(
    mesh: FootMesh,
    feet: FootTrajectory,
    medium: MediumParams,
    options: RFTOptions = DEFAULT_OPTIONS,
) -> float:
    """Maior F_z (N) ao longo da trajetória do pé; 0 sem contato."""
    return max(0.0, max(float(total_force(mesh, state, medium, options).F_total[2]) for state in feet))


def calibrate_free_surface(
    mesh: FootMesh,
    leg: LegModel,
    traj: JointTrajectory,
    medium: MediumParams,
    target_peak_lift: float,
    options: RFTOptions = DEFAULT_OPTIONS,
    bounds: Tuple[float, float] = (-0.08, 0.08),
    tolerance: float = 1e-6,
) -> float:
    """
    Altura da superfície livre que leva o pico de sustentação da marcha
    ao valor alvo.

    Reproduz o preenchimento da caixa de areia do ensaio: a altura é
    escolhida para que o maior F_z da intrusão fique próximo de metade do
    peso do conjunto da perna. O pico cresce com a altura da superfície
    (placas mais profundas), então a raiz de pico(h) - alvo é buscada por
    Brent dentro de bounds.

    Args:
        mesh: Malha do pé
        leg: Modelo da perna
        traj: Trajetória articular (já no período desejado)
        medium: Parâmetros do meio
        target_peak_lift: Pico de F_z desejado (N)
        options: Termos de correção/inércia
        bounds: Intervalo de busca da altura (m)
        tolerance: Tolerância da altura (m)

    Returns:
        Altura da superfície livre (m, mundo)

    Raises:
        CalibrationError: Alvo não positivo ou fora do alcance de bounds
    """
    lower, upper = bounds
    if target_peak_lift <= 0:
        raise CalibrationError("free_surface_height", f"Pico alvo deve ser positivo: {target_peak_lift}")
    if lower >= upper:
        raise CalibrationError("free_surface_height", f"Intervalo de busca inválido: {bounds}")

    feet = foot_trajectory(leg, traj)

    def residual(height: float) -> float:
        return peak_lift(mesh, replace(feet, free_surface_height=height), medium, options) - target_peak_lift

    low, high = residual(lower), residual(upper)
    if low > 0 or high < 0:
        logger.error(
            f"❌ Pico alvo {target_peak_lift:.4g} N fora do alcance para '{mesh.shape_tag}' "
            f"(superfície em [{lower:g}, {upper:g}] m)"
        )
        raise CalibrationError(
            "free_surface_height",
            f"Pico alvo {target_peak_lift:.4g} N inalcançável com a superfície em [{lower:g}, {upper:g}] m",
        )

    height = float(brentq(residual, lower, upper, xtol=tolerance))
    logger.info(
        f"🏖️  Superfície livre de '{mesh.shape_tag}' em {height * 1000:.3g} mm "
        f"(pico alvo {target_peak_lift:.4g} N, T_g = {traj.period:.4g} s)"
    )
    return height
