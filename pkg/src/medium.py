"""
Parâmetros do meio granular e mapas de tensão locais.

Avalia os mapas genéricos alpha_x0/alpha_z0 (série de Fourier truncada em
(beta, gamma)), os mapas escalados pelo fator do material zeta e os fatores
de ponderação f1/f23 dependentes da orientação psi.

Unidades internas: SI (zeta e alphas em N/m³, rho em kg/m³, ângulos em rad).
O perfil de material em disco aceita sufixos explícitos (N/cm3, deg, ...).

Exemplo de uso:
    ```python
    from medium import load_medium, alpha_scaled

    sand = load_medium("data/sand.ini")
    ax, az, ay = alpha_scaled(0.0, np.pi / 2, sand)   # az = 2.575e6 N/m³
    ```
"""

import configparser
import math
import re
import sys
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import ConfigError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)

HALF_PI = 0.5 * math.pi
_ANGLE_TOL = 1e-12

# Ordem dos termos (m, n) da série: fase = 2·m·beta + n·gamma
FOURIER_M = np.array([-1, -1, 0, 0, 1, 1], dtype=float)
FOURIER_N = np.array([0, 1, 0, 1, 0, 1], dtype=float)


@dataclass(frozen=True)
class StressMapCoefficients:
    """
    Coeficientes da série de Fourier dos mapas genéricos (adimensionais).

    alpha_z0 = Σ z_cos·cos(2mβ + nγ) + z_sin·sin(2mβ + nγ)
    alpha_x0 = Σ x_cos·cos(2mβ + nγ) + x_sin·sin(2mβ + nγ)

    com (m, n) na ordem de FOURIER_M/FOURIER_N.
    """

    z_cos: np.ndarray
    z_sin: np.ndarray
    x_cos: np.ndarray
    x_sin: np.ndarray

    def __post_init__(self):
        for name in ("z_cos", "z_sin", "x_cos", "x_sin"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.shape != (6,):
                raise ConfigError(
                    f"stress_map.{name} deve ter 6 coeficientes, recebeu {values.size}"
                )
            if not np.all(np.isfinite(values)):
                raise ConfigError(f"stress_map.{name} contém valores não finitos")
            values.setflags(write=False)
            object.__setattr__(self, name, values)


# Conjunto genérico de materiais granulares (RFT clássica), renormalizado por
# 1.25 para que alpha_z0(0, π/2) = 1.25 e zeta = 0.8·alpha_z(0, π/2).
GENERIC_COEFFICIENTS = StressMapCoefficients(
    z_cos=np.array([0.0, 0.0, 0.2575, 0.0, 0.21125, 0.0]),
    z_sin=np.array([0.0, 0.06875, 0.0, 0.4475, 0.0, 0.265]),
    x_cos=np.array([0.0, 0.00875, 0.0, 0.31625, 0.0, -0.155]),
    x_sin=np.array([0.0, 0.0, 0.0, 0.0, 0.11, 0.0]),
)

SAND_SIGMOID_A = (1.15, 1.14, 1.82, -15.78, 1.62)
SAND_SIGMOID_B = (1.99, 1.70, 2.49, -5.17, 3.04)


@dataclass(frozen=True)
class MediumParams:
    """
    Constantes do meio granular.

    Attributes:
        zeta: Fator de escala das tensões (N/m³)
        lambda_v: Escala do termo inercial (adimensional)
        lambda_h: Escala da correção de profundidade efetiva (adimensional)
        rho: Densidade efetiva do meio (kg/m³)
        phi_s: Ângulo de base do cone de material empurrado (rad)
        sigmoid_a: Parâmetros a1..a5 de f1
        sigmoid_b: Parâmetros b1..b5 de f23
        coeffs: Coeficientes dos mapas genéricos
        alpha_y: Tensão tangencial fixa (N/m³); None usa zeta·alpha_x0(0, 0)
    """

    zeta: float = 2.06e6
    lambda_v: float = 1.1
    lambda_h: float = 1.93
    rho: float = 1500.0
    phi_s: float = math.radians(35.0)
    sigmoid_a: Tuple[float, ...] = SAND_SIGMOID_A
    sigmoid_b: Tuple[float, ...] = SAND_SIGMOID_B
    coeffs: StressMapCoefficients = field(default=GENERIC_COEFFICIENTS)
    alpha_y: Optional[float] = None

    def __post_init__(self):
        # zeta = 0 é aceito para estudos de escala (todas as tensões nulas)
        if not self.zeta >= 0:
            raise ConfigError(f"zeta deve ser positivo: {self.zeta}")
        if not self.rho > 0:
            raise ConfigError(f"rho deve ser positivo: {self.rho}")
        if self.lambda_v < 0 or self.lambda_h < 0:
            raise ConfigError(
                f"lambda_v e lambda_h devem ser >= 0: {self.lambda_v}, {self.lambda_h}"
            )
        if not 0.0 < self.phi_s < HALF_PI:
            raise ConfigError(f"phi_s deve estar em (0, π/2): {self.phi_s}")
        for name in ("sigmoid_a", "sigmoid_b"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 5:
                raise ConfigError(f"{name} deve ter 5 parâmetros, recebeu {len(values)}")
            object.__setattr__(self, name, values)

    def with_values(self, **changes) -> "MediumParams":
        """Cópia com campos substituídos (o objeto original é imutável)."""
        return replace(self, **changes)


def _check_angle(name: str, values: np.ndarray, low: float, high: float) -> None:
    if np.any(~np.isfinite(values)) or np.any(values < low - _ANGLE_TOL) or np.any(values > high + _ANGLE_TOL):
        bad = values[(values < low - _ANGLE_TOL) | (values > high + _ANGLE_TOL) | ~np.isfinite(values)]
        raise DomainError(
            f"{name} fora do domínio [{low:.6f}, {high:.6f}] rad: {bad.ravel()[:3]}"
        )


def _as_output(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def alpha_generic(beta, gamma, coeffs: StressMapCoefficients = GENERIC_COEFFICIENTS):
    """
    Avalia os mapas genéricos de tensão por unidade de profundidade.

    Args:
        beta: Ângulo de orientação da placa (rad, [-π/2, π/2]); escalar ou array
        gamma: Ângulo de intrusão (rad, [-π/2, π/2]); escalar ou array
        coeffs: Coeficientes da série

    Returns:
        Tupla (alpha_x0, alpha_z0), adimensionais, no formato da entrada

    Raises:
        DomainError: Ângulos fora da faixa
    """
    scalar = np.ndim(beta) == 0 and np.ndim(gamma) == 0
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    _check_angle("beta", beta, -HALF_PI, HALF_PI)
    _check_angle("gamma", gamma, -HALF_PI, HALF_PI)

    phase = 2.0 * FOURIER_M * beta[..., None] + FOURIER_N * gamma[..., None]
    cos_p = np.cos(phase)
    sin_p = np.sin(phase)
    alpha_x0 = cos_p @ coeffs.x_cos + sin_p @ coeffs.x_sin
    alpha_z0 = cos_p @ coeffs.z_cos + sin_p @ coeffs.z_sin
    return _as_output(alpha_x0, scalar), _as_output(alpha_z0, scalar)


def alpha_scaled(beta, gamma, medium: MediumParams):
    """
    Mapas de tensão do material: alpha_j = zeta·alpha_j0.

    alpha_y não depende de (beta, gamma): vale zeta·alpha_x0(0, 0), ou o valor
    configurado em medium.alpha_y.

    Returns:
        Tupla (alpha_x, alpha_z, alpha_y) em N/m³
    """
    alpha_x0, alpha_z0 = alpha_generic(beta, gamma, medium.coeffs)
    if medium.alpha_y is not None:
        alpha_y = medium.alpha_y
    else:
        alpha_y = medium.zeta * alpha_generic(0.0, 0.0, medium.coeffs)[0]
    alpha_x = medium.zeta * np.asarray(alpha_x0)
    alpha_z = medium.zeta * np.asarray(alpha_z0)
    if np.ndim(alpha_x) == 0:
        return float(alpha_x), float(alpha_z), float(alpha_y)
    return alpha_x, alpha_z, np.full_like(alpha_x, alpha_y)


def sigmoid(params, x):
    """p1 / (p2 + p3·exp(p4·x + p5)), sem truncamento."""
    p1, p2, p3, p4, p5 = params
    return p1 / (p2 + p3 * np.exp(p4 * x + p5))


def f1_curve(params, psi):
    """Forma de f1 na convenção do modelo: sigmoide em sin(π/2 − ψ) = cos ψ."""
    return sigmoid(params, np.cos(psi))


def f23_curve(params, psi):
    """Forma de f23 na convenção do modelo: sigmoide em cos(π/2 − ψ) = sin ψ."""
    return sigmoid(params, np.sin(psi))


def scaling_factors(psi, medium: MediumParams):
    """
    Fatores de ponderação tangencial (f1) e no plano e2e3 (f23).

    psi é o ângulo entre a velocidade e e1 (0 = deslizamento puro). As
    sigmoides ajustadas são avaliadas no ângulo complementar e truncadas
    em [0, 1].

    Args:
        psi: Ângulo (rad, [0, π/2]); escalar ou array
        medium: Parâmetros do meio

    Returns:
        Tupla (f1, f23)

    Raises:
        DomainError: psi fora da faixa
    """
    scalar = np.ndim(psi) == 0
    psi = np.asarray(psi, dtype=float)
    _check_angle("psi", psi, 0.0, HALF_PI)
    f1 = np.clip(f1_curve(medium.sigmoid_a, psi), 0.0, 1.0)
    f23 = np.clip(f23_curve(medium.sigmoid_b, psi), 0.0, 1.0)
    return _as_output(f1, scalar), _as_output(f23, scalar)


# ========== Perfil de material (.ini) ==========

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/0-9³]*)\s*$")

_UNITS = {
    "stress": {"N/m3": 1.0, "N/m³": 1.0, "N/cm3": 1e6, "N/cm³": 1e6},
    "density": {"kg/m3": 1.0, "kg/m³": 1.0, "g/cm3": 1e3, "g/cm³": 1e3},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "scalar": {"": 1.0},
}

_MEDIUM_KEYS = {
    "zeta": "stress",
    "lambda_v": "scalar",
    "lambda_h": "scalar",
    "rho": "density",
    "phi_s": "angle",
}


def parse_quantity(text: str, kind: str, key: str = "?") -> float:
    """
    Converte '2.06 N/cm3', '35 deg', '1500 kg/m3' para SI.

    Raises:
        ConfigError: Número inválido ou unidade incompatível com a grandeza
    """
    match = _QUANTITY.match(text)
    if not match:
        raise ConfigError(f"Valor inválido para '{key}': '{text}'")
    number, unit = match.groups()
    units = _UNITS[kind]
    if unit not in units:
        raise ConfigError(
            f"Unidade '{unit}' inválida para '{key}'. Aceitas: {sorted(u for u in units if u)}"
        )
    try:
        return float(number) * units[unit]
    except ValueError as e:
        raise ConfigError(f"Valor inválido para '{key}': '{text}'") from e


def _require(parser: configparser.ConfigParser, section: str, key: str) -> str:
    if not parser.has_section(section):
        raise ConfigError(f"Seção [{section}] ausente no perfil de material")
    if not parser.has_option(section, key):
        raise ConfigError(f"Chave '{section}.{key}' ausente no perfil de material")
    return parser.get(section, key)


def _coefficient_list(text: str, key: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(",", " ").split()], dtype=float)
    except ValueError as e:
        raise ConfigError(f"Lista de coeficientes inválida em 'stress_map.{key}'") from e


def load_medium(path: str | Path) -> MediumParams:
    """
    Carrega um perfil de material (.ini).

    Seções: [medium] zeta, lambda_v, lambda_h, rho, phi_s (com unidades),
    opcional alpha_y; [sigmoid_a] e [sigmoid_b] com p1..p5;
    [stress_map] z_cos, z_sin, x_cos, x_sin (6 coeficientes cada).

    Raises:
        FileNotFoundError: Arquivo inexistente
        ConfigError: Chave ausente (nomeada na mensagem) ou valor inválido
    """
    profile = Path(path)
    if not profile.is_file():
        raise FileNotFoundError(f"Perfil de material não encontrado: {profile}")

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(profile, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"Perfil de material malformado ({profile.name}): {e}") from e

    values = {
        key: parse_quantity(_require(parser, "medium", key), kind, f"medium.{key}")
        for key, kind in _MEDIUM_KEYS.items()
    }
    alpha_y = None
    if parser.has_option("medium", "alpha_y"):
        alpha_y = parse_quantity(parser.get("medium", "alpha_y"), "stress", "medium.alpha_y")

    sigmoids = {}
    for section in ("sigmoid_a", "sigmoid_b"):
        sigmoids[section] = tuple(
            parse_quantity(_require(parser, section, f"p{i}"), "scalar", f"{section}.p{i}")
            for i in range(1, 6)
        )

    coeffs = StressMapCoefficients(
        **{
            key: _coefficient_list(_require(parser, "stress_map", key), key)
            for key in ("z_cos", "z_sin", "x_cos", "x_sin")
        }
    )

    medium = MediumParams(
        coeffs=coeffs,
        alpha_y=alpha_y,
        sigmoid_a=sigmoids["sigmoid_a"],
        sigmoid_b=sigmoids["sigmoid_b"],
        **values,
    )
    logger.info(
        f"✅ Perfil de material carregado: {profile.name} "
        f"(zeta={medium.zeta / 1e6:.4g} N/cm³, lambda_h={medium.lambda_h:.4g})"
    )
    return medium


def save_medium(medium: MediumParams, path: str | Path, comments: Tuple[str, ...] = ()) -> Path:
    """
    Grava o perfil no mesmo formato lido por load_medium.

    Args:
        medium: Parâmetros a gravar
        path: Arquivo de destino
        comments: Linhas de comentário no cabeçalho (ex.: diagnóstico do ajuste)

    Returns:
        Caminho gravado
    """
    lines = [f"# {c}" for c in comments]
    lines += [
        "[medium]",
        f"zeta = {medium.zeta / 1e6!r} N/cm3",
        f"lambda_v = {medium.lambda_v!r}",
        f"lambda_h = {medium.lambda_h!r}",
        f"rho = {medium.rho!r} kg/m3",
        f"phi_s = {math.degrees(medium.phi_s)!r} deg",
    ]
    if medium.alpha_y is not None:
        lines.append(f"alpha_y = {medium.alpha_y!r} N/m3")
    for section, params in (("sigmoid_a", medium.sigmoid_a), ("sigmoid_b", medium.sigmoid_b)):
        lines.append("")
        lines.append(f"[{section}]")
        lines += [f"p{i} = {v!r}" for i, v in enumerate(params, 1)]
    lines.append("")
    lines.append("[stress_map]")
    for key in ("z_cos", "z_sin", "x_cos", "x_sin"):
        lines.append(f"{key} = " + ", ".join(repr(float(v)) for v in getattr(medium.coeffs, key)))

    from utils.tables import atomic_write_text

    destination = atomic_write_text(path, "\n".join(lines) + "\n")
    logger.info(f"✅ Perfil de material gravado: {destination}")
    return destination
