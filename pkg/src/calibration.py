"""
Calibração dos parâmetros do meio a partir de ensaios com placa.

Três tipos de registro:
    - vertical: penetração de placa horizontal (depth_m, Fz_N) → zeta
    - sweep: varredura de orientação psi (psi_deg, F1_N, F23_N) → sigmoides f1/f23
    - horizontal: arrasto de placa vertical em várias velocidades
      (speed_mps, Fdrag_N) → lambda_h

Os ajustes são determinísticos; os geradores sintéticos usam semente fixa.

Exemplo de uso:
    ```python
    from calibration import load_record, fit_zeta

    record = load_record("vertical.csv", "vertical", area=1.4e-3)
    result = fit_zeta(record)
    print(result.parameters["zeta"], result.residual_rms)
    ```
"""

import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import CalibrationError
from geometry import Plate
from medium import (
    GENERIC_COEFFICIENTS,
    HALF_PI,
    SAND_SIGMOID_A,
    SAND_SIGMOID_B,
    MediumParams,
    StressMapCoefficients,
    alpha_generic,
    f1_curve,
    f23_curve,
)
from rft import IntrusionState, RFTOptions, plate_force
from utils.logger import setup_logger
from utils.tables import read_columns, write_table

logger = setup_logger(__name__)

RecordKind = Literal["vertical", "horizontal", "sweep"]

# Placa de 35 × 40 mm
DEFAULT_PLATE_AREA = 0.035 * 0.040
DEFAULT_DRAG_DEPTH = 0.01
MIN_SAMPLES = 5
MIN_SWEEP_ANGLES = 8
MIN_SPEEDS = 3
FLAT_CURVE_RANGE = 0.05

RECORD_COLUMNS = {
    "vertical": ("t", "depth_m", "Fz_N"),
    "sweep": ("psi_deg", "F1_N", "F23_N"),
    "horizontal": ("speed_mps", "Fdrag_N"),
}


@dataclass(frozen=True, eq=False)
class PenetrationRecord:
    """
    Registro de um ensaio de placa.

    values: profundidade (m), psi (rad) ou velocidade (m/s), conforme kind.
    forces: (N,) para vertical/horizontal; (N, 2) com (F1, F23) para sweep.
    depth: profundidade fixa do ensaio horizontal (m).
    """

    kind: RecordKind
    area: float
    values: np.ndarray
    forces: np.ndarray
    depth: float = DEFAULT_DRAG_DEPTH
    t: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in RECORD_COLUMNS:
            raise CalibrationError("record", f"tipo desconhecido '{self.kind}'")
        values = np.asarray(self.values, dtype=float).reshape(-1)
        forces = np.asarray(self.forces, dtype=float)
        if len(values) < MIN_SAMPLES:
            raise CalibrationError(
                "record", f"registro '{self.kind}' com {len(values)} amostras (mínimo {MIN_SAMPLES})"
            )
        if len(forces) != len(values):
            raise CalibrationError("record", "valores e forças com tamanhos diferentes")
        if np.any(values < 0):
            raise CalibrationError("record", f"registro '{self.kind}' com valores negativos")
        if not self.area > 0:
            raise CalibrationError("record", f"área da placa deve ser positiva: {self.area}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "forces", forces)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FitResult:
    """Parâmetros ajustados, descrições, resíduo RMS e diagnósticos."""

    parameters: Dict[str, float]
    descriptions: Dict[str, str]
    residual_rms: float
    n_samples: int
    flags: Tuple[str, ...] = field(default_factory=tuple)

    def describe(self) -> List[str]:
        lines = [f"{name} = {value:.6g}  ({self.descriptions.get(name, '')})" for name, value in self.parameters.items()]
        lines.append(f"resíduo RMS = {self.residual_rms:.4g} ({self.n_samples} amostras)")
        if self.flags:
            lines.append(f"diagnósticos: {', '.join(self.flags)}")
        return lines


# ========== Registros ==========


def load_record(
    path: str | Path,
    kind: RecordKind,
    area: float = DEFAULT_PLATE_AREA,
    depth: float = DEFAULT_DRAG_DEPTH,
) -> PenetrationRecord:
    """
    Lê um registro de ensaio (CSV com cabeçalho).

    Colunas: vertical (t, depth_m, Fz_N); sweep (psi_deg, F1_N, F23_N);
    horizontal (speed_mps, Fdrag_N).

    Raises:
        FileNotFoundError: Arquivo inexistente
        TableError: Linha malformada
        CalibrationError: Registro inconsistente
    """
    if kind not in RECORD_COLUMNS:
        raise CalibrationError("record", f"tipo desconhecido '{kind}'")
    columns = read_columns(path, RECORD_COLUMNS[kind])
    if kind == "vertical":
        record = PenetrationRecord(kind, area, columns["depth_m"], columns["Fz_N"], t=columns["t"])
    elif kind == "sweep":
        forces = np.column_stack([columns["F1_N"], columns["F23_N"]])
        record = PenetrationRecord(kind, area, np.radians(columns["psi_deg"]), forces)
    else:
        record = PenetrationRecord(kind, area, columns["speed_mps"], columns["Fdrag_N"], depth=depth)
    logger.info(f"✅ Registro '{kind}' carregado: {Path(path).name} ({len(record)} amostras)")
    return record


def write_record(record: PenetrationRecord, path: str | Path) -> Path:
    """Grava o registro no formato lido por load_record."""
    if record.kind == "vertical":
        t = record.t if record.t is not None else np.arange(len(record), dtype=float)
        columns = {"t": t, "depth_m": record.values, "Fz_N": record.forces}
    elif record.kind == "sweep":
        columns = {
            "psi_deg": np.degrees(record.values),
            "F1_N": record.forces[:, 0],
            "F23_N": record.forces[:, 1],
        }
    else:
        columns = {"speed_mps": record.values, "Fdrag_N": record.forces}
    return write_table(path, columns)


def _require_kind(record: PenetrationRecord, kind: str, parameter: str) -> None:
    if record.kind != kind:
        raise CalibrationError(parameter, f"registro '{record.kind}' recebido, esperado '{kind}'")


# ========== zeta ==========


def fit_zeta(record: PenetrationRecord, coeffs: StressMapCoefficients = GENERIC_COEFFICIENTS) -> FitResult:
    """
    Ajusta zeta por regressão pela origem de F_z × profundidade.

    k = inclinação / área é a tensão vertical por unidade de profundidade e
    zeta = k / alpha_z0(0, π/2) (= 0.8·k com a normalização padrão).

    Raises:
        CalibrationError: Inclinação não positiva
    """
    _require_kind(record, "vertical", "zeta")
    depth = record.values
    fz = record.forces
    denominator = float(np.dot(depth, depth))
    if denominator <= 0:
        raise CalibrationError("zeta", "profundidades todas nulas")
    slope = float(np.dot(depth, fz)) / denominator
    if not slope > 0:
        logger.error(f"❌ Inclinação F_z × profundidade não positiva: {slope:.4g} N/m")
        raise CalibrationError("zeta", f"inclinação não positiva ({slope:.4g} N/m): dados inconsistentes")

    _, alpha_z0 = alpha_generic(0.0, HALF_PI, coeffs)
    zeta = slope / record.area / alpha_z0
    rms = float(np.sqrt(np.mean((fz - slope * depth) ** 2)))
    logger.info(f"📊 zeta = {zeta / 1e6:.4g} N/cm³ (inclinação {slope:.4g} N/m, RMS {rms:.3g} N)")
    return FitResult(
        parameters={"zeta": zeta, "slope": slope},
        descriptions={
            "zeta": "fator de escala das tensões (N/m³)",
            "slope": "inclinação F_z × profundidade (N/m)",
        },
        residual_rms=rms,
        n_samples=len(record),
    )


# ========== Sigmoides f1 / f23 ==========


def _reference_value(psi: np.ndarray, force: np.ndarray, target: float, parameter: str) -> Tuple[float, float]:
    index = int(np.argmin(np.abs(psi - target)))
    value = float(force[index])
    if value == 0.0 or not math.isfinite(value):
        raise CalibrationError(parameter, f"força de referência nula em psi={math.degrees(psi[index]):.3g}°")
    return float(psi[index]), value


def _fit_sigmoid(curve, psi, data, initial, parameter, max_nfev):
    def residual(params):
        return curve(params, psi) - data

    try:
        solution = least_squares(
            residual,
            x0=np.asarray(initial, dtype=float),
            bounds=(-100.0, 100.0),
            method="trf",
            ftol=1e-10,
            xtol=1e-10,
            gtol=1e-10,
            max_nfev=max_nfev,
        )
    except (ValueError, FloatingPointError) as e:
        raise CalibrationError(parameter, f"ajuste falhou: {e}") from e

    if solution.status <= 0 or not np.all(np.isfinite(solution.x)):
        logger.warning(f"⚠️  Ajuste de {parameter} não convergiu: {solution.message}")
        raise CalibrationError(parameter, f"sem convergência após {solution.nfev} avaliações")
    return solution.x


def fit_scaling_factors(
    record: PenetrationRecord,
    initial_a: Sequence[float] = SAND_SIGMOID_A,
    initial_b: Sequence[float] = SAND_SIGMOID_B,
    max_nfev: int = 500,
) -> FitResult:
    """
    Ajusta as sigmoides de f1 e f23 a uma varredura de orientação.

    psi no registro segue a convenção do modelo (0 = movimento ao longo de e1).
    F1 é normalizada pelo valor em psi = 0 e F23 pelo valor em psi = 90°;
    após o ajuste, p1 é reescalado para que a curva valha exatamente 1 na
    referência.

    Raises:
        CalibrationError: Menos de 8 ângulos distintos, referência nula ou
                          ajuste sem convergência
    """
    _require_kind(record, "sweep", "sigmoid")
    psi = record.values
    if len(np.unique(np.round(psi, 9))) < MIN_SWEEP_ANGLES:
        raise CalibrationError("sigmoid", f"varredura com menos de {MIN_SWEEP_ANGLES} ângulos distintos")
    if np.any(psi > HALF_PI + 1e-9):
        raise CalibrationError("sigmoid", "psi acima de 90°")

    results = {}
    rms_parts = []
    flags = []
    grid = np.radians(np.arange(0.0, 90.5, 1.0))
    for name, curve, column, target, initial in (
        ("a", f1_curve, 0, 0.0, initial_a),
        ("b", f23_curve, 1, HALF_PI, initial_b),
    ):
        parameter = f"sigmoid_{name}"
        ref_psi, ref_value = _reference_value(psi, record.forces[:, column], target, parameter)
        data = record.forces[:, column] / ref_value
        if np.ptp(data) < FLAT_CURVE_RANGE:
            # sem dependência com psi: sigmoide constante p1/p2
            params = np.array([float(np.mean(data)), 1.0, 0.0, 0.0, 0.0])
        else:
            params = _fit_sigmoid(curve, psi, data, initial, parameter, max_nfev)

        params[0] /= float(curve(params, ref_psi))
        rms_parts.append(np.mean((curve(params, psi) - data) ** 2))
        for i, value in enumerate(params, 1):
            results[f"{name}{i}"] = float(value)

        fitted = curve(params, grid)
        if np.ptp(fitted) < FLAT_CURVE_RANGE:
            label = "f1_flat" if name == "a" else "f23_flat"
            flags.append(label)
            logger.warning(f"⚠️  Curva {label}: sem dependência com a orientação")

    rms = float(np.sqrt(np.mean(rms_parts)))
    logger.info(f"📊 Sigmoides ajustadas (RMS normalizado {rms:.3g})")
    descriptions = {f"a{i}": "parâmetro da sigmoide de f1" for i in range(1, 6)}
    descriptions.update({f"b{i}": "parâmetro da sigmoide de f23" for i in range(1, 6)})
    return FitResult(results, descriptions, rms, len(record), tuple(flags))


def sigmoid_params(result: FitResult) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Extrai (a1..a5, b1..b5) de um FitResult de fit_scaling_factors."""
    a = tuple(result.parameters[f"a{i}"] for i in range(1, 6))
    b = tuple(result.parameters[f"b{i}"] for i in range(1, 6))
    return a, b


# ========== lambda_h ==========


def _drag_plate(depth: float, area: float) -> Plate:
    # placa vertical de face para +x, centróide na profundidade do ensaio
    return Plate(np.array([0.0, 0.0, -depth]), np.array([1.0, 0.0, 0.0]), area)


def drag_force(medium: MediumParams, speed: float, depth: float, area: float, options: RFTOptions = RFTOptions()) -> float:
    """Arrasto (N) previsto para a placa vertical do ensaio horizontal."""
    state = IntrusionState(ankle_position=np.zeros(3), ankle_velocity=np.array([speed, 0.0, 0.0]))
    return -float(plate_force(_drag_plate(depth, area), state, medium, options).total[0])


def fit_lambda_h(record: PenetrationRecord, medium: MediumParams) -> FitResult:
    """
    Ajusta lambda_h ao arrasto horizontal em várias velocidades.

    O modelo é linear em lambda_h: F(v) = F0(v) + lambda_h·D(v), com F0 o
    arrasto sem correção (termo estático + inercial) e D a contribuição
    unitária da correção de profundidade. Mínimos quadrados lineares.

    Raises:
        CalibrationError: Menos de 3 velocidades distintas
    """
    _require_kind(record, "horizontal", "lambda_h")
    speeds = record.values
    if len(np.unique(speeds)) < MIN_SPEEDS:
        raise CalibrationError("lambda_h", f"são necessárias ao menos {MIN_SPEEDS} velocidades distintas")

    base = medium.with_values(lambda_h=0.0)
    unit = medium.with_values(lambda_h=1.0)
    f0 = np.array([drag_force(base, v, record.depth, record.area) for v in speeds])
    d = np.array([drag_force(unit, v, record.depth, record.area) for v in speeds]) - f0
    denominator = float(np.dot(d, d))
    if denominator <= 0:
        raise CalibrationError("lambda_h", "correção de profundidade nula para as velocidades do registro")

    lambda_h = float(np.dot(record.forces - f0, d)) / denominator
    rms = float(np.sqrt(np.mean((f0 + lambda_h * d - record.forces) ** 2)))
    flags = ()
    if lambda_h < 0:
        flags = ("lambda_h_negative",)
        logger.warning(f"⚠️  lambda_h negativo ({lambda_h:.4g}): dados inconsistentes com o modelo")
    logger.info(f"📊 lambda_h = {lambda_h:.4g} (RMS {rms:.3g} N)")
    return FitResult(
        parameters={"lambda_h": lambda_h},
        descriptions={"lambda_h": "escala da correção de profundidade efetiva"},
        residual_rms=rms,
        n_samples=len(record),
        flags=flags,
    )


# ========== Calibração combinada ==========


def calibrate_medium(
    base: MediumParams,
    vertical: Optional[PenetrationRecord] = None,
    sweep: Optional[PenetrationRecord] = None,
    horizontal: Optional[PenetrationRecord] = None,
) -> Tuple[MediumParams, Dict[str, FitResult], List[str]]:
    """
    Executa os ajustes disponíveis e combina com os valores de base.

    Ordem: zeta, sigmoides, lambda_h (que usa os dois primeiros).

    Returns:
        Tupla (meio calibrado, resultados por ajuste, parâmetros mantidos no padrão)
    """
    medium = base
    fits: Dict[str, FitResult] = {}
    defaulted: List[str] = []

    if vertical is not None:
        fits["zeta"] = fit_zeta(vertical, base.coeffs)
        medium = medium.with_values(zeta=fits["zeta"].parameters["zeta"])
    else:
        defaulted.append("zeta")

    if sweep is not None:
        fits["sigmoid"] = fit_scaling_factors(sweep, base.sigmoid_a, base.sigmoid_b)
        a, b = sigmoid_params(fits["sigmoid"])
        medium = medium.with_values(sigmoid_a=a, sigmoid_b=b)
    else:
        defaulted += ["sigmoid_a", "sigmoid_b"]

    if horizontal is not None:
        fits["lambda_h"] = fit_lambda_h(horizontal, medium)
        medium = medium.with_values(lambda_h=fits["lambda_h"].parameters["lambda_h"])
    else:
        defaulted.append("lambda_h")

    if defaulted:
        logger.warning(f"⚠️  Parâmetros mantidos no valor padrão: {', '.join(defaulted)}")
    return medium, fits, defaulted


# ========== Registros sintéticos ==========


def _noisy(values: np.ndarray, noise: float, rng: np.random.Generator) -> np.ndarray:
    if noise <= 0:
        return values
    return values * (1.0 + noise * rng.standard_normal(values.shape))


def synthetic_vertical_record(
    medium: MediumParams,
    area: float = DEFAULT_PLATE_AREA,
    depths: Optional[np.ndarray] = None,
    speed: float = 0.02,
    noise: float = 0.0,
    seed: int = 0,
) -> PenetrationRecord:
    """Penetração vertical de placa horizontal simulada com o modelo RFT."""
    depths = np.linspace(0.002, 0.05, 25) if depths is None else np.asarray(depths, dtype=float)
    plate = Plate(np.zeros(3), np.array([0.0, 0.0, -1.0]), area)
    forces = np.array(
        [
            plate_force(
                plate,
                IntrusionState(ankle_position=np.array([0.0, 0.0, -z]), ankle_velocity=np.array([0.0, 0.0, -speed])),
                medium,
            ).total[2]
            for z in depths
        ]
    )
    rng = np.random.default_rng(seed)
    return PenetrationRecord("vertical", area, depths, _noisy(forces, noise, rng), t=depths / speed)


def synthetic_sweep_record(
    medium: MediumParams,
    psi_deg: Optional[np.ndarray] = None,
    f1_reference: float = 10.0,
    f23_reference: float = 20.0,
    noise: float = 0.0,
    seed: int = 0,
    area: float = DEFAULT_PLATE_AREA,
) -> PenetrationRecord:
    """Varredura de orientação gerada pelas sigmoides do meio (sem truncamento)."""
    psi = np.radians(np.arange(0.0, 90.5, 7.5) if psi_deg is None else np.asarray(psi_deg, dtype=float))
    forces = np.column_stack(
        [f1_reference * f1_curve(medium.sigmoid_a, psi), f23_reference * f23_curve(medium.sigmoid_b, psi)]
    )
    rng = np.random.default_rng(seed)
    return PenetrationRecord("sweep", area, psi, _noisy(forces, noise, rng))


def synthetic_horizontal_record(
    medium: MediumParams,
    area: float = DEFAULT_PLATE_AREA,
    depth: float = DEFAULT_DRAG_DEPTH,
    speeds: Optional[np.ndarray] = None,
    noise: float = 0.0,
    seed: int = 0,
) -> PenetrationRecord:
    """Arrasto horizontal de placa vertical em várias velocidades."""
    speeds = np.linspace(0.01, 0.1, 10) if speeds is None else np.asarray(speeds, dtype=float)
    forces = np.array([drag_force(medium, v, depth, area) for v in speeds])
    rng = np.random.default_rng(seed)
    return PenetrationRecord("horizontal", area, speeds, _noisy(forces, noise, rng), depth=depth)
