"""
Configuração centralizada do simulador.

Dois níveis:
    - Config: parâmetros do processo lidos de variáveis de ambiente (.env)
    - RunConfig: arquivo YAML de execução (material, pé, perna, marcha, saídas)
      validado com pydantic

Exemplo de uso:
    ```python
    from config import Config, load_run_config

    run = load_run_config(Config.RFT_CONFIG)
    print(run.foot.shape, run.gait.periods)
    ```
"""

import os
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from errors import ConfigError

load_dotenv()

ROOT_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = ROOT_DIR / "data"

ShapeTag = Literal["flat", "circular", "elliptical", "custom"]


class Config:
    """
    Configuração do processo (variáveis de ambiente).

    RFT_CONFIG aponta para o arquivo de execução padrão usado pela CLI
    quando --config não é informado.
    """

    # ========== Arquivos ==========
    RFT_CONFIG = os.getenv("RFT_CONFIG", str(DATA_DIR / "run.yaml"))
    RFT_OUTPUT_DIR = os.getenv("RFT_OUTPUT_DIR", "output")

    # ========== Execução ==========
    RFT_WORKERS = int(os.getenv("RFT_WORKERS", "1"))

    # ========== Application Configuration ==========
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def validate(cls):
        """
        Valida as variáveis de ambiente.

        Raises:
            ValueError: Se algum valor estiver fora da faixa aceita
        """
        if cls.RFT_WORKERS < 1:
            raise ValueError(
                f"❌ RFT_WORKERS deve ser >= 1, valor atual: {cls.RFT_WORKERS}"
            )

        if cls.LOG_LEVEL.upper() not in ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]:
            raise ValueError(
                f"❌ LOG_LEVEL inválido: '{cls.LOG_LEVEL}'. "
                f"Valores aceitos: DEBUG, INFO, WARNING, ERROR, CRITICAL"
            )

    @classmethod
    def display_config(cls):
        """Exibe configuração atual (útil para debug)."""
        print("=" * 60)
        print("⚙️  CONFIGURAÇÃO ATUAL")
        print("=" * 60)
        print(f"📄 Arquivo de execução: {cls.RFT_CONFIG}")
        print(f"📁 Diretório de saída: {cls.RFT_OUTPUT_DIR}")
        print(f"🧵 Workers: {cls.RFT_WORKERS}")
        print(f"🔧 Log Level: {cls.LOG_LEVEL}")
        print("=" * 60)


# ========== Arquivo de execução (RunConfig) ==========


class FootSpec(BaseModel):
    """Forma do pé e resolução da malha."""

    shape: ShapeTag = "elliptical"
    length: float = Field(0.11, gt=0)
    width: float = Field(0.07, gt=0)
    sagitta: float = Field(0.015, gt=0)
    cap_height: float = Field(0.01, ge=0)
    ankle_height: float = Field(0.05, gt=0)
    ankle_x: float = 0.0
    n_length: int = Field(20, ge=1)
    n_width: int = Field(10, ge=1)
    mesh_file: Optional[Path] = None

    @model_validator(mode="after")
    def _custom_needs_mesh(self):
        if self.shape == "custom" and self.mesh_file is None:
            raise ValueError("shape 'custom' exige foot.mesh_file")
        return self


class LegSpec(BaseModel):
    """Modelo de dois elos com quadril fixo."""

    l1: float = Field(0.23, gt=0)
    l2: float = Field(0.23, gt=0)
    hip_height: float = Field(0.505, gt=0)
    knee_sign: Literal[1, -1] = 1
    foot_pitch: float = 0.0


class GaitSpec(BaseModel):
    """Arquivo de marcha, períodos simulados e grade de amostragem."""

    file: Path
    periods: List[float] = Field(default_factory=lambda: [13.5, 4.5, 2.3])
    samples: int = Field(500, ge=2)

    @field_validator("periods")
    @classmethod
    def _positive_periods(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("ao menos um período de marcha é necessário")
        if any(p <= 0 for p in value):
            raise ValueError(f"períodos devem ser positivos: {value}")
        return value


class ModelToggles(BaseModel):
    """Liga/desliga termos do modelo (comparação com/sem correção)."""

    correction: bool = True
    inertial: bool = True
    ankle_moment: bool = True


class TerrainSpec(BaseModel):
    """
    Superfície livre do meio.

    Com target_peak_lift definido, a altura é calibrada a cada simulação
    para que o pico de F_z atinja o alvo; caso contrário vale
    free_surface_height.
    """

    free_surface_height: float = 0.0
    target_peak_lift: Optional[float] = Field(None, gt=0)
    search_bounds: Tuple[float, float] = (-0.08, 0.08)
    tolerance: float = Field(1e-6, gt=0)

    @field_validator("search_bounds")
    @classmethod
    def _ordered_bounds(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] >= value[1]:
            raise ValueError(f"search_bounds deve ser crescente: {value}")
        return value


class SweepSpec(BaseModel):
    shapes: List[ShapeTag] = Field(default_factory=lambda: ["flat", "elliptical"])

    @field_validator("shapes")
    @classmethod
    def _non_empty(cls, value):
        if not value:
            raise ValueError("ao menos uma forma de pé é necessária")
        return value


class RunConfig(BaseModel):
    """Configuração completa de uma execução."""

    material: Path
    foot: FootSpec = Field(default_factory=FootSpec)
    leg: LegSpec = Field(default_factory=LegSpec)
    gait: GaitSpec
    model: ModelToggles = Field(default_factory=ModelToggles)
    terrain: TerrainSpec = Field(default_factory=TerrainSpec)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    contact_threshold: float = Field(1e-6, ge=0)
    output_dir: Path = Path(Config.RFT_OUTPUT_DIR)
    workers: int = Field(Config.RFT_WORKERS, ge=1)


def _resolve(base: Path, path: Optional[Path]) -> Optional[Path]:
    if path is None or path.is_absolute():
        return path
    return (base / path).resolve()


def load_run_config(path: str | Path) -> RunConfig:
    """
    Carrega e valida um arquivo YAML de execução.

    Caminhos relativos (material, gait.file, foot.mesh_file) são resolvidos
    em relação ao diretório do YAML.

    Args:
        path: Caminho do arquivo YAML

    Returns:
        RunConfig validado

    Raises:
        ConfigError: Arquivo ausente, YAML inválido, chave inválida ou arquivo
                     referenciado inexistente
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Arquivo de configuração não encontrado: {config_path}")

    try:
        raw = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML inválido em {config_path}: {e}") from e

    try:
        run = RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Configuração inválida em '{key}': {first['msg']}") from e

    base = config_path.resolve().parent
    run.material = _resolve(base, run.material)
    run.gait.file = _resolve(base, run.gait.file)
    run.foot.mesh_file = _resolve(base, run.foot.mesh_file)
    if not run.output_dir.is_absolute():
        run.output_dir = Path.cwd() / run.output_dir

    referenced = [("material", run.material), ("gait.file", run.gait.file)]
    if run.foot.shape == "custom":
        referenced.append(("foot.mesh_file", run.foot.mesh_file))
    for key, ref in referenced:
        if not ref.is_file():
            raise ConfigError(f"Arquivo referenciado em '{key}' não existe: {ref}")

    return run


# Validar configurações ao importar o módulo
try:
    Config.validate()
except ValueError as e:
    print(f"\n⚠️  ERRO DE CONFIGURAÇÃO:\n{str(e)}\n")
    print("💡 Dica: Verifique seu arquivo .env ou variáveis de ambiente")
    print("💡 Exemplo: cp .env.example .env\n")
    raise
