"""
Malha do pé e geometria local das placas de intrusão.

Sistema do corpo do pé: origem no tornozelo, x para a ponta do pé,
y lateral, z para cima. A sola é discretizada em faixas quadrilaterais
(cordas do perfil sagital × divisões da largura); as normais apontam para
fora do material do pé.

Exemplo de uso:
    ```python
    from geometry import builtin_foot, local_frame, intrusion_angles

    mesh = builtin_foot("elliptical", 0.11, 0.07, 0.015, 20, 10)
    frame = local_frame(mesh.normals[0], v)
    angles = intrusion_angles(mesh.normals[0], v, frame)
    ```
"""

import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import ellipe

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import DomainError, MeshError, TableError
from utils.logger import setup_logger

logger = setup_logger(__name__)

E1 = np.array([1.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

BUILTIN_SHAPES = ("flat", "circular", "elliptical")
_HORIZONTAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Plate:
    """Placa plana: centróide e normal no sistema do corpo, área em m²."""

    centroid: np.ndarray
    normal: np.ndarray
    area: float


@dataclass(frozen=True, eq=False)
class FootMesh:
    """
    Malha imutável do pé.

    Attributes:
        centroids: (N, 3) centróides no sistema do corpo (m)
        normals: (N, 3) normais unitárias externas
        areas: (N,) áreas (m²)
        shape_tag: flat, circular, elliptical ou custom
        length, width: Dimensões do pé (m)
        ankle_offset: Posição do tornozelo no sistema do perfil (m)
        profile_nodes: (K, 2) nós (x, z) do perfil sagital no sistema do corpo
    """

    centroids: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    shape_tag: str
    length: float
    width: float
    ankle_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    profile_nodes: Optional[np.ndarray] = None

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=float).reshape(-1, 3)
        normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        areas = np.asarray(self.areas, dtype=float).reshape(-1)
        if not (len(centroids) == len(normals) == len(areas)):
            raise MeshError("centroids, normals e areas com tamanhos diferentes")
        if len(areas) == 0:
            raise MeshError("Malha sem placas")
        if not (np.all(np.isfinite(centroids)) and np.all(np.isfinite(normals)) and np.all(np.isfinite(areas))):
            raise MeshError("Malha com valores não finitos")
        if np.any(areas <= 0):
            raise MeshError(f"Placas com área não positiva: {int(np.sum(areas <= 0))}")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise MeshError("Normais devem ser unitárias")
        for name, value in (("centroids", centroids), ("normals", normals), ("areas", areas)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "ankle_offset", np.asarray(self.ankle_offset, dtype=float))

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def plates(self) -> Tuple[Plate, ...]:
        return tuple(
            Plate(self.centroids[i], self.normals[i], float(self.areas[i]))
            for i in range(len(self))
        )

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))


class LocalFrame(NamedTuple):
    """Base ortonormal local (mundo): e1 = e2 × e3, e3 = E3."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


class IntrusionAngles(NamedTuple):
    """
    Ângulos de intrusão (rad).

    sliding indica deslizamento puro (componente de velocidade no plano e2e3
    nula); gamma vale 0 nesse caso. heading é ±1: sentido de e2 em que a
    intrusão no plano avança (as tensões são espelhadas quando negativo).
    """

    beta: float
    gamma: float
    psi: float
    sliding: bool
    heading: float


# ========== Perfis sagitais ==========


def flat_profile(length: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.zeros_like(np.asarray(x, dtype=float))


def circular_profile(length: float, sagitta: float) -> Callable[[np.ndarray], np.ndarray]:
    """Arco circular pela ponta e calcanhar (z=0) com flecha sagitta abaixo."""
    radius = ((length / 2) ** 2 + sagitta ** 2) / (2 * sagitta)
    return lambda x: (radius - sagitta) - np.sqrt(np.maximum(radius ** 2 - np.asarray(x) ** 2, 0.0))


def elliptical_profile(length: float, sagitta: float) -> Callable[[np.ndarray], np.ndarray]:
    """Meia elipse inferior de semi-eixos length/2 e sagitta."""
    half = length / 2
    return lambda x: -sagitta * np.sqrt(np.clip(1.0 - (np.asarray(x) / half) ** 2, 0.0, None))


def _profile_nodes_x(shape_tag: str, length: float, sagitta: float, n_length: int) -> np.ndarray:
    # nós igualmente espaçados no parâmetro natural de cada curva
    k = np.arange(n_length + 1)
    half = length / 2
    if shape_tag == "elliptical":
        return -half * np.cos(np.pi * k / n_length)
    if shape_tag == "circular":
        radius = (half ** 2 + sagitta ** 2) / (2 * sagitta)
        theta0 = math.asin(half / radius)
        return radius * np.sin(np.linspace(-theta0, theta0, n_length + 1))
    return np.linspace(-half, half, n_length + 1)


# ========== Construção da malha ==========


def discretize_profile(
    profile: Callable[[np.ndarray], np.ndarray],
    length: float,
    width: float,
    n_length: int,
    n_width: int,
    shape_tag: str = "custom",
    nodes_x: Optional[np.ndarray] = None,
    cap_height: float = 0.0,
    ankle_height: float = 0.05,
    ankle_x: float = 0.0,
) -> FootMesh:
    """
    Discretiza o contorno inferior do pé em faixas quadrilaterais.

    Cada corda do perfil sagital (entre nós consecutivos sobre a curva) é
    extrudada na largura e dividida em n_width placas. Com cap_height > 0
    são incluídas as tampas verticais de calcanhar e ponta (x = ∓l/2).
    O tornozelo fica em (ankle_x, 0, z_min + ankle_height) no sistema do
    perfil e é a origem do sistema do corpo.

    Args:
        profile: Altura da sola h(x) sobre [-l/2, l/2] (m, z para cima)
        length: Comprimento l (m)
        width: Largura w (m)
        n_length: Número de cordas ao longo do comprimento
        n_width: Número de divisões na largura
        shape_tag: Rótulo da forma
        nodes_x: Abscissas dos nós (default: uniforme)
        cap_height: Altura das tampas verticais (0 = sem tampas)
        ankle_height: Altura do tornozelo acima do ponto mais baixo da sola
        ankle_x: Posição x do tornozelo no sistema do perfil

    Returns:
        FootMesh com n_length × n_width placas de sola (+ tampas)

    Raises:
        MeshError: Dimensões inválidas ou perfil não finito
    """
    if not (length > 0 and width > 0):
        raise MeshError(f"Comprimento e largura devem ser positivos: l={length}, w={width}")
    if n_length < 1 or n_width < 1:
        raise MeshError(f"Resolução inválida: n_length={n_length}, n_width={n_width}")
    if cap_height < 0:
        raise MeshError(f"cap_height negativo: {cap_height}")

    half = length / 2
    if nodes_x is None:
        nodes_x = np.linspace(-half, half, n_length + 1)
    nodes_x = np.asarray(nodes_x, dtype=float)
    if len(nodes_x) != n_length + 1 or np.any(np.diff(nodes_x) <= 0):
        raise MeshError("nodes_x deve ter n_length + 1 abscissas crescentes")

    nodes_z = np.asarray(profile(nodes_x), dtype=float) * np.ones_like(nodes_x)
    if not np.all(np.isfinite(nodes_z)):
        raise MeshError(f"Perfil '{shape_tag}' produziu valores não finitos")

    ankle = np.array([ankle_x, 0.0, float(np.min(nodes_z)) + ankle_height])

    dx = np.diff(nodes_x)
    dz = np.diff(nodes_z)
    chord = np.hypot(dx, dz)
    if np.any(chord <= 0):
        raise MeshError("Perfil com cordas degeneradas")

    strip_w = width / n_width
    y_mid = -width / 2 + strip_w * (np.arange(n_width) + 0.5)

    # sola: (n_length, n_width) placas, percorridas do calcanhar para a ponta
    mid_x = np.repeat(0.5 * (nodes_x[:-1] + nodes_x[1:]), n_width)
    mid_z = np.repeat(0.5 * (nodes_z[:-1] + nodes_z[1:]), n_width)
    centroids = [np.column_stack([mid_x, np.tile(y_mid, n_length), mid_z])]
    sole_normals = np.column_stack([dz, np.zeros_like(dz), -dx]) / chord[:, None]
    normals = [np.repeat(sole_normals, n_width, axis=0)]
    areas = [np.repeat(chord * strip_w, n_width)]

    if cap_height > 0:
        rows = max(1, math.ceil(cap_height * n_length / length))
        row_h = cap_height / rows
        z_rows = row_h * (np.arange(rows) + 0.5)
        for x_end, z_end, sign in ((nodes_x[0], nodes_z[0], -1.0), (nodes_x[-1], nodes_z[-1], 1.0)):
            zz, yy = np.meshgrid(z_end + z_rows, y_mid, indexing="ij")
            count = zz.size
            centroids.append(np.column_stack([np.full(count, x_end), yy.ravel(), zz.ravel()]))
            normals.append(np.tile([sign, 0.0, 0.0], (count, 1)))
            areas.append(np.full(count, row_h * strip_w))

    centroids = np.vstack(centroids) - ankle
    mesh = FootMesh(
        centroids=centroids,
        normals=np.vstack(normals),
        areas=np.concatenate(areas),
        shape_tag=shape_tag,
        length=length,
        width=width,
        ankle_offset=ankle,
        profile_nodes=np.column_stack([nodes_x - ankle[0], nodes_z - ankle[2]]),
    )
    logger.debug(
        f"Malha '{shape_tag}': {len(mesh)} placas, área {mesh.total_area * 1e4:.3f} cm²"
    )
    return mesh


def builtin_foot(
    shape_tag: str,
    length: float,
    width: float,
    depth_param: Optional[float],
    n_length: int,
    n_width: int,
    cap_height: float = 0.01,
    ankle_height: float = 0.05,
    ankle_x: float = 0.0,
) -> FootMesh:
    """
    Constrói um pé padrão (flat, circular ou elliptical).

    Args:
        shape_tag: Forma da sola
        length, width: Dimensões (m)
        depth_param: Flecha da sola curva (m); ignorada para flat
        n_length, n_width: Resolução
        cap_height: Altura das tampas de calcanhar/ponta (somente formas curvas)
        ankle_height: Altura do tornozelo sobre o ponto mais baixo da sola
        ankle_x: Posição longitudinal do tornozelo

    Raises:
        MeshError: Forma desconhecida ou flecha inválida
    """
    if shape_tag not in BUILTIN_SHAPES:
        raise MeshError(f"Forma desconhecida: '{shape_tag}'. Aceitas: {BUILTIN_SHAPES}")

    if shape_tag == "flat":
        profile = flat_profile(length)
        sagitta = 0.0
        cap_height = 0.0
    else:
        if depth_param is None or not depth_param > 0:
            raise MeshError(f"Forma '{shape_tag}' exige flecha positiva, recebeu {depth_param}")
        sagitta = float(depth_param)
        if shape_tag == "circular":
            if sagitta > length / 2:
                raise MeshError(
                    f"Flecha {sagitta} maior que l/2 = {length / 2}: arco circular inválido"
                )
            profile = circular_profile(length, sagitta)
        else:
            profile = elliptical_profile(length, sagitta)

    mesh = discretize_profile(
        profile,
        length,
        width,
        n_length,
        n_width,
        shape_tag=shape_tag,
        nodes_x=_profile_nodes_x(shape_tag, length, sagitta, n_length),
        cap_height=cap_height,
        ankle_height=ankle_height,
        ankle_x=ankle_x,
    )
    logger.info(f"✅ Pé '{shape_tag}' discretizado: {len(mesh)} placas")
    return mesh


def analytic_area(
    shape_tag: str,
    length: float,
    width: float,
    depth_param: Optional[float] = None,
    cap_height: float = 0.01,
) -> float:
    """Área exata da superfície malhada (sola + tampas) de um pé padrão."""
    if shape_tag == "flat":
        return length * width
    half = length / 2
    s = float(depth_param)
    if shape_tag == "circular":
        radius = (half ** 2 + s ** 2) / (2 * s)
        arc = 2 * radius * math.asin(half / radius)
    elif shape_tag == "elliptical":
        a, b = max(half, s), min(half, s)
        arc = 2 * a * float(ellipe(1.0 - (b / a) ** 2))
    else:
        raise MeshError(f"Sem área analítica para '{shape_tag}'")
    return (arc + 2 * cap_height) * width


def load_mesh_file(path: str | Path) -> FootMesh:
    """
    Importa uma malha personalizada.

    Formato: uma placa por linha, 'cx cy cz nx ny nz area' (SI, sistema do
    corpo com origem no tornozelo); linhas '#' são comentários. Normais são
    renormalizadas quando a norma difere de 1 por menos de 1e-6.

    Raises:
        FileNotFoundError: Arquivo inexistente
        TableError: Linha malformada (número da linha na mensagem)
        MeshError: Normal nula ou área não positiva
    """
    source = Path(path)
    if not source.is_file():
        raise FileNotFoundError(f"Arquivo de malha não encontrado: {source}")

    rows = []
    with source.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != 7:
                raise TableError(f"{source.name}, linha {lineno}: esperados 7 valores, encontrados {len(parts)}")
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise TableError(f"{source.name}, linha {lineno}: valor não numérico") from None
            norm = math.sqrt(sum(v * v for v in values[3:6]))
            if abs(norm - 1.0) > 1e-6:
                raise MeshError(f"{source.name}, linha {lineno}: normal não unitária (|n|={norm:.6g})")
            if values[6] <= 0:
                raise MeshError(f"{source.name}, linha {lineno}: área não positiva")
            rows.append(values[:3] + [v / norm for v in values[3:6]] + values[6:])

    if not rows:
        raise MeshError(f"{source.name}: nenhuma placa encontrada")

    data = np.asarray(rows)
    extent = np.ptp(data[:, :2], axis=0)
    mesh = FootMesh(
        centroids=data[:, :3],
        normals=data[:, 3:6],
        areas=data[:, 6],
        shape_tag="custom",
        length=float(extent[0]),
        width=float(extent[1]),
    )
    logger.info(f"✅ Malha importada de {source.name}: {len(mesh)} placas")
    return mesh


# ========== Base local e ângulos ==========


def _horizontal_unit(vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    horizontal = vectors.copy()
    horizontal[..., 2] = 0.0
    norm = np.linalg.norm(horizontal, axis=-1)
    ok = norm > _HORIZONTAL_TOL
    unit = np.zeros_like(horizontal)
    unit[ok] = horizontal[ok] / norm[ok, None]
    return unit, ok


def local_frames(normals: np.ndarray, velocities: np.ndarray) -> LocalFrame:
    """Versão vetorizada de local_frame para (N, 3) normais e velocidades."""
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    velocities = np.broadcast_to(np.asarray(velocities, dtype=float), normals.shape)

    e2, ok = _horizontal_unit(normals)
    if not np.all(ok):
        fallback, v_ok = _horizontal_unit(velocities)
        e2 = np.where(ok[:, None], e2, np.where(v_ok[:, None], fallback, E1))
    e3 = np.broadcast_to(E3, e2.shape)
    e1 = np.cross(e2, e3)
    return LocalFrame(e1, e2, np.array(e3))


def local_frame(normal, v) -> LocalFrame:
    """
    Base local de uma placa.

    e3 = E3; e2 = direção horizontal da normal (no plano de n e E3);
    e1 = e2 × e3. Normal vertical: e2 vem da velocidade horizontal e,
    se esta também for nula, e2 = E1.

    Raises:
        DomainError: Normal nula
    """
    normal = np.asarray(normal, dtype=float)
    if not np.linalg.norm(normal) > 0:
        raise DomainError("Normal nula: base local indefinida")
    frame = local_frames(normal[None, :], np.asarray(v, dtype=float)[None, :])
    return LocalFrame(frame.e1[0], frame.e2[0], frame.e3[0])


def angles_batch(normals: np.ndarray, velocities: np.ndarray, frame: LocalFrame):
    """
    Ângulos (beta, gamma, psi) vetorizados.

    Returns:
        Tupla de arrays (beta, gamma, psi, sliding, heading)
    """
    e1, e2, e3 = frame
    speed = np.linalg.norm(velocities, axis=-1)
    v1 = np.einsum("ij,ij->i", velocities, e1)
    v23 = velocities - v1[:, None] * e1
    v2 = np.einsum("ij,ij->i", v23, e2)
    v3 = np.einsum("ij,ij->i", v23, e3)

    heading = np.where(v2 < 0.0, -1.0, 1.0)
    tilt = np.arctan2(np.einsum("ij,ij->i", normals, e3), heading * np.einsum("ij,ij->i", normals, e2))
    beta = np.where(tilt <= 0.0, tilt + 0.5 * np.pi, tilt - 0.5 * np.pi)

    sliding = np.linalg.norm(v23, axis=-1) <= 1e-12 * np.maximum(speed, 1e-300)
    gamma = np.where(sliding, 0.0, np.arctan2(-v3, np.abs(v2)))

    ratio = np.clip(np.abs(v1) / np.where(speed > 0, speed, 1.0), 0.0, 1.0)
    psi = np.arccos(ratio)
    return beta, gamma, psi, sliding, heading


def intrusion_angles(plate_normal, v, frame: LocalFrame) -> IntrusionAngles:
    """
    Ângulos de intrusão de uma placa.

    beta: inclinação da placa em relação a e2, em [-π/2, π/2]
    gamma: direção de v23 em relação a e2, positiva para baixo
    psi: ângulo entre v e e1, reduzido a [0, π/2]

    Raises:
        DomainError: Velocidade nula
    """
    v = np.asarray(v, dtype=float)
    if not np.linalg.norm(v) > 0:
        raise DomainError("Velocidade nula: ângulos de intrusão indefinidos")
    batch_frame = LocalFrame(*(np.asarray(e, dtype=float)[None, :] for e in frame))
    beta, gamma, psi, sliding, heading = angles_batch(
        np.asarray(plate_normal, dtype=float)[None, :], v[None, :], batch_frame
    )
    return IntrusionAngles(float(beta[0]), float(gamma[0]), float(psi[0]), bool(sliding[0]), float(heading[0]))
