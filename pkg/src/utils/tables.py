"""
Leitura e escrita de arquivos tabulares (CSV com cabeçalho).

- read_columns: lê colunas nomeadas, ignora linhas '#', aponta a linha
  problemática em caso de erro
- write_table: grava CSV com formatação fixa (9 algarismos significativos)
  e, opcionalmente, a variante gnuplot (.dat, cabeçalho comentado)
- atomic_write_text: grava em arquivo temporário e renomeia
"""

import csv
import io
import os
import sys
import tempfile
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import TableError
from utils.logger import setup_logger

logger = setup_logger(__name__)

NUMBER_FORMAT = "{:.8e}"

TRACE_COLUMNS = (
    "t", "phase",
    "Fx", "Fy", "Fz",
    "COPx", "COPy", "COPz",
    "tau1", "tau2", "P", "W_cum",
)


def atomic_write_text(path: str | Path, text: str) -> Path:
    """
    Grava texto de forma atômica (arquivo temporário + os.replace).

    Args:
        path: Arquivo de destino (diretórios são criados)
        text: Conteúdo

    Returns:
        Caminho gravado
    """
    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{destination.name}.", dir=destination.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, destination)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return destination


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    return NUMBER_FORMAT.format(float(value))


def _column_matrix(columns: Mapping[str, Sequence]) -> tuple[list[str], int]:
    names = list(columns)
    lengths = {name: len(columns[name]) for name in names}
    if len(set(lengths.values())) > 1:
        raise TableError(f"Colunas com tamanhos diferentes: {lengths}")
    return names, next(iter(lengths.values()), 0)


def render_csv(columns: Mapping[str, Sequence]) -> str:
    """CSV com cabeçalho; valores numéricos em notação científica fixa."""
    names, n_rows = _column_matrix(columns)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(names)
    for i in range(n_rows):
        writer.writerow([format_value(columns[name][i]) for name in names])
    return buffer.getvalue()


def render_gnuplot(columns: Mapping[str, Sequence]) -> str:
    """Variante gnuplot: colunas separadas por espaço, cabeçalho com '#'."""
    names, n_rows = _column_matrix(columns)
    lines = ["# " + " ".join(names)]
    for i in range(n_rows):
        lines.append(" ".join(format_value(columns[name][i]) for name in names))
    return "\n".join(lines) + "\n"


def write_table(path: str | Path, columns: Mapping[str, Sequence], gnuplot: bool = False) -> Path:
    """
    Grava uma tabela CSV (e a variante .dat se gnuplot=True).

    Args:
        path: Arquivo .csv de destino
        columns: Mapeamento nome -> valores (mesma ordem do cabeçalho)
        gnuplot: Gravar também <path>.dat

    Returns:
        Caminho do CSV gravado
    """
    destination = atomic_write_text(path, render_csv(columns))
    if gnuplot:
        atomic_write_text(destination.with_suffix(".dat"), render_gnuplot(columns))
    logger.debug(f"Tabela gravada: {destination}")
    return destination


def write_trace(path: str | Path, columns: Mapping[str, Sequence]) -> Path:
    """Grava um traço de simulação com as colunas de TRACE_COLUMNS (CSV + .dat)."""
    missing = [name for name in TRACE_COLUMNS if name not in columns]
    if missing:
        raise TableError(f"Colunas ausentes no traço: {missing}")
    ordered = {name: columns[name] for name in TRACE_COLUMNS}
    return write_table(path, ordered, gnuplot=True)


def read_columns(
    path: str | Path,
    required: Sequence[str],
    optional: Sequence[str] = (),
    min_rows: int = 1,
) -> Dict[str, np.ndarray]:
    """
    Lê colunas numéricas de um CSV com cabeçalho.

    Linhas vazias e linhas iniciadas por '#' são ignoradas.

    Args:
        path: Arquivo CSV
        required: Colunas obrigatórias
        optional: Colunas lidas se presentes
        min_rows: Número mínimo de linhas de dados

    Returns:
        Dicionário nome -> array float

    Raises:
        FileNotFoundError: Arquivo inexistente
        TableError: Cabeçalho sem coluna obrigatória, valor não numérico
                    (com número da linha) ou poucas linhas
    """
    source = Path(path)
    if not source.is_file():
        raise FileNotFoundError(f"Arquivo não encontrado: {source}")

    with source.open(encoding="utf-8", newline="") as handle:
        numbered = [
            (lineno, line)
            for lineno, line in enumerate(handle, 1)
            if line.strip() and not line.lstrip().startswith("#")
        ]

    if not numbered:
        raise TableError(f"{source.name}: arquivo sem cabeçalho")

    rows = csv.reader(line for _, line in numbered)
    header = [name.strip() for name in next(rows)]
    missing = [name for name in required if name not in header]
    if missing:
        raise TableError(
            f"{source.name}: colunas obrigatórias ausentes {missing} (cabeçalho: {header})"
        )

    wanted = list(required) + [name for name in optional if name in header]
    index = {name: header.index(name) for name in wanted}
    values: Dict[str, list] = {name: [] for name in wanted}

    for (lineno, _), row in zip(numbered[1:], rows):
        if len(row) < len(header):
            raise TableError(
                f"{source.name}, linha {lineno}: esperadas {len(header)} colunas, encontradas {len(row)}"
            )
        for name, col in index.items():
            cell = row[col].strip()
            try:
                values[name].append(float(cell))
            except ValueError:
                raise TableError(
                    f"{source.name}, linha {lineno}: valor inválido '{cell}' na coluna '{name}'"
                ) from None

    n_rows = len(numbered) - 1
    if n_rows < min_rows:
        raise TableError(f"{source.name}: {n_rows} linhas de dados, mínimo {min_rows}")

    return {name: np.asarray(v, dtype=float) for name, v in values.items()}


def read_trace(path: str | Path, columns: Optional[Sequence[str]] = None) -> Dict[str, np.ndarray]:
    """Lê um traço gravado por write_trace (ou medido, com t, Fx, Fy, Fz)."""
    return read_columns(path, columns or TRACE_COLUMNS, min_rows=2)
