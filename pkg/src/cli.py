"""
Interface de linha de comando do simulador.

Subcomandos:
    simulate     Simula uma marcha (forma de pé × período) e grava o traço
    sweep        Executa todas as combinações formas × períodos
    calibrate    Ajusta um perfil de material a partir de registros de ensaio
    report-rmse  Compara traços simulados com um traço medido

Códigos de saída: 0 sucesso; 2 configuração/entrada; 3 erro de simulação;
4 varredura com células falhas.

Exemplo de uso:
    python src/cli.py simulate --foot elliptical --period 4.5
    python src/cli.py sweep --workers 4
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import orjson
from tqdm import tqdm

# Adicionar src ao path para imports funcionarem
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from calibration import calibrate_medium, load_record
from config import Config, FootSpec, RunConfig, load_run_config
from errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    MeshError,
    NoContactError,
    TableError,
    TrajectoryError,
)
from gait import (
    JointTrajectory,
    LegModel,
    equivalent_forward_velocity,
    intrusion_phase,
    load_trajectory,
    resample,
    time_scale,
)
from geometry import FootMesh, builtin_foot, load_mesh_file
from kinetics import EnergyReport, calibrate_free_surface, energy_report
from medium import MediumParams, load_medium, save_medium
from rft import RFTOptions, plate_distribution
from utils.logger import enable_debug, setup_logger
from utils.tables import atomic_write_text, read_trace, write_table, write_trace

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_PARTIAL = 4

INPUT_ERRORS = (ConfigError, TableError, TrajectoryError, MeshError, FileNotFoundError)
RUNTIME_ERRORS = (DomainError, NoContactError, CalibrationError)

COMPARISON_COLUMNS = (
    "shape", "period_s", "peak_drag_N", "peak_lift_N",
    "hip_work_J", "knee_work_J", "total_work_J", "free_surface_height_m", "status",
)


# ========== Montagem do experimento ==========


def build_mesh(foot: FootSpec, shape: Optional[str] = None) -> FootMesh:
    """Malha do pé a partir da configuração (shape sobrepõe foot.shape)."""
    tag = shape or foot.shape
    if tag == "custom":
        if foot.mesh_file is None:
            raise ConfigError("shape 'custom' exige foot.mesh_file")
        return load_mesh_file(foot.mesh_file)
    return builtin_foot(
        tag,
        foot.length,
        foot.width,
        foot.sagitta,
        foot.n_length,
        foot.n_width,
        cap_height=foot.cap_height,
        ankle_height=foot.ankle_height,
        ankle_x=foot.ankle_x,
    )


def build_leg(run: RunConfig) -> LegModel:
    return LegModel(
        l1=run.leg.l1,
        l2=run.leg.l2,
        hip_position=(0.0, 0.0, run.leg.hip_height),
        knee_sign=run.leg.knee_sign,
        foot_pitch=run.leg.foot_pitch,
    )


def prepare_gait(run: RunConfig, period: float) -> JointTrajectory:
    """Marcha do arquivo, reamostrada na grade uniforme e reescalada para period."""
    traj = load_trajectory(run.gait.file)
    return time_scale(resample(traj, run.gait.samples), period)


def model_options(run: RunConfig) -> RFTOptions:
    return RFTOptions(correction=run.model.correction, inertial=run.model.inertial)


def run_tag(shape: str, period: float) -> str:
    return f"{shape}_T{period:g}"


def surface_height(
    run: RunConfig,
    mesh: FootMesh,
    leg: LegModel,
    traj: JointTrajectory,
    medium: MediumParams,
) -> float:
    """Altura da superfície livre: fixa ou calibrada para o pico de F_z alvo."""
    terrain = run.terrain
    if terrain.target_peak_lift is None:
        return terrain.free_surface_height
    return calibrate_free_surface(
        mesh,
        leg,
        traj,
        medium,
        terrain.target_peak_lift,
        options=model_options(run),
        bounds=terrain.search_bounds,
        tolerance=terrain.tolerance,
    )


def simulate(
    run: RunConfig,
    shape: str,
    period: float,
    out_dir: Path,
    medium: Optional[MediumParams] = None,
) -> Tuple[EnergyReport, Dict[str, Path]]:
    """
    Executa uma simulação e grava traço (.csv + .dat), resumo e distribuição.

    Raises:
        NoContactError: O pé não toca o meio em nenhuma amostra
    """
    medium = medium or load_medium(run.material)
    mesh = build_mesh(run.foot, shape)
    leg = build_leg(run)
    traj = prepare_gait(run, period)

    logger.info(f"⏳ Simulando '{shape}' com T_g = {period:g} s ({len(traj)} amostras)")
    report = energy_report(
        mesh,
        leg,
        traj,
        medium,
        options=model_options(run),
        ankle_moment=run.model.ankle_moment,
        contact_threshold=run.contact_threshold,
        free_surface_height=surface_height(run, mesh, leg, traj, medium),
    )
    if report.intrusion is None:
        raise NoContactError(f"Pé '{shape}' não penetrou o meio com T_g = {period:g} s")

    target = Path(out_dir) / run_tag(shape, period)
    paths = {"trace": write_trace(target / "trace.csv", report.trace_columns())}

    summary = report.summary()
    summary["equivalent_velocity_mps"] = equivalent_forward_velocity(period, leg.l1 + leg.l2)
    summary["model"] = run.model.model_dump()
    paths["summary"] = atomic_write_text(
        target / "summary.json",
        orjson.dumps(summary, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY).decode(),
    )
    if report.peak_result is not None:
        paths["distribution"] = write_table(target / "distribution.csv", plate_distribution(report.peak_result))

    logger.info(
        f"✅ '{shape}' T_g = {period:g} s: pico arrasto {report.peak_drag:.3g} N, "
        f"pico sustentação {report.peak_lift:.3g} N, trabalho total {report.total_work:.4g} J"
    )
    return report, paths


def _run_cell(payload: Tuple[RunConfig, str, float, str]) -> Dict[str, object]:
    run, shape, period, out_dir = payload
    report, _ = simulate(run, shape, period, Path(out_dir))
    return {
        "shape": shape,
        "period_s": period,
        "peak_drag_N": report.peak_drag,
        "peak_lift_N": report.peak_lift,
        "hip_work_J": report.hip_work,
        "knee_work_J": report.knee_work,
        "total_work_J": report.total_work,
        "free_surface_height_m": report.free_surface_height,
        "status": "ok",
    }


def _failed_cell(shape: str, period: float, error: Exception) -> Dict[str, object]:
    row = {name: float("nan") for name in COMPARISON_COLUMNS}
    row.update(shape=shape, period_s=period, status=f"erro: {type(error).__name__}")
    return row


def run_sweep(run: RunConfig, out_dir: Path, workers: int = 1) -> List[Dict[str, object]]:
    """
    Executa formas × períodos; células com erro são registradas e a
    varredura continua. Linhas na ordem da configuração.
    """
    cells = [(shape, period) for shape in run.sweep.shapes for period in run.gait.periods]
    rows: Dict[Tuple[str, float], Dict[str, object]] = {}

    with tqdm(total=len(cells), desc="Varredura", unit="célula") as progress:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {
                    pool.submit(_run_cell, (run, shape, period, str(out_dir))): (shape, period)
                    for shape, period in cells
                }
                for future in as_completed(futures):
                    cell = futures[future]
                    try:
                        rows[cell] = future.result()
                    except Exception as e:
                        logger.error(f"❌ Célula {run_tag(*cell)} falhou: {e}")
                        rows[cell] = _failed_cell(*cell, e)
                    progress.update(1)
        else:
            for cell in cells:
                try:
                    rows[cell] = _run_cell((run, *cell, str(out_dir)))
                except Exception as e:
                    logger.error(f"❌ Célula {run_tag(*cell)} falhou: {e}")
                    rows[cell] = _failed_cell(*cell, e)
                progress.update(1)

    ordered = [rows[cell] for cell in cells]
    write_table(
        Path(out_dir) / "comparison.csv",
        {name: [row[name] for row in ordered] for name in COMPARISON_COLUMNS},
    )
    return ordered


# ========== Comparação RMSE ==========


def rmse_report(
    measured: Dict[str, np.ndarray],
    simulated: Dict[str, np.ndarray],
    threshold: float = 1e-6,
) -> Dict[str, Dict[str, float]]:
    """
    RMSE por eixo entre simulação e medição na fase de intrusão medida.

    A simulação é interpolada linearmente nos instantes medidos; só entram
    amostras dentro do intervalo simulado.

    Returns:
        {eixo: {"rmse", "mean", "std"}} com média e desvio de |erro|

    Raises:
        DomainError: Sem sobreposição temporal
        NoContactError: Traço medido sem força vertical positiva
    """
    t = measured["t"]
    t_start, t_end = intrusion_phase(t, measured["Fz"], threshold)
    window = (t >= t_start) & (t <= t_end) & (t >= simulated["t"][0]) & (t <= simulated["t"][-1])
    if not np.any(window):
        raise DomainError("Traços simulado e medido sem sobreposição na fase de intrusão")

    report = {}
    for axis in ("Fx", "Fy", "Fz"):
        predicted = np.interp(t[window], simulated["t"], simulated[axis])
        error = np.abs(predicted - measured[axis][window])
        report[axis] = {
            "rmse": float(np.sqrt(np.mean(error ** 2))),
            "mean": float(np.mean(error)),
            "std": float(np.std(error)),
        }
    return report


def _format_rmse_row(label: str, report: Dict[str, Dict[str, float]]) -> str:
    cells = [f"{report[axis]['mean']:.2f}±{report[axis]['std']:.2f} (RMSE {report[axis]['rmse']:.3g})" for axis in ("Fx", "Fy", "Fz")]
    return f"{label:<16} | " + " | ".join(cells)


# ========== Subcomandos ==========


def _load_run(args: argparse.Namespace) -> RunConfig:
    run = load_run_config(args.config)
    if getattr(args, "out", None):
        run.output_dir = Path(args.out)
    if getattr(args, "no_correction", False):
        run.model.correction = False
    if getattr(args, "no_inertial", False):
        run.model.inertial = False
    if getattr(args, "workers", None):
        run.workers = args.workers
    if getattr(args, "target_lift", None) is not None:
        run.terrain.target_peak_lift = args.target_lift
    return run


def cmd_simulate(args: argparse.Namespace) -> int:
    run = _load_run(args)
    shape = args.foot or run.foot.shape
    period = args.period if args.period is not None else run.gait.periods[0]
    report, paths = simulate(run, shape, period, run.output_dir)

    print("\n" + "=" * 60)
    print(f"📊 SIMULAÇÃO: pé '{shape}', T_g = {period:g} s")
    print("=" * 60)
    print(f"   Fase de intrusão: {report.intrusion[0]:.4g} s → {report.intrusion[1]:.4g} s")
    print(f"   Pico de arrasto:  {report.peak_drag:.4g} N")
    print(f"   Pico de sustentação: {report.peak_lift:.4g} N")
    print(f"   Superfície livre: {report.free_surface_height * 1000:.4g} mm")
    print(f"   Trabalho quadril/joelho/total: {report.hip_work:.4g} / {report.knee_work:.4g} / {report.total_work:.4g} J")
    print(f"   Traço: {paths['trace']}")
    print("=" * 60 + "\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    run = _load_run(args)
    if args.foot:
        run.sweep.shapes = [args.foot]
    if args.period is not None:
        run.gait.periods = [args.period]

    rows = run_sweep(run, run.output_dir, run.workers)
    failed = [row for row in rows if row["status"] != "ok"]

    print("\n" + "=" * 60)
    print(f"📊 VARREDURA: {len(rows)} células ({len(failed)} com erro)")
    print("=" * 60)
    for row in rows:
        print(
            f"   {row['shape']:<11} T_g={row['period_s']:>5g} s | arrasto {row['peak_drag_N']:8.3g} N | "
            f"sustentação {row['peak_lift_N']:8.3g} N | W {row['total_work_J']:9.4g} J | {row['status']}"
        )
    print(f"   Tabela: {run.output_dir / 'comparison.csv'}")
    print("=" * 60 + "\n")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    if not (args.vertical or args.sweep_record or args.horizontal):
        raise ConfigError("Informe ao menos um registro: --vertical, --sweep-record ou --horizontal")

    if args.material:
        base = load_medium(args.material)
        out_dir = Path(args.out or Config.RFT_OUTPUT_DIR)
    else:
        run = _load_run(args)
        base = load_medium(run.material)
        out_dir = run.output_dir

    records = {
        "vertical": load_record(args.vertical, "vertical", args.area) if args.vertical else None,
        "sweep": load_record(args.sweep_record, "sweep", args.area) if args.sweep_record else None,
        "horizontal": (
            load_record(args.horizontal, "horizontal", args.area, args.depth) if args.horizontal else None
        ),
    }
    medium, fits, defaulted = calibrate_medium(base, **records)

    comments = [f"{name}: " + "; ".join(fit.describe()) for name, fit in fits.items()]
    if defaulted:
        comments.append(f"mantidos no padrão: {', '.join(defaulted)}")
    destination = save_medium(medium, out_dir / args.profile_name, tuple(comments))

    print("\n" + "=" * 60)
    print("📊 CALIBRAÇÃO")
    print("=" * 60)
    for name, fit in fits.items():
        print(f"   [{name}]")
        for line in fit.describe():
            print(f"      {line}")
    if defaulted:
        print(f"   ⚠️  Padrão mantido: {', '.join(defaulted)}")
    print(f"   Perfil gravado: {destination}")
    print("=" * 60 + "\n")
    return EXIT_OK


def cmd_report_rmse(args: argparse.Namespace) -> int:
    measured = read_trace(args.measured, ("t", "Fx", "Fy", "Fz"))
    rows = [("com correção", rmse_report(measured, read_trace(args.simulated), args.threshold))]
    if args.baseline:
        rows.append(("sem correção", rmse_report(measured, read_trace(args.baseline), args.threshold)))

    print("\n" + "=" * 60)
    print("📊 ERRO ABSOLUTO NA FASE DE INTRUSÃO (média ± desvio, N)")
    print("=" * 60)
    print(f"{'modelo':<16} | Fx | Fy | Fz")
    for label, report in rows:
        print(_format_rmse_row(label, report))
    print("=" * 60 + "\n")

    if args.out:
        payload = {label: report for label, report in rows}
        atomic_write_text(Path(args.out) / "rmse.json", orjson.dumps(payload, option=orjson.OPT_INDENT_2).decode())
    return EXIT_OK


# ========== Parser ==========


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=Config.RFT_CONFIG,
        help=f"Arquivo YAML de execução (default: {Config.RFT_CONFIG})",
    )
    parser.add_argument("--out", help="Diretório de saída (sobrepõe output_dir)")
    parser.add_argument("--debug", action="store_true", help="Ativar modo debug (logs detalhados)")


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--foot", choices=["flat", "circular", "elliptical", "custom"], help="Forma do pé")
    parser.add_argument("--period", type=float, help="Período de marcha T_g (s)")
    parser.add_argument("--no-correction", action="store_true", help="Desligar a correção de profundidade efetiva")
    parser.add_argument("--no-inertial", action="store_true", help="Desligar o termo inercial")
    parser.add_argument("--target-lift", type=float, help="Calibrar a superfície livre para este pico de F_z (N)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulador de interação pé-terreno em meio granular (RFT dinâmica)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Exemplos:
  # Simular o pé elíptico com T_g = 4.5 s
  python src/cli.py simulate --foot elliptical --period 4.5

  # Comparação sem o termo de correção
  python src/cli.py simulate --period 2.3 --no-correction --out output/sem_correcao

  # Varredura formas × períodos em 4 processos
  python src/cli.py sweep --workers 4

  # Calibrar a partir de ensaios de placa
  python src/cli.py calibrate --vertical vertical.csv --horizontal drag.csv

  # RMSE contra um traço medido
  python src/cli.py report-rmse medido.csv output/elliptical_T4.5/trace.csv

Configuração padrão: {Config.RFT_CONFIG}
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate_parser = sub.add_parser("simulate", help="Simular uma marcha")
    _add_run_options(simulate_parser)
    _add_model_options(simulate_parser)
    simulate_parser.set_defaults(handler=cmd_simulate)

    sweep_parser = sub.add_parser("sweep", help="Varredura formas × períodos")
    _add_run_options(sweep_parser)
    _add_model_options(sweep_parser)
    sweep_parser.add_argument("--workers", type=int, help="Número de processos (default: config)")
    sweep_parser.set_defaults(handler=cmd_sweep)

    calibrate_parser = sub.add_parser("calibrate", help="Calibrar perfil de material")
    _add_run_options(calibrate_parser)
    calibrate_parser.add_argument("--material", help="Perfil base (default: material da configuração)")
    calibrate_parser.add_argument("--vertical", help="Registro de penetração vertical")
    calibrate_parser.add_argument("--sweep-record", help="Registro de varredura de orientação")
    calibrate_parser.add_argument("--horizontal", help="Registro de arrasto horizontal")
    calibrate_parser.add_argument("--area", type=float, default=0.035 * 0.040, help="Área da placa (m²)")
    calibrate_parser.add_argument("--depth", type=float, default=0.01, help="Profundidade do arrasto (m)")
    calibrate_parser.add_argument("--profile-name", default="calibrated.ini", help="Nome do perfil gerado")
    calibrate_parser.set_defaults(handler=cmd_calibrate)

    rmse_parser = sub.add_parser("report-rmse", help="RMSE entre traço simulado e medido")
    rmse_parser.add_argument("measured", help="Traço medido (t, Fx, Fy, Fz)")
    rmse_parser.add_argument("simulated", help="Traço simulado com correção")
    rmse_parser.add_argument("--baseline", help="Traço simulado sem correção")
    rmse_parser.add_argument("--threshold", type=float, default=1e-6, help="Limiar de F_z da fase de intrusão (N)")
    rmse_parser.add_argument("--out", help="Diretório para rmse.json")
    rmse_parser.add_argument("--debug", action="store_true", help="Ativar modo debug (logs detalhados)")
    rmse_parser.set_defaults(handler=cmd_report_rmse)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Ponto de entrada; devolve o código de saída."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.debug:
        enable_debug()
        logger.info("🐛 Modo DEBUG ativado globalmente")

    try:
        return args.handler(args)

    except KeyboardInterrupt:
        print("\n\n👋 Programa interrompido.")
        return EXIT_RUNTIME

    except INPUT_ERRORS as e:
        logger.error(f"❌ Erro de configuração/entrada: {e}")
        print(f"\n❌ Erro: {e}\n")
        return EXIT_CONFIG

    except RUNTIME_ERRORS as e:
        logger.error(f"❌ Erro de simulação: {e}")
        print(f"\n❌ Erro: {e}\n")
        return EXIT_RUNTIME

    except Exception as e:
        logger.error(f"Erro fatal: {str(e)}", exc_info=True)
        print(f"\n❌ Erro fatal: {e}")
        print("💡 Use --debug para mais detalhes\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
