"""
Command line de HybridZX.

Comandos:
- ptm: PTM de un diagrama como CSV (17 dígitos significativos)
- eval: Evaluación de un grafo híbrido
- check: Suite de invariantes (exit 1 si algún check falla)
- train: Entrenamiento del clasificador, métricas en JSONL
- dataset: Muestras sintéticas o desde IDX como CSV
- graph: Exporta el grafo demo
- serve: API HTTP con uvicorn

Exit codes: 0 éxito, 1 falla de verificación, 2 error de uso, formato o dominio.
Los logs van a stderr; stdout solo lleva resultados.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO

import numpy as np

from app.core.classifier import IterationMetrics
from app.core.config import AcceptanceTrainConfig, IdxSpec, QuickTrainConfig, TrainConfig
from app.core.dataset import MAX_SYNTH_BITS, SynthRule, write_samples_csv
from app.core.exceptions import HybridZXError
from app.core.hybrid import graph_from_json, graph_to_json
from app.core.zx import parse_phase
from app.services.hybrid_service import get_hybrid_service
from app.services.verification_service import VerificationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

PRESETS = {
    "default": TrainConfig,
    "quick": QuickTrainConfig,
    "acceptance": AcceptanceTrainConfig,
}


class CliError(Exception):
    """Error de uso detectado después del parseo de argumentos."""


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def _parse_bindings(items: Optional[Sequence[str]]) -> Dict[str, float]:
    """name=value → dict; los valores aceptan expresiones de fase ('pi/2')."""
    binding: Dict[str, float] = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"--bind espera name=value, got '{item}'")
        name, raw = item.split("=", 1)
        phase = parse_phase(raw)
        if not phase.is_constant:
            raise CliError(f"--bind {name}: el valor debe ser constante, got '{raw}'")
        binding[name.strip()] = phase.evaluate()
    return binding


def _parse_floats(text: Optional[str]) -> List[float]:
    if text is None or text.strip() == "":
        return []
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError as e:
        raise CliError(f"lista de números inválida: '{text}'") from e


def _open_output(path: Optional[str]) -> TextIO:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


# ============================================================================
# Commands
# ============================================================================

def cmd_ptm(args: argparse.Namespace) -> int:
    text = Path(args.diagram).read_text(encoding="utf-8")
    ptm = get_hybrid_service().compute_ptm(text, _parse_bindings(args.bind))
    out = _open_output(args.output)
    try:
        np.savetxt(out, ptm.mat, fmt="%.17g", delimiter=",")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    graph = graph_from_json(Path(args.graph).read_text(encoding="utf-8"))
    inputs = _parse_floats(args.inputs)
    params = _parse_floats(args.params)
    service = get_hybrid_service()
    outputs = service.evaluate_graph(graph, inputs, params)
    print(",".join(_format_float(x) for x in outputs))
    if args.jacobian:
        jac = service.graph_jacobian(graph, inputs, params, args.fd_step)
        for row in jac:
            print(",".join(_format_float(x) for x in row))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    service = VerificationService(seed=args.seed, corpus_size=args.corpus_size, instances=args.instances)
    report = service.run()
    for c in report.checks:
        status = "OK  " if c.passed else "FAIL"
        line = f"{status} {c.name:<20} cases={c.cases:<4} max_error={c.max_error:.3e} tol={c.tolerance:.0e}"
        if c.detail:
            line += f"  {c.detail}"
        print(line)
    if report.passed:
        print(f"{len(report.checks)} checks passed")
        return EXIT_OK
    print(f"{len(report.failed)} of {len(report.checks)} checks failed: {', '.join(report.failed)}")
    return EXIT_CHECK_FAILED


def cmd_train(args: argparse.Namespace) -> int:
    preset = PRESETS[args.preset]
    if args.config:
        config = preset.from_file(args.config)
    else:
        config = preset().with_env_overrides()

    out = _open_output(args.output)

    def write_metrics(m: IterationMetrics) -> None:
        out.write(json.dumps(m.model_dump()) + "\n")

    try:
        report = get_hybrid_service().train(config, on_iteration=write_metrics)
    finally:
        if out is not sys.stdout:
            out.close()

    if args.report:
        Path(args.report).write_text(
            report.model_dump_json(indent=2, exclude={"runtime_seconds"}), encoding="utf-8"
        )
    logger.info(
        f"loss={report.final_loss:.6f} accuracy={report.final_accuracy:.3f} "
        f"({report.iterations_run} iteraciones)"
    )
    return EXIT_OK


def cmd_dataset(args: argparse.Namespace) -> int:
    service = get_hybrid_service()
    if args.source == "synth":
        samples = service.synth_samples(args.bits, args.rule, args.n, seed=args.seed)
    else:
        classes = tuple(int(c) for c in _parse_floats(args.classes))
        if len(classes) != 2:
            raise CliError(f"--classes espera dos dígitos, got '{args.classes}'")
        # mismos validadores que la sección idx de TrainConfig
        spec = IdxSpec(
            images=args.images, labels=args.labels, classes=classes,
            threshold=args.threshold, side=args.side, limit=args.limit
        )
        samples = service.idx_samples(**spec.model_dump())
    out = _open_output(args.output)
    try:
        write_samples_csv(samples, out)
    finally:
        if out is not sys.stdout:
            out.close()
    logger.info(f"{len(samples)} muestras escritas")
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    graph = get_hybrid_service().demo_graph(args.bits, args.layers)
    out = _open_output(args.output)
    try:
        out.write(graph_to_json(graph) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridzx",
        description="Diagramas de cuerdas híbridos cuántico-clásicos",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Logs en nivel DEBUG")
    parser.add_argument("-q", "--quiet", action="store_true", help="Solo warnings y errores")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ptm", help="PTM de un diagrama como CSV")
    p.add_argument("diagram", help="Archivo JSON del diagrama")
    p.add_argument("--bind", action="append", metavar="NAME=VALUE", help="Valor de un parámetro (repetible)")
    p.add_argument("-o", "--output", help="CSV de salida (default stdout)")
    p.set_defaults(func=cmd_ptm)

    p = sub.add_parser("eval", help="Evaluar un grafo híbrido")
    p.add_argument("graph", help="Archivo JSON del grafo")
    p.add_argument("--inputs", default="", help="Valores de input separados por coma")
    p.add_argument("--params", default="", help="Valores de parámetro separados por coma")
    p.add_argument("--jacobian", action="store_true", help="Imprime también el Jacobiano FD")
    p.add_argument("--fd-step", type=float, default=1e-4, help="Paso de diferencias centrales")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="Suite de invariantes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus-size", type=int, default=100)
    p.add_argument("--instances", type=int, default=50)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("train", help="Entrenar el clasificador")
    p.add_argument("--config", help="Archivo JSON de configuración")
    p.add_argument("--preset", choices=sorted(PRESETS), default="default", help="Defaults de configuración")
    p.add_argument("-o", "--output", help="Métricas JSONL (default stdout)")
    p.add_argument("--report", help="Reporte final en JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("dataset", help="Generar muestras como CSV")
    p.add_argument("source", choices=["synth", "idx"])
    p.add_argument("--bits", type=int, default=4, help=f"synth: bits por muestra (1..{MAX_SYNTH_BITS})")
    p.add_argument("--rule", default=SynthRule.SINGLE_BIT.value, choices=[r.value for r in SynthRule])
    p.add_argument("--n", type=int, default=32, help="synth: número de muestras")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--images", help="idx: archivo de imágenes")
    p.add_argument("--labels", help="idx: archivo de labels")
    p.add_argument("--classes", default="3,6", help="idx: dígitos +1,-1")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--side", type=int, default=2, help="idx: lado de la imagen reducida")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("-o", "--output", help="CSV de salida (default stdout)")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("graph", help="Exportar el grafo demo")
    p.add_argument("--bits", type=int, default=4)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("-o", "--output", help="JSON de salida (default stdout)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("serve", help="API HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--reload", action="store_true")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )

    if args.command == "dataset" and args.source == "idx" and not (args.images and args.labels):
        parser.error("dataset idx requiere --images y --labels")

    try:
        return args.func(args)
    except (HybridZXError, CliError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
