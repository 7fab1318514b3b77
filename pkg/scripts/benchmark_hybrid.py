#!/usr/bin/env python3
"""
Benchmark Script: Dense vs Structured PTM evaluation

Compara la evaluación del box del clasificador materializando la PTM
(ptm_of_term + ptm_apply) contra la evaluación estructurada (PtmProgram)
para distintos tamaños, y mide el costo de una iteración de entrenamiento.

Métricas comparadas:
- Tiempo por evaluación del box
- Diferencia máxima entre ambos caminos
- Tiempo por iteración full-batch (loss + gradiente FD)
"""

import sys
import time
from pathlib import Path
from typing import Dict, List

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.core.classifier import (
    build_classifier_circuit,
    build_demo_graph,
    classifier_parameter_names,
    evaluate_dataset,
    loss_gradient,
)
from app.core.dataset import SynthRule, synth_dataset
from app.core.hybrid import GraphEvaluator, bit_encoder, mu_fold
from app.core.ptm import PtmProgram, ptm_apply, ptm_of_term

# Con k > 3 los cortes intermedios de la PTM densa no caben en memoria de escritorio
DENSE_MAX_BITS = 3


def benchmark_box(k: int, layers: int = 1, repeats: int = 20) -> Dict:
    """Dense vs structured para un box de k bits."""

    print(f"\n{'='*70}")
    print(f"BOX: k={k}, layers={layers}")
    print(f"{'='*70}")

    rng = np.random.default_rng(k)
    term = build_classifier_circuit(k, layers)
    names = classifier_parameter_names(k, layers)
    binding = dict(zip(names, rng.uniform(-np.pi, np.pi, size=len(names)).tolist()))
    bits = rng.integers(0, 2, size=k)
    v = mu_fold([bit_encoder(b) for b in bits])

    start = time.perf_counter()
    program = PtmProgram(term)
    compile_time = time.perf_counter() - start
    print(f"\n   Compile: {compile_time:.4f}s ({len(program.ops)} ops)")

    start = time.perf_counter()
    for _ in range(repeats):
        structured = program.run(v, binding)
    structured_time = (time.perf_counter() - start) / repeats
    print(f"   Structured: {structured_time * 1e3:.3f} ms/eval")

    dense_time = None
    max_diff = None
    if k <= DENSE_MAX_BITS:
        start = time.perf_counter()
        dense = ptm_apply(ptm_of_term(term, binding), v)
        dense_time = time.perf_counter() - start
        max_diff = float(np.max(np.abs(dense - structured)))
        print(f"   Dense:      {dense_time * 1e3:.3f} ms/eval")
        print(f"   Max |dense - structured|: {max_diff:.2e}")
    else:
        print(f"   Dense:      omitido (k > {DENSE_MAX_BITS})")

    return {
        "k": k,
        "structured_time": structured_time,
        "dense_time": dense_time,
        "max_diff": max_diff,
    }


def benchmark_training(k: int, n: int = 32, iterations: int = 3) -> float:
    """Tiempo medio por iteración full-batch."""
    samples = synth_dataset(k, SynthRule.SINGLE_BIT, n, seed=0)
    evaluator = GraphEvaluator(build_demo_graph(k, 1))
    theta = np.random.default_rng(0).uniform(-np.pi, np.pi, size=evaluator.n_params)

    start = time.perf_counter()
    for _ in range(iterations):
        evaluate_dataset(evaluator, samples, theta)
        theta = theta - 0.1 * loss_gradient(evaluator, samples, theta, 1e-4)
    return (time.perf_counter() - start) / iterations


def print_summary(all_results: List[Dict], iteration_times: Dict[int, float]):
    """Imprimir resumen."""

    print(f"\n\n{'='*70}")
    print(f"BENCHMARK SUMMARY")
    print(f"{'='*70}")

    print(f"\n{'k':<6} {'Structured (ms)':<18} {'Dense (ms)':<14} {'Max diff':<12}")
    print("-" * 56)
    for r in all_results:
        dense = f"{r['dense_time'] * 1e3:.3f}" if r["dense_time"] is not None else "-"
        diff = f"{r['max_diff']:.1e}" if r["max_diff"] is not None else "-"
        print(f"{r['k']:<6} {r['structured_time'] * 1e3:<18.3f} {dense:<14} {diff:<12}")

    print(f"\n📊 Training iteration (32 samples, full batch):")
    for k, t in iteration_times.items():
        print(f"   k={k}: {t:.3f}s/iter, 500 iters ≈ {500 * t / 60:.1f} min")


def main():
    """Run all benchmarks."""

    print("╔══════════════════════════════════════════════════════════════════╗")
    print("║          BENCHMARK: Dense vs Structured PTM evaluation           ║")
    print("╚══════════════════════════════════════════════════════════════════╝")

    all_results = [benchmark_box(k) for k in (1, 2, 3, 4)]
    iteration_times = {k: benchmark_training(k) for k in (2, 4)}

    print_summary(all_results, iteration_times)

    print(f"\n{'='*70}")
    print("Benchmark completed successfully! ✅")
    print(f"{'='*70}\n")


if __name__ == "__main__":
    main()
