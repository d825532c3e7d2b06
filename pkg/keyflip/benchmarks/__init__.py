"""Bundled RV32I microbenchmark corpus."""

from keyflip.benchmarks.corpus import CORPUS, BenchSpec, get_benchmark, load_corpus

__all__ = ["CORPUS", "BenchSpec", "get_benchmark", "load_corpus"]
