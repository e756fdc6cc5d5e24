"""Perceptron Turing machines, the Lopro language and genotype evolution."""

from ._core import (
    BuildError,
    LoproError,
    Machine,
    Network,
    Program,
    build,
    compile_lopro,
    compile_lopro_file,
    evaluate_fitness,
    evolve,
    lopro_stdlib,
    run_command,
    task_names,
)

__all__ = [
    "BuildError",
    "LoproError",
    "Machine",
    "Network",
    "Program",
    "build",
    "compile_lopro",
    "compile_lopro_file",
    "evaluate_fitness",
    "evolve",
    "lopro_stdlib",
    "run_command",
    "task_names",
]
