"""One-class classification toolkit.

Train a discriminative one-class model against Gaussian pseudo-negatives
in feature space (OneClassCNN), compare against classical baselines
(OneClassSVM, SVDD, MPM, BSVM, OneClassSVMPlus), and evaluate with AUROC
over standard one-class benchmark protocols.
"""

from .baselines import (BSVM, MPM, SVDD, OneClassSVM, OneClassSVMPlus,
                        load_baseline_file)
from .benchmark import (BenchmarkResult, EvalReport, format_benchmark_table,
                        run_benchmark, write_benchmark_csv)
from .data import (DatasetManifest, FeatureSet, load_feature_file,
                   load_manifest, save_feature_file, save_manifest)
from .kernels import KernelSpec
from .metrics import auroc, roc_curve
from .numerics import RngState, gaussian_sample, matmul, shuffle_rows, solve_spd
from .occnn import (OneClassCNN, TrainConfig, assemble_batch,
                    generate_pseudo_negatives)
from .protocols import (ProtocolSplit, build_abnormality_protocol,
                        build_auth_protocol, build_novelty_protocol)
from .synth import synth_dataset

__version__ = "0.1.0"

__all__ = [
    "BSVM", "BenchmarkResult", "DatasetManifest", "EvalReport", "FeatureSet",
    "KernelSpec", "MPM", "OneClassCNN", "OneClassSVM", "OneClassSVMPlus",
    "ProtocolSplit", "RngState", "SVDD", "TrainConfig", "assemble_batch",
    "auroc", "build_abnormality_protocol", "build_auth_protocol",
    "build_novelty_protocol", "format_benchmark_table", "gaussian_sample",
    "generate_pseudo_negatives", "load_baseline_file", "load_feature_file",
    "load_manifest", "matmul", "roc_curve", "run_benchmark",
    "save_feature_file", "save_manifest", "shuffle_rows", "solve_spd",
    "synth_dataset", "write_benchmark_csv",
]
