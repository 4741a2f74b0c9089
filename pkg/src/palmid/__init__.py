"""Palmprint identification from block statistics and wavelet energies."""

from ._backend import KERNEL_BACKEND
from .classify import (
    GalleryModel,
    ModelWeights,
    PersonTemplate,
    ScoreBoard,
    build_templates,
    distance,
    fit_alpha,
    fit_gallery,
    fit_w,
    identify_mdc,
    identify_wmv,
    load_model,
    save_model,
)
from .dataset import (
    SPECTRA,
    DatasetManifest,
    SampleRecord,
    Spectrum,
    generate_synthetic,
    load_image,
    load_manifest,
    save_image,
)
from .evaluation import (
    EvalReport,
    SplitConfig,
    render_report,
    run_experiment,
    split,
)
from .features import (
    BlockPmf,
    block_pmf,
    extract_feature_matrix,
    partition_blocks,
    statistical_features,
    wavelet_features,
)
from .wavelet import (
    DB2,
    SubbandSet,
    WaveletFilter,
    dwt1d,
    dwt2d_level,
    dwt2d_multilevel,
    idwt2d_multilevel,
)

__version__ = "0.1.0"
