"""Physics-aware meta-learning retrieval of coastal biogeochemical parameters
from hyperspectral remote-sensing reflectance.

The package covers the full pipeline: a bio-optical forward model on the
fixed 400-700 nm grid, SIOP derivation from a spectral library, synthetic
dataset generation through a Dirichlet-process Gaussian mixture over
PCA-compressed features, meta-pretraining of a compact spectral regressor on
SIOP-clustered tasks, regional fine-tuning with cross-validation, and the
analysis toolbox (log-space retrieval metrics, EFAST sensitivity, KS tests,
CIE 1931 chromaticity).
"""

from .bio_optics import (BgcState, RrsConstants, SiopSet, WaterIopTables,
                         above_water_rrs, backscatter_albedo, bundled_water_iops,
                         forward, forward_batch, subsurface_rrs, total_absorption,
                         total_backscatter, water_absorption, water_backscatter)
from .chromaticity import Chromaticity, CieTables, bundled_cie_tables, chromaticity
from .grid import STANDARD_GRID, Spectrum, WavelengthGrid, integrate, resample
from .library import (LibraryRecord, SpectralLibrary, correlation_matrix,
                      derive_bbp_siop, derive_cdom_siop, derive_nap_siop,
                      derive_ph_siop, derive_siops, median_siops, summary_stats)
from .meta import (AdaptConfig, CvResult, MetaResult, Task, TrainConfig,
                   cross_validate, inner_adapt, meta_pretrain, region_adapt,
                   sample_task)
from .metrics import (BandRatioModel, RetrievalMetrics, fit_band_ratio,
                      ks_statistic, predict_band_ratio, retrieval_metrics)
from .mlp import MlpParams, init_mlp, mlp_forward, mlp_loss_grad, predict_bgc
from .sensitivity import (EfastConfig, SensitivityResult, bgc_forward_closure,
                          efast_indices)
from .synthetic import (GmmConfig, GmmModel, PcaBasis, SyntheticDataset,
                        assemble_features, fit_dpgmm, fit_pca, generate_dataset,
                        invert_features, project, reconstruct, sample_features)

__version__ = "0.1.0"
