"""Graph total-variation image denoising with fast spectral filtering.

The package denoises images by tiling them into patches, building an
8-neighborhood similarity graph per patch from per-pixel features, and
repeatedly solving a reweighted low-pass graph filtering problem whose
closed form is x* = (I + mu L)^-1 y. The filter can be evaluated by a
dense spectral reference, conjugate gradients, a Krylov (Lanczos)
approximation, or a Chebyshev expansion.
"""

from .bench import BenchConfig, BenchResult, run_bench
from .fileio import load_feature_file, load_mu, save_feature_file, save_mu
from .filters import (
    DENSE_EIGEN_CAP,
    FilterSpec,
    TridiagonalFactor,
    apply_filter,
    filter_chebyshev,
    filter_exact_eig,
    filter_lanczos,
    filter_linear_solve,
    frequency_response,
    gershgorin_upper_bound,
    lanczos_factorize,
)
from .graphs import (
    FeatureMap,
    PatchGraph,
    build_topology,
    compute_edge_weights,
    glr_value,
    gtv_value,
    handcrafted_features,
    l1_laplacian,
    reweight_gamma,
)
from .images import (
    LUMA_WEIGHTS,
    ImageBuffer,
    PatchGrid,
    add_awgn,
    assemble_patches,
    extract_patches,
    load_image,
    luminance,
    psnr,
    save_image,
    ssim,
)
from .pipeline import (
    DenoiserConfig,
    LayerInputs,
    denoise_image,
    gtv_objective,
    run_block,
    run_denoiser,
    run_layer,
)

__version__ = "0.1.0"
