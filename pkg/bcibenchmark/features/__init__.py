from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup
from .statistic import StatisticsConfig, extract_statistics, joint_cumulant
from .entropy import EntropyConfig, extract_entropy
from .autoregressive import ARConfig, ar_poles, burg_coefficients, extract_ar, fit_ar
from .energy import EnergyConfig, band_energy, band_layout, extract_energy
from .transform import TransformConfig, WaveletConfig, dct_dst, extract_wavelets, wavelet
from .matrix import (
    FeatureConfig,
    FeatureMatrix,
    NormalizationStats,
    apply_normalization,
    build_feature_matrix,
    normalize,
)
