"""Dialect identification toolkit.

Two classifier families over a shared evaluation harness: an end-to-end
1-d CNN over acoustic features (MFCC / log mel filterbank / spectrogram),
and cosine-scored language embeddings learned by a weight-shared pair
network over n-gram count vectors. Includes waveform augmentation,
score normalization, detection metrics, and logistic score fusion.
"""

__version__ = "0.1.0"
