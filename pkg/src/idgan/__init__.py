"""Identity-disentangling conditional GAN for dataset augmentation.

The package trains a progressively grown conditional GAN whose generator
consumes two latent vectors, one encoding subject identity (matched to a
Gaussian prior through an adversarially trained embedding network) and one
encoding everything else. Trained models synthesize new images of existing
subjects (depth augmentation) or of entirely new subjects (width
augmentation), and a small recognition harness measures the effect on
verification accuracy.
"""

__version__ = "0.1.0"
