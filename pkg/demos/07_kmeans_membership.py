"""k-means recovers cell membership for the Voronoi mixture, not for overlapping Gaussians."""
import numpy as np

from identlab._random import substream
from identlab.kmeans import membership_consistency_experiment, misclassification_floor
from identlab.models import FixedClassSpec, associated_mixture, gaussian_mixture_sampler

mix = associated_mixture(gaussian_mixture_sampler([-1.5, 1.5], [1, 1]), 2, 200_000, substream(10))
mix = mix.with_labels(mix.draw_labels(2000, substream(11)))
print("population centers:", mix.pop_centers.ravel())
print(membership_consistency_experiment(mix, [50, 500, 2000], 200, substream(12)).to_csv())

gauss = FixedClassSpec([[0.0], [2.0]], 1.0, np.arange(2000) % 2)
print("floor:", 1 - misclassification_floor(2.0, 1.0))
print(membership_consistency_experiment(gauss, [50, 500, 2000], 200, substream(13)).to_csv())
