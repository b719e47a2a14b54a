"""Cluster detection from Prim trajectories of minimum spanning trees.

The number of clusters and their centroids are read off the Prim
trajectory by thresholding it under a Poisson false-alarm model, then
refined with a generalized Lloyd (K-means) pass.
"""

__version__ = "0.1.0"
