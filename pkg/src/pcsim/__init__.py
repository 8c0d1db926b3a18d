"""pcsim: learned mesh simulation conditioned on point cloud sequences.

Subpackages
-----------
geom      geometry primitives (sampling, SDFs, observation synthesis)
data      synthetic dataset generation (beam FEM, observations, splits)
models    spatio-temporal encoder, context aggregation, graph simulator
training  losses, auxiliary heads, optimization loop, gradient checks
"""

__version__ = "0.1.0"
