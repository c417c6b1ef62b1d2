"""topo3d: 3D organ shape reconstruction from 2D scout projections.

A voxel-occupancy VAE is trained jointly with image-observation encoders on
synthetic phantom data; the package also ships the projection operators,
surface/volume metrics, marching-cubes meshing, an HTTP inference service
and a command-line pipeline (``t3d``).
"""

__version__ = "0.1.0"
