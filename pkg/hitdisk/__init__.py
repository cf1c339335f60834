"""hitdisk - exit-point distribution of correlated planar Brownian motion on a disk"""

__version__ = "1.0.0"
