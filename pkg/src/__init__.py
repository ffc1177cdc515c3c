"""
HBAC audit - unsupervised bias detection with held-out inference
"""
__version__ = "0.1.0"
