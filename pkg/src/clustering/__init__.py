"""
Binary splitters, the HBAC fit and centroid assignment
"""
from .hbac import fit_hbac
from .kmeans import BinarySplit, split_two_kmeans
from .kmodes import split_two_kmodes
from .partition import Centroid, Cluster, FitStep, HbacConfig, Partition, assign, assign_all
