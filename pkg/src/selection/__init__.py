"""
Partition scoring and n_min selection
"""
from .calinski import ChScore, calinski_harabasz
from .cv import GRID_PRESETS, SelectionResult, resolve_grid, select_n_min
