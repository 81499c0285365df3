"""
The GritNet architecture, its parameters and checkpoints.
"""

from .params import FC_PARAMS, PARAM_ORDER, GritNetParams, init_params, zero_params
from .model import GritNet, to_probabilities
from .checkpoint import check_compatible, file_digest, load_checkpoint, read_checkpoint, save_checkpoint
from .remap import RemapNotice, remap_model
