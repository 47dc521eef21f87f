"""Decode customer permutations into feasible electric-vehicle routes."""
from .charging_graph import ChargingMatrix, build, reconstruct_path
from .fixed_route import fr_fla_decode, ss_fr_fla_decode
from .fp_fla import DecodeResult, DecodeStats, decode, decode_batch
from .model import DEPOT, Instance, Label, Node, NodeKind, Solution, dominates, prune, validate
from .split import RoutePlan, split

__version__ = "0.1.0"

__all__ = [
    "ChargingMatrix",
    "DEPOT",
    "DecodeResult",
    "DecodeStats",
    "Instance",
    "Label",
    "Node",
    "NodeKind",
    "RoutePlan",
    "Solution",
    "build",
    "decode",
    "decode_batch",
    "dominates",
    "fr_fla_decode",
    "prune",
    "reconstruct_path",
    "split",
    "ss_fr_fla_decode",
    "validate",
]
