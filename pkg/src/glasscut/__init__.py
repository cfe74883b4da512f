"""Solver, validator and benchmark harness for the 2018 ROADEF/EURO
glass cutting problem (four-stage guillotine packing with leftovers)."""

from .model import (
    Defect,
    Front,
    GlasscutError,
    GuideKind,
    Instance,
    InstanceError,
    Item,
    Node,
    Params,
    ParseError,
    SolutionError,
    area,
    dominates,
    front_leq,
    root_node,
    waste,
)

__version__ = "0.1.0"

__all__ = [
    "Defect",
    "Front",
    "GlasscutError",
    "GuideKind",
    "Instance",
    "InstanceError",
    "Item",
    "Node",
    "Params",
    "ParseError",
    "SolutionError",
    "area",
    "dominates",
    "front_leq",
    "root_node",
    "waste",
]
