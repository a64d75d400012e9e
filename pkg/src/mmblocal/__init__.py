"""Local causal structure learning around a target in the presence of latent variables."""

from .graph import (
    ARROW,
    CIRCLE,
    TAIL,
    Dag,
    GraphError,
    Mag,
    Mark,
    MixedGraph,
    Pag,
    ancestors,
    find_inducing_path,
    graph_mmb,
    latent_project,
    m_separated,
    m_separated_bruteforce,
    pag_from_mag,
    parse_graph,
    read_graph,
)

__version__ = "0.1.0"
