"""Exact finite models of trees of well-ordered rational sets and the
order, set-family and renorming constructions built on them."""

__version__ = "0.1.0"

from .tree import Tree, gen_tree  # noqa: E402
from .woset import WOSet  # noqa: E402

__all__ = ["Tree", "WOSet", "gen_tree", "__version__"]
