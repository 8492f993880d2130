import random
import sys
from pathlib import Path

from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from oracles import random_parts  # noqa: E402
from treetop.woset import WOSet  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def part_lists(draw):
    return random_parts(random.Random(draw(seeds)))


@st.composite
def wosets(draw):
    return WOSet.from_parts(draw(part_lists()))


@st.composite
def extension_pairs(draw):
    """(x, y) with x built from a prefix of y's parts."""
    parts = draw(part_lists())
    k = draw(st.integers(min_value=0, max_value=len(parts)))
    return WOSet.from_parts(parts[:k]), WOSet.from_parts(parts)
