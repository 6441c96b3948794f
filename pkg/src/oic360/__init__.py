"""Interactive 360-degree image codec with block-level random access.

An equirectangular image is encoded once, block by block, against every
prediction context a navigating user could make available, using nested
rate-adaptive syndrome codes.  Any block decoding order is then servable at
the rate matched to the side information the decoder actually has.
"""

from .blocks import BlockGrid
from .container import load, load_trace, parse, save, serialize
from .encoder import EncodedImage, encode_image
from .geom import Direction, PlaneImage, ViewportSpec
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "BlockGrid",
    "Direction",
    "EncodedImage",
    "KERNEL_BACKEND",
    "PlaneImage",
    "ViewportSpec",
    "encode_image",
    "load",
    "load_trace",
    "parse",
    "save",
    "serialize",
    "__version__",
]
