"""Stateless bit-packed sketches for dense embeddings."""
from .bitpack import pack, packed_size, unpack
from .codec import (
    Codec,
    CodecConfig,
    EncodedVector,
    Metric,
    QuerySketch,
    code_size_bytes,
    decode_norm,
    dequantize,
    encode_norm,
    quantize,
    validate_config,
)
from .errors import (
    BadMagicError,
    ConfigError,
    DimensionMismatchError,
    FormatError,
    PadBitsError,
    SketchError,
    TruncatedFileError,
    UndefinedCorrelationError,
    UnencodableVectorError,
    UnsupportedVersionError,
)
from .evaluation import EvalReport, LabeledPair, SubsetReport, evaluate, pearson, spearman
from .hashing import Draw, draw, mix64
from .index import FlatIndex, ScoredHit

__version__ = "0.1.0"
