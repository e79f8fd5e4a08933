"""Exception hierarchy shared across the engine."""


class HerdlensError(Exception):
    """Base class for all engine errors."""


class SumMismatch(HerdlensError):
    """RLE counts do not sum to the mask area."""


class RleOverflow(HerdlensError):
    """An RLE run extends past the end of the grid."""


class ManifestMismatch(HerdlensError):
    """Frames file disagrees with its manifest."""


class EmptyMask(HerdlensError):
    """Operation requires at least one set pixel."""


class NoMasks(HerdlensError):
    """Frame has no detection carrying a mask."""


class DimensionMismatch(HerdlensError):
    """Arrays that must share a shape do not."""


class TooFewPoints(HerdlensError):
    """Not enough data points for the requested operation."""


class LengthMismatch(HerdlensError):
    """Paired sequences have different lengths."""


class EmptyGroup(HerdlensError):
    """A grouping key maps to zero points."""


class TooFewFeatures(HerdlensError):
    """Fewer accepted pose features than the clustering needs."""


class NoUsableFrames(HerdlensError):
    """No frame in the video has a masked detection."""


class DegenerateBBox(HerdlensError):
    """Bounding box has zero diagonal."""


class LowConfidenceNose(HerdlensError):
    """Nose keypoint confidence below threshold; frame is skipped."""


class MissingSocialLabel(HerdlensError):
    """Manifest lacks the single/herd label required by the analysis."""


class MissingViewLabel(HerdlensError):
    """Manifest lacks the front/side label required by the analysis."""


class MissingImagery(HerdlensError):
    """Grazing analysis needs pixel data but no imagery index was found."""


class TooFewSamples(HerdlensError):
    """Not enough samples to embed (per view or overall)."""


class OutOfFrame(HerdlensError):
    """Synthetic trajectory leaves the frame bounds."""
