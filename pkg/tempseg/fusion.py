"""Temporal fusion of the most recent frames: the Image Buffer and the Attention Module"""

import logging
from collections import deque
import numpy as np
from .core import ScoreMap, LogitMap, ProbMap, LabelMap, softmax_pixelwise, argmax_labels

_LOGGER = logging.getLogger(__name__)

METHODS = ('baseline', 'image_buffer', 'attention')

DEFAULT_BUFFER_SIZE = 4
DEFAULT_WEIGHTS = (4.0, 3.0, 2.0, 1.0)
DEFAULT_THRESHOLD = 1.0


class FusionConfigError(ValueError):
    """Error in the fusion parameters"""


class NegativeWeightError(FusionConfigError):
    """A frame weight is negative"""


class WeightsLengthError(FusionConfigError):
    """The number of weights differs from the buffer size"""


class NegativeThresholdError(FusionConfigError):
    """The threshold is negative"""


class UnknownMethodError(ValueError):
    """The fusion method is not one of baseline, image_buffer or attention"""


class ShapeMismatchError(ValueError):
    """A frame does not have the dimensions of the frames before it"""


class ShapeDriftError(ShapeMismatchError):
    """The frame dimensions changed in the middle of a sequence"""

    def __init__(self, message, frame_index):
        super(ShapeDriftError, self).__init__(message)
        self.frame_index = frame_index


class EmptyBufferError(ValueError):
    """Fusion was requested on an empty frame buffer"""


def default_weights(buffer_size):
    """The descending ramp N, N-1, ..., 1 (4, 3, 2, 1 for the default buffer size)"""
    return tuple(float(buffer_size - n) for n in range(buffer_size))


class FusionConfig(object):
    """Buffer size N, frame weights I_0..I_{N-1} (I_0 weights the present frame),
    threshold T and the target categories (names or indices; None = the targets
    of the category table)"""

    def __init__(self, buffer_size=None, weights=None, threshold=DEFAULT_THRESHOLD, targets=None):
        if buffer_size is None:
            buffer_size = len(weights) if weights is not None else DEFAULT_BUFFER_SIZE
        if weights is None:
            weights = DEFAULT_WEIGHTS if buffer_size == DEFAULT_BUFFER_SIZE else default_weights(buffer_size)

        try:
            buffer_size = int(buffer_size)
        except (TypeError, ValueError):
            raise FusionConfigError("The buffer size should be an integer, not '{}'".format(buffer_size))
        if buffer_size < 1:
            raise FusionConfigError('The buffer size should be at least 1, not {}'.format(buffer_size))

        weights = tuple(float(weight) for weight in weights)
        if len(weights) != buffer_size:
            raise WeightsLengthError('Expected {} weights (one per buffered frame), got {}: {}'
                                     .format(buffer_size, len(weights), ', '.join(str(w) for w in weights)))
        for n, weight in enumerate(weights):
            if weight < 0:
                raise NegativeWeightError('Weight I_{}={} is negative'.format(n, weight))
        if not any(weight > 0 for weight in weights):
            raise FusionConfigError('At least one weight should be positive')

        threshold = float(threshold)
        if threshold < 0:
            raise NegativeThresholdError('The threshold T={} is negative'.format(threshold))

        self.buffer_size = buffer_size
        self.weights = weights
        self.threshold = threshold
        self.targets = None if targets is None else tuple(targets)

    def target_indices(self, categories):
        """The indices of the target categories"""
        if self.targets is None:
            return categories.targets
        return sorted(set(categories.index(target) for target in self.targets))

    def target_flags(self, categories):
        """Boolean lookup table, indexed by label: is this a target category?"""
        if self.targets is None:
            return categories.target_flags()
        return categories.with_targets(self.targets).target_flags()

    def __eq__(self, other):
        return isinstance(other, FusionConfig) and \
            (self.buffer_size, self.weights, self.threshold, self.targets) == \
            (other.buffer_size, other.weights, other.threshold, other.targets)

    def __repr__(self):
        return 'FusionConfig(buffer_size={}, weights={}, threshold={}, targets={})'.format(
            self.buffer_size, self.weights, self.threshold, self.targets)


def _frame_shape(frame):
    if isinstance(frame, (ScoreMap, LabelMap)):
        return frame.shape
    raise TypeError('Expected a score or label map, got {}'.format(type(frame).__name__))


class FrameBuffer(object):
    """Fixed-capacity history of frames, newest first. Pushing onto a full buffer
    evicts the oldest frame."""

    def __init__(self, capacity):
        if capacity < 1:
            raise FusionConfigError('The buffer capacity should be at least 1, not {}'.format(capacity))
        self.capacity = capacity
        self._slots = deque(maxlen=capacity)

    @property
    def fill(self):
        return len(self._slots)

    @property
    def shape(self):
        """Dimensions shared by the buffered frames (None when empty)"""
        if not self._slots:
            return None
        return _frame_shape(self._slots[0])

    @property
    def nbytes(self):
        """Memory held by the buffered frames"""
        return sum(frame.values.nbytes if isinstance(frame, ScoreMap) else frame.labels.nbytes
                   for frame in self._slots)

    def push(self, frame):
        """Store the frame as the present frame (slot 0)"""
        shape = _frame_shape(frame)
        if self._slots and shape != self.shape:
            raise ShapeMismatchError('Expected a frame with dims {}, got {}'
                                     .format('x'.join(str(d) for d in self.shape), 'x'.join(str(d) for d in shape)))
        self._slots.appendleft(frame)
        return self

    def clear(self):
        self._slots.clear()

    def frames(self):
        """The buffered frames, newest first"""
        return list(self._slots)

    def __len__(self):
        return len(self._slots)

    def __getitem__(self, n):
        return self._slots[n]

    def __iter__(self):
        return iter(self._slots)


def push_frame(buffer, frame):
    """Push the frame onto the buffer, and return the updated buffer"""
    return buffer.push(frame)


class AugmentedScoreMap(ScoreMap):
    """The fused, pre-argmax scores of the Attention Module"""
    kind = 'augmented'


def fuse_image_buffer(buffer, config, categories):
    """Override each pixel of the present label map with the target label found in
    the most recent buffered frame that has one. A frame holds one label per pixel,
    so recency alone decides between competing targets and the table order never does."""
    if not buffer.fill:
        raise EmptyBufferError('Cannot fuse an empty image buffer')

    frames = buffer.frames()[:config.buffer_size]
    is_target = config.target_flags(categories)
    fused = frames[0].labels.copy()
    # oldest frame first, so that the most recent target label wins
    for frame in reversed(frames):
        target = is_target[frame.labels]
        fused[target] = frame.labels[target]
    return LabelMap(fused, num_categories=len(categories))


def fuse_attention(buffer, config, categories):
    """Thresholded weighted sum of the target-category probabilities of the buffered
    frames. Non-target channels carry the present frame's probabilities."""
    if not buffer.fill:
        raise EmptyBufferError('Cannot fuse an empty attention buffer')

    frames = buffer.frames()[:config.buffer_size]
    targets = config.target_indices(categories)
    aug = np.array(frames[0].values, dtype=np.float64)

    if targets:
        weighted = np.zeros(aug.shape[:2] + (len(targets),), dtype=np.float64)
        for weight, frame in zip(config.weights, frames):
            weighted += weight * frame.values[:, :, targets].astype(np.float64)
        weighted[weighted < config.threshold] = 0.0
        aug[:, :, targets] = weighted

    augmented = AugmentedScoreMap(aug)
    return augmented, argmax_labels(augmented, categories)


class SegmentationPipeline(object):
    """Stateful, streaming fusion: one frame in, one augmented label map out"""

    def __init__(self, method='baseline', config=None, categories=None):
        if method not in METHODS:
            raise UnknownMethodError("Unknown method '{}'. Expected one of '{}'".format(method, "', '".join(METHODS)))
        if categories is None:
            raise ValueError('A category table is required')
        self.method = method
        self.config = config or FusionConfig()
        self.categories = categories
        self.buffer = FrameBuffer(self.config.buffer_size)
        self.input_kind = None
        self.frame_index = 0
        self._shape = None

    def reset(self):
        """Forget the frame history"""
        self.buffer.clear()
        self.input_kind = None
        self.frame_index = 0
        self._shape = None

    def process(self, frame):
        """Fuse the next frame (a LogitMap or a ProbMap) with the history"""
        if not isinstance(frame, (LogitMap, ProbMap)):
            frame = LogitMap(frame)
        if self._shape is not None and frame.shape != self._shape:
            raise ShapeDriftError('Frame {} has dims {}, expected {} as in the previous frames'
                                  .format(self.frame_index, 'x'.join(str(d) for d in frame.shape),
                                          'x'.join(str(d) for d in self._shape)), frame_index=self.frame_index)
        self._shape = frame.shape
        if self.input_kind is None:
            self.input_kind = frame.kind
            _LOGGER.debug('Pipeline %s consumes %s maps', self.method, frame.kind)
        self.frame_index += 1

        if self.method == 'baseline':
            return argmax_labels(frame, self.categories)

        if self.method == 'image_buffer':
            self.buffer.push(argmax_labels(frame, self.categories))
            labels = fuse_image_buffer(self.buffer, self.config, self.categories)
        else:
            self.buffer.push(frame if isinstance(frame, ProbMap) else softmax_pixelwise(frame))
            labels = fuse_attention(self.buffer, self.config, self.categories)[1]

        if self.buffer.fill < self.config.buffer_size:
            _LOGGER.debug('Frame %d: warm-up, fused %d frame(s)', self.frame_index - 1, self.buffer.fill)
        return labels


def run_pipeline(frames, method='baseline', config=None, categories=None):
    """Fuse a sequence of frames, and return one label map per frame"""
    frames = list(frames)
    if not frames:
        raise ValueError('Cannot run the pipeline on an empty sequence')
    pipeline = SegmentationPipeline(method, config, categories)
    return [pipeline.process(frame) for frame in frames]
