"""Dense per-pixel maps, the category table, and the softmax/argmax primitives"""

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
import numpy as np

# Probabilities must sum to one within this tolerance, pixelwise
PROBABILITY_TOLERANCE = 1e-6

# Label maps are stored on 8 bits
MAX_CATEGORIES = 256

# Do not split frames with fewer rows than this across threads
_MIN_ROWS_PER_THREAD = 32

# Cityscapes categories, in training order
_CITYSCAPES_CATEGORIES = ['road', 'sidewalk', 'building', 'wall', 'fence', 'pole', 'traffic light',
                          'traffic sign', 'vegetation', 'terrain', 'sky', 'person', 'rider', 'car',
                          'truck', 'bus', 'train', 'motorcycle', 'bicycle']
_CITYSCAPES_TARGETS = ['person', 'rider', 'car', 'bicycle']


class InvalidMapError(ValueError):
    """A score, probability or label map that does not satisfy its invariants"""

    def __init__(self, message, position=None):
        super(InvalidMapError, self).__init__(message)
        self.position = position


class CategoryTableError(ValueError):
    """Error in the definition of the category table"""


def thread_count():
    """Number of threads available for per-pixel work, as capped by TEMPSEG_THREADS (0 = auto)"""
    value = os.environ.get('TEMPSEG_THREADS', '0').strip() or '0'
    try:
        threads = int(value)
    except ValueError:
        raise ValueError("TEMPSEG_THREADS should be a non-negative integer, not '{}'".format(value))
    if threads < 0:
        raise ValueError("TEMPSEG_THREADS should be a non-negative integer, not '{}'".format(value))
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def map_row_blocks(func, height, threads=None):
    """Call func(start, stop) on row blocks that cover [0, height). The blocks
    are processed in parallel when more than one thread is available."""
    threads = thread_count() if threads is None else threads
    threads = max(1, min(threads, height // _MIN_ROWS_PER_THREAD))
    if threads == 1:
        func(0, height)
        return

    bounds = np.linspace(0, height, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        # consume the results so that exceptions are raised here
        list(executor.map(lambda block: func(*block), zip(bounds[:-1], bounds[1:])))


class ScoreMap(object):
    """An H x W x C array of per-pixel, per-category real values"""
    kind = 'scores'

    def __init__(self, values):
        values = np.asarray(values)
        if values.ndim != 3:
            raise InvalidMapError('A {} map should have three dimensions (H, W, C), not {}'
                                  .format(self.kind, values.shape))
        self.values = values

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def channels(self):
        return self.values.shape[2]

    @property
    def shape(self):
        return self.values.shape

    def __eq__(self, other):
        return type(self) is type(other) and self.values.dtype == other.values.dtype \
            and np.array_equal(self.values, other.values)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return '{}(height={}, width={}, channels={})'.format(
            type(self).__name__, self.height, self.width, self.channels)


def _check_dims(values, kind):
    height, width, channels = values.shape
    if height < 1 or width < 1:
        raise InvalidMapError('A {} map should have at least one pixel, got {}x{}'.format(kind, height, width))
    if channels < 2:
        raise InvalidMapError('A {} map should have at least two channels, got {}'.format(kind, channels))


def _check_finite(values, kind):
    finite = np.isfinite(values)
    if not finite.all():
        row, col, channel = (int(i) for i in np.argwhere(~finite)[0])
        raise InvalidMapError('Non-finite value {} in {} map at row={}, col={}, channel={}'
                              .format(values[row, col, channel], kind, row, col, channel),
                              position=(row, col, channel))


class LogitMap(ScoreMap):
    """Raw per-pixel class scores, as exported by the segmentation model (32-bit floats)"""
    kind = 'logits'

    def __init__(self, values):
        super(LogitMap, self).__init__(np.asarray(values, dtype=np.float32))
        _check_dims(self.values, self.kind)
        _check_finite(self.values, self.kind)


class ProbMap(ScoreMap):
    """Softmax-normalized per-pixel probabilities (32-bit floats, like the tensor files)"""
    kind = 'probabilities'

    def __init__(self, values, validate=True):
        super(ProbMap, self).__init__(np.asarray(values, dtype=np.float32))
        if validate:
            self.validate()

    def validate(self):
        """Raise an InvalidMapError if the probabilities are out of [0, 1], or do not sum to one"""
        values = self.values
        _check_dims(values, self.kind)
        _check_finite(values, self.kind)
        outside = (values < 0) | (values > 1)
        if outside.any():
            row, col, channel = (int(i) for i in np.argwhere(outside)[0])
            raise InvalidMapError('Probability {} out of [0, 1] at row={}, col={}, channel={}'
                                  .format(values[row, col, channel], row, col, channel),
                                  position=(row, col, channel))
        sums = values.sum(axis=2, dtype=np.float64)
        wrong = np.abs(sums - 1.0) > PROBABILITY_TOLERANCE
        if wrong.any():
            row, col = (int(i) for i in np.argwhere(wrong)[0])
            raise InvalidMapError('Probabilities sum to {} at row={}, col={}'.format(sums[row, col], row, col),
                                  position=(row, col, None))


class LabelMap(object):
    """An H x W map of 8-bit category indices"""

    def __init__(self, labels, num_categories=None):
        labels = np.asarray(labels)
        if labels.ndim != 2:
            raise InvalidMapError('A label map should have two dimensions (H, W), not {}'.format(labels.shape))
        if labels.shape[0] < 1 or labels.shape[1] < 1:
            raise InvalidMapError('A label map should have at least one pixel, got {}'.format(labels.shape))
        if labels.dtype != np.uint8:
            if labels.size and (labels.min() < 0 or labels.max() >= MAX_CATEGORIES):
                raise InvalidMapError('Labels should be in [0, {}), found {}..{}'
                                      .format(MAX_CATEGORIES, labels.min(), labels.max()))
            labels = labels.astype(np.uint8)
        if num_categories is not None:
            if labels.max() >= num_categories:
                row, col = (int(i) for i in np.argwhere(labels >= num_categories)[0])
                raise InvalidMapError('Label {} at row={}, col={} is not a category index (C={})'
                                      .format(labels[row, col], row, col, num_categories), position=(row, col, None))
        self.labels = labels
        self.num_categories = num_categories

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def shape(self):
        return self.labels.shape

    def mask(self, category):
        """The boolean mask of the pixels labelled with the given category"""
        return self.labels == category

    def target_mask(self, categories):
        """The boolean mask of the pixels labelled with any target category"""
        return categories.target_flags()[self.labels]

    def __eq__(self, other):
        return isinstance(other, LabelMap) and np.array_equal(self.labels, other.labels)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'LabelMap(height={}, width={})'.format(self.height, self.width)


class BinaryMask(object):
    """An H x W ground-truth mask (True = object)"""

    def __init__(self, mask):
        mask = np.asarray(mask)
        if mask.ndim != 2:
            raise InvalidMapError('A binary mask should have two dimensions (H, W), not {}'.format(mask.shape))
        self.mask = mask.astype(bool)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def area(self):
        return int(self.mask.sum())

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and np.array_equal(self.mask, other.mask)

    def __ne__(self, other):
        return not self == other


class Category(object):
    """One entry of the category table"""

    def __init__(self, index, name, is_target=False):
        self.index = int(index)
        self.name = str(name)
        self.is_target = bool(is_target)

    def __eq__(self, other):
        return isinstance(other, Category) and \
            (self.index, self.name, self.is_target) == (other.index, other.name, other.is_target)

    def __repr__(self):
        return 'Category({!r}, {!r}, {!r})'.format(self.index, self.name, self.is_target)


class CategoryTable(object):
    """The ordered list of categories, with their target flag"""

    def __init__(self, entries):
        entries = [entry if isinstance(entry, Category) else Category(*entry) for entry in entries]
        if not entries:
            raise CategoryTableError('The category table should have at least one entry')
        if len(entries) > MAX_CATEGORIES:
            raise CategoryTableError('At most {} categories fit in an 8-bit label map, got {}'
                                     .format(MAX_CATEGORIES, len(entries)))
        indices = sorted(entry.index for entry in entries)
        if indices != list(range(len(entries))):
            raise CategoryTableError('Category indices should be 0..{} without gaps or duplicates, got {}'
                                     .format(len(entries) - 1, indices))
        names = [entry.name for entry in entries]
        duplicates = sorted(set(name for name in names if names.count(name) > 1))
        if duplicates:
            raise CategoryTableError("Duplicate category name(s) '{}'".format("', '".join(duplicates)))
        self.entries = entries
        self._by_index = {entry.index: entry for entry in entries}

    @classmethod
    def cityscapes(cls, targets=None):
        """The 19 Cityscapes categories, with person, rider, car and bicycle as default targets"""
        targets = _CITYSCAPES_TARGETS if targets is None else targets
        table = cls([(i, name, False) for i, name in enumerate(_CITYSCAPES_CATEGORIES)])
        return table.with_targets(targets)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index):
        return self._by_index[index]

    def __eq__(self, other):
        return isinstance(other, CategoryTable) and self.entries == other.entries

    def __repr__(self):
        return 'CategoryTable({!r})'.format(self.entries)

    @property
    def targets(self):
        """The target category indices, in increasing order"""
        return sorted(entry.index for entry in self.entries if entry.is_target)

    def target_flags(self, size=MAX_CATEGORIES):
        """A boolean lookup table: is this label a target category?"""
        flags = np.zeros(max(size, len(self)), dtype=bool)
        flags[self.targets] = True
        return flags

    def index(self, name_or_index):
        """The index of the category with the given name (or index)"""
        if isinstance(name_or_index, (int, np.integer)):
            if name_or_index not in self._by_index:
                raise CategoryTableError('Category index {} is not in 0..{}'.format(name_or_index, len(self) - 1))
            return int(name_or_index)
        text = str(name_or_index).strip()
        for entry in self.entries:
            if entry.name == text:
                return entry.index
        if text.isdigit():
            return self.index(int(text))
        raise CategoryTableError("Unknown category '{}'. Expected one of '{}'"
                                 .format(text, "', '".join(entry.name for entry in self.entries)))

    def with_targets(self, names_or_indices):
        """A copy of the table with the given target categories"""
        targets = set(self.index(item) for item in names_or_indices)
        return CategoryTable([Category(entry.index, entry.name, entry.index in targets) for entry in self.entries])


def softmax_pixelwise(scores):
    """Transform a logit map into a probability map, pixel by pixel. The exponentials
    are summed in 64-bit floats, the probabilities are stored on 32 bits.
    Probability maps are returned unchanged."""
    if isinstance(scores, ProbMap):
        warnings.warn('softmax_pixelwise received a probability map, which is returned unchanged')
        return scores
    if not isinstance(scores, LogitMap):
        scores = LogitMap(scores)

    logits = scores.values
    probs = np.empty(logits.shape, dtype=np.float32)

    def softmax_rows(start, stop):
        block = logits[start:stop].astype(np.float64)
        block -= block.max(axis=2, keepdims=True)
        np.exp(block, out=block)
        block /= block.sum(axis=2, keepdims=True)
        probs[start:stop] = block

    map_row_blocks(softmax_rows, logits.shape[0])
    return ProbMap(probs, validate=False)


def argmax_labels(scores, categories):
    """The label map of the highest-scoring channel at each pixel. Ties go to the lowest index."""
    if not isinstance(scores, ScoreMap):
        scores = LogitMap(scores)
    if scores.channels != len(categories):
        raise InvalidMapError('The {} map has {} channels, but the category table has {} entries'
                              .format(scores.kind, scores.channels, len(categories)))
    labels = np.argmax(scores.values, axis=2).astype(np.uint8)
    return LabelMap(labels, num_categories=len(categories))
