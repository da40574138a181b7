"""Temporal consistency metrics: area and IoU over time, their frame-to-frame
variations, and the standard deviation of those variations.

The variation STD is the population standard deviation (divisor = count) of the
signed frame-to-frame differences."""

import numpy as np
from .core import MAX_CATEGORIES, BinaryMask

STD_CONVENTION = 'population STD (divisor = count) of signed frame-to-frame differences'


class CategoryRangeError(ValueError):
    """The category index is not a category of the label maps"""


class DimensionMismatchError(ValueError):
    """The prediction and the ground truth do not have the same dimensions"""


class SequenceLengthError(ValueError):
    """The prediction and ground truth sequences do not have the same length"""


class SeriesReport(object):
    """A per-frame metric series, its frame-to-frame differences and their variation STD"""

    def __init__(self, per_frame, metric=None):
        self.per_frame = [float(value) for value in per_frame]
        self.metric = metric
        self.diffs = [float(value) for value in np.diff(np.asarray(self.per_frame, dtype=np.float64))]
        self.variation_std = float(np.std(self.diffs)) if self.diffs else 0.0

    @classmethod
    def from_fields(cls, per_frame, diffs, variation_std, metric=None):
        """A report with the given fields, as read from a file (no recomputation)"""
        report = cls.__new__(cls)
        report.per_frame = [float(value) for value in per_frame]
        report.diffs = [float(value) for value in diffs]
        report.variation_std = float(variation_std)
        report.metric = metric
        return report

    def __len__(self):
        return len(self.per_frame)

    def __eq__(self, other):
        return isinstance(other, SeriesReport) and \
            (self.per_frame, self.diffs, self.variation_std, self.metric) == \
            (other.per_frame, other.diffs, other.variation_std, other.metric)

    def __repr__(self):
        return 'SeriesReport(metric={!r}, frames={}, variation_std={!r})'.format(
            self.metric, len(self.per_frame), self.variation_std)


def _check_category(labels, category, num_categories=None):
    num_categories = num_categories or labels.num_categories or MAX_CATEGORIES
    if not 0 <= category < num_categories:
        raise CategoryRangeError('Category {} is not in 0..{}'.format(category, num_categories - 1))


def _check_same_shape(labels):
    shapes = set(label_map.shape for label_map in labels)
    if len(shapes) > 1:
        raise DimensionMismatchError('The label maps do not share the same dims: {}'.format(sorted(shapes)))


def area_series(labels, category, num_categories=None):
    """Number of pixels labelled with the category, in each frame. The category is
    checked against `num_categories`, or the label maps' own category count;
    maps read without a category table accept any 8-bit category."""
    labels = list(labels)
    _check_same_shape(labels)
    for label_map in labels:
        _check_category(label_map, category, num_categories)
    return SeriesReport([int(np.count_nonzero(label_map.labels == category)) for label_map in labels], metric='area')


def mask_area_series(masks):
    """Number of object pixels in each ground truth mask"""
    return SeriesReport([mask.area for mask in masks], metric='area')


def _as_mask(truth):
    return truth.mask if isinstance(truth, BinaryMask) else np.asarray(truth, dtype=bool)


def iou(pred, truth, category, num_categories=None):
    """Intersection over union of the category's pixels with the ground truth mask.
    Two empty sets agree perfectly (IoU = 1)."""
    _check_category(pred, category, num_categories)
    truth = _as_mask(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatchError('Prediction has dims {}, ground truth has dims {}'
                                     .format('x'.join(str(d) for d in pred.shape),
                                             'x'.join(str(d) for d in truth.shape)))
    predicted = pred.labels == category
    union = np.count_nonzero(predicted | truth)
    if not union:
        return 1.0
    return np.count_nonzero(predicted & truth) / float(union)


def iou_series(preds, truths, category, num_categories=None):
    """IoU of each prediction with its ground truth mask"""
    preds = list(preds)
    truths = list(truths)
    if len(preds) != len(truths):
        raise SequenceLengthError('{} predictions for {} ground truth masks'.format(len(preds), len(truths)))
    return SeriesReport([iou(pred, truth, category, num_categories) for pred, truth in zip(preds, truths)], metric='iou')


def error_counts(pred, truth, category, num_categories=None):
    """Number of false positive and false negative pixels for the category"""
    _check_category(pred, category, num_categories)
    truth = _as_mask(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatchError('Prediction has dims {}, ground truth has dims {}'.format(pred.shape, truth.shape))
    predicted = pred.labels == category
    return int(np.count_nonzero(predicted & ~truth)), int(np.count_nonzero(~predicted & truth))


def displacement_overlap(masks):
    """For each consecutive pair of masks, the fraction of the earlier object that
    the later one still covers. Low values predict a ghosting effect when fusing."""
    masks = [_as_mask(mask) for mask in masks]
    overlaps = []
    for previous, current in zip(masks, masks[1:]):
        area = np.count_nonzero(previous)
        overlaps.append(np.count_nonzero(previous & current) / float(area) if area else 1.0)
    return overlaps


class ComparisonTable(object):
    """Variation STD per method and metric, with the lowest value of each metric flagged"""

    def __init__(self, methods, metrics, values, best, references=()):
        self.methods = methods
        self.metrics = metrics
        self.values = values
        self.best = best
        self.references = list(references)

    def rows(self):
        """(method, metric, variation_std, flagged) for each table cell"""
        for method in self.references + self.methods:
            for metric in self.metrics:
                if (method, metric) in self.values:
                    yield method, metric, self.values[method, metric], self.best.get(metric) == method

    def to_text(self):
        """The table, one row per method, best values marked with '*'"""
        width = max(len(name) for name in ['method'] + self.references + self.methods)
        lines = ['# variation STD: {}'.format(STD_CONVENTION),
                 '{}  {}'.format('method'.ljust(width), '  '.join(metric.rjust(14) for metric in self.metrics))]
        for method in self.references + self.methods:
            cells = []
            for metric in self.metrics:
                if (method, metric) not in self.values:
                    cells.append('-'.rjust(14))
                    continue
                flag = '*' if self.best.get(metric) == method else ' '
                cells.append('{:.6g}{}'.format(self.values[method, metric], flag).rjust(14))
            name = method + (' (ref)' if method in self.references else '')
            lines.append('{}  {}'.format(name.ljust(width), '  '.join(cells)).rstrip())
        return '\n'.join(lines) + '\n'

    def __str__(self):
        return self.to_text()


def _named_reports(reports):
    if isinstance(reports, SeriesReport):
        return [reports]
    if isinstance(reports, dict):
        return [reports[metric] for metric in reports]
    return list(reports)


def compare_methods(reports, references=None):
    """Tabulate the variation STD of each method, for each metric. `reports` maps a
    method name to its SeriesReport(s). Reference rows (e.g. the ground truth) are
    shown but never flagged. Equal values: the first method by name is flagged."""
    if not reports:
        raise ValueError('Nothing to compare')
    references = references or {}

    values = {}
    metrics = []
    for method, method_reports in list(references.items()) + list(reports.items()):
        for report in _named_reports(method_reports):
            metric = report.metric or 'value'
            if metric not in metrics:
                metrics.append(metric)
            values[method, metric] = report.variation_std

    best = {}
    for metric in metrics:
        candidates = sorted((values[method, metric], method) for method in reports if (method, metric) in values)
        if candidates:
            best[metric] = candidates[0][1]

    return ComparisonTable(list(reports), metrics, values, best, references=list(references))
