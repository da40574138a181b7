"""Bit-exact file formats: SGT1 tensor files, PGM label maps and masks, PPM color
renderings and the metrics CSV.

An SGT1 file is a 17 byte header - the magic 'SGT1', one kind byte (0 = logits,
1 = probabilities), then height, width and channels as little-endian unsigned
32-bit integers - followed by H*W*C little-endian IEEE-754 32-bit floats,
row-major, channel-fastest."""

import csv
import io
import logging
import struct
import numpy as np
from .core import LogitMap, ProbMap, LabelMap, BinaryMask, InvalidMapError
from .metrics import SeriesReport

_LOGGER = logging.getLogger(__name__)

TENSOR_MAGIC = b'SGT1'
TENSOR_KINDS = {0: LogitMap, 1: ProbMap}
_TENSOR_HEADER = struct.Struct('<4sBIII')
# Refuse to allocate tensors larger than this
MAX_TENSOR_BYTES = 2 ** 33


CSV_HEADER = ['frame', 'area', 'area_diff', 'iou', 'iou_diff']
CSV_SUMMARY = '__std__'

# Cityscapes colors for the first 19 categories
_PALETTE = [(128, 64, 128), (244, 35, 232), (70, 70, 70), (102, 102, 156), (190, 153, 153), (153, 153, 153),
            (250, 170, 30), (220, 220, 0), (107, 142, 35), (152, 251, 152), (70, 130, 180), (220, 20, 60),
            (255, 0, 0), (0, 0, 142), (0, 0, 70), (0, 60, 100), (0, 80, 100), (0, 0, 230), (119, 11, 32)]


class TensorFormatError(ValueError):
    """The file is not a well-formed SGT1 tensor file"""


class BadMagicError(TensorFormatError):
    """The file does not start with the SGT1 magic"""


class TruncatedPayloadError(TensorFormatError):
    """The payload is shorter than the header dimensions require"""


class DimensionOverflowError(TensorFormatError):
    """The header dimensions are zero, or too large to be allocated"""


class ProbabilityInvariantError(TensorFormatError):
    """A probability tensor whose pixels do not sum to one"""


class LabelMapFormatError(ValueError):
    """The file is not a binary PGM with maxval 255"""


class LabelRangeError(ValueError):
    """A label is not the index of a category"""


def tensor_to_bytes(scores):
    """The SGT1 representation of a logit or probability map"""
    kind = 1 if isinstance(scores, ProbMap) else 0
    height, width, channels = scores.shape
    header = _TENSOR_HEADER.pack(TENSOR_MAGIC, kind, height, width, channels)
    return header + np.ascontiguousarray(scores.values, dtype='<f4').tobytes()


def tensor_from_bytes(data, source='<bytes>'):
    """Decode an SGT1 byte string"""
    if len(data) < _TENSOR_HEADER.size:
        if not TENSOR_MAGIC.startswith(data[:4]):
            raise BadMagicError('{} is not an SGT1 tensor file'.format(source))
        raise TruncatedPayloadError('{} is truncated: {} bytes, shorter than the {} byte header'
                                    .format(source, len(data), _TENSOR_HEADER.size))
    magic, kind, height, width, channels = _TENSOR_HEADER.unpack_from(data)
    if magic != TENSOR_MAGIC:
        raise BadMagicError('{} is not an SGT1 tensor file (magic {!r})'.format(source, magic))
    if kind not in TENSOR_KINDS:
        raise TensorFormatError('{} has an unknown kind byte {}'.format(source, kind))
    if not height or not width or not channels:
        raise DimensionOverflowError('{} has a zero dimension: {}x{}x{}'.format(source, height, width, channels))
    expected = height * width * channels * 4
    if expected > MAX_TENSOR_BYTES:
        raise DimensionOverflowError('{} declares {}x{}x{} floats = {} bytes, more than the {} bytes limit'
                                     .format(source, height, width, channels, expected, MAX_TENSOR_BYTES))
    payload = len(data) - _TENSOR_HEADER.size
    if payload < expected:
        raise TruncatedPayloadError('{} is truncated: {}x{}x{} floats need {} bytes, found {}'
                                    .format(source, height, width, channels, expected, payload))
    if payload > expected:
        raise TensorFormatError('{} has {} unexpected bytes after the payload'.format(source, payload - expected))

    values = np.frombuffer(data, dtype='<f4', offset=_TENSOR_HEADER.size).reshape(height, width, channels)
    values = values.astype(np.float32)
    try:
        return TENSOR_KINDS[kind](values)
    except InvalidMapError as err:
        if kind == 1:
            raise ProbabilityInvariantError('{}: {}'.format(source, err))
        raise TensorFormatError('{}: {}'.format(source, err))


def write_tensor(path, scores):
    """Write a logit or probability map to an SGT1 file"""
    with open(path, 'wb') as stream:
        stream.write(tensor_to_bytes(scores))
    _LOGGER.debug('Wrote %s map %s to %s', scores.kind, 'x'.join(str(d) for d in scores.shape), path)


def read_tensor(path):
    """Read a logit or probability map from an SGT1 file"""
    with open(path, 'rb') as stream:
        return tensor_from_bytes(stream.read(), source=path)


def read_tensor_header(path):
    """The (kind, height, width, channels) of an SGT1 file"""
    with open(path, 'rb') as stream:
        data = stream.read(_TENSOR_HEADER.size)
    if len(data) < _TENSOR_HEADER.size:
        raise TruncatedPayloadError('{} is shorter than the SGT1 header'.format(path))
    magic, kind, height, width, channels = _TENSOR_HEADER.unpack(data)
    if magic != TENSOR_MAGIC:
        raise BadMagicError('{} is not an SGT1 tensor file (magic {!r})'.format(path, magic))
    return kind, height, width, channels


def _pnm_bytes(magic, pixels):
    height, width = pixels.shape[:2]
    header = '{}\n{} {}\n255\n'.format(magic, width, height).encode('ascii')
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def _pnm_header(data, source):
    """The magic, width, height and maxval of a netpbm image, and the offset of its pixels"""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b'#'):
            if data[pos:pos + 1] == b'#':
                end = data.find(b'\n', pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b'#':
            pos += 1
        if start == pos:
            raise LabelMapFormatError('{} has an incomplete netpbm header'.format(source))
        tokens.append(data[start:pos])
        if len(tokens) == 1 and tokens[0] != b'P5':
            raise LabelMapFormatError('{} is a {!r} image, expected a binary PGM (P5)'.format(source, tokens[0][:8]))
    if not all(token.isdigit() for token in tokens[1:]):
        raise LabelMapFormatError('{} has a malformed netpbm header {!r}'.format(source, b' '.join(tokens)))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise LabelMapFormatError('{} has no pixel data'.format(source))
    return tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3]), pos + 1


def _pgm_pixels(data, source):
    _, width, height, maxval, offset = _pnm_header(data, source)
    if maxval != 255:
        raise LabelMapFormatError('{} has maxval {}, expected 255'.format(source, maxval))
    if not width or not height:
        raise LabelMapFormatError('{} has an empty {}x{} image'.format(source, width, height))
    pixels = data[offset:]
    if len(pixels) != width * height:
        raise LabelMapFormatError('{} has {} pixel bytes, expected {}x{}={}'
                                  .format(source, len(pixels), width, height, width * height))
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def write_labelmap(path, labels):
    """Write a label map as a binary PGM, one byte (the category index) per pixel"""
    with open(path, 'wb') as stream:
        stream.write(_pnm_bytes('P5', labels.labels))


def read_labelmap(path, categories=None):
    """Read a label map from a binary PGM. Labels are checked against the category table, if any."""
    with open(path, 'rb') as stream:
        labels = _pgm_pixels(stream.read(), path)
    if categories is None:
        return LabelMap(labels)
    if labels.max() >= len(categories):
        row, col = (int(i) for i in np.argwhere(labels >= len(categories))[0])
        raise LabelRangeError('{}: label {} at row={}, col={} is not one of the {} categories'
                              .format(path, labels[row, col], row, col, len(categories)))
    return LabelMap(labels, num_categories=len(categories))


def write_mask(path, mask):
    """Write a ground truth mask as a binary PGM (0 = background, 255 = object)"""
    with open(path, 'wb') as stream:
        stream.write(_pnm_bytes('P5', mask.mask.astype(np.uint8) * 255))


def read_mask(path):
    """Read a ground truth mask from a binary PGM (nonzero = object)"""
    with open(path, 'rb') as stream:
        return BinaryMask(_pgm_pixels(stream.read(), path) > 0)


def palette(num_categories):
    """One RGB color per category: the Cityscapes colors, then a fixed pseudo-random sequence"""
    colors = list(_PALETTE[:num_categories])
    for index in range(len(colors), num_categories):
        # multiplicative hashing keeps the extra colors stable and distinct
        value = (index * 2654435761) & 0xFFFFFF
        colors.append(((value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF))
    return np.array(colors, dtype=np.uint8)


def write_color_ppm(path, labels, num_categories=None):
    """Render a label map through the category palette, as a binary PPM (P6)"""
    num_categories = num_categories or labels.num_categories or int(labels.labels.max()) + 1
    with open(path, 'wb') as stream:
        stream.write(_pnm_bytes('P6', palette(num_categories)[labels.labels]))


def _format_number(value):
    if value is None:
        return ''
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def metrics_csv_text(area=None, iou=None):
    """The metrics CSV: one row per frame, then the variation STD row"""
    frames = len(area if area is not None else iou)
    if area is not None and iou is not None and len(area) != len(iou):
        raise ValueError('The area and IoU series have different lengths: {} and {}'.format(len(area), len(iou)))

    def cells(report, t):
        if report is None:
            return ['', '']
        return [_format_number(report.per_frame[t]), _format_number(report.diffs[t - 1]) if t else '']

    def std(report):
        return ['', '' if report is None else _format_number(report.variation_std)]

    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for t in range(frames):
        writer.writerow([str(t)] + cells(area, t) + cells(iou, t))
    writer.writerow([CSV_SUMMARY] + std(area) + std(iou))
    return stream.getvalue()


def write_metrics_csv(path, area=None, iou=None):
    """Write the area and/or IoU series of one method to a CSV file"""
    with io.open(path, 'w', encoding='utf-8', newline='') as stream:
        stream.write(metrics_csv_text(area, iou))


def read_metrics_csv(path):
    """Read a metrics CSV back into {'area': SeriesReport, 'iou': SeriesReport} (absent columns are omitted)"""
    with io.open(path, encoding='utf-8', newline='') as stream:
        rows = list(csv.reader(stream))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError('{} does not start with the header {}'.format(path, ','.join(CSV_HEADER)))
    data = [row for row in rows[1:] if row[0] != CSV_SUMMARY]
    summary = [row for row in rows[1:] if row[0] == CSV_SUMMARY]
    if len(summary) != 1:
        raise ValueError('{} should have exactly one {} row'.format(path, CSV_SUMMARY))

    reports = {}
    for metric, column in [('area', 1), ('iou', 3)]:
        if not data or data[0][column] == '':
            continue
        per_frame = [float(row[column]) for row in data]
        diffs = [float(row[column + 1]) for row in data[1:]]
        reports[metric] = SeriesReport.from_fields(per_frame, diffs, float(summary[0][column + 1]), metric=metric)
    return reports
