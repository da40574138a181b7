"""Temporal consistency for per-frame semantic segmentation of video"""

from .core import LogitMap, ProbMap, LabelMap, BinaryMask, Category, CategoryTable, softmax_pixelwise, argmax_labels
from .fusion import METHODS, FusionConfig, FrameBuffer, SegmentationPipeline, push_frame, fuse_image_buffer, \
    fuse_attention, run_pipeline
from .metrics import SeriesReport, area_series, iou, iou_series, compare_methods
from .synthgen import SynthConfig, generate
from .segio import read_tensor, write_tensor, read_labelmap, write_labelmap, write_metrics_csv
from .version import __version__

__all__ = ['LogitMap', 'ProbMap', 'LabelMap', 'BinaryMask', 'Category', 'CategoryTable',
           'softmax_pixelwise', 'argmax_labels',
           'METHODS', 'FusionConfig', 'FrameBuffer', 'SegmentationPipeline', 'push_frame',
           'fuse_image_buffer', 'fuse_attention', 'run_pipeline',
           'SeriesReport', 'area_series', 'iou', 'iou_series', 'compare_methods',
           'SynthConfig', 'generate',
           'read_tensor', 'write_tensor', 'read_labelmap', 'write_labelmap', 'write_metrics_csv',
           '__version__']
