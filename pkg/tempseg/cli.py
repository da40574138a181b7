"""`tempseg` as a command line tool"""

import os
import re
import sys
import logging
import argparse
from .core import CategoryTableError, thread_count
from .fusion import METHODS, FusionConfigError, ShapeMismatchError, UnknownMethodError, SegmentationPipeline
from .metrics import CategoryRangeError, DimensionMismatchError, SequenceLengthError
from .metrics import area_series, mask_area_series, iou_series, error_counts, displacement_overlap, compare_methods
from .synthgen import SynthConfigError, generate, dropout_frames, synthetic_categories
from .segio import TensorFormatError, LabelMapFormatError, LabelRangeError
from .segio import read_tensor, write_tensor, write_labelmap, read_labelmap, write_mask, read_mask
from .segio import write_color_ppm, write_metrics_csv
from .config import ConfigError, parse_option, read_config
from .manifest import ManifestError, SequenceManifest, read_manifest, write_manifest
from .version import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SHAPE = 4
EXIT_ALIGNMENT = 5

FRAME_PATTERN = 'frame_{:05d}'
MANIFEST_NAME = 'manifest.yml'
_FRAME_FILE_RE = re.compile(r'^frame_(\d{5})\.pgm$')

_LOGGER = logging.getLogger('tempseg')

# Most specific families first
_EXIT_CODES = [
    ((SequenceLengthError,), EXIT_ALIGNMENT),
    ((ShapeMismatchError, DimensionMismatchError), EXIT_SHAPE),
    ((ConfigError, FusionConfigError, SynthConfigError, CategoryTableError, ManifestError, UnknownMethodError,
      CategoryRangeError), EXIT_CONFIG),
    ((IOError, OSError, TensorFormatError, LabelMapFormatError, LabelRangeError), EXIT_IO)]


class MissingFramesError(IOError):
    """Prediction files are missing in the middle of a sequence"""


def exit_code(error):
    """The exit code that corresponds to the given error"""
    for families, code in _EXIT_CODES:
        if isinstance(error, families):
            return code
    raise error


class ExperimentSpec(object):
    """What `tempseg fuse` runs: a sequence, a method, a fusion config and an output directory"""

    def __init__(self, manifest, method='baseline', config=None, output_dir='.', report_format='csv'):
        if method not in METHODS:
            raise UnknownMethodError("Unknown method '{}'. Expected one of '{}'".format(method, "', '".join(METHODS)))
        if report_format != 'csv':
            raise ConfigError("Unknown report format '{}'. Only 'csv' is supported".format(report_format))
        for path in [manifest, config]:
            if path is not None and not os.path.isfile(path):
                raise IOError("File '{}' does not exist".format(path))
        self.manifest = manifest
        self.method = method
        self.config = config
        self.output_dir = output_dir
        self.report_format = report_format


def parse_tempseg_args(args=None):
    """Command line parser for tempseg"""

    class RawTextArgumentDefaultsHelpFormatter(argparse.RawTextHelpFormatter,
                                               argparse.ArgumentDefaultsHelpFormatter):
        """Keep the raw formatting in command line help, plus show the default values"""

    parser = argparse.ArgumentParser(
        prog='tempseg',
        description='Temporal consistency for per-frame semantic segmentation',
        formatter_class=RawTextArgumentDefaultsHelpFormatter)
    parser.add_argument('--version', '-v', action='store_true', help="Show tempseg's version number and exit")
    parser.add_argument('--quiet', '-q', action='store_true',
                        help='Only report warnings and errors on stderr')
    parser.add_argument('--verbose', action='store_true',
                        help='Report debug information on stderr')

    commands = parser.add_subparsers(dest='command', metavar='{synth,fuse,eval}')

    # Synthetic sequences
    synth = commands.add_parser('synth', formatter_class=RawTextArgumentDefaultsHelpFormatter,
                                help='Generate a synthetic sequence with injected detection faults')
    synth.add_argument('config', nargs='?',
                       help='Synthetic sequence configuration (key = value lines).\n'
                            'All options take their default value when missing.')
    synth.add_argument('-o', '--output-dir', default='synth',
                       help='Directory for the frames, the masks and the manifest')
    synth.add_argument('--seed', help='Override the seed of the configuration')
    synth.add_argument('--frames', help='Override the number of frames')
    synth.add_argument('--dropout',
                       help='Override the dropout: a probability per frame, e.g. 0.2,\n'
                            'or a list of frame indices, e.g. 8,9,10')

    # Fusion
    fuse = commands.add_parser('fuse', formatter_class=RawTextArgumentDefaultsHelpFormatter,
                               help='Segment each frame of a sequence, with or without temporal fusion')
    fuse.add_argument('manifest', help='The sequence manifest')
    fuse.add_argument('--method', '-m', default='baseline', choices=METHODS,
                      help='baseline: per-frame argmax\n'
                           'image_buffer: union of the target labels of the last N frames\n'
                           'attention: thresholded weighted sum of the last N probability maps')
    fuse.add_argument('--config', '-c', help='Fusion configuration (key = value lines)')
    fuse.add_argument('--buffer-size', help='Number N of fused frames (default 4)')
    fuse.add_argument('--weights', help='Frame weights I_0..I_{N-1}, present frame first (default 4,3,2,1)')
    fuse.add_argument('--threshold', help='Threshold T of the attention method (default 1)')
    fuse.add_argument('--targets', help='Target categories, e.g. person,rider,car,bicycle.\n'
                                        'Defaults to the targets of the manifest.')
    fuse.add_argument('-o', '--output-dir', default='labels', help='Directory for the label maps')
    fuse.add_argument('--color', action='store_true',
                      help='Also write a color rendering of each label map (.ppm)')

    # Evaluation
    evaluate = commands.add_parser('eval', formatter_class=RawTextArgumentDefaultsHelpFormatter,
                                   help='Area and IoU over time, and their variation STD')
    evaluate.add_argument('predictions', nargs='+',
                          help='Directories of predicted label maps, as written by tempseg fuse.\n'
                               'Use name=path to name the method, otherwise the directory\n'
                               'name is used.')
    evaluate.add_argument('--manifest', required=True, help='The manifest of the sequence')
    evaluate.add_argument('--category',
                          help='The evaluated category (name or index).\n'
                               'Defaults to the first target category.')
    evaluate.add_argument('-o', '--output-dir', default='.', help='Directory for the metrics CSV files')
    evaluate.add_argument('--counts', action='store_true',
                          help='Also report the total false positive and false negative pixels')

    args = parser.parse_args(args)
    if not args.version and args.command is None:
        parser.error('Please choose a command: synth, fuse or eval')
    return args


def _configure_logging(args):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('[tempseg] %(message)s'))
    _LOGGER.handlers = [handler]
    _LOGGER.propagate = False
    _LOGGER.setLevel(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)


def tempseg(args=None):
    """Entry point for the tempseg script"""
    args = parse_tempseg_args(args)
    if args.version:
        sys.stdout.write(__version__ + '\n')
        return EXIT_OK

    _configure_logging(args)

    try:
        try:
            _LOGGER.debug('Using up to %d thread(s)', thread_count())
        except ValueError as err:
            raise ConfigError(str(err))

        if args.command == 'synth':
            overrides = {key: parse_option(key, getattr(args, key), 'synth')
                         for key in ['seed', 'frames', 'dropout'] if getattr(args, key) is not None}
            config = read_config(args.config, 'synth', **overrides)
            cmd_synth(config, args.output_dir)
        elif args.command == 'fuse':
            overrides = {key: parse_option(key, getattr(args, key), 'fusion')
                         for key in ['buffer_size', 'weights', 'threshold', 'targets']
                         if getattr(args, key) is not None}
            spec = ExperimentSpec(args.manifest, args.method, args.config, args.output_dir)
            cmd_fuse(spec, color=args.color, **overrides)
        else:
            cmd_eval(args.predictions, args.manifest, args.category, args.output_dir, counts=args.counts)
    except Exception as err:
        code = exit_code(err)
        sys.stderr.write('[tempseg] Error: {}\n'.format(err))
        return code

    return EXIT_OK


def cmd_synth(config, output_dir):
    """Write the frames, masks and manifest of a synthetic sequence. Return the manifest path."""
    logits, masks = generate(config)
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)

    frames = []
    mask_files = []
    for t, (frame, mask) in enumerate(zip(logits, masks)):
        frames.append(FRAME_PATTERN.format(t) + '.sgt')
        mask_files.append('mask_{:05d}.pgm'.format(t))
        write_tensor(os.path.join(output_dir, frames[-1]), frame)
        write_mask(os.path.join(output_dir, mask_files[-1]), mask)

    dropped = dropout_frames(config)
    overlaps = displacement_overlap(masks)
    if overlaps and min(overlaps) < 0.5:
        _LOGGER.warning('The object moves by more than half its size between frames: expect ghosting')

    manifest = SequenceManifest(frames, synthetic_categories(config), masks=mask_files,
                                metadata={'generator': 'synthgen', 'seed': config.seed, 'dropout_frames': dropped})
    manifest_path = os.path.join(output_dir, MANIFEST_NAME)
    write_manifest(manifest_path, manifest)
    _LOGGER.info('Wrote %d frames to %s (dropout at %s)', len(frames), output_dir, dropped)
    sys.stdout.write(manifest_path + '\n')
    return manifest_path


def cmd_fuse(spec, color=False, **overrides):
    """Write one label map per frame of the sequence, fused with the requested method"""
    manifest = read_manifest(spec.manifest)
    manifest.validate()
    config = read_config(spec.config, 'fusion', **overrides)
    categories = manifest.categories
    targets = config.target_indices(categories)
    if spec.method != 'baseline' and not targets:
        _LOGGER.warning('No target category: %s fusion is the identity', spec.method)

    if not os.path.isdir(spec.output_dir):
        os.makedirs(spec.output_dir)

    pipeline = SegmentationPipeline(spec.method, config, categories)
    paths = []
    for t, frame_path in enumerate(manifest.frame_paths()):
        labels = pipeline.process(read_tensor(frame_path))
        paths.append(os.path.join(spec.output_dir, FRAME_PATTERN.format(t) + '.pgm'))
        write_labelmap(paths[-1], labels)
        if color:
            write_color_ppm(os.path.join(spec.output_dir, FRAME_PATTERN.format(t) + '.ppm'), labels)

    _LOGGER.info('Fused %d frames of %s with method %s (input: %s, targets: %s)', len(paths), spec.manifest,
                 spec.method, pipeline.input_kind, ', '.join(categories[index].name for index in targets) or 'none')
    return paths


def prediction_files(pred_dir):
    """The label map files in the directory, in frame order. Raise if frames are missing."""
    if not os.path.isdir(pred_dir):
        raise IOError("Prediction directory '{}' does not exist".format(pred_dir))
    indexed = sorted((int(match.group(1)), name) for match, name in
                     ((_FRAME_FILE_RE.match(name), name) for name in os.listdir(pred_dir)) if match)
    for expected, (index, _) in enumerate(indexed):
        if index != expected:
            raise MissingFramesError("Prediction '{}' is missing in '{}'"
                                     .format(FRAME_PATTERN.format(expected) + '.pgm', pred_dir))
    return [os.path.join(pred_dir, name) for _, name in indexed]


def _named_directories(predictions):
    named = []
    for item in predictions:
        if '=' in item:
            name, path = item.split('=', 1)
        else:
            path = item
            name = os.path.basename(os.path.normpath(path))
        if name in [other for other, _ in named]:
            raise ConfigError("Two prediction directories are named '{}'. Use name=path".format(name))
        named.append((name, path))
    return named


def cmd_eval(predictions, manifest_path, category=None, output_dir='.', counts=False):
    """Write the metrics CSV of each method, and print their comparison table"""
    manifest = read_manifest(manifest_path)
    categories = manifest.categories
    if category is None:
        if not categories.targets:
            raise ConfigError('The manifest has no target category: please use --category')
        category = categories.targets[0]
    category = categories.index(category)

    masks = None
    if manifest.masks is not None:
        masks = [read_mask(path) for path in manifest.mask_paths()]

    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)

    reports = {}
    totals = {}
    for name, pred_dir in _named_directories(predictions):
        files = prediction_files(pred_dir)
        if len(files) != len(manifest.frames):
            raise SequenceLengthError("'{}' has {} predictions, the sequence has {} frames"
                                      .format(pred_dir, len(files), len(manifest.frames)))
        preds = [read_labelmap(path, categories) for path in files]
        area = area_series(preds, category)
        iou = iou_series(preds, masks, category) if masks is not None else None
        write_metrics_csv(os.path.join(output_dir, name + '.csv'), area=area, iou=iou)
        reports[name] = [report for report in (area, iou) if report is not None]
        if counts and masks is not None:
            pairs = [error_counts(pred, mask, category) for pred, mask in zip(preds, masks)]
            totals[name] = (sum(fp for fp, _ in pairs), sum(fn for _, fn in pairs))

    references = {'groundtruth': [mask_area_series(masks)]} if masks is not None else None
    table = compare_methods(reports, references=references)
    sys.stdout.write('# category: {}\n'.format(categories[category].name))
    sys.stdout.write(table.to_text())
    for name in totals:
        sys.stdout.write('{}: {} false positive and {} false negative pixels\n'.format(name, *totals[name]))
    return table
