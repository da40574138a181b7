"""Deterministic synthetic sequences: one moving object, injected detection faults,
and the exact ground truth masks.

Random numbers come from numpy's PCG64 bit generator (PCG XSL RR 128/64).
The 64-bit seed of the configuration is not used as the state directly:
numpy's SeedSequence hashes it into four 64-bit words, the first two give the
128-bit initial state and the last two the increment. Draws come in a fixed
order: the per-frame dropout draws (when dropout is a probability), then one
H x W x C standard normal block per frame (when noise_sigma > 0).

The dropout draws are `Generator.random` doubles, (next 64-bit output >> 11)
times 2**-53. The noise is `Generator.standard_normal`, numpy's 256-layer
ziggurat for doubles, which consumes a variable number of 64-bit outputs per
sample. Another implementation needs these three algorithms to reproduce a
sequence byte for byte."""

import logging
import math
import numpy as np
from .core import LogitMap, BinaryMask, CategoryTable

_LOGGER = logging.getLogger(__name__)

SHAPES = ('rectangle', 'disc')


class SynthConfigError(ValueError):
    """Invalid synthetic sequence configuration"""

    def __init__(self, message, frame_index=None):
        super(SynthConfigError, self).__init__(message)
        self.frame_index = frame_index


def _round_half_up(value):
    return int(math.floor(value + 0.5))


class SynthConfig(object):
    """Parameters of a synthetic sequence. `velocity` and `start` are (dx, dy) and
    (x, y) in pixels, x along the columns. `dropout` is either a probability per
    frame (a float) or an explicit list of frame indices."""

    def __init__(self, height=64, width=64, channels=3, frames=20, shape='rectangle', size=8, velocity=(1, 0),
                 start=None, target_category=1, background_category=0, dropout=None, partial_occlusion=None,
                 logit_contrast=4.0, noise_sigma=0.5, seed=0):
        self.height = int(height)
        self.width = int(width)
        self.channels = int(channels)
        self.frames = int(frames)
        self.shape = shape
        self.size = int(size)
        self.velocity = tuple(float(v) for v in velocity)
        self.start = None if start is None else tuple(float(v) for v in start)
        self.target_category = int(target_category)
        self.background_category = int(background_category)
        self.dropout = dropout
        self.partial_occlusion = None if partial_occlusion is None else float(partial_occlusion)
        self.logit_contrast = float(logit_contrast)
        self.noise_sigma = float(noise_sigma)
        self.seed = int(seed)
        self.validate()

    def validate(self):
        """Raise a SynthConfigError if the configuration is inconsistent"""
        if self.height < 1 or self.width < 1:
            raise SynthConfigError('Frames should have at least one pixel, got {}x{}'.format(self.height, self.width))
        if self.channels < 2:
            raise SynthConfigError('At least two channels are required, got {}'.format(self.channels))
        if self.frames < 1:
            raise SynthConfigError('At least one frame is required, got {}'.format(self.frames))
        if self.shape not in SHAPES:
            raise SynthConfigError("Unknown shape '{}'. Expected one of '{}'".format(self.shape, "', '".join(SHAPES)))
        if self.size < 1:
            raise SynthConfigError('The object size should be at least 1 pixel, got {}'.format(self.size))
        if len(self.velocity) != 2 or (self.start is not None and len(self.start) != 2):
            raise SynthConfigError('velocity and start should be pairs (x, y)')
        for name in ['target_category', 'background_category']:
            if not 0 <= getattr(self, name) < self.channels:
                raise SynthConfigError('{}={} is not in 0..{}'.format(name, getattr(self, name), self.channels - 1))
        if self.target_category == self.background_category:
            raise SynthConfigError('The target and background categories should differ')
        if isinstance(self.dropout, float):
            if not 0 <= self.dropout <= 1:
                raise SynthConfigError('The dropout probability {} is not in [0, 1]'.format(self.dropout))
        elif self.dropout is not None:
            frames = [self.dropout] if isinstance(self.dropout, int) else list(self.dropout)
            for frame in frames:
                if not 0 <= int(frame) < self.frames:
                    raise SynthConfigError('Dropout frame {} is not in 0..{}'.format(frame, self.frames - 1))
            self.dropout = sorted(set(int(frame) for frame in frames))
        if self.partial_occlusion is not None and not 0 <= self.partial_occlusion <= 1:
            raise SynthConfigError('The partial occlusion fraction {} is not in [0, 1]'.format(self.partial_occlusion))
        if self.logit_contrast <= 0:
            raise SynthConfigError('The logit contrast should be positive, got {}'.format(self.logit_contrast))
        if self.noise_sigma < 0:
            raise SynthConfigError('The noise sigma should be non-negative, got {}'.format(self.noise_sigma))
        if not 0 <= self.seed < 2 ** 64:
            raise SynthConfigError('The seed should be a 64-bit unsigned integer, got {}'.format(self.seed))

        for t in range(self.frames):
            x, y = self.position(t)
            if x < 0 or y < 0 or x + self.size > self.width or y + self.size > self.height:
                raise SynthConfigError('The object exits the {}x{} frame at frame {} (top-left corner at x={}, y={})'
                                       .format(self.height, self.width, t, x, y), frame_index=t)

    def position(self, t):
        """Top-left corner (x, y) of the object's bounding box at frame t"""
        if self.start is None:
            x0 = (self.width - self.size) / 2.0 - self.velocity[0] * (self.frames - 1) / 2.0
            y0 = (self.height - self.size) / 2.0 - self.velocity[1] * (self.frames - 1) / 2.0
        else:
            x0, y0 = self.start
        return _round_half_up(x0 + t * self.velocity[0]), _round_half_up(y0 + t * self.velocity[1])

    def object_mask(self, t):
        """The boolean mask of the object at frame t"""
        x, y = self.position(t)
        mask = np.zeros((self.height, self.width), dtype=bool)
        if self.shape == 'rectangle':
            mask[y:y + self.size, x:x + self.size] = True
            return mask
        rows, cols = np.mgrid[0:self.size, 0:self.size]
        center = (self.size - 1) / 2.0
        radius = self.size / 2.0
        mask[y:y + self.size, x:x + self.size] = (rows - center) ** 2 + (cols - center) ** 2 <= radius ** 2
        return mask

    def occluded_mask(self, t):
        """The part of the object that a dropout at frame t hides: all of it, or the
        leading fraction of its columns when partial_occlusion is set"""
        mask = self.object_mask(t)
        if self.partial_occlusion is None:
            return mask
        x, _ = self.position(t)
        hidden = _round_half_up(self.partial_occlusion * self.size)
        columns = np.zeros(self.width, dtype=bool)
        if self.velocity[0] >= 0:
            columns[x + self.size - hidden:x + self.size] = True
        else:
            columns[x:x + hidden] = True
        return mask & columns[np.newaxis, :]

    def __eq__(self, other):
        return isinstance(other, SynthConfig) and vars(self) == vars(other)


def _dropout_flags(config, rng):
    if config.dropout is None:
        return np.zeros(config.frames, dtype=bool)
    if isinstance(config.dropout, float):
        return rng.random(config.frames) < config.dropout
    flags = np.zeros(config.frames, dtype=bool)
    flags[np.asarray(config.dropout, dtype=int)] = True
    return flags


def dropout_frames(config):
    """The indices of the frames on which the detection fails"""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    return [int(t) for t in np.flatnonzero(_dropout_flags(config, rng))]


def synthetic_categories(config):
    """The category table of a synthetic sequence: background, object (the target) and filler classes"""
    names = []
    for index in range(config.channels):
        if index == config.background_category:
            names.append('background')
        elif index == config.target_category:
            names.append('object')
        else:
            names.append('class_{}'.format(index))
    return CategoryTable([(index, name, index == config.target_category) for index, name in enumerate(names)])


def generate(config):
    """Generate the logit maps and the ground truth masks of the sequence"""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    dropped = _dropout_flags(config, rng)
    contrast = config.logit_contrast
    target, background = config.target_category, config.background_category

    logits = []
    masks = []
    for t in range(config.frames):
        mask = config.object_mask(t)
        visible = mask & ~config.occluded_mask(t) if dropped[t] else mask

        values = np.full((config.height, config.width, config.channels), -contrast, dtype=np.float64)
        values[:, :, background] = contrast
        values[visible, target] = contrast
        values[visible, background] = -contrast
        if config.noise_sigma > 0:
            values += config.noise_sigma * rng.standard_normal(values.shape)

        logits.append(LogitMap(values.astype(np.float32)))
        masks.append(BinaryMask(mask))

    _LOGGER.debug('Generated %d frames, dropout at %s', config.frames, list(np.flatnonzero(dropped)))
    return logits, masks
