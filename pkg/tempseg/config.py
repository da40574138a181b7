"""Parse the plain-text configuration files of the fusion and the synthetic generator.

A configuration file has one `key = value` per line. Text after `#` is a comment.
Unknown keys are errors, and missing keys take their default value."""

import ast
import io
from json import loads
from .fusion import FusionConfig
from .synthgen import SynthConfig

try:
    from json import JSONDecodeError
except ImportError:
    JSONDecodeError = ValueError


class ConfigError(ValueError):
    """Error in a configuration file"""


class ConfigSyntaxError(ConfigError):
    """A line that is not of the form key = value"""


class UnknownConfigKeyError(ConfigError):
    """A key that the configuration does not accept"""


def relax_loads(text):
    """Parse a number, a boolean, none, or a JSON/Python literal. Other text is returned as is."""
    text = text.strip()
    if text.lower() in ('none', 'null', ''):
        return None
    if text.lower() in ('true', 'yes'):
        return True
    if text.lower() in ('false', 'no'):
        return False
    try:
        return loads(text)
    except JSONDecodeError:
        pass
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [relax_loads(item) for item in value.split(',') if item.strip()]
    return [value]


def _int(key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("'{}' should be an integer, not '{}'".format(key, value))
    return value


def _real(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("'{}' should be a number, not '{}'".format(key, value))
    return float(value)


def _reals(key, value):
    return [_real(key, item) for item in _as_list(value)]


def _pair(key, value):
    values = _reals(key, value)
    if len(values) != 2:
        raise ConfigError("'{}' should be a pair of numbers x,y, not '{}'".format(key, value))
    return tuple(values)


def _names(key, value):
    names = []
    for item in _as_list(value):
        if isinstance(item, (int, str)) and not isinstance(item, bool):
            names.append(item)
        else:
            raise ConfigError("'{}' should list category names or indices, not '{}'".format(key, item))
    return names


def _text(key, value):
    if not isinstance(value, str):
        raise ConfigError("'{}' should be a name, not '{}'".format(key, value))
    return value


def _optional(convert):
    def optional(key, value):
        return None if value is None else convert(key, value)

    return optional


def _dropout(key, value):
    """A probability (a number with a decimal point) or a list of frame indices"""
    if value is None:
        return None
    if isinstance(value, float):
        return value
    return [_int(key, item) for item in _as_list(value)]


_FUSION_KEYS = {
    'buffer_size': _int,
    'weights': _reals,
    'threshold': _real,
    'targets': _optional(_names)}

_SYNTH_KEYS = {
    'height': _int,
    'width': _int,
    'channels': _int,
    'frames': _int,
    'shape': _text,
    'size': _int,
    'velocity': _pair,
    'start': _optional(_pair),
    'target_category': _int,
    'background_category': _int,
    'dropout': _dropout,
    'partial_occlusion': _optional(_real),
    'logit_contrast': _real,
    'noise_sigma': _real,
    'seed': _int}

CONFIG_KINDS = {'fusion': (_FUSION_KEYS, FusionConfig),
                'synth': (_SYNTH_KEYS, SynthConfig)}


def _config_keys(kind):
    if kind not in CONFIG_KINDS:
        raise ValueError("Unknown configuration kind '{}'. Expected one of '{}'"
                         .format(kind, "', '".join(CONFIG_KINDS)))
    return CONFIG_KINDS[kind][0]


def parse_option(key, text, kind='fusion'):
    """Decode the value of one option, given as text"""
    keys = _config_keys(kind)
    if key not in keys:
        raise UnknownConfigKeyError("Unknown {} option '{}'".format(kind, key))
    raw = relax_loads(text)
    # comma-separated values are kept as text, and split by the list converters
    if isinstance(raw, tuple):
        raw = text
    return keys[key](key, raw)


def parse_config_options(text, kind='fusion'):
    """The options set in the configuration text, as a dictionary"""
    keys = _config_keys(kind)

    options = {}
    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigSyntaxError("Line {}: expected 'key = value', got '{}'".format(line_number, line))
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in keys:
            raise UnknownConfigKeyError("Line {}: unknown {} option '{}'. Expected one of '{}'"
                                        .format(line_number, kind, key, "', '".join(sorted(keys))))
        if key in options:
            raise ConfigSyntaxError("Line {}: '{}' is set twice".format(line_number, key))
        options[key] = parse_option(key, value, kind)
    return options


def parse_config(text, kind='fusion', **overrides):
    """Parse the configuration text into a FusionConfig or a SynthConfig. Options
    passed as keyword arguments (when not None) take precedence over the text."""
    options = parse_config_options(text, kind)
    options.update((key, value) for key, value in overrides.items() if value is not None)
    return CONFIG_KINDS[kind][1](**options)


def read_config(path=None, kind='fusion', **overrides):
    """Read a configuration file (no file = all defaults)"""
    text = ''
    if path is not None:
        with io.open(path, encoding='utf-8') as stream:
            text = stream.read()
    return parse_config(text, kind, **overrides)
