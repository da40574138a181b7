"""The sequence manifest: the ordered frame files, the optional ground truth masks,
and the category table, as a YAML document. Paths are relative to the manifest."""

import io
import os
import yaml
from .core import Category, CategoryTable, CategoryTableError
from .fusion import ShapeMismatchError
from .segio import read_tensor_header, TENSOR_KINDS

MANIFEST_VERSION = 1


class ManifestError(ValueError):
    """The manifest is malformed"""


class SequenceManifest(object):
    """Frame files, optional mask files and category table of one sequence"""

    def __init__(self, frames, categories, masks=None, base_dir='.', metadata=None):
        self.frames = list(frames)
        self.masks = None if masks is None else list(masks)
        self.categories = categories
        self.base_dir = base_dir
        self.metadata = metadata or {}
        if not self.frames:
            raise ManifestError('The manifest lists no frame')
        if self.masks is not None and len(self.masks) != len(self.frames):
            raise ManifestError('The manifest lists {} frames but {} masks'.format(len(self.frames), len(self.masks)))

    def frame_paths(self):
        return [os.path.join(self.base_dir, path) for path in self.frames]

    def mask_paths(self):
        if self.masks is None:
            return None
        return [os.path.join(self.base_dir, path) for path in self.masks]

    def validate(self):
        """Check that all the referenced files exist, and that the frames share their dims.
        Return the common (kind, height, width, channels)."""
        for path in self.frame_paths() + (self.mask_paths() or []):
            if not os.path.isfile(path):
                raise IOError("File '{}' referenced by the manifest does not exist".format(path))

        header = None
        for index, path in enumerate(self.frame_paths()):
            current = read_tensor_header(path)
            if header is not None and current != header:
                raise ShapeMismatchError('Frame {} ({}) has kind/dims {}, expected {}'
                                         .format(index, path, current, header))
            header = current
        if header[0] not in TENSOR_KINDS:
            raise ManifestError('Frame files have an unknown kind {}'.format(header[0]))
        if header[3] != len(self.categories):
            raise ShapeMismatchError('Frames have {} channels, but the manifest lists {} categories'
                                     .format(header[3], len(self.categories)))
        return header

    def to_dict(self):
        data = {'tempseg_manifest': MANIFEST_VERSION,
                'frames': self.frames,
                'categories': [[entry.index, entry.name, entry.is_target] for entry in self.categories]}
        if self.masks is not None:
            data['masks'] = self.masks
        if self.metadata:
            data['metadata'] = self.metadata
        return data


def manifest_to_text(manifest):
    """The YAML representation of the manifest"""
    data = manifest.to_dict()
    # one category per line
    categories = data.pop('categories')
    text = yaml.safe_dump(data, default_flow_style=False, sort_keys=True)
    text += 'categories:\n' + ''.join('- {}\n'.format(yaml.safe_dump(entry, default_flow_style=True).strip())
                                      for entry in categories)
    return text


def manifest_from_text(text, base_dir='.'):
    """Parse a YAML manifest"""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ManifestError('The manifest is not valid YAML: {}'.format(err))
    if not isinstance(data, dict) or 'frames' not in data or 'categories' not in data:
        raise ManifestError("A manifest is a YAML mapping with 'frames' and 'categories' entries")
    if data.get('tempseg_manifest', MANIFEST_VERSION) != MANIFEST_VERSION:
        raise ManifestError('Unsupported manifest version {}'.format(data['tempseg_manifest']))

    entries = []
    for entry in data['categories']:
        if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
            raise ManifestError("Categories should be listed as '[index, name, is_target]', not '{}'".format(entry))
        entries.append(Category(*entry))
    try:
        categories = CategoryTable(entries)
    except CategoryTableError as err:
        raise ManifestError(str(err))

    return SequenceManifest(data['frames'], categories, masks=data.get('masks'), base_dir=base_dir,
                            metadata=data.get('metadata'))


def write_manifest(path, manifest):
    """Write the manifest as a YAML file"""
    with io.open(path, 'w', encoding='utf-8', newline='\n') as stream:
        stream.write(manifest_to_text(manifest))


def read_manifest(path):
    """Read a YAML manifest. Relative paths are resolved against its directory."""
    with io.open(path, encoding='utf-8') as stream:
        return manifest_from_text(stream.read(), base_dir=os.path.dirname(os.path.abspath(path)))
