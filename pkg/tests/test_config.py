import pytest
from tempseg.config import parse_config, parse_config_options, parse_option, read_config, relax_loads
from tempseg.config import ConfigError, ConfigSyntaxError, UnknownConfigKeyError
from tempseg.fusion import FusionConfig, WeightsLengthError
from tempseg.synthgen import SynthConfig, SynthConfigError


def test_relax_loads():
    assert relax_loads('4') == 4
    assert relax_loads(' 0.2 ') == 0.2
    assert relax_loads('none') is None
    assert relax_loads('True') is True
    assert relax_loads('[1, 2]') == [1, 2]
    assert relax_loads('rectangle') == 'rectangle'


def test_empty_file_is_the_default_fusion_config():
    assert parse_config('') == FusionConfig()
    assert parse_config('') == FusionConfig(buffer_size=4, weights=(4, 3, 2, 1), threshold=1)


def test_neutral_config():
    config = parse_config("""# identity
weights = 1,0,0,0
threshold = 0
""")
    assert config.weights == (1, 0, 0, 0)
    assert config.threshold == 0


def test_weights_length_error():
    with pytest.raises(WeightsLengthError):
        parse_config('weights = 4,3,2\nbuffer_size = 4')


def test_buffer_size_and_targets():
    config = parse_config('buffer_size = 3  # short history\ntargets = person, car')
    assert config.weights == (3, 2, 1)
    assert config.targets == ('person', 'car')


def test_targets_by_index():
    assert parse_config('targets = 11,13').targets == (11, 13)
    assert parse_config('targets = 13').targets == (13,)


def test_unknown_key():
    with pytest.raises(UnknownConfigKeyError, match="Line 2: unknown fusion option 'treshold'"):
        parse_config('weights = 1,1\ntreshold = 2')


def test_line_without_equal_sign():
    with pytest.raises(ConfigSyntaxError, match='Line 1'):
        parse_config('threshold 2')


def test_key_set_twice():
    with pytest.raises(ConfigSyntaxError, match='twice'):
        parse_config('threshold = 2\nthreshold = 3')


@pytest.mark.parametrize('text', ['threshold = high', 'buffer_size = 2.5', 'weights = 1,two'])
def test_wrong_value_type(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_synth_config():
    config = parse_config("""height = 32
width = 48
shape = disc
size = 6
velocity = 0.5, -0.25
dropout = 3, 4, 5
seed = 42
""", kind='synth')
    assert config == SynthConfig(height=32, width=48, shape='disc', size=6, velocity=(0.5, -0.25),
                                 dropout=[3, 4, 5], seed=42)


def test_synth_dropout_probability():
    assert parse_config('dropout = 0.2', 'synth').dropout == 0.2
    assert parse_config('dropout = 7', 'synth').dropout == [7]
    assert parse_config('dropout = none', 'synth').dropout is None


def test_synth_config_errors_are_reported():
    with pytest.raises(SynthConfigError):
        parse_config('size = 100', 'synth')


def test_overrides_take_precedence():
    config = parse_config('seed = 1\nframes = 10', 'synth', seed=5, frames=None)
    assert config.seed == 5
    assert config.frames == 10


def test_parse_option():
    assert parse_option('weights', '2,1') == [2.0, 1.0]
    assert parse_option('dropout', '8,9,10', 'synth') == [8, 9, 10]
    with pytest.raises(UnknownConfigKeyError):
        parse_option('seed', '1', 'fusion')


def test_unknown_config_kind():
    with pytest.raises(ValueError, match='kind'):
        parse_config_options('', 'camera')


def test_read_config(tmpdir):
    path = tmpdir.join('fusion.cfg')
    path.write('threshold = 0.5\n')
    assert read_config(str(path)).threshold == 0.5
    assert read_config() == FusionConfig()
