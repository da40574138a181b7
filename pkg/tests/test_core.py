import pytest
import numpy as np
from tempseg.core import LogitMap, ProbMap, LabelMap, BinaryMask, CategoryTable
from tempseg.core import InvalidMapError, CategoryTableError, softmax_pixelwise, argmax_labels
from tempseg.core import thread_count, map_row_blocks
from .utils import random_logits, dyadic_logits


def test_softmax_uniform():
    probs = softmax_pixelwise(LogitMap(np.zeros((1, 1, 3))))
    np.testing.assert_allclose(probs.values[0, 0], [1 / 3., 1 / 3., 1 / 3.], atol=1e-7)
    assert probs.values.dtype == np.float32


def test_softmax_one_two_three():
    probs = softmax_pixelwise(LogitMap([[[1, 2, 3]]]))
    np.testing.assert_allclose(probs.values[0, 0], [0.09003, 0.24473, 0.66524], atol=1e-5)


def test_softmax_large_logits_do_not_overflow():
    probs = softmax_pixelwise(LogitMap([[[1000, 999, -1000]]]))
    assert np.isfinite(probs.values).all()
    assert probs.values[0, 0, 0] > probs.values[0, 0, 1] > probs.values[0, 0, 2]


def test_softmax_sums_to_one(seed=0):
    rng = np.random.default_rng(seed)
    probs = softmax_pixelwise(random_logits(rng, 50, 40, 19, scale=10))
    assert isinstance(probs, ProbMap)
    assert np.abs(probs.values.sum(axis=2) - 1).max() <= 1e-6
    assert probs.values.min() >= 0
    assert probs.values.max() <= 1


@pytest.mark.parametrize('shift', [-7, 1, 12])
def test_softmax_shift_invariance(shift, seed=1):
    rng = np.random.default_rng(seed)
    logits = dyadic_logits(rng, 16, 16, 5)
    shifted = LogitMap(logits.values + shift)
    np.testing.assert_allclose(softmax_pixelwise(shifted).values, softmax_pixelwise(logits).values, atol=1e-6)


def test_argmax_of_softmax_equals_argmax_of_logits(seed=2):
    rng = np.random.default_rng(seed)
    logits = random_logits(rng, 100, 100, 4)
    categories = CategoryTable([(i, str(i)) for i in range(4)])
    assert argmax_labels(softmax_pixelwise(logits), categories) == argmax_labels(logits, categories)


def test_softmax_non_finite_logit():
    values = np.zeros((3, 4, 2), dtype=np.float32)
    values[1, 2, 1] = np.nan
    with pytest.raises(InvalidMapError, match='row=1, col=2, channel=1') as err:
        softmax_pixelwise(values)
    assert err.value.position == (1, 2, 1)


def test_softmax_of_probabilities_is_identity():
    probs = ProbMap([[[0.25, 0.75]]])
    with pytest.warns(UserWarning):
        assert softmax_pixelwise(probs) is probs


def test_softmax_in_row_blocks(monkeypatch, seed=3):
    rng = np.random.default_rng(seed)
    logits = random_logits(rng, 130, 7, 3)
    monkeypatch.setenv('TEMPSEG_THREADS', '1')
    single = softmax_pixelwise(logits)
    monkeypatch.setenv('TEMPSEG_THREADS', '4')
    assert softmax_pixelwise(logits) == single


def test_map_row_blocks_cover_all_rows():
    blocks = []
    map_row_blocks(lambda start, stop: blocks.append((start, stop)), 100, threads=3)
    assert sorted(blocks) == [(0, 33), (33, 66), (66, 100)]


def test_map_row_blocks_small_frames_use_one_block():
    blocks = []
    map_row_blocks(lambda start, stop: blocks.append((start, stop)), 40, threads=8)
    assert blocks == [(0, 40)]


def test_thread_count(monkeypatch):
    monkeypatch.setenv('TEMPSEG_THREADS', '3')
    assert thread_count() == 3
    monkeypatch.setenv('TEMPSEG_THREADS', '0')
    assert thread_count() >= 1
    monkeypatch.setenv('TEMPSEG_THREADS', 'many')
    with pytest.raises(ValueError, match='TEMPSEG_THREADS'):
        thread_count()


def test_argmax_labels():
    categories = CategoryTable([(0, 'a'), (1, 'b'), (2, 'c')])
    labels = argmax_labels(ProbMap([[[0.1, 0.7, 0.2]]]), categories)
    assert labels.labels.dtype == np.uint8
    assert labels.labels[0, 0] == 1


def test_argmax_ties_go_to_lowest_index():
    categories = CategoryTable([(0, 'a'), (1, 'b')])
    assert argmax_labels(ProbMap([[[0.5, 0.5]]]), categories).labels[0, 0] == 0


def test_argmax_wrong_number_of_channels(cityscapes):
    with pytest.raises(InvalidMapError, match='19 entries'):
        argmax_labels(LogitMap(np.zeros((2, 2, 3))), cityscapes)


def test_logit_map_needs_two_channels():
    with pytest.raises(InvalidMapError, match='two channels'):
        LogitMap(np.zeros((2, 2, 1)))


def test_logit_map_needs_three_dims():
    with pytest.raises(InvalidMapError, match='three dimensions'):
        LogitMap(np.zeros((2, 2)))


def test_prob_map_out_of_range():
    with pytest.raises(InvalidMapError, match=r'out of \[0, 1\]'):
        ProbMap([[[1.5, -0.5]]])


def test_prob_map_sum():
    with pytest.raises(InvalidMapError, match='sum to') as err:
        ProbMap([[[0.5, 0.5], [0.4, 0.4]]])
    assert err.value.position == (0, 1, None)


@pytest.mark.parametrize('dtype', [np.float32, np.float64])
def test_prob_map_is_stored_on_32_bits(dtype):
    probs = ProbMap(np.array([[[0, 1], [0.25, 0.75]]]).astype(dtype))
    assert probs.values.dtype == np.float32
    assert probs == ProbMap(np.array([[[0, 1], [0.25, 0.75]]], dtype=np.float32))


def test_label_map_category_range():
    with pytest.raises(InvalidMapError, match='row=1, col=0'):
        LabelMap([[0, 1], [3, 1]], num_categories=3)


def test_label_map_out_of_eight_bits():
    with pytest.raises(InvalidMapError):
        LabelMap([[0, 256]])


def test_label_map_masks(three_categories):
    labels = LabelMap([[0, 1], [2, 1]], num_categories=3)
    assert labels.mask(1).tolist() == [[False, True], [False, True]]
    assert labels.target_mask(three_categories).tolist() == [[False, True], [False, True]]


def test_binary_mask_area():
    assert BinaryMask([[0, 1, 1], [0, 0, 1]]).area == 3


def test_category_table_cityscapes(cityscapes):
    assert len(cityscapes) == 19
    assert [cityscapes[i].name for i in cityscapes.targets] == ['person', 'rider', 'car', 'bicycle']
    assert cityscapes.index('car') == 13
    assert cityscapes.index('13') == 13
    assert cityscapes.index(0) == 0


def test_category_table_targets_flags(cityscapes):
    flags = cityscapes.target_flags()
    assert flags.shape == (256,)
    assert flags.sum() == 4
    assert flags[11] and not flags[0]


def test_category_table_with_targets(cityscapes):
    table = cityscapes.with_targets(['car'])
    assert table.targets == [13]
    assert cityscapes.targets == [11, 12, 13, 18]


@pytest.mark.parametrize('entries', [[], [(0, 'a'), (2, 'b')], [(0, 'a'), (0, 'b')], [(0, 'a'), (1, 'a')],
                                     [(i, str(i)) for i in range(257)]])
def test_invalid_category_table(entries):
    with pytest.raises(CategoryTableError):
        CategoryTable(entries)


def test_unknown_category(cityscapes):
    with pytest.raises(CategoryTableError, match="Unknown category 'unicorn'"):
        cityscapes.index('unicorn')
    with pytest.raises(CategoryTableError):
        cityscapes.index(19)
