import numpy as np
import pytest
from sklearn.base import clone

from tskc.estimator import TransductiveStringKernelClassifier

POSITIVE_WORDS = ["wonderful", "great", "lovely", "superb", "delightful"]
NEGATIVE_WORDS = ["terrible", "awful", "boring", "dreadful", "horrid"]


def _polarity_corpus(rng, count, words, topic):
    texts = []
    for _ in range(count):
        picks = rng.choice(words, size=3).tolist()
        texts.append(f"this {topic} was {picks[0]} and {picks[1]} simply {picks[2]}")
    return texts


@pytest.fixture
def toy_data():
    rng = np.random.default_rng(227)
    train_texts = _polarity_corpus(rng, 8, POSITIVE_WORDS, "book") + _polarity_corpus(
        rng, 8, NEGATIVE_WORDS, "book"
    )
    train_labels = ["pos"] * 8 + ["neg"] * 8
    test_texts = _polarity_corpus(rng, 4, POSITIVE_WORDS, "blender") + _polarity_corpus(
        rng, 4, NEGATIVE_WORDS, "blender"
    )
    test_labels = ["pos"] * 4 + ["neg"] * 4
    return train_texts, train_labels, test_texts, test_labels


def test_fit_predict_recovers_polarity_across_topics(toy_data):
    train_texts, train_labels, test_texts, test_labels = toy_data
    model = TransductiveStringKernelClassifier(
        family="intersection", p_min=2, p_max=4, r=4, lam=1e-5
    )
    predictions = model.fit(train_texts, train_labels).predict(test_texts)
    assert (predictions == np.asarray(test_labels)).mean() >= 0.75


def test_classes_ordered_by_first_appearance(toy_data):
    train_texts, train_labels, _, _ = toy_data
    model = TransductiveStringKernelClassifier(p_min=1, p_max=2, r=0)
    model.fit(train_texts, train_labels)
    assert model.classes_.tolist() == ["pos", "neg"]


def test_predict_with_trace_exposes_promotions(toy_data):
    train_texts, train_labels, test_texts, _ = toy_data
    model = TransductiveStringKernelClassifier(p_min=2, p_max=3, r=3)
    model.fit(train_texts, train_labels)
    labels, trace = model.predict_with_trace(test_texts)
    assert labels.shape == (len(test_texts),)
    assert trace.promoted.size == 3
    assert trace.rounds == 2


def test_single_round_variant_skips_promotion(toy_data):
    train_texts, train_labels, test_texts, _ = toy_data
    model = TransductiveStringKernelClassifier(p_min=2, p_max=3, r=3, two_rounds=False)
    model.fit(train_texts, train_labels)
    _, trace = model.predict_with_trace(test_texts)
    assert trace.promoted.size == 0
    assert trace.rounds == 1


def test_estimator_get_params_and_clone_round_trip():
    model = TransductiveStringKernelClassifier(family="spectrum", p_min=2, p_max=6, r=7)
    params = model.get_params()
    assert params["family"] == "spectrum"
    assert params["p_max"] == 6
    cloned = clone(model)
    assert cloned.get_params() == params


def test_estimator_validates_inputs(toy_data):
    train_texts, train_labels, _, _ = toy_data
    with pytest.raises(ValueError):
        TransductiveStringKernelClassifier(p_min=3, p_max=2).fit(train_texts, train_labels)
    with pytest.raises(ValueError):
        TransductiveStringKernelClassifier().fit(train_texts, train_labels[:-1])
    with pytest.raises(ValueError):
        TransductiveStringKernelClassifier().fit(["alpha", "beta"], ["same", "same"])
    with pytest.raises(TypeError):
        TransductiveStringKernelClassifier().fit([b"bytes", "text"], ["a", "b"])


def test_predict_readapts_to_each_test_set(toy_data):
    train_texts, train_labels, test_texts, _ = toy_data
    model = TransductiveStringKernelClassifier(p_min=1, p_max=2, r=0)
    model.fit(train_texts, train_labels)
    _, trace_full = model.predict_with_trace(test_texts)
    _, trace_half = model.predict_with_trace(test_texts[:4])
    # Scores of shared samples differ because the kernel adapted to a
    # different test set.
    assert not np.allclose(trace_full.round1_scores[:4], trace_half.round1_scores)
