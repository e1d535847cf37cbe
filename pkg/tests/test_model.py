import math

import numpy as np
import pytest

from framekit.corpus import generate_corpus
from framekit.document import Document, tokenize
from framekit.model import (ModelConfig, Parameters, build_lexicon, grad_check,
                            train)
from framekit.model import autodiff as ad
from framekit.model.features import extract_features
from framekit.model.lexicon import Lexicon
from framekit.model.network import (ForwardPass, document_loss, encode_tokens,
                                    feature_dim)
from framekit.model.train import TrainingError, oracle_sequences
from framekit.store import Store
from framekit.transitions import Action, ParserState
from support import hit_document


def tiny_config(**kw):
    base = dict(lstm_dim=6, hidden_dim=5, word_dim=4, affix_dim=2,
                shape_dim=2, link_dim=3, k_attention=3, k_history=2)
    base.update(kw)
    return ModelConfig(**base)


def setup(n_docs=3, corpus_seed=7, **kw):
    corpus = generate_corpus(corpus_seed, n_docs)
    config = tiny_config(**kw)
    sequences = oracle_sequences(corpus)
    lexicon = build_lexicon(corpus, config, sequences)
    params = Parameters(config, lexicon, seed=1)
    return corpus, config, sequences, lexicon, params


# -- encoder -----------------------------------------------------------------

def test_encode_empty_sentence():
    _, config, _, lexicon, params = setup()
    lr, rl = encode_tokens(params.tensors(False), config, lexicon, [])
    assert lr == [] and rl == []


def test_encode_zero_weights_zero_activations():
    _, config, _, lexicon, params = setup()
    for array in params.arrays.values():
        array[...] = 0.0
    tokens = tokenize("John hit")
    lr, rl = encode_tokens(params.tensors(False), config, lexicon, tokens)
    for tensor in lr + rl:
        assert np.all(tensor.data == 0.0)


def test_encode_shapes_single_token():
    _, config, _, lexicon, params = setup()
    lr, rl = encode_tokens(params.tensors(False), config, lexicon, tokenize("word"))
    assert len(lr) == len(rl) == 1
    assert lr[0].data.shape == (config.lstm_dim,)
    assert rl[0].data.shape == (config.lstm_dim,)


# -- features ----------------------------------------------------------------

def test_features_fresh_state():
    _, config, _, lexicon, _ = setup()
    state = ParserState("a b", tokenize("a b"))
    feats = extract_features(state, lexicon, config.k_attention, config.k_history)
    assert feats.cursor_token == 0
    assert feats.att_end_token == [None] * config.k_attention
    assert feats.att_created == [None] * config.k_attention
    assert feats.history == [None] * config.k_history
    assert feats.triples == [] and feats.source_roles == []


def test_features_after_worked_example_prefix():
    doc = hit_document()
    config = tiny_config(k_attention=5, k_history=5)
    lexicon = build_lexicon([doc], config)
    state = ParserState(doc.text, doc.tokens)
    state.apply(Action.evoke("/saft/person", 1))
    state.apply(Action.shift())
    state.apply(Action.evoke("/pb/hit-01", 1))
    state.apply(Action.connect(0, "/pb/arg0", 1))
    feats = extract_features(state, lexicon, config.k_attention, config.k_history)
    num_roles = lexicon.num_roles
    arg0 = lexicon.role_id("/pb/arg0")
    expected_triple = (0 * num_roles + arg0) * config.k_attention + 1
    assert feats.triples == [expected_triple]
    assert feats.source_roles == [0 * num_roles + arg0]
    assert feats.role_targets == [arg0 * config.k_attention + 1]
    assert feats.source_targets == [0 * config.k_attention + 1]
    # hit evoked at token 1, person at token 0; both single-token phrases
    assert feats.att_end_token[:2] == [1, 0]
    # created/focused step bookkeeping: hit created at step 2, person at 0
    assert feats.att_created[:2] == [2, 0]
    assert feats.att_focused[:2] == [3, 0]
    assert feats.history == [3, 2, 1, 0, None]


def test_attention_feature_uses_phrase_last_token():
    _, config, _, lexicon, _ = setup()
    state = ParserState("New York won", tokenize("New York won"))
    state.apply(Action.evoke("/t/loc", 2))
    feats = extract_features(state, lexicon, config.k_attention, config.k_history)
    assert feats.att_end_token[0] == 1


def test_embedded_frame_has_no_phrase_feature():
    _, config, _, lexicon, _ = setup()
    state = ParserState("a", tokenize("a"))
    state.apply(Action.evoke("/t/x", 1))
    state.apply(Action.embed(0, "/r/of", "/t/wrap"))
    feats = extract_features(state, lexicon, config.k_attention, config.k_history)
    assert feats.att_end_token[0] is None  # wrapper frame, never evoked
    assert feats.att_end_token[1] == 0


# -- step logits ---------------------------------------------------------------

def test_logits_shape_and_softmax():
    corpus, config, sequences, lexicon, params = setup()
    run = ForwardPass(params.tensors(False), config, lexicon,
                      corpus[0].text, corpus[0].tokens)
    logits = run.step_logits()
    assert logits.data.shape == (lexicon.num_actions,)
    loss, probs = ad.softmax_cross_entropy(logits, 0)
    assert abs(float(probs.sum()) - 1.0) < 1e-6


def test_zero_parameters_uniform_logits():
    corpus, config, _, lexicon, params = setup()
    for array in params.arrays.values():
        array[...] = 0.0
    run = ForwardPass(params.tensors(False), config, lexicon,
                      corpus[0].text, corpus[0].tokens)
    logits = run.step_logits().data
    assert np.all(logits == logits[0])
    assert int(np.argmax(logits)) == 0  # ties break toward the lowest index


# -- training ------------------------------------------------------------------

def test_initial_loss_is_log_vocab():
    corpus, config, sequences, lexicon, params = setup(n_docs=4)
    tensors = params.tensors(False)
    total = count = 0
    for doc, seq in zip(corpus, sequences):
        loss, n, _ = document_loss(tensors, config, lexicon, doc.text, doc.tokens, seq)
        total += float(loss.data)
        count += n
    assert total / count == pytest.approx(math.log(lexicon.num_actions), abs=1e-4)


def test_training_is_deterministic():
    corpus = generate_corpus(7, 6)
    config = tiny_config()
    a = train(corpus, config, seed=3, steps=8, checkpoint_every=8)
    b = train(corpus, config, seed=3, steps=8, checkpoint_every=8)
    assert set(a.arrays) == set(b.arrays)
    for name in a.arrays:
        assert a.arrays[name].tobytes() == b.arrays[name].tobytes(), name


def test_different_seeds_differ():
    corpus = generate_corpus(7, 6)
    config = tiny_config()
    a = train(corpus, config, seed=3, steps=8, checkpoint_every=8)
    b = train(corpus, config, seed=4, steps=8, checkpoint_every=8)
    assert any(a.arrays[n].tobytes() != b.arrays[n].tobytes() for n in a.arrays)


def test_loss_non_increasing_on_single_example():
    corpus = generate_corpus(19, 1)
    config = tiny_config(batch_size=1)
    losses = []
    train(corpus, config, seed=1, steps=100, checkpoint_every=1,
          on_checkpoint=lambda p, c: losses.append(c.loss))
    assert len(losses) == 100
    for previous, current in zip(losses, losses[1:]):
        assert current <= previous + 1e-3


def test_empty_corpus_rejected():
    with pytest.raises(TrainingError):
        train([], tiny_config(), steps=1)


def test_checkpoint_steps_monotonic():
    corpus = generate_corpus(7, 6)
    steps = []
    train(corpus, tiny_config(), seed=1, steps=20, checkpoint_every=5,
          on_checkpoint=lambda p, c: steps.append(c.step))
    assert steps == [5, 10, 15, 20]


def test_ema_parameters_track_training():
    corpus = generate_corpus(7, 4)
    config = tiny_config(use_ema=True, ema_decay=0.5)
    params = train(corpus, config, seed=1, steps=6, checkpoint_every=6)
    assert params.ema is not None
    assert set(params.ema) == set(params.arrays)
    assert any(not np.array_equal(params.ema[n], params.arrays[n])
               for n in params.arrays)


def test_word_vector_hook(tmp_path):
    corpus = generate_corpus(7, 2)
    word = corpus[0].tokens[0].text
    config = tiny_config()
    vector = " ".join(str(float(i)) for i in range(config.word_dim))
    path = tmp_path / "vectors.txt"
    path.write_text(f"{word} {vector}\nunknownword {vector}\n")
    config.word_vectors_path = str(path)
    lexicon = build_lexicon(corpus, config)
    params = Parameters(config, lexicon, seed=1)
    row = params.arrays["word_emb"][lexicon.word_id(word)]
    assert np.allclose(row, np.arange(config.word_dim, dtype=row.dtype))


# -- gradient checks -----------------------------------------------------------

def test_grad_check_zero_loss_single_action():
    store = Store()
    doc = Document("", [], [], store)
    config = tiny_config(dtype="float64")
    lexicon = build_lexicon([doc], config)
    assert lexicon.num_actions == 1  # STOP only
    params = Parameters(config, lexicon, seed=2)
    tensors = params.tensors(True)
    loss, _, _ = document_loss(tensors, config, lexicon, doc.text, doc.tokens,
                               [Action.stop()])
    assert float(loss.data) == pytest.approx(0.0, abs=1e-12)
    ad.backward(loss)
    norm = sum(float(np.sum(t.grad ** 2)) for t in tensors.values()
               if t.grad is not None)
    assert norm == pytest.approx(0.0, abs=1e-18)


def test_grad_check_output_layer_only():
    corpus = generate_corpus(7, 1)
    config = tiny_config(dtype="float64")
    sequences = oracle_sequences(corpus)
    lexicon = build_lexicon(corpus, config, sequences)
    params = Parameters(config, lexicon, seed=3)
    for name, array in params.arrays.items():
        if name not in ("ff_b2",):
            array[...] = 0.0
    rng = np.random.default_rng(0)
    params.arrays["ff_b2"][...] = rng.normal(0, 0.5, params.arrays["ff_b2"].shape)
    error = grad_check(params, corpus[0], sequences[0])
    assert error < 1e-8


def test_grad_check_full_cell():
    corpus = generate_corpus(51, 1)
    config = ModelConfig(lstm_dim=8, hidden_dim=8, word_dim=4, affix_dim=2,
                         shape_dim=2, link_dim=2, k_attention=3, k_history=2,
                         dtype="float64")
    sequences = oracle_sequences(corpus)
    lexicon = build_lexicon(corpus, config, sequences)
    params = Parameters(config, lexicon, seed=4)
    error = grad_check(params, corpus[0], sequences[0])
    assert error < 1e-4


def test_grad_check_tanh_hidden():
    corpus = generate_corpus(52, 1)
    config = tiny_config(dtype="float64", hidden_activation="tanh")
    sequences = oracle_sequences(corpus)
    lexicon = build_lexicon(corpus, config, sequences)
    params = Parameters(config, lexicon, seed=5)
    assert grad_check(params, corpus[0], sequences[0]) < 1e-6


# -- config ---------------------------------------------------------------------

def test_config_defaults_match_recipe():
    config = ModelConfig()
    assert config.word_dim == 32
    assert config.lstm_dim == 256
    assert config.hidden_dim == 128
    assert config.max_affix_len == 3
    assert config.k_attention == 5
    assert config.k_history == 5
    assert config.learning_rate == 0.0005
    assert config.adam_beta1 == 0.01
    assert config.adam_beta2 == 0.999
    assert config.adam_epsilon == 1e-5
    assert config.gradient_clip_norm == 1.0
    assert config.batch_size == 8
    assert config.dropout == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(lstm_dim=0)
    with pytest.raises(ValueError):
        ModelConfig(dropout=0.5)
    config = ModelConfig()
    config.apply_override("lstm_dim", "16")
    assert config.lstm_dim == 16
    with pytest.raises(ValueError):
        config.apply_override("nonsense", "1")


def test_feature_dim_formula():
    config = tiny_config()
    expected = (2 * config.lstm_dim + 2 * config.k_attention * config.lstm_dim
                + 2 * config.k_attention * config.hidden_dim
                + config.k_history * config.hidden_dim + 4 * config.link_dim)
    assert feature_dim(config) == expected
