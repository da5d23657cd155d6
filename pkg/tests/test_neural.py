"""LSTM recurrence, pooling, training loop, and gradient verification."""

import math

import numpy as np
import pytest

from temprel.errors import (
    DivergenceError,
    FormatError,
    ShapeError,
    StructuralError,
)
from temprel.neural import (
    EmbeddingTable,
    LSTMLayer,
    PairExample,
    TrainingConfig,
    TwoBranchModel,
    gradient_check,
    load_model,
    lstm_forward,
    max_pool_time,
    max_zero_gradient_gap,
    save_model,
    train,
)


def zeroed_lstm(input_dim, units):
    layer = LSTMLayer(input_dim, units, np.random.default_rng(0))
    for p in layer.parameters():
        p.value[...] = 0.0
    return layer


class TestLSTMForward:
    def test_zero_weights_and_inputs_give_zero_states(self):
        layer = zeroed_lstm(3, 4)
        hidden = lstm_forward(layer, np.zeros((5, 3)))
        assert np.all(hidden == 0.0)

    def test_single_step_matches_hand_computation(self):
        layer = zeroed_lstm(1, 1)
        w_i, w_f, w_c, w_o = 0.3, -0.2, 0.5, 0.7
        layer.w_in.value[0] = [w_i, w_f, w_c, w_o]
        b_i, b_f, b_c, b_o = 0.1, 1.0, -0.3, 0.2
        layer.bias.value[...] = [b_i, b_f, b_c, b_o]
        x = 0.9

        def sig(v):
            return 1.0 / (1.0 + math.exp(-v))

        gate_in = sig(w_i * x + b_i)
        gate_cell = math.tanh(w_c * x + b_c)
        gate_out = sig(w_o * x + b_o)
        cell = gate_in * gate_cell  # zero initial cell state
        expected = gate_out * math.tanh(cell)

        hidden = lstm_forward(layer, np.asarray([[x]]))
        assert hidden[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_hidden_states_bounded(self):
        rng = np.random.default_rng(1)
        layer = LSTMLayer(6, 8, rng)
        hidden = lstm_forward(layer, rng.normal(size=(20, 6)) * 5)
        assert np.all(np.abs(hidden) < 1.0)

    def test_dimension_mismatch(self):
        layer = zeroed_lstm(3, 2)
        with pytest.raises(ShapeError):
            lstm_forward(layer, np.zeros((4, 5)))

    def test_empty_sequence_rejected(self):
        layer = zeroed_lstm(3, 2)
        with pytest.raises(StructuralError):
            lstm_forward(layer, np.zeros((0, 3)))


class TestMaxPool:
    def test_single_step_identity(self):
        row = np.asarray([[0.1, -0.4, 2.0]])
        assert np.array_equal(max_pool_time(row), row[0])

    def test_two_step_example(self):
        hidden = np.asarray([[1.0, -2.0], [0.0, 5.0]])
        assert np.array_equal(max_pool_time(hidden), [1.0, 5.0])

    def test_matches_per_unit_loop(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            hidden = rng.normal(size=(int(rng.integers(1, 9)), 5))
            looped = [max(hidden[t, j] for t in range(hidden.shape[0]))
                      for j in range(5)]
            assert np.allclose(max_pool_time(hidden), looped)

    def test_empty_rejected(self):
        with pytest.raises(StructuralError):
            max_pool_time(np.zeros((0, 3)))


class TestTwoBranchForward:
    def setup_method(self):
        self.model = TwoBranchModel(input_dim=5, labels=["a", "b", "c"],
                                    units=4, hidden=6, seed=9)
        rng = np.random.default_rng(4)
        self.left = rng.normal(size=(3, 5))
        self.right = rng.normal(size=(4, 5))

    def test_distribution_sums_to_one(self):
        probs = self.model.forward(self.left, self.right)
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        assert np.all(probs >= 0.0) and np.all(probs <= 1.0)

    def test_zero_output_weights_give_uniform(self):
        for p in self.model.dense_out.parameters():
            p.value[...] = 0.0
        probs = self.model.forward(self.left, self.right)
        assert np.allclose(probs, 1.0 / 3.0, atol=1e-12)

    def test_inference_is_deterministic(self):
        first = self.model.forward(self.left, self.right)
        second = self.model.forward(self.left, self.right)
        assert np.array_equal(first, second)
        assert self.model.predict(self.left, self.right) == \
            self.model.predict(self.left, self.right)


class TestEmbeddingTable:
    def test_load_with_header(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("2 3\nhello 0.1 0.2 0.3\nworld 1 2 3\n")
        table = EmbeddingTable.load(path)
        assert table.dimension == 3
        assert np.allclose(table.lookup("hello"), [0.1, 0.2, 0.3])

    def test_load_without_header(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("hello 0.5 0.5\n")
        assert EmbeddingTable.load(path).dimension == 2

    def test_dimension_mismatch_reports_line(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("hello 1 2 3\nworld 1 2\n")
        with pytest.raises(FormatError, match="line 2"):
            EmbeddingTable.load(path)

    def test_oov_reproducible_across_instances(self):
        a = EmbeddingTable(dimension=10, seed=3)
        b = EmbeddingTable(dimension=10, seed=3)
        assert np.array_equal(a.lookup("zyxwv"), b.lookup("zyxwv"))

    def test_oov_depends_on_seed(self):
        a = EmbeddingTable(dimension=10, seed=3)
        b = EmbeddingTable(dimension=10, seed=4)
        assert not np.array_equal(a.lookup("zyxwv"), b.lookup("zyxwv"))

    def test_case_fallback(self):
        table = EmbeddingTable(dimension=4, vectors={"war": np.ones(4)})
        assert np.array_equal(table.lookup("War"), np.ones(4))

    def test_encode_shape_and_zero(self):
        table = EmbeddingTable(dimension=6)
        assert table.encode(["a", "b"]).shape == (2, 6)
        assert np.all(table.zero() == 0.0)


def separable_examples(n_per_class, dim, labels, rng):
    """Each class carries a distinct constant cue vector in its left branch."""
    cues = rng.normal(size=(len(labels), dim)) * 2.0
    examples = []
    for label in range(len(labels)):
        for _ in range(n_per_class):
            left = np.vstack([rng.normal(size=(2, dim)) * 0.1, cues[label]])
            right = rng.normal(size=(2, dim)) * 0.1
            examples.append(PairExample(left, right, label))
    return examples


class TestTraining:
    def test_loss_decreases_on_separable_data(self):
        rng = np.random.default_rng(8)
        examples = separable_examples(6, 8, ["a", "b", "c"], rng)
        model = TwoBranchModel(8, ["a", "b", "c"], units=6, hidden=6,
                               dropout_input=0.1, dropout_hidden=0.1, seed=2)
        history = train(model, examples, TrainingConfig(
            learning_rate=5e-3, batch_size=6, epochs=12, seed=1))
        assert history.train_losses[-1] < history.train_losses[0]

    def test_class_weight_scales_per_instance_loss(self):
        rng = np.random.default_rng(12)
        model = TwoBranchModel(4, ["a", "b"], units=3, hidden=3, seed=5)
        ex = PairExample(rng.normal(size=(2, 4)), rng.normal(size=(2, 4)), 1)
        base = model.loss_only(ex, weight=1.0)
        assert model.loss_only(ex, weight=3.0) == pytest.approx(3 * base)

    def test_fixed_seed_reproduces_history_bitwise(self):
        rng = np.random.default_rng(21)
        examples = separable_examples(4, 6, ["a", "b"], rng)

        def run():
            model = TwoBranchModel(6, ["a", "b"], units=4, hidden=4, seed=3)
            return train(model, examples, TrainingConfig(
                learning_rate=1e-3, batch_size=4, epochs=5, seed=17))

        assert run().train_losses == run().train_losses

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_reported_with_epoch(self):
        rng = np.random.default_rng(30)
        examples = separable_examples(2, 4, ["a", "b"], rng)
        model = TwoBranchModel(4, ["a", "b"], units=3, hidden=3, seed=1)
        model.dense_out.weight.value[...] = np.inf
        with pytest.raises(DivergenceError) as err:
            train(model, examples, TrainingConfig(epochs=2, seed=0))
        assert err.value.epoch == 0

    def test_early_stopping_restores_best(self):
        rng = np.random.default_rng(40)
        examples = separable_examples(4, 6, ["a", "b"], rng)
        val = separable_examples(2, 6, ["a", "b"], rng)
        model = TwoBranchModel(6, ["a", "b"], units=4, hidden=4, seed=3)
        history = train(model, examples, TrainingConfig(
            learning_rate=0.05, batch_size=4, epochs=60, patience=3, seed=17),
            val_examples=val)
        if history.stopped_early:
            assert len(history.train_losses) < 60


class TestGradientCheck:
    def test_two_branch_small_model(self):
        rng = np.random.default_rng(0)
        model = TwoBranchModel(6, ["a", "b", "c", "d"], units=4, hidden=8,
                               seed=3)
        ex = PairExample(rng.normal(size=(3, 6)), rng.normal(size=(2, 6)), 2)
        assert gradient_check(model, ex, epsilon=1e-5, weight=1.3) < 1e-4

    def test_checker_detects_coarse_epsilon(self):
        rng = np.random.default_rng(1)
        model = TwoBranchModel(4, ["a", "b"], units=3, hidden=3, seed=6)
        ex = PairExample(rng.normal(size=(2, 4)) * 3,
                         rng.normal(size=(2, 4)) * 3, 1)
        fine = gradient_check(model, ex, epsilon=1e-5)
        coarse = gradient_check(model, ex, epsilon=1e-2)
        assert coarse > fine

    def test_dead_path_gradients_vanish_together(self):
        rng = np.random.default_rng(2)
        model = TwoBranchModel(5, ["a", "b"], units=3, hidden=3, seed=8)
        left = rng.normal(size=(2, 5))
        right = rng.normal(size=(2, 5))
        left[:, 4] = 0.0   # input column never fires
        right[:, 4] = 0.0
        ex = PairExample(left, right, 0)
        assert max_zero_gradient_gap(model, ex, epsilon=1e-5) < 1e-8


class TestCheckpoint:
    def test_round_trip_preserves_predictions(self, tmp_path):
        rng = np.random.default_rng(3)
        model = TwoBranchModel(5, ["x", "y", "z"], units=4, hidden=4, seed=2)
        left, right = rng.normal(size=(3, 5)), rng.normal(size=(2, 5))
        path = tmp_path / "model.npz"
        save_model(model, path)
        restored = load_model(path)
        assert restored.labels == model.labels
        assert np.allclose(restored.forward(left, right),
                           model.forward(left, right))


class TestEventCheckpoint:
    def test_event_model_round_trip(self, tmp_path):
        from temprel.event_extractor import EventModel

        rng = np.random.default_rng(5)
        model = EventModel(input_dim=6, units=4, hidden=3, feature_hidden=2,
                           seed=7)
        window = rng.normal(size=(9, 6))
        features = np.asarray([1.0, 0.0, 0.0, 1.0])
        path = tmp_path / "event.npz"
        save_model(model, path)
        restored = load_model(path)
        assert restored.threshold == model.threshold
        assert restored.predict_token(window, features) == \
            pytest.approx(model.predict_token(window, features))
