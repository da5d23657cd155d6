"""Instance building, downsampling, and the classifier bundle surface."""

import math
from collections import Counter

import numpy as np
import pytest

from temprel.errors import StructuralError
from temprel.neural import EmbeddingTable, TrainingConfig, TwoBranchModel, train
from temprel.relations import RelationLabel as R
from temprel.tlink_models import (
    LABEL_SETS,
    ClassifierBundle,
    PairInstance,
    build_cross_instances,
    build_dct_instances,
    build_intra_instances,
    classify_pairs,
    dense_mode_config,
    downsample_nolink,
    encode_instance,
    inverse_frequency_weights,
    qa_tempeval_config,
)

MERGED = LABEL_SETS["merged"]


class TestLabelSets:
    def test_merged_folds_during_into_simultaneous(self):
        assert MERGED.canon(R.DURING) is R.SIMULTANEOUS
        assert MERGED.canon(R.DURING_INV) is R.SIMULTANEOUS
        assert MERGED.canon(R.BEFORE) is R.BEFORE

    def test_no_link_is_last_index(self):
        assert MERGED.labels[-1] is R.NO_LINK

    def test_dense_set_has_five_positives(self):
        dense = LABEL_SETS["dense"]
        assert len(dense.positives) == 5
        assert dense.canon(R.BEGINS) is R.NO_LINK

    def test_full_set_keeps_during(self):
        full = LABEL_SETS["full"]
        assert full.canon(R.DURING) is R.DURING
        assert len(full.positives) == 13


class TestBuildIntraInstances:
    def test_count_is_ordered_pairs(self, raid_doc):
        instances = build_intra_instances(raid_doc, MERGED)
        # sentence 1 holds five entities, sentence 2 holds two
        assert len(instances) == 5 * 4 + 2 * 1

    def test_gold_pair_is_flipped_with_inverse(self, wedding_doc):
        instances = build_intra_instances(wedding_doc, MERGED)
        by_pair = {(i.source, i.target): i.label for i in instances}
        assert by_pair[("e2", "e3")] is R.BEFORE
        assert by_pair[("e3", "e2")] is R.AFTER

    def test_flipping_doubles_positive_instances(self, wedding_doc):
        instances = build_intra_instances(wedding_doc, MERGED)
        positives = [i for i in instances if i.label is not R.NO_LINK]
        # wedding has two same-sentence gold links: (e2,e3) and (e4,t1)
        assert len(positives) == 4
        labels = Counter(i.label for i in positives)
        assert labels == Counter({R.BEFORE: 1, R.AFTER: 1,
                                  R.IS_INCLUDED: 1, R.INCLUDES: 1})

    def test_single_entity_sentence_yields_nothing(self, wedding_doc):
        # drop everything but one entity from sentence 1
        wedding_doc.events = [e for e in wedding_doc.events if e.id == "e2"]
        wedding_doc.tlinks = []
        instances = build_intra_instances(wedding_doc, MERGED)
        assert all(i.source != "e3" and i.target != "e3" for i in instances)

    def test_branches_share_lca_token(self, raid_doc):
        for inst in build_intra_instances(raid_doc, MERGED):
            assert inst.left[-1] == inst.right[-1]

    def test_flat_mode_uses_cut_windows(self, raid_doc):
        flat = build_intra_instances(raid_doc, MERGED, flat=True, window=11)
        said_raid = next(i for i in flat
                         if (i.source, i.target) == ("e1", "e2"))
        assert "raid" not in said_raid.left
        assert "said" not in said_raid.right


class TestBuildCrossInstances:
    def test_adjacent_sentences_only(self, wedding_doc):
        instances = build_cross_instances(wedding_doc, MERGED)
        # 2 entities in sentence 1 x 2 in sentence 2, both orders
        assert len(instances) == 2 * 2 * 2

    def test_far_sentences_excluded(self, wedding_doc):
        # graft a third sentence so distance-2 pairs exist
        wedding_doc.sentences.append(wedding_doc.sentences[0])
        instances = build_cross_instances(wedding_doc, MERGED)
        assert len(instances) == 2 * 2 * 2

    def test_gold_label_and_flip(self, wedding_doc):
        instances = build_cross_instances(wedding_doc, MERGED)
        by_pair = {(i.source, i.target): i.label for i in instances}
        assert by_pair[("e2", "e4")] is R.BEFORE
        assert by_pair[("e4", "e2")] is R.AFTER

    def test_branches_are_root_paths(self, wedding_doc):
        instances = build_cross_instances(wedding_doc, MERGED)
        inst = next(i for i in instances
                    if (i.source, i.target) == ("e3", "e4"))
        assert inst.left == ["war", "before", "ended"]
        assert inst.right == ["recovered"]


class TestBuildDctInstances:
    def test_one_instance_per_event(self, raid_doc):
        instances = build_dct_instances(raid_doc, MERGED)
        assert len(instances) == len(raid_doc.events)
        assert all(i.target == "t0" for i in instances)

    def test_right_branch_is_reversed_left(self, raid_doc):
        for inst in build_dct_instances(raid_doc, MERGED):
            assert inst.right == list(reversed(inst.left))

    def test_gold_dct_label(self, wedding_doc):
        instances = build_dct_instances(wedding_doc, MERGED)
        by_source = {i.source: i.label for i in instances}
        assert by_source["e2"] is R.BEFORE
        assert by_source["e3"] is R.NO_LINK

    def test_root_event_has_unit_branches(self, wedding_doc):
        instances = build_dct_instances(wedding_doc, MERGED)
        ended = next(i for i in instances if i.source == "e2")
        assert ended.left == ["ended"] and ended.right == ["ended"]


def synthetic_instances(n_positive, n_nolink):
    instances = [PairInstance("intra", ["a"], ["a"], f"e{i}", f"x{i}", R.BEFORE)
                 for i in range(n_positive)]
    instances += [PairInstance("intra", ["b"], ["b"], f"p{i}", f"q{i}",
                               R.NO_LINK)
                  for i in range(n_nolink)]
    return instances


class TestDownsampleNolink:
    def test_ratio_point_one(self):
        kept = downsample_nolink(synthetic_instances(100, 5000), 0.1, seed=1)
        labels = Counter(i.label for i in kept)
        assert labels[R.BEFORE] == 100
        assert labels[R.NO_LINK] == 10

    def test_large_ratio_keeps_everything(self):
        kept = downsample_nolink(synthetic_instances(10, 7), 100.0, seed=1)
        assert len(kept) == 17
        assert downsample_nolink(synthetic_instances(10, 7), math.inf) \
            == synthetic_instances(10, 7)

    def test_ratio_zero_keeps_positives_only(self):
        kept = downsample_nolink(synthetic_instances(10, 50), 0.0, seed=2)
        assert all(i.label is not R.NO_LINK for i in kept)
        assert len(kept) == 10

    def test_never_drops_positives(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n_pos = int(rng.integers(1, 20))
            n_neg = int(rng.integers(0, 50))
            ratio = float(rng.uniform(0, 3))
            kept = downsample_nolink(synthetic_instances(n_pos, n_neg), ratio,
                                     seed=int(rng.integers(0, 100)))
            labels = Counter(i.label for i in kept)
            assert labels[R.BEFORE] == n_pos
            assert labels[R.NO_LINK] == min(n_neg, int(ratio * n_pos))

    def test_seeded_and_order_preserving(self):
        instances = synthetic_instances(5, 40)
        a = downsample_nolink(instances, 2.0, seed=9)
        b = downsample_nolink(instances, 2.0, seed=9)
        assert a == b
        positions = [instances.index(i) for i in a]
        assert positions == sorted(positions)

    def test_negative_ratio_rejected(self):
        with pytest.raises(StructuralError):
            downsample_nolink([], -1.0)


def tiny_bundle(table, seed=0):
    labels = MERGED.labels
    def model(s):
        return TwoBranchModel(table.dimension, labels, units=4, hidden=4,
                              seed=s)
    return ClassifierBundle(intra=model(seed), cross=model(seed + 1),
                            dct=model(seed + 2), label_set=MERGED)


class TestClassifyPairs:
    def test_no_events_means_no_candidates(self, wedding_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        wedding_doc.events = []
        wedding_doc.tlinks = []
        assert classify_pairs(tiny_bundle(table), wedding_doc, table) == []

    def test_both_orders_present(self, wedding_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        links = classify_pairs(tiny_bundle(table), wedding_doc, table)
        pairs = {(l.source, l.target) for l in links}
        assert ("e2", "e3") in pairs and ("e3", "e2") in pairs
        assert ("e2", "t0") in pairs and ("t0", "e2") in pairs

    def test_timex_timex_pairs_excluded(self, raid_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        links = classify_pairs(tiny_bundle(table), raid_doc, table)
        assert not any({l.source, l.target} == {"t1", "t2"} for l in links)

    def test_score_is_max_softmax_component(self, wedding_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        bundle = tiny_bundle(table)
        links = classify_pairs(bundle, wedding_doc, table)
        assert all(0.0 < l.score <= 1.0 for l in links)
        n_labels = len(MERGED.labels)
        assert all(l.score >= 1.0 / n_labels - 1e-9 for l in links)

    def test_deterministic(self, wedding_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        bundle = tiny_bundle(table)
        first = classify_pairs(bundle, wedding_doc, table)
        second = classify_pairs(bundle, wedding_doc, table)
        assert first == second

    def test_untrained_bundle_rejected(self, wedding_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        bundle = ClassifierBundle(intra=None, cross=None, dct=None,
                                  label_set=MERGED)
        with pytest.raises(StructuralError, match="missing"):
            classify_pairs(bundle, wedding_doc, table)

    def test_origins_tag_the_model(self, raid_doc):
        table = EmbeddingTable(dimension=6, seed=1)
        links = classify_pairs(tiny_bundle(table), raid_doc, table)
        origins = {l.origin for l in links}
        assert origins == {"classifier-intra", "classifier-cross",
                           "classifier-dct"}


class TestModeSettings:
    def test_inverse_frequency_weights_proportions(self):
        weights = inverse_frequency_weights([50, 25, 25])
        assert weights[1] == pytest.approx(weights[2])
        assert weights[1] == pytest.approx(2 * weights[0])
        assert weights.mean() == pytest.approx(1.0)

    def test_zero_count_class_gets_zero_weight(self):
        weights = inverse_frequency_weights([10, 0, 10])
        assert weights[1] == 0.0
        assert weights[[0, 2]].mean() == pytest.approx(1.0)

    def test_dense_mode_disables_downsampling_and_veto(self):
        mode = dense_mode_config()
        assert math.isinf(mode.downsample_intra)
        assert math.isinf(mode.downsample_cross)
        assert math.isinf(mode.downsample_dct)
        assert mode.veto is False
        assert mode.inverse_class_weights is True
        assert mode.batch_size < qa_tempeval_config().batch_size

    def test_qa_mode_matches_published_ratios(self):
        mode = qa_tempeval_config()
        assert (mode.downsample_intra, mode.downsample_cross,
                mode.downsample_dct) == (0.1, 1.0, 4.0)
        assert mode.veto is True


class TestEndToEndTraining:
    def test_bundle_learns_cue_words(self, wedding_doc, raid_doc):
        """Overfit the intra model on fixture instances and read them back."""
        table = EmbeddingTable(dimension=10, seed=3)
        instances = []
        for doc in (wedding_doc, raid_doc):
            instances.extend(build_intra_instances(doc, MERGED))
        instances = downsample_nolink(instances, 1.0, seed=4)
        examples = [encode_instance(i, table, MERGED) for i in instances]
        model = TwoBranchModel(10, MERGED.labels, units=8, hidden=8,
                               dropout_input=0.0, dropout_hidden=0.0, seed=5)
        history = train(model, examples, TrainingConfig(
            learning_rate=0.02, batch_size=8, epochs=80, seed=6))
        assert history.train_losses[-1] < history.train_losses[0]
        correct = sum(
            model.predict(ex.left, ex.right)[0] == ex.label for ex in examples)
        assert correct / len(examples) >= 0.8
